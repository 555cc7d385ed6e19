// Canvas 2D rendering: atlas layers underneath, linkage and force on top.
// The force is "felt" visually: an arrow at the end point plus a cursor
// ghost displaced opposite the force, scaled by |f| / f_peak.

import { AtlasDoc, heatmapPixels } from "./atlas.js";
import { ModelDoc, SnapshotFrame } from "./protocol.js";
import { ViewState } from "./view.js";

const LAG_PIXELS = 40; // cursor ghost offset at full envelope force

export class Renderer {
  private ctx: CanvasRenderingContext2D;
  private heatmapCanvas: HTMLCanvasElement | null = null;
  private heatmapFor: AtlasDoc | null = null;

  constructor(private canvas: HTMLCanvasElement, public fPeak = 6.4) {
    const ctx = canvas.getContext("2d");
    if (!ctx) throw new Error("canvas 2d context unavailable");
    this.ctx = ctx;
  }

  private line(view: ViewState, a: [number, number], b: [number, number]): void {
    const [ax, ay] = view.worldToScreen(a[0], a[1]);
    const [bx, by] = view.worldToScreen(b[0], b[1]);
    this.ctx.beginPath();
    this.ctx.moveTo(ax, ay);
    this.ctx.lineTo(bx, by);
    this.ctx.stroke();
  }

  private dot(view: ViewState, p: [number, number], r: number, fill: string): void {
    const [x, y] = view.worldToScreen(p[0], p[1]);
    this.ctx.beginPath();
    this.ctx.arc(x, y, r, 0, 2 * Math.PI);
    this.ctx.fillStyle = fill;
    this.ctx.fill();
  }

  private ensureHeatmap(doc: AtlasDoc): HTMLCanvasElement {
    if (this.heatmapFor === doc && this.heatmapCanvas) return this.heatmapCanvas;
    const off = document.createElement("canvas");
    off.width = doc.nx;
    off.height = doc.ny;
    const octx = off.getContext("2d")!;
    octx.putImageData(new ImageData(heatmapPixels(doc), doc.nx, doc.ny), 0, 0);
    this.heatmapCanvas = off;
    this.heatmapFor = doc;
    return off;
  }

  private drawAtlas(view: ViewState, doc: AtlasDoc): void {
    const [xmin, xmax, ymin, ymax] = doc.domain;
    if (view.overlays.heatmap) {
      const img = this.ensureHeatmap(doc);
      const [sx, sy] = view.worldToScreen(xmin, ymax);
      const [ex, ey] = view.worldToScreen(xmax, ymin);
      this.ctx.save();
      this.ctx.globalAlpha = 0.45;
      this.ctx.imageSmoothingEnabled = false;
      this.ctx.drawImage(img, sx, sy, ex - sx, ey - sy);
      this.ctx.restore();
    }
    if (view.overlays.isocurves) {
      this.ctx.strokeStyle = "#222";
      this.ctx.lineWidth = 1;
      for (const level of Object.keys(doc.curves).sort()) {
        for (const chain of doc.curves[level]) {
          this.polyline(view, chain);
        }
      }
    }
    if (view.overlays.boundary) {
      this.ctx.strokeStyle = "#555";
      this.ctx.lineWidth = 2;
      for (const poly of doc.boundary) this.polyline(view, poly);
    }
  }

  private polyline(view: ViewState, pts: [number, number][]): void {
    if (pts.length < 2) return;
    this.ctx.beginPath();
    const [x0, y0] = view.worldToScreen(pts[0][0], pts[0][1]);
    this.ctx.moveTo(x0, y0);
    for (let i = 1; i < pts.length; i++) {
      const [x, y] = view.worldToScreen(pts[i][0], pts[i][1]);
      this.ctx.lineTo(x, y);
    }
    this.ctx.stroke();
  }

  draw(
    view: ViewState,
    model: ModelDoc | null,
    snap: SnapshotFrame | null,
    atlas: AtlasDoc | null,
  ): void {
    const { ctx, canvas } = this;
    ctx.setTransform(1, 0, 0, 1, 0, 0);
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    ctx.fillStyle = "#fafafa";
    ctx.fillRect(0, 0, canvas.width, canvas.height);

    if (atlas) this.drawAtlas(view, atlas);

    if (model && view.overlays.linkage) {
      this.dot(view, model.base_a, 5, "#333");
      this.dot(view, model.base_b, 5, "#333");
    }

    if (snap && snap.posture && model && view.overlays.linkage) {
      const post = snap.posture;
      const aSingular = snap.flags.includes("A_singular");
      ctx.strokeStyle = aSingular ? "#d32f2f" : "#1565c0";
      ctx.lineWidth = 3;
      this.line(view, model.base_a, post.c);
      this.line(view, model.base_b, post.d);
      this.line(view, post.c, post.p);
      this.line(view, post.d, post.p);
      this.dot(view, post.c, 4, "#666");
      this.dot(view, post.d, 4, "#666");
      this.dot(view, post.p, 6, snap.out_of_workspace ? "#d32f2f" : "#1565c0");
    }

    if (snap && view.overlays.force) {
      const [fx, fy] = snap.force.f;
      const mag = Math.hypot(fx, fy);
      const anchor = snap.posture ? snap.posture.p : snap.target;
      const [px, py] = view.worldToScreen(anchor[0], anchor[1]);
      if (mag > 1e-9) {
        const scale = (80 * mag) / this.fPeak; // pixels at the arrow tip
        const ux = fx / mag;
        const uy = fy / mag;
        ctx.strokeStyle = snap.force.clamped ? "#d32f2f" : "#e65100";
        ctx.lineWidth = 3;
        ctx.beginPath();
        ctx.moveTo(px, py);
        const tipX = px + ux * scale;
        const tipY = py - uy * scale;
        ctx.lineTo(tipX, tipY);
        ctx.stroke();
        ctx.beginPath();
        ctx.arc(tipX, tipY, 3, 0, 2 * Math.PI);
        ctx.fillStyle = ctx.strokeStyle;
        ctx.fill();
        // cursor ghost displaced against the force: the visual analogue of
        // the device pushing the hand back
        const lag = (LAG_PIXELS * Math.min(mag, this.fPeak)) / this.fPeak;
        ctx.strokeStyle = "rgba(0,0,0,0.5)";
        ctx.lineWidth = 1.5;
        ctx.beginPath();
        ctx.arc(px - ux * lag, py + uy * lag, 8, 0, 2 * Math.PI);
        ctx.stroke();
      }
      // target marker
      const [tx, ty] = view.worldToScreen(snap.target[0], snap.target[1]);
      ctx.strokeStyle = "#999";
      ctx.lineWidth = 1;
      ctx.beginPath();
      ctx.moveTo(tx - 6, ty);
      ctx.lineTo(tx + 6, ty);
      ctx.moveTo(tx, ty - 6);
      ctx.lineTo(tx, ty + 6);
      ctx.stroke();
    }
  }
}
