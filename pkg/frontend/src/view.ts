// Pan/zoom view state and the workspace <-> screen transforms.
// zoom is workspace units per screen pixel; screen y grows downward.

export interface OverlayToggles {
  heatmap: boolean;
  isocurves: boolean;
  boundary: boolean;
  force: boolean;
  linkage: boolean;
}

export class ViewState {
  centerX: number;
  centerY: number;
  zoom: number; // workspace units per pixel, > 0
  width: number;
  height: number;
  overlays: OverlayToggles = {
    heatmap: true,
    isocurves: true,
    boundary: true,
    force: true,
    linkage: true,
  };

  constructor(width: number, height: number, centerX = 0, centerY = 0, zoom = 0.05) {
    if (zoom <= 0) throw new Error("zoom must be > 0");
    this.width = width;
    this.height = height;
    this.centerX = centerX;
    this.centerY = centerY;
    this.zoom = zoom;
  }

  worldToScreen(wx: number, wy: number): [number, number] {
    return [
      this.width / 2 + (wx - this.centerX) / this.zoom,
      this.height / 2 - (wy - this.centerY) / this.zoom,
    ];
  }

  screenToWorld(sx: number, sy: number): [number, number] {
    return [
      this.centerX + (sx - this.width / 2) * this.zoom,
      this.centerY - (sy - this.height / 2) * this.zoom,
    ];
  }

  /** Zoom by a factor keeping the world point under (sx, sy) fixed. */
  zoomAt(sx: number, sy: number, factor: number): void {
    if (factor <= 0) throw new Error("zoom factor must be > 0");
    const [wx, wy] = this.screenToWorld(sx, sy);
    this.zoom = Math.min(10, Math.max(1e-4, this.zoom * factor));
    const [sx2, sy2] = this.worldToScreen(wx, wy);
    this.centerX += (sx2 - sx) * this.zoom;
    this.centerY -= (sy2 - sy) * this.zoom;
  }

  panByPixels(dx: number, dy: number): void {
    this.centerX -= dx * this.zoom;
    this.centerY += dy * this.zoom;
  }

  /** Frame a world-space rectangle with a margin factor. */
  fit(xmin: number, xmax: number, ymin: number, ymax: number, margin = 1.1): void {
    this.centerX = (xmin + xmax) / 2;
    this.centerY = (ymin + ymax) / 2;
    this.zoom = Math.max(
      ((xmax - xmin) * margin) / this.width,
      ((ymax - ymin) * margin) / this.height,
    );
  }
}
