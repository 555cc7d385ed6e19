// Atlas JSON documents (kinetobench atlas --format json): lattice values,
// iso-curve polylines, boundary arcs. The overlay refuses documents whose
// model hash differs from the live session's.

import { ModeText } from "./protocol.js";

export interface AtlasDoc {
  schema: number;
  kind: string;
  model_hash: string;
  field: string;
  space: string;
  mode: ModeText;
  domain: [number, number, number, number];
  nx: number;
  ny: number;
  xs: number[];
  ys: number[];
  values: (number | null)[][]; // [ix][iy], null where masked
  mask: boolean[][];
  levels: number[];
  curves: Record<string, [number, number][][]>;
  boundary: [number, number][][];
}

export class AtlasMismatchError extends Error {}

export function parseAtlas(text: string, sessionModelHash: string | null): AtlasDoc {
  const doc = JSON.parse(text) as AtlasDoc;
  if (doc.schema !== 1 || doc.kind !== "atlas") {
    throw new Error("not an atlas document (expected schema 1, kind 'atlas')");
  }
  if (sessionModelHash !== null && doc.model_hash !== sessionModelHash) {
    throw new AtlasMismatchError(
      `atlas was computed for model ${doc.model_hash}, session runs ${sessionModelHash}`,
    );
  }
  return doc;
}

/** Fixed colormap shared with the exporters: 0 -> red, 1 -> blue. */
export function valueColor(v: number): [number, number, number, number] {
  const t = Math.min(1, Math.max(0, v));
  return [Math.round(255 * (1 - t)), 0, Math.round(255 * t), 255];
}

/** RGBA pixel buffer of the lattice, row 0 at the top (max y). */
export function heatmapPixels(doc: AtlasDoc): Uint8ClampedArray<ArrayBuffer> {
  const { nx, ny } = doc;
  const out = new Uint8ClampedArray(new ArrayBuffer(nx * ny * 4));
  for (let iy = 0; iy < ny; iy++) {
    const row = ny - 1 - iy; // lattice y ascends, image rows descend
    for (let ix = 0; ix < nx; ix++) {
      const v = doc.values[ix][row];
      const o = (iy * nx + ix) * 4;
      if (v === null || !doc.mask[ix][row]) {
        out[o + 3] = 0;
      } else {
        const [r, g, b, a] = valueColor(v);
        out[o] = r;
        out[o + 1] = g;
        out[o + 2] = b;
        out[o + 3] = a;
      }
    }
  }
  return out;
}

/** Per-mode store backing the mode switcher. */
export class AtlasLibrary {
  private byMode = new Map<ModeText, AtlasDoc>();

  add(doc: AtlasDoc): void {
    this.byMode.set(doc.mode, doc);
  }

  get(mode: ModeText): AtlasDoc | undefined {
    return this.byMode.get(mode);
  }

  modes(): ModeText[] {
    return [...this.byMode.keys()];
  }
}
