// Drag-to-pointer pipeline: screen position -> workspace target -> raw
// device coordinates, inverting the server's sensitivity map so the target
// lands where the user points. Messages are sequenced and throttled to at
// most one per display frame.

import { pointerFrame } from "./protocol.js";

export interface SensitivityConfig {
  sensitivity: string; // rough | medium | fine | screen
  scaleFactors: Record<string, number>;
  viewZoom: number; // server-side zoom used by the screen sensitivity
}

/** The server maps raw * factor -> workspace; this is that factor. */
export function sensitivityFactor(cfg: SensitivityConfig): number {
  if (cfg.sensitivity === "screen") {
    if (cfg.viewZoom <= 0) throw new Error("view_zoom must be > 0 in screen mode");
    return cfg.viewZoom;
  }
  const f = cfg.scaleFactors[cfg.sensitivity];
  if (!(f > 0)) throw new Error(`unknown sensitivity ${cfg.sensitivity}`);
  return f;
}

/** Workspace target -> raw device units (what goes on the wire). */
export function workspaceToRaw(
  cfg: SensitivityConfig,
  wx: number,
  wy: number,
): [number, number] {
  const f = sensitivityFactor(cfg);
  return [wx / f, wy / f];
}

export class DragController {
  private seq = 0;
  private pending: [number, number] | null = null;
  private frameScheduled = false;
  dragging = false;

  constructor(
    private send: (text: string) => boolean,
    private now: () => number = () => performance.now(),
    private requestFrame: (cb: () => void) => void = (cb) =>
      requestAnimationFrame(() => cb()),
  ) {}

  get sentCount(): number {
    return this.seq;
  }

  /** Queue a workspace-space target; flushed once per display frame. */
  target(cfg: SensitivityConfig, wx: number, wy: number): void {
    this.pending = workspaceToRaw(cfg, wx, wy);
    if (!this.frameScheduled) {
      this.frameScheduled = true;
      this.requestFrame(() => this.flush());
    }
  }

  private flush(): void {
    this.frameScheduled = false;
    if (this.pending === null) return;
    const [x, y] = this.pending;
    this.pending = null;
    this.seq += 1;
    const t = Math.round(this.now() * 1e6); // ms -> ns
    this.send(pointerFrame(this.seq, t, x, y));
  }
}
