// Protocol v1 frames (docs/PROTOCOL.md). The UI never computes kinematics:
// everything it renders comes out of these documents.

export const PROTOCOL_VERSION = 1;

export type ModeText = "++" | "+-" | "-+" | "--";
export const ALL_MODES: ModeText[] = ["++", "+-", "-+", "--"];

export interface ModelDoc {
  schema: number;
  kind: string;
  lengths: { L0: number; L1: number; L2: number; L3: number; L4: number };
  base_a: [number, number];
  base_b: [number, number];
  limits: Record<string, { min: number; max: number; threshold: number }>;
}

export interface HelloFrame {
  kind: "hello";
  version: number;
  session_config: {
    mode: ModeText;
    sensitivity: string;
    scale_factors: Record<string, number>;
    view_zoom: number;
    rates: { haptic_hz: number; analysis_hz: number; broadcast_hz: number };
    force_decimation: number;
    home: [number, number];
  };
  model: ModelDoc;
  model_hash: string;
}

export interface PostureDoc {
  theta1: number;
  theta2: number;
  theta3: number;
  theta4: number;
  p: [number, number];
  c: [number, number];
  d: [number, number];
  mode: ModeText | null;
  on_boundary: boolean;
}

export interface IndicesDoc {
  alpha1: number;
  alpha2: number;
  beta1: number;
  beta2: number;
  kappa_a: number | null;
  kappa_b: number | null;
  inv_kappa_a: number;
  inv_kappa_b: number;
}

export interface SnapshotFrame {
  kind: "snapshot";
  tick: number;
  target: [number, number];
  out_of_workspace: boolean;
  posture: PostureDoc | null;
  indices: IndicesDoc | null;
  class: string | null;
  flags: string[];
  boundary_dist: number;
  velocity: [number, number];
  force: {
    f: [number, number, number];
    components: Record<string, [number, number]>;
    clamped: boolean;
  };
}

export interface ErrorFrame {
  kind: "error";
  code: string;
  reason: string;
}

export type ServerFrame = HelloFrame | SnapshotFrame | ErrorFrame;

export function clientHello(): string {
  return JSON.stringify({ kind: "hello", version: PROTOCOL_VERSION });
}

export function pointerFrame(seq: number, t: number, x: number, y: number): string {
  return JSON.stringify({ kind: "pointer", seq, t, x, y });
}

export function setModeFrame(mode: ModeText): string {
  return JSON.stringify({ kind: "set_mode", s1: mode[0], s2: mode[1] });
}

export function setParamsFrame(params: Record<string, unknown>): string {
  return JSON.stringify({ kind: "set_params", params });
}

/** Parse one incoming text frame; throws on anything outside protocol v1. */
export function parseServerFrame(text: string): ServerFrame {
  let doc: unknown;
  try {
    doc = JSON.parse(text);
  } catch {
    throw new Error("frame is not valid JSON");
  }
  if (typeof doc !== "object" || doc === null || !("kind" in doc)) {
    throw new Error("frame has no kind");
  }
  const kind = (doc as { kind: unknown }).kind;
  if (kind === "hello") {
    const hello = doc as HelloFrame;
    if (hello.version !== PROTOCOL_VERSION) {
      throw new Error(`server speaks protocol ${hello.version}, expected ${PROTOCOL_VERSION}`);
    }
    if (!hello.model || !hello.model_hash) {
      throw new Error("hello frame lacks model information");
    }
    return hello;
  }
  if (kind === "snapshot") {
    const snap = doc as SnapshotFrame;
    if (typeof snap.tick !== "number" || !snap.force || !Array.isArray(snap.force.f)) {
      throw new Error("snapshot frame is incomplete");
    }
    return snap;
  }
  if (kind === "error") {
    return doc as ErrorFrame;
  }
  throw new Error(`unknown frame kind ${String(kind)}`);
}
