"""Real-time session engine: pointer-to-force pipeline and deterministic replay.

Three periodic activities run at configurable rates (haptic >= analysis >=
broadcast).  The haptic tick is the core: map the latest pointer sample into
workspace coordinates, solve IK in the current working mode, evaluate the
conditioning indices and every force law, and compose the clamped force
command.  Every tick produces a snapshot even when IK fails (the last valid
posture is retained and a pull-back force is emitted), so downstream loops
never starve.

Replay mode drives the same engine from a recorded pointer trace on a
virtual clock (tick k at k * period), which makes the resulting snapshot log
bitwise reproducible; live serving (kinetobench.server) wraps the engine in
wall-clock scheduling instead.

Pointer input uses latest-value semantics: a tick consumes the most recent
sample, never a queue, so stale input degrades smoothly and the tick budget
stays flat.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Iterator, TextIO

import yaml

from kinetobench.conditioning import (
    Classification,
    FiveBarIndices,
    classify_posture,
    indices_from_angles,
)
from kinetobench.fivebar import (
    PostureState,
    WorkingMode,
    boundary_distance,
    inverse_kinematics,
    velocity_matrices,
)
from kinetobench.forcefield import (
    DEFAULT_C_MAX,
    DEFAULT_S_FULL,
    DEFAULT_S_ZERO,
    ForceCommand,
    ForceEnvelope,
    boundary_force,
    compose_force,
    conditioning_force,
    joint_limit_forces,
    viscosity_coefficient,
)
from kinetobench.model import FiveBarModel, resolve_model

PROTOCOL_VERSION = 1

SENSITIVITIES = ("rough", "medium", "fine", "screen")
DEFAULT_SCALE_FACTORS = {"rough": 2.0, "medium": 1.0, "fine": 0.5}

CLASSIFY_TOL = 1e-6


@dataclass(frozen=True)
class ForceParams:
    """Tunable force-law parameters (workbench defaults, all configurable)."""

    s_full: float = DEFAULT_S_FULL
    s_zero: float = DEFAULT_S_ZERO
    conditioning_f_max: float = 6.4
    joint_limit_f_max: float = 6.4
    boundary_delta: float = 0.5
    boundary_f_max: float = 6.4
    viscosity_max: float = DEFAULT_C_MAX
    clamp_mode: str = "peak"  # "peak" | "continuous"


@dataclass(frozen=True)
class SessionConfig:
    model: FiveBarModel
    mode: WorkingMode = WorkingMode(-1, 1)
    sensitivity: str = "fine"
    scale_factors: dict = field(default_factory=lambda: dict(DEFAULT_SCALE_FACTORS))
    view_zoom: float = 1.0
    haptic_hz: int = 1000
    analysis_hz: int = 100
    broadcast_hz: int = 60
    home: tuple[float, float] | None = None
    force: ForceParams = field(default_factory=ForceParams)
    envelope: ForceEnvelope = field(default_factory=ForceEnvelope)

    def __post_init__(self):
        if not self.haptic_hz >= self.analysis_hz >= self.broadcast_hz >= 1:
            raise ValueError(
                "rates must satisfy haptic_hz >= analysis_hz >= broadcast_hz >= 1, got "
                f"{self.haptic_hz}/{self.analysis_hz}/{self.broadcast_hz}"
            )
        if self.sensitivity not in SENSITIVITIES:
            raise ValueError(f"sensitivity must be one of {SENSITIVITIES}")
        for name in ("rough", "medium", "fine"):
            if not self.scale_factors.get(name, 0.0) > 0.0:
                raise ValueError(f"scale_factors.{name} must be > 0")
        if self.home is None:
            ax, ay = self.model.base_a
            bx, by = self.model.base_b
            object.__setattr__(
                self, "home",
                ((ax + bx) / 2.0, (ay + by) / 2.0 + 0.6 * self.model.l1),
            )


@dataclass(frozen=True)
class StateSnapshot:
    """One haptic tick's worth of state; force is derived from these indices."""

    tick: int
    target: tuple[float, float]
    posture: PostureState | None  # last valid posture when out of workspace
    out_of_workspace: bool
    indices: FiveBarIndices | None
    classification: Classification | None
    boundary_dist: float
    velocity: tuple[float, float]
    force: ForceCommand


def sensitivity_map(
    raw: tuple[float, float],
    sensitivity: str,
    view_zoom: float = 1.0,
    scale_factors: dict | None = None,
) -> tuple[float, float]:
    """Device-units to workspace-units: fixed scale, or zoom-proportional.

    rough/medium/fine apply their configured factor; screen multiplies by the
    current view zoom so pointer motion tracks what the user sees.  Linear
    and origin-preserving in all modes.
    """
    factors = scale_factors if scale_factors is not None else DEFAULT_SCALE_FACTORS
    if sensitivity == "screen":
        if not view_zoom > 0.0:
            raise ValueError(f"view_zoom must be > 0 in screen mode, got {view_zoom}")
        f = view_zoom
    else:
        try:
            f = factors[sensitivity]
        except KeyError:
            raise ValueError(f"unknown sensitivity {sensitivity!r}") from None
    return (raw[0] * f, raw[1] * f)


class HapticEngine:
    """Stateful tick pipeline; one instance per session, single-writer.

    Working mode changes only through set_mode (crossing a singularity never
    flips it implicitly).  The per-tick path is scalar math only; nothing
    here allocates beyond the snapshot itself.
    """

    def __init__(self, config: SessionConfig):
        self.config = config
        self.mode = config.mode
        self.tick_index = 0
        self._prev_target: tuple[float, float] | None = None
        self._last_posture: PostureState | None = None
        self._last_cond_dir: tuple[float, float] = (0.0, 0.0)
        home = config.home
        posture = inverse_kinematics(config.model, home, self.mode)
        if posture is None:
            raise ValueError(f"home point {home} is outside the workspace")
        self._last_posture = posture

    def set_mode(self, mode: WorkingMode) -> None:
        self.mode = mode

    def update_params(self, **kwargs) -> None:
        """Adjust force parameters / sensitivity / zoom between ticks."""
        force_fields = set(ForceParams.__dataclass_fields__)
        force_updates = {k: kwargs.pop(k) for k in list(kwargs) if k in force_fields}
        if force_updates:
            self.config = replace(self.config, force=replace(self.config.force, **force_updates))
        if kwargs:
            self.config = replace(self.config, **kwargs)

    def _conditioning_scalar(self, p: tuple[float, float]) -> float | None:
        """min(1/kappa_A, 1/kappa_B) at p in the current mode; None outside."""
        posture = inverse_kinematics(self.config.model, p, self.mode)
        if posture is None:
            return None
        idx = indices_from_angles(posture.theta1, posture.theta2, posture.theta3, posture.theta4)
        return min(idx.inv_kappa_a, idx.inv_kappa_b)

    def _conditioning_direction(self, p: tuple[float, float]) -> tuple[float, float]:
        """Unit ascent direction of the conditioning scalar (push away from trouble).

        Central differences with one-sided fallback near the workspace edge;
        when the gradient degenerates (on a singular locus the scalar has a
        crease) the last healthy direction is reused.
        """
        h = 1e-6 * self.config.model.l1
        grad = [0.0, 0.0]
        for axis in (0, 1):
            lo = list(p)
            hi = list(p)
            lo[axis] -= h
            hi[axis] += h
            g_lo = self._conditioning_scalar(tuple(lo))
            g_hi = self._conditioning_scalar(tuple(hi))
            if g_lo is None and g_hi is None:
                grad[axis] = 0.0
            elif g_lo is None:
                g_at = self._conditioning_scalar(p)
                grad[axis] = 0.0 if g_at is None else (g_hi - g_at) / h
            elif g_hi is None:
                g_at = self._conditioning_scalar(p)
                grad[axis] = 0.0 if g_at is None else (g_at - g_lo) / h
            else:
                grad[axis] = (g_hi - g_lo) / (2.0 * h)
        norm = math.hypot(grad[0], grad[1])
        if norm < 1e-9:
            return self._last_cond_dir
        direction = (grad[0] / norm, grad[1] / norm)
        self._last_cond_dir = direction
        return direction

    def _joint_limit_vector(self, posture: PostureState, torques: tuple[float, float]):
        """Cartesian image of joint-space limit forces through (B^-1 A)^T.

        Rows of B^-1 A are the gradients of theta_i with respect to p, so the
        power-consistent Cartesian force is A^T B^-1 tau.  B is diagonal;
        entries at rounding level (workspace edge: no finite mapping exists)
        are capped so the envelope clamp can take over.
        """
        mats = velocity_matrices(self.config.model, posture)
        cap = 1e12
        fx = fy = 0.0
        for i, tau in enumerate(torques):
            if tau == 0.0:
                continue
            b_ii = mats.b[i, i]
            if abs(b_ii) > 1e-15:
                scale_i = max(-cap, min(cap, tau / b_ii))
            else:
                scale_i = math.copysign(cap, tau)
            fx += scale_i * mats.a[i, 0]
            fy += scale_i * mats.a[i, 1]
        return (fx, fy)

    def tick(self, raw_pointer: tuple[float, float] | None) -> StateSnapshot:
        """One haptic period: always returns a snapshot, even on IK failure."""
        cfg = self.config
        fp = cfg.force
        if raw_pointer is None:
            target = cfg.home
        else:
            target = sensitivity_map(
                raw_pointer, cfg.sensitivity, cfg.view_zoom, cfg.scale_factors
            )
        period = 1.0 / cfg.haptic_hz
        if self._prev_target is None:
            velocity = (0.0, 0.0)
        else:
            velocity = (
                (target[0] - self._prev_target[0]) / period,
                (target[1] - self._prev_target[1]) / period,
            )

        posture = inverse_kinematics(cfg.model, target, self.mode)
        b_dist = boundary_distance(cfg.model, target)
        parts: dict[str, tuple[float, float]] = {}

        if posture is not None:
            indices = indices_from_angles(
                posture.theta1, posture.theta2, posture.theta3, posture.theta4
            )
            classification = classify_posture(indices, CLASSIFY_TOL)
            cond_scalar = min(indices.inv_kappa_a, indices.inv_kappa_b)
            magnitude = conditioning_force(
                cond_scalar, fp.s_full, fp.s_zero, fp.conditioning_f_max
            )
            if magnitude > 0.0:
                direction = self._conditioning_direction(target)
                parts["conditioning"] = (magnitude * direction[0], magnitude * direction[1])
            else:
                parts["conditioning"] = (0.0, 0.0)
            torques = joint_limit_forces(
                (posture.theta1, posture.theta2), cfg.model.limits, fp.joint_limit_f_max
            )
            if torques[0] != 0.0 or torques[1] != 0.0:
                parts["joint_limit"] = self._joint_limit_vector(posture, torques)
            else:
                parts["joint_limit"] = (0.0, 0.0)
            viscosity = viscosity_coefficient(cond_scalar, fp.s_full, fp.s_zero, fp.viscosity_max)
            out = False
            self._last_posture = posture
        else:
            indices = None
            classification = None
            viscosity = 0.0
            parts["conditioning"] = (0.0, 0.0)
            parts["joint_limit"] = (0.0, 0.0)
            out = True

        parts["boundary"] = boundary_force(cfg.model, target, fp.boundary_delta, fp.boundary_f_max)
        force = compose_force(parts, fp.clamp_mode, cfg.envelope, velocity, viscosity)

        snapshot = StateSnapshot(
            tick=self.tick_index,
            target=target,
            posture=posture if posture is not None else self._last_posture,
            out_of_workspace=out,
            indices=indices,
            classification=classification,
            boundary_dist=b_dist,
            velocity=velocity,
            force=force,
        )
        self.tick_index += 1
        self._prev_target = target
        return snapshot


def _finite_or_none(x: float) -> float | None:
    return x if math.isfinite(x) else None


def snapshot_to_dict(snap: StateSnapshot) -> dict:
    """JSON-safe snapshot document (protocol v1 'snapshot' frame body).

    Infinite condition numbers map to null; 1/kappa values are always finite.
    The force vector reserves a third component (zero for planar sessions).
    """
    posture = snap.posture
    indices = snap.indices
    return {
        "kind": "snapshot",
        "tick": snap.tick,
        "target": [snap.target[0], snap.target[1]],
        "out_of_workspace": snap.out_of_workspace,
        "posture": None if posture is None else {
            "theta1": posture.theta1,
            "theta2": posture.theta2,
            "theta3": posture.theta3,
            "theta4": posture.theta4,
            "p": [posture.p[0], posture.p[1]],
            "c": [posture.c[0], posture.c[1]],
            "d": [posture.d[0], posture.d[1]],
            "mode": None if posture.mode is None else str(posture.mode),
            "on_boundary": posture.on_boundary,
        },
        "indices": None if indices is None else {
            "alpha1": indices.alpha1,
            "alpha2": indices.alpha2,
            "beta1": indices.beta1,
            "beta2": indices.beta2,
            "kappa_a": _finite_or_none(indices.kappa_a),
            "kappa_b": _finite_or_none(indices.kappa_b),
            "inv_kappa_a": indices.inv_kappa_a,
            "inv_kappa_b": indices.inv_kappa_b,
        },
        "class": None if snap.classification is None else snap.classification.kind,
        "flags": [] if snap.classification is None else sorted(snap.classification.flags),
        "boundary_dist": snap.boundary_dist,
        "velocity": [snap.velocity[0], snap.velocity[1]],
        "force": {
            "f": [snap.force.f[0], snap.force.f[1], 0.0],
            "components": {k: [v[0], v[1]] for k, v in sorted(snap.force.components.items())},
            "clamped": snap.force.clamped,
        },
    }


def encode_snapshot(snap: StateSnapshot) -> str:
    """Canonical single-line JSON encoding (bitwise stable for a given snapshot)."""
    return json.dumps(snapshot_to_dict(snap), sort_keys=True, separators=(",", ":"),
                      allow_nan=False)


class TraceError(ValueError):
    """Malformed pointer trace line (message carries the 1-based line number)."""


def parse_trace_line(line: str, lineno: int, prev_seq: int | None) -> dict:
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        raise TraceError(f"trace line {lineno}: invalid JSON ({e})") from e
    if not isinstance(msg, dict) or msg.get("kind", "pointer") != "pointer":
        raise TraceError(f"trace line {lineno}: expected a pointer message")
    try:
        seq = int(msg["seq"])
        t = int(msg["t"])
        x = float(msg["x"])
        y = float(msg["y"])
    except (KeyError, TypeError, ValueError) as e:
        raise TraceError(f"trace line {lineno}: needs integer seq/t and numeric x/y ({e})") from e
    if prev_seq is not None and seq <= prev_seq:
        raise TraceError(f"trace line {lineno}: seq {seq} not strictly increasing")
    return {"seq": seq, "t": t, "x": x, "y": y}


def replay(config: SessionConfig, trace_lines: Iterable[str]) -> Iterator[StateSnapshot]:
    """Drive the engine through a trace on a virtual clock; fully deterministic.

    Tick k fires at k * period (period from haptic_hz); each tick consumes
    the most recent sample whose timestamp is due.  Replay ends once every
    sample has been consumed (empty trace: no ticks).
    """
    samples = []
    prev_seq = None
    for lineno, line in enumerate(trace_lines, start=1):
        line = line.strip()
        if not line:
            continue
        msg = parse_trace_line(line, lineno, prev_seq)
        if samples and msg["t"] < samples[-1]["t"]:
            raise TraceError(f"trace line {lineno}: timestamp moves backwards")
        prev_seq = msg["seq"]
        samples.append(msg)
    if not samples:
        return

    engine = HapticEngine(config)
    period_ns = round(1e9 / config.haptic_hz)
    n_ticks = -(-samples[-1]["t"] // period_ns) + 1  # last tick covers the final sample
    cursor = 0
    latest: tuple[float, float] | None = None
    for k in range(int(n_ticks)):
        now = k * period_ns
        while cursor < len(samples) and samples[cursor]["t"] <= now:
            latest = (samples[cursor]["x"], samples[cursor]["y"])
            cursor += 1
        yield engine.tick(latest)


def replay_to_log(config: SessionConfig, trace_path: str | Path, out: str | Path | TextIO) -> int:
    """Replay a trace file into a snapshot log (one JSON line per tick)."""
    trace_path = Path(trace_path)
    lines = trace_path.read_text().splitlines()
    count = 0
    if hasattr(out, "write"):
        handle = out
        close = False
    else:
        handle = open(out, "w")
        close = True
    try:
        for snap in replay(config, lines):
            handle.write(encode_snapshot(snap))
            handle.write("\n")
            count += 1
    finally:
        if close:
            handle.close()
    return count


def _session_doc_to_config(doc: dict, base_dir: Path | None = None) -> SessionConfig:
    model_ref = doc.get("model", "fivebar_6_8_5")
    if base_dir is not None and (base_dir / str(model_ref)).exists():
        model_ref = base_dir / str(model_ref)
    model = resolve_model(model_ref)
    if not isinstance(model, FiveBarModel):
        raise ValueError("session model must be a five-bar")
    rates = doc.get("rates", {})
    force_doc = doc.get("force", {})
    env_doc = force_doc.get("envelope", {})
    params = {k: force_doc[k] for k in ForceParams.__dataclass_fields__ if k in force_doc}
    home = doc.get("home")
    return SessionConfig(
        model=model,
        mode=WorkingMode.parse(str(doc.get("mode", "-+"))),
        sensitivity=doc.get("sensitivity", "fine"),
        scale_factors={**DEFAULT_SCALE_FACTORS, **doc.get("scale_factors", {})},
        view_zoom=float(doc.get("view_zoom", 1.0)),
        haptic_hz=int(rates.get("haptic_hz", 1000)),
        analysis_hz=int(rates.get("analysis_hz", 100)),
        broadcast_hz=int(rates.get("broadcast_hz", 60)),
        home=None if home is None else (float(home[0]), float(home[1])),
        force=ForceParams(**params),
        envelope=ForceEnvelope(
            f_peak=float(env_doc.get("f_peak", 6.4)),
            f_continuous=float(env_doc.get("f_continuous", 1.4)),
            position_resolution=float(env_doc.get("position_resolution", 2e-5)),
        ),
    )


def load_session_config(path: str | Path) -> SessionConfig:
    path = Path(path)
    doc = yaml.safe_load(path.read_text())
    if not isinstance(doc, dict):
        raise ValueError(f"{path}: session config must be a mapping")
    if doc.get("schema") != 1:
        raise ValueError(f"{path}: schema must be 1")
    return _session_doc_to_config(doc, base_dir=path.parent)
