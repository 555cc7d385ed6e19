"""Force-feedback laws: joint-limit ramps, conditioning force, boundary
repulsion, viscous drag, and envelope clamping.

All laws are clamped piecewise-linear ramps (continuous everywhere).  The
drive scalars differ:

- joint limits ramp on the joint coordinate inside a security band of width
  delta at each end of the interval;
- the conditioning force ramps on 1/kappa in [0, 1]: full magnitude at or
  below s_full, zero at or above s_zero;
- the boundary force ramps on the signed distance to the workspace edge and
  turns into a full-magnitude inward pull-back outside.

The default thresholds (s_full = 0.1, s_zero = 0.3, c_max = 20 N*s/m) are
workbench configuration values, not measured constants; override them in the
session config.  The envelope defaults are the Phantom-desktop-class figures
6.4 N peak / 1.4 N continuous.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from kinetobench.model import FiveBarModel, JointLimits

DEFAULT_S_FULL = 0.1
DEFAULT_S_ZERO = 0.3
DEFAULT_C_MAX = 20.0  # N*s/m


@dataclass(frozen=True)
class ForceEnvelope:
    """Output capability of the rendering device."""

    f_peak: float = 6.4  # N
    f_continuous: float = 1.4  # N
    position_resolution: float = 2e-5  # m

    def __post_init__(self):
        if not 0.0 < self.f_continuous <= self.f_peak:
            raise ValueError(
                f"envelope requires 0 < f_continuous ({self.f_continuous}) "
                f"<= f_peak ({self.f_peak})"
            )

    def bound(self, mode: str) -> float:
        if mode == "peak":
            return self.f_peak
        if mode == "continuous":
            return self.f_continuous
        raise ValueError(f"clamp mode must be 'peak' or 'continuous', got {mode!r}")


@dataclass(frozen=True)
class RampLaw:
    """Linear ramp reaching f_max over a band of width threshold."""

    threshold: float
    f_max: float
    shape: str = "linear"

    def __post_init__(self):
        if not self.threshold > 0.0:
            raise ValueError(f"ramp threshold must be > 0, got {self.threshold}")
        if not self.f_max > 0.0:
            raise ValueError(f"ramp f_max must be > 0, got {self.f_max}")
        if self.shape != "linear":
            raise ValueError(f"only linear ramps are supported, got {self.shape!r}")


@dataclass(frozen=True)
class ForceCommand:
    """Composed force with per-source breakdown.

    f is the clamped sum of the components; clamped records whether the
    envelope bound actually bit.
    """

    f: tuple[float, float]
    components: dict[str, tuple[float, float]] = field(default_factory=dict)
    clamped: bool = False


def joint_limit_force(q: float, lo: float, hi: float, delta: float, f_max: float) -> float:
    """Signed restoring force along the joint axis near its limits.

    Zero on [lo + delta, hi - delta]; ramps linearly to f_max at each limit
    and stays clamped there beyond.  Positive pushes toward +q (i.e. away
    from the lower limit); the upper-limit branch is negative.  delta = 0
    degenerates to a hard wall: zero inside the interval, f_max outside.
    """
    if q <= lo:
        return f_max
    if q >= hi:
        return -f_max
    if delta <= 0.0:
        return 0.0
    if q < lo + delta:
        return f_max * (lo + delta - q) / delta
    if q > hi - delta:
        return -f_max * (q - (hi - delta)) / delta
    return 0.0


def joint_limit_forces(q: tuple[float, ...], limits: JointLimits, f_max: float) -> tuple[float, ...]:
    """Per-joint limit forces using each joint's own security threshold."""
    if len(q) != len(limits):
        raise ValueError(f"joint vector has {len(q)} entries, limits expect {len(limits)}")
    return tuple(
        joint_limit_force(qi, lo, hi, d, f_max)
        for qi, lo, hi, d in zip(q, limits.q_min, limits.q_max, limits.threshold)
    )


def _ramp_down(x: float, x_full: float, x_zero: float) -> float:
    """1 at or below x_full, 0 at or above x_zero, linear in between."""
    if x <= x_full:
        return 1.0
    if x >= x_zero:
        return 0.0
    return (x_zero - x) / (x_zero - x_full)


def conditioning_force(inv_kappa: float, s_full: float, s_zero: float, f_max: float) -> float:
    """Force magnitude driven by 1/kappa: f_max when ill-conditioned, 0 when healthy."""
    if not 0.0 < s_full < s_zero <= 1.0:
        raise ValueError(f"need 0 < s_full < s_zero <= 1, got ({s_full}, {s_zero})")
    if not 0.0 <= inv_kappa <= 1.0:
        raise ValueError(f"inv_kappa must be in [0, 1], got {inv_kappa}")
    return f_max * _ramp_down(inv_kappa, s_full, s_zero)


def viscosity_coefficient(inv_kappa: float, s_full: float, s_zero: float, c_max: float) -> float:
    """Viscous damping coefficient: c_max when ill-conditioned, 0 when healthy."""
    inv_kappa = min(1.0, max(0.0, inv_kappa))
    return c_max * _ramp_down(inv_kappa, s_full, s_zero)


def boundary_force(
    model: FiveBarModel, p: tuple[float, float], delta_d: float, f_max: float
) -> tuple[float, float]:
    """Repulsion from the workspace edge, treating the boundary as an obstacle.

    Zero while the signed boundary distance exceeds delta_d; ramps to f_max
    at the edge.  Outside the workspace the magnitude stays at f_max and the
    direction points back in (pull-back).  The direction is the inward
    gradient of the active annulus constraint: radial toward the base for an
    outer circle, away from it for an inner circle.
    """
    if not delta_d > 0.0:
        raise ValueError(f"delta_d must be > 0, got {delta_d}")
    px, py = float(p[0]), float(p[1])
    best = None  # (margin, direction)
    for (gx, gy), hip, distal in (
        (model.base_a, model.l1, model.l2),
        (model.base_b, model.l3, model.l4),
    ):
        rx, ry = px - gx, py - gy
        r = math.hypot(rx, ry)
        if r < 1e-12 * model.l1:
            # at the base point: radial direction undefined, pick +x
            ux, uy = 1.0, 0.0
            r = 0.0
        else:
            ux, uy = rx / r, ry / r
        outer_margin = (hip + distal) - r
        inner_margin = r - abs(hip - distal)
        if best is None or outer_margin < best[0]:
            best = (outer_margin, (-ux, -uy))  # inward = toward the base
        if inner_margin < best[0]:
            best = (inner_margin, (ux, uy))  # inward = away from the base
    margin, (ux, uy) = best
    scale = f_max * min(1.0, max(0.0, 1.0 - margin / delta_d))
    return (scale * ux, scale * uy)


def compose_force(
    parts: dict[str, tuple[float, float]],
    mode: str,
    envelope: ForceEnvelope,
    velocity: tuple[float, float] = (0.0, 0.0),
    viscosity: float = 0.0,
) -> ForceCommand:
    """Sum the component forces, add viscous drag, clamp to the envelope.

    The viscous component is -viscosity * velocity.  Clamping scales the sum
    back to the active envelope bound (peak or continuous) preserving its
    direction; the clamped flag records whether that happened.
    """
    components = {}
    fx = fy = 0.0
    for name, (vx, vy) in parts.items():
        if not (math.isfinite(vx) and math.isfinite(vy)):
            raise ValueError(f"component {name!r} is not finite: ({vx}, {vy})")
        components[name] = (float(vx), float(vy))
        fx += vx
        fy += vy
    if not (math.isfinite(velocity[0]) and math.isfinite(velocity[1]) and math.isfinite(viscosity)):
        raise ValueError("velocity and viscosity must be finite")
    visc = (-viscosity * velocity[0], -viscosity * velocity[1])
    components["viscous"] = visc
    fx += visc[0]
    fy += visc[1]

    bound = envelope.bound(mode)
    norm = math.hypot(fx, fy)
    clamped = norm > bound
    if clamped:
        fx *= bound / norm
        fy *= bound / norm
        # rescaling can overshoot by an ulp; the envelope bound is strict
        while math.hypot(fx, fy) > bound:
            fx = math.nextafter(fx, 0.0)
            fy = math.nextafter(fy, 0.0)
    return ForceCommand(f=(fx, fy), components=components, clamped=clamped)
