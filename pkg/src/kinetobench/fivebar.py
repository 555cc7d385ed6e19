"""Five-bar kinematics: FK/IK, working modes, velocity matrices, workspace test.

Conventions (fixed here, used everywhere else):

- base_a carries the theta1 hip, base_b the theta2 hip; elbows are
  C = base_a + L1*(cos t1, sin t1) and D = base_b + L3*(cos t2, sin t2).
- theta3 / theta4 are the absolute direction angles of the distal links,
  i.e. p - c = L2*(cos t3, sin t3) and p - d = L4*(cos t4, sin t4).
- The working mode is the sign pair (sign sin(t3 - t1), sign sin(t4 - t2)):
  the two elbow bend directions.  Each of the four modes selects exactly one
  IK branch.  FK at fixed (t1, t2) has two assembly branches (the two
  intersections of the distal circles, mirror images across line CD); they
  may share a working mode, so FK also takes an assembly side.
- Velocity relation: A @ pdot = B @ thetadot with A rows (p-c)^T, (p-d)^T
  and B = diag(L1*L2*sin(t3-t1), L3*L4*sin(t4-t2)).  Some printed treatments
  swap A and B between the joint and Cartesian sides; the form used here is
  the one obtained by differentiating the loop closure, and is verified
  against finite differences by velocity_relation_check (see
  docs/CONVENTIONS.md).

All functions are pure and operate on immutable models; the scalar kernels
use math-module arithmetic so a single evaluation stays in the microsecond
range for the real-time loop.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kinetobench.model import FiveBarModel

# Relative tolerance for "on the workspace boundary" decisions, scaled by L1.
BOUNDARY_RTOL = 1e-9


class SingularPostureError(ValueError):
    """Raised when an operation cannot proceed at a singular posture."""


@dataclass(frozen=True)
class WorkingMode:
    """IK branch selector: elbow bend signs (+1 or -1) for each leg."""

    s1: int
    s2: int

    def __post_init__(self):
        if self.s1 not in (1, -1) or self.s2 not in (1, -1):
            raise ValueError(f"mode signs must be +1 or -1, got ({self.s1}, {self.s2})")

    @classmethod
    def parse(cls, text: str) -> "WorkingMode":
        """Parse compact '+-' style notation (also accepts '(+,-)')."""
        signs = [ch for ch in text if ch in "+-"]
        if len(signs) != 2:
            raise ValueError(f"cannot parse working mode from {text!r}")
        return cls(*(1 if ch == "+" else -1 for ch in signs))

    def __str__(self) -> str:
        return ("+" if self.s1 > 0 else "-") + ("+" if self.s2 > 0 else "-")


ALL_MODES = (
    WorkingMode(1, 1),
    WorkingMode(1, -1),
    WorkingMode(-1, 1),
    WorkingMode(-1, -1),
)


@dataclass(frozen=True)
class PostureState:
    """Full configuration of the five-bar at one end point.

    mode is None exactly when the posture sits on the workspace boundary
    (a distal sine vanishes and the bend direction is undefined).
    """

    theta1: float
    theta2: float
    theta3: float
    theta4: float
    p: tuple[float, float]
    c: tuple[float, float]
    d: tuple[float, float]
    mode: WorkingMode | None
    on_boundary: bool = False


@dataclass(frozen=True)
class VelocityMatrices:
    """A (Cartesian side), B (joint side), and the quarter-turn matrix E."""

    a: np.ndarray
    b: np.ndarray
    e: np.ndarray


def rot90() -> np.ndarray:
    """The 2x2 quarter-turn matrix [[0, -1], [1, 0]]; satisfies E @ E = -I."""
    return np.array([[0.0, -1.0], [1.0, 0.0]])


def _wrap(angle: float) -> float:
    # principal value in [-pi, pi]
    return math.remainder(angle, math.tau)


def _mode_signs(t1: float, t2: float, t3: float, t4: float) -> tuple[float, float]:
    return math.sin(t3 - t1), math.sin(t4 - t2)


def _posture_from_angles(
    model: FiveBarModel, t1: float, t2: float, px: float, py: float,
    on_boundary: bool,
) -> PostureState:
    ax, ay = model.base_a
    bx, by = model.base_b
    cx = ax + model.l1 * math.cos(t1)
    cy = ay + model.l1 * math.sin(t1)
    dx = bx + model.l3 * math.cos(t2)
    dy = by + model.l3 * math.sin(t2)
    t3 = math.atan2(py - cy, px - cx)
    t4 = math.atan2(py - dy, px - dx)
    if on_boundary:
        mode = None
    else:
        sn1, sn2 = _mode_signs(t1, t2, t3, t4)
        mode = WorkingMode(1 if sn1 > 0 else -1, 1 if sn2 > 0 else -1)
    return PostureState(
        theta1=t1, theta2=t2, theta3=t3, theta4=t4,
        p=(px, py), c=(cx, cy), d=(dx, dy), mode=mode, on_boundary=on_boundary,
    )


def forward_kinematics(
    model: FiveBarModel,
    theta1: float,
    theta2: float,
    mode: WorkingMode | None = None,
    assembly: int = 1,
) -> PostureState | None:
    """End point for hip angles (theta1, theta2).

    The distal circles (radius L2 about C, L4 about D) intersect in up to two
    points; `assembly` (+1/-1) picks the point left/right of the directed
    line C->D.  When `mode` is given, candidates whose elbow signs do not
    match are discarded first; `assembly` then breaks a remaining tie (both
    intersections can share a working mode).  Returns None when the circles
    do not intersect or no candidate matches the mode.
    """
    if assembly not in (1, -1):
        raise ValueError(f"assembly must be +1 or -1, got {assembly}")
    ax, ay = model.base_a
    bx, by = model.base_b
    cx = ax + model.l1 * math.cos(theta1)
    cy = ay + model.l1 * math.sin(theta1)
    dx = bx + model.l3 * math.cos(theta2)
    dy = by + model.l3 * math.sin(theta2)
    ex, ey = dx - cx, dy - cy
    dist = math.hypot(ex, ey)
    tol = BOUNDARY_RTOL * model.l1
    if dist > model.l2 + model.l4 + tol or dist < abs(model.l2 - model.l4) - tol or dist < tol:
        return None
    ux, uy = ex / dist, ey / dist
    along = (model.l2**2 - model.l4**2 + dist**2) / (2.0 * dist)
    h_sq = model.l2**2 - along**2
    boundary = h_sq <= (tol * model.l2) * 2.0  # circles tangent: branches merge
    h = math.sqrt(h_sq) if h_sq > 0.0 else 0.0
    fx, fy = cx + along * ux, cy + along * uy
    # +1: left of C->D (rotate u by +90 deg)
    sides = (assembly,) if boundary else (assembly, -assembly)
    candidates = [
        _posture_from_angles(
            model, theta1, theta2, fx - side * h * uy, fy + side * h * ux, boundary
        )
        for side in sides
    ]
    if mode is None:
        return candidates[0]
    for posture in candidates:
        if posture.on_boundary or posture.mode == mode:
            return posture
    return None


def inverse_kinematics(
    model: FiveBarModel, p: tuple[float, float], mode: WorkingMode
) -> PostureState | None:
    """Hip angles reaching p with the given working mode.

    Per leg the hip angle is phi -/+ psi (phi: direction base->p, psi: the
    opening of the L1/L2 triangle); the '-' branch is elbow sign +1.  Returns
    None when p lies outside either reach annulus.  A posture within
    BOUNDARY_RTOL*L1 of an annulus edge is returned with mode None and
    on_boundary set: the bend direction is undefined there.
    """
    px, py = float(p[0]), float(p[1])
    tol = BOUNDARY_RTOL * model.l1
    angles = []
    boundary = False
    for (gx, gy), hip, distal, sign in (
        (model.base_a, model.l1, model.l2, mode.s1),
        (model.base_b, model.l3, model.l4, mode.s2),
    ):
        rx, ry = px - gx, py - gy
        r = math.hypot(rx, ry)
        if r > hip + distal + tol or r < abs(hip - distal) - tol or r < tol:
            return None
        cos_psi = (r * r + hip * hip - distal * distal) / (2.0 * hip * r)
        if abs(r - (hip + distal)) <= tol or abs(r - abs(hip - distal)) <= tol:
            boundary = True
        cos_psi = min(1.0, max(-1.0, cos_psi))
        psi = math.acos(cos_psi)
        phi = math.atan2(ry, rx)
        angles.append(_wrap(phi - sign * psi))
    return _posture_from_angles(model, angles[0], angles[1], px, py, boundary)


def velocity_matrices(model: FiveBarModel, posture: PostureState) -> VelocityMatrices:
    """A and B of the velocity relation A @ pdot = B @ thetadot.

    Defined at every posture, including singular ones.
    """
    px, py = posture.p
    cx, cy = posture.c
    dx, dy = posture.d
    a = np.array([[px - cx, py - cy], [px - dx, py - dy]])
    b = np.array(
        [
            [model.l1 * model.l2 * math.sin(posture.theta3 - posture.theta1), 0.0],
            [0.0, model.l3 * model.l4 * math.sin(posture.theta4 - posture.theta2)],
        ]
    )
    return VelocityMatrices(a=a, b=b, e=rot90())


def _fk_continuation(
    model: FiveBarModel, theta1: float, theta2: float, p_ref: tuple[float, float]
) -> tuple[float, float]:
    """FK branch tracking: the circle intersection closest to p_ref."""
    best = None
    best_d2 = math.inf
    for side in (1, -1):
        posture = forward_kinematics(model, theta1, theta2, assembly=side)
        if posture is None:
            continue
        d2 = (posture.p[0] - p_ref[0]) ** 2 + (posture.p[1] - p_ref[1]) ** 2
        if d2 < best_d2:
            best, best_d2 = posture.p, d2
    if best is None:
        raise SingularPostureError("FK lost the branch while stepping")
    return best


def velocity_relation_check(
    model: FiveBarModel,
    posture: PostureState,
    thetadot: tuple[float, float],
    step: float = 1e-6,
) -> float:
    """Residual ||A @ pdot_fd - B @ thetadot|| with pdot_fd a central difference.

    pdot_fd differentiates FK along thetadot while tracking the assembly
    branch through nearest-intersection continuation.  Refuses postures where
    A is singular: the FK branches merge there and the difference quotient is
    meaningless.
    """
    if abs(math.sin(posture.theta4 - posture.theta3)) < 1e-9:
        raise SingularPostureError(
            "A is singular (sin(theta4 - theta3) ~ 0); cannot difference FK"
        )
    w1, w2 = thetadot
    if w1 == 0.0 and w2 == 0.0:
        return 0.0
    h = step
    p_plus = _fk_continuation(model, posture.theta1 + h * w1, posture.theta2 + h * w2, posture.p)
    p_minus = _fk_continuation(model, posture.theta1 - h * w1, posture.theta2 - h * w2, posture.p)
    pdot = np.array([(p_plus[0] - p_minus[0]) / (2 * h), (p_plus[1] - p_minus[1]) / (2 * h)])
    mats = velocity_matrices(model, posture)
    residual = mats.a @ pdot - mats.b @ np.asarray(thetadot, dtype=float)
    return float(np.linalg.norm(residual))


def workspace_contains(model: FiveBarModel, p: tuple[float, float]) -> str:
    """'inside', 'boundary', or 'outside' of the reachable region.

    The workspace is the intersection of the two leg annuli; 'boundary' means
    within BOUNDARY_RTOL*L1 of an annulus edge while not outside.
    """
    px, py = float(p[0]), float(p[1])
    tol = BOUNDARY_RTOL * model.l1
    on_edge = False
    for (gx, gy), hip, distal in (
        (model.base_a, model.l1, model.l2),
        (model.base_b, model.l3, model.l4),
    ):
        r = math.hypot(px - gx, py - gy)
        outer, inner = hip + distal, abs(hip - distal)
        if r > outer + tol or r < inner - tol:
            return "outside"
        if abs(r - outer) <= tol or abs(r - inner) <= tol:
            on_edge = True
    return "boundary" if on_edge else "inside"


def boundary_distance(model: FiveBarModel, p: tuple[float, float]) -> float:
    """Signed distance to the workspace boundary (positive inside).

    The minimum over both legs of the radial margins to the annulus edges;
    negative outside, with magnitude the largest constraint violation.
    """
    px, py = float(p[0]), float(p[1])
    d = math.inf
    for (gx, gy), hip, distal in (
        (model.base_a, model.l1, model.l2),
        (model.base_b, model.l3, model.l4),
    ):
        r = math.hypot(px - gx, py - gy)
        d = min(d, (hip + distal) - r, r - abs(hip - distal))
    return d


def posture_residual(model: FiveBarModel, posture: PostureState) -> float:
    """Largest violation of the posture's geometric constraints (test helper)."""
    px, py = posture.p
    cx, cy = posture.c
    dx, dy = posture.d
    ax, ay = model.base_a
    bx, by = model.base_b
    return max(
        abs(math.hypot(px - cx, py - cy) - model.l2),
        abs(math.hypot(px - dx, py - dy) - model.l4),
        abs(math.hypot(cx - ax, cy - ay) - model.l1),
        abs(math.hypot(dx - bx, dy - by) - model.l3),
    )
