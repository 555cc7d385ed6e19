"""Vectorized five-bar kernels for grids and verification sweeps.

Same formulas as kinetobench.fivebar / kinetobench.conditioning, expressed
over numpy arrays so a 200x200 atlas or a 1e5-posture verification sweep
stays in LAPACK/ufunc territory.  The scalar implementations are the
reference; test_batch cross-checks the two on random samples.
"""

from __future__ import annotations

import numpy as np

from kinetobench.fivebar import BOUNDARY_RTOL
from kinetobench.model import FiveBarModel


def ik_batch(
    model: FiveBarModel, px: np.ndarray, py: np.ndarray, s1: int, s2: int
) -> dict[str, np.ndarray]:
    """Inverse kinematics over point arrays in working mode (s1, s2).

    Returns valid (reachability mask) plus theta1..theta4, the distal sines
    sin31/sin42, cosd = cos(theta3 - theta4), and the conditioning indices.
    Entries outside the workspace hold NaN.
    """
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    tol = BOUNDARY_RTOL * model.l1
    out: dict[str, np.ndarray] = {}
    valid = np.ones(px.shape, dtype=bool)
    thetas = []
    elbows = []
    for (gx, gy), hip, distal, sign in (
        (model.base_a, model.l1, model.l2, s1),
        (model.base_b, model.l3, model.l4, s2),
    ):
        rx, ry = px - gx, py - gy
        r = np.hypot(rx, ry)
        valid &= (r <= hip + distal + tol) & (r >= abs(hip - distal) - tol) & (r > tol)
        r_safe = np.where(valid, r, 1.0)
        cos_psi = np.clip((r_safe**2 + hip**2 - distal**2) / (2.0 * hip * r_safe), -1.0, 1.0)
        psi = np.arccos(cos_psi)
        phi = np.arctan2(ry, rx)
        theta = phi - sign * psi
        theta = np.arctan2(np.sin(theta), np.cos(theta))  # wrap to (-pi, pi]
        ex = gx + hip * np.cos(theta)
        ey = gy + hip * np.sin(theta)
        thetas.append(theta)
        elbows.append((ex, ey))
    t1, t2 = thetas
    (cx, cy), (dx, dy) = elbows
    t3 = np.arctan2(py - cy, px - cx)
    t4 = np.arctan2(py - dy, px - dx)
    nan = np.where(valid, 0.0, np.nan)
    out["valid"] = valid
    out["theta1"] = t1 + nan
    out["theta2"] = t2 + nan
    out["theta3"] = t3 + nan
    out["theta4"] = t4 + nan
    out["cx"], out["cy"], out["dx"], out["dy"] = cx + nan, cy + nan, dx + nan, dy + nan
    out["sin31"] = np.sin(t3 - t1) + nan
    out["sin42"] = np.sin(t4 - t2) + nan
    out["cosd"] = np.cos(t3 - t4) + nan
    out.update(indices_batch(out["sin31"], out["sin42"], out["cosd"]))
    return out


def indices_batch(sin31: np.ndarray, sin42: np.ndarray, cosd: np.ndarray) -> dict[str, np.ndarray]:
    """Closed-form conditioning indices over arrays (NaN-transparent)."""
    abs_cosd = np.abs(cosd)
    inv_kappa_a = np.sqrt((1.0 - abs_cosd) / (1.0 + abs_cosd))
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa_a = np.where(inv_kappa_a > 0.0, 1.0 / inv_kappa_a, np.inf)
    beta1 = np.abs(sin31)
    beta2 = np.abs(sin42)
    beta_min = np.minimum(beta1, beta2)
    beta_max = np.maximum(beta1, beta2)
    with np.errstate(divide="ignore", invalid="ignore"):
        inv_kappa_b = np.where(beta_max > 0.0, beta_min / beta_max, 0.0)
        kappa_b = np.where(beta_min > 0.0, beta_max / beta_min, np.inf)
    # propagate NaN from masked entries (np.where drops it on the False path)
    for arr in (inv_kappa_b, kappa_b, kappa_a):
        arr[np.isnan(cosd)] = np.nan
    return {
        "beta1": beta1,
        "beta2": beta2,
        "inv_kappa_a": inv_kappa_a,
        "inv_kappa_b": inv_kappa_b,
        "kappa_a": kappa_a,
        "kappa_b": kappa_b,
    }


def fk_batch(
    model: FiveBarModel,
    theta1: np.ndarray,
    theta2: np.ndarray,
    assembly: np.ndarray | int = 1,
) -> dict[str, np.ndarray]:
    """Forward kinematics over hip-angle arrays for a fixed assembly side."""
    theta1 = np.asarray(theta1, dtype=float)
    theta2 = np.asarray(theta2, dtype=float)
    side = np.broadcast_to(np.asarray(assembly, dtype=float), theta1.shape)
    ax, ay = model.base_a
    bx, by = model.base_b
    cx = ax + model.l1 * np.cos(theta1)
    cy = ay + model.l1 * np.sin(theta1)
    dx = bx + model.l3 * np.cos(theta2)
    dy = by + model.l3 * np.sin(theta2)
    ex, ey = dx - cx, dy - cy
    dist = np.hypot(ex, ey)
    tol = BOUNDARY_RTOL * model.l1
    valid = (dist <= model.l2 + model.l4 + tol) & (dist >= abs(model.l2 - model.l4) - tol) & (dist > tol)
    dist_safe = np.where(valid, dist, 1.0)
    ux, uy = ex / dist_safe, ey / dist_safe
    along = (model.l2**2 - model.l4**2 + dist_safe**2) / (2.0 * dist_safe)
    h_sq = model.l2**2 - along**2
    valid &= h_sq >= -2.0 * tol * model.l2
    h = np.sqrt(np.maximum(h_sq, 0.0))
    px = cx + along * ux - side * h * uy
    py = cy + along * uy + side * h * ux
    nan = np.where(valid, 0.0, np.nan)
    t3 = np.arctan2(py - cy, px - cx)
    t4 = np.arctan2(py - dy, px - dx)
    return {
        "valid": valid,
        "px": px + nan,
        "py": py + nan,
        "cx": cx, "cy": cy, "dx": dx, "dy": dy,
        "theta3": t3 + nan,
        "theta4": t4 + nan,
        "sin31": np.sin(t3 - theta1) + nan,
        "sin42": np.sin(t4 - theta2) + nan,
        "cosd": np.cos(t3 - t4) + nan,
    }


def fk_batch_in_mode(
    model: FiveBarModel, theta1: np.ndarray, theta2: np.ndarray, s1: int, s2: int
) -> dict[str, np.ndarray]:
    """FK restricted to one working mode: prefer assembly +1, fall back to -1.

    Cells where neither intersection carries the requested elbow signs are
    masked invalid.
    """
    plus = fk_batch(model, theta1, theta2, assembly=1)
    minus = fk_batch(model, theta1, theta2, assembly=-1)

    def matches(sol):
        return sol["valid"] & (np.sign(sol["sin31"]) == s1) & (np.sign(sol["sin42"]) == s2)

    take_plus = matches(plus)
    take_minus = matches(minus) & ~take_plus
    out = {}
    for key in ("px", "py", "theta3", "theta4", "sin31", "sin42", "cosd", "cx", "cy", "dx", "dy"):
        out[key] = np.where(take_plus, plus[key], np.where(take_minus, minus[key], np.nan))
    out["valid"] = take_plus | take_minus
    out.update(indices_batch(out["sin31"], out["sin42"], out["cosd"]))
    return out


def boundary_distance_batch(model: FiveBarModel, px: np.ndarray, py: np.ndarray) -> np.ndarray:
    """Signed workspace-boundary distance over point arrays (positive inside)."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    dist = np.full(px.shape, np.inf)
    for (gx, gy), hip, distal in (
        (model.base_a, model.l1, model.l2),
        (model.base_b, model.l3, model.l4),
    ):
        r = np.hypot(px - gx, py - gy)
        dist = np.minimum(dist, (hip + distal) - r)
        dist = np.minimum(dist, r - abs(hip - distal))
    return dist
