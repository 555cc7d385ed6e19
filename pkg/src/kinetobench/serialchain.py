"""Twist Jacobians of serial chains and their characteristic-length scaling.

The Jacobian column of a revolute joint is (e_i; e_i x r_i) with e_i the
posed axis and r_i the vector from the posed joint anchor to the posed tool
point; a prismatic column is (0; e_i).  Planar chains (all motion in z = 0)
reduce to a 3 x n matrix with rows (w_z; v_x; v_y), or 2 x n when the
rotation row is explicitly dropped.

Mixing rotational (dimensionless) and translational (length) rows makes the
raw condition number unit-dependent; dividing the translational rows by a
length L fixes that.  The conditioning length of a posture is the L > 0
minimizing kappa of the scaled matrix; the characteristic length of a model
is the conditioning length at the posture where that minimized kappa is
smallest over a joint-space grid.  There is no closed form for either, so
conditioning_length runs a bracketed golden-section search on log L (cross-
checked against dense grids in the tests), and characteristic_length scans a
grid of postures with a vectorized version of the same search.

kappa evaluations go through the Gram matrices: the squared singular values
of [R; T/L] are the eigenvalues of R^T R + T^T T / L^2, so the L sweep never
rebuilds the Jacobian.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from kinetobench.conditioning import condition_number
from kinetobench.model import JointLimits, SerialChainModel, joint_domain_contains

_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
# coarse L bracket: this many decades each side of the posture's arm scale
_BRACKET_DECADES = 4.0
_COARSE_POINTS = 32


@dataclass(frozen=True)
class TwistJacobian:
    matrix: np.ndarray
    shape_tag: str  # "spatial6" | "planar3" | "planar2"
    n_rot_rows: int  # rotational rows come first

    @property
    def rotational(self) -> np.ndarray:
        return self.matrix[: self.n_rot_rows]

    @property
    def translational(self) -> np.ndarray:
        return self.matrix[self.n_rot_rows:]


@dataclass(frozen=True)
class HomogenizedJacobian:
    matrix: np.ndarray
    length: float
    shape_tag: str
    n_rot_rows: int

    @property
    def rotational(self) -> np.ndarray:
        return self.matrix[: self.n_rot_rows]

    @property
    def translational(self) -> np.ndarray:
        return self.matrix[self.n_rot_rows:]


@dataclass(frozen=True)
class LengthSearchResult:
    """Outcome of the kappa-over-L minimization at one posture.

    length_sensitive is False when L cannot affect kappa (no rotational rows,
    or all translational columns zero); l_star is None in that case rather
    than a fake optimum.
    """

    l_star: float | None
    kappa_star: float
    length_sensitive: bool


@dataclass(frozen=True)
class CharacteristicLength:
    length: float
    kappa: float
    posture: tuple[float, ...]
    grid_points: int


def _rodrigues(axis: np.ndarray, angle: float) -> np.ndarray:
    x, y, z = axis
    c, s = math.cos(angle), math.sin(angle)
    cc = 1.0 - c
    return np.array(
        [
            [c + x * x * cc, x * y * cc - z * s, x * z * cc + y * s],
            [y * x * cc + z * s, c + y * y * cc, y * z * cc - x * s],
            [z * x * cc - y * s, z * y * cc + x * s, c + z * z * cc],
        ]
    )


def chain_pose(
    model: SerialChainModel, q: tuple[float, ...] | list[float] | np.ndarray
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Posed joint axes (n,3), anchors (n,3), and tool point (3,) at q.

    Home-frame axes and anchors are carried through the cumulative rigid
    transform of the proximal joints; joint i then rotates (or translates)
    everything distal about its posed axis.
    """
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n_joints,):
        raise ValueError(f"q has shape {q.shape}, expected ({model.n_joints},)")
    rot = np.eye(3)
    trans = np.zeros(3)
    axes = np.empty((model.n_joints, 3))
    anchors = np.empty((model.n_joints, 3))
    for i, joint in enumerate(model.joints):
        e = rot @ np.asarray(joint.axis)
        o = rot @ np.asarray(joint.anchor) + trans
        axes[i] = e
        anchors[i] = o
        if joint.kind == "revolute":
            r_i = _rodrigues(e, float(q[i]))
            rot = r_i @ rot
            trans = r_i @ (trans - o) + o
        else:
            trans = trans + float(q[i]) * e
    tool = rot @ np.asarray(model.tool) + trans
    return axes, anchors, tool


def twist_jacobian(
    model: SerialChainModel,
    q: tuple[float, ...] | list[float] | np.ndarray,
    shape: str = "auto",
) -> TwistJacobian:
    """Twist Jacobian at q: rotational rows stacked over translational rows.

    shape: 'auto' picks planar3 for planar chains and spatial6 otherwise;
    'planar2' drops the rotation row (position-only planar Jacobian).
    Postures outside the joint domain are computed anyway with a warning.
    """
    q = np.asarray(q, dtype=float)
    if not joint_domain_contains(model.limits, q):
        warnings.warn("posture outside the joint domain", stacklevel=2)
    planar = model.is_planar()
    if shape == "auto":
        shape = "planar3" if planar else "spatial6"
    if shape in ("planar3", "planar2") and not planar:
        raise ValueError(f"shape {shape!r} requested for a non-planar chain")
    if shape not in ("spatial6", "planar3", "planar2"):
        raise ValueError(f"unknown shape {shape!r}")

    axes, anchors, tool = chain_pose(model, q)
    n = model.n_joints
    full = np.zeros((6, n))
    for i, joint in enumerate(model.joints):
        if joint.kind == "revolute":
            full[:3, i] = axes[i]
            full[3:, i] = np.cross(axes[i], tool - anchors[i])
        else:
            full[3:, i] = axes[i]

    if shape == "spatial6":
        return TwistJacobian(matrix=full, shape_tag=shape, n_rot_rows=3)
    if shape == "planar3":
        m = np.vstack([full[2:3, :], full[3:5, :]])
        return TwistJacobian(matrix=m, shape_tag=shape, n_rot_rows=1)
    return TwistJacobian(matrix=full[3:5, :].copy(), shape_tag=shape, n_rot_rows=0)


def homogenize(jac: TwistJacobian, length: float) -> HomogenizedJacobian:
    """Divide translational rows by length; rotational rows stay bit-identical."""
    if not (length > 0.0 and math.isfinite(length)):
        raise ValueError(f"characteristic length must be > 0, got {length}")
    m = jac.matrix.copy()
    m[jac.n_rot_rows:] /= length
    return HomogenizedJacobian(
        matrix=m, length=length, shape_tag=jac.shape_tag, n_rot_rows=jac.n_rot_rows
    )


def _kappa_sq_from_grams(
    gram_rot: np.ndarray, gram_trans: np.ndarray, lengths: np.ndarray
) -> np.ndarray:
    """Batched kappa^2 of [R; T/L]: eigenvalue ratio of R^T R + T^T T / L^2.

    gram_rot/gram_trans: (..., n, n); lengths broadcastable to the batch.
    Returns +inf where the smallest eigenvalue is at rounding level.
    """
    l2 = np.asarray(lengths, dtype=float) ** 2
    g = gram_rot + gram_trans / l2[..., None, None]
    w = np.linalg.eigvalsh(g)
    w_min = w[..., 0]
    w_max = w[..., -1]
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ratio = np.where(w_min > 1e-28 * w_max, w_max / np.maximum(w_min, 1e-300), np.inf)
    return ratio


def kappa_of_length(jac: TwistJacobian, length: float) -> float:
    """kappa of the homogenized Jacobian at one L (grid-search oracle helper)."""
    rot = jac.rotational
    trans = jac.translational
    gr = rot.T @ rot
    gt = trans.T @ trans
    return float(np.sqrt(_kappa_sq_from_grams(gr, gt, np.asarray(float(length)))))


def _golden_min_batch(
    gram_rot: np.ndarray,
    gram_trans: np.ndarray,
    log_lo: np.ndarray,
    log_hi: np.ndarray,
    rel_tol: float,
) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized golden-section on log L per batch row; returns (L*, kappa*).

    One batched Gram eigensolve per iteration: each row reuses the interior
    point it keeps and only probes the fresh one.
    """
    lo = np.asarray(log_lo, dtype=float).copy()
    hi = np.asarray(log_hi, dtype=float).copy()
    x1 = hi - _GOLDEN * (hi - lo)
    x2 = lo + _GOLDEN * (hi - lo)
    f1 = _kappa_sq_from_grams(gram_rot, gram_trans, np.exp(x1))
    f2 = _kappa_sq_from_grams(gram_rot, gram_trans, np.exp(x2))
    while np.max(hi - lo) > rel_tol:
        right = f2 < f1  # minimum sits in [x1, hi]
        lo = np.where(right, x1, lo)
        hi = np.where(right, hi, x2)
        new_x1 = np.where(right, x2, hi - _GOLDEN * (hi - lo))
        new_x2 = np.where(right, lo + _GOLDEN * (hi - lo), x1)
        probe_x = np.where(right, new_x2, new_x1)
        probe_f = _kappa_sq_from_grams(gram_rot, gram_trans, np.exp(probe_x))
        new_f1 = np.where(right, f2, probe_f)
        new_f2 = np.where(right, probe_f, f1)
        x1, x2, f1, f2 = new_x1, new_x2, new_f1, new_f2
    mid = 0.5 * (lo + hi)
    kappa = np.sqrt(_kappa_sq_from_grams(gram_rot, gram_trans, np.exp(mid)))
    return np.exp(mid), kappa


def _posture_scale(model: SerialChainModel, q) -> float:
    """Mean moment-arm length: the natural scale to center the L bracket on."""
    _, anchors, tool = chain_pose(model, q)
    arms = np.linalg.norm(tool[None, :] - anchors, axis=1)
    arms = arms[arms > 0]
    return float(np.mean(arms)) if arms.size else 1.0


def conditioning_length(
    model: SerialChainModel,
    q: tuple[float, ...] | list[float] | np.ndarray,
    rel_tol: float = 1e-8,
    shape: str = "auto",
) -> LengthSearchResult:
    """Posture-dependent conditioning length: argmin over L of kappa([R; T/L]).

    Bracketed on a coarse log-spaced grid around the posture's own length
    scale, then refined with golden-section to rel_tol on L.  Degenerate
    chains (kappa independent of L: no rotational rows, or a tool coincident
    with every joint anchor) are flagged instead of optimized.
    """
    jac = twist_jacobian(model, q, shape=shape)
    rot = jac.rotational
    trans = jac.translational
    if rot.shape[0] == 0 or not np.any(trans):
        return LengthSearchResult(
            l_star=None,
            kappa_star=condition_number(jac.matrix).kappa,
            length_sensitive=False,
        )
    gr = (rot.T @ rot)[None]
    gt = (trans.T @ trans)[None]
    log_c = math.log(_posture_scale(model, q))
    span = _BRACKET_DECADES * math.log(10.0)
    coarse = np.linspace(log_c - span, log_c + span, _COARSE_POINTS)
    vals = np.array([float(_kappa_sq_from_grams(gr, gt, np.exp(np.array([x])))[0]) for x in coarse])
    if not np.any(np.isfinite(vals)):
        return LengthSearchResult(l_star=None, kappa_star=math.inf, length_sensitive=True)
    k = int(np.argmin(vals))
    lo = coarse[max(k - 1, 0)]
    hi = coarse[min(k + 1, len(coarse) - 1)]
    l_star, kappa = _golden_min_batch(gr, gt, np.array([lo]), np.array([hi]), rel_tol)
    return LengthSearchResult(
        l_star=float(l_star[0]), kappa_star=float(kappa[0]), length_sensitive=True
    )


def _grid_q(limits: JointLimits, grid_points: int) -> np.ndarray:
    axes = [np.linspace(lo, hi, grid_points) for lo, hi in zip(limits.q_min, limits.q_max)]
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=-1)


def _rodrigues_batch(axes: np.ndarray, angles: np.ndarray) -> np.ndarray:
    x, y, z = axes[:, 0], axes[:, 1], axes[:, 2]
    c, s = np.cos(angles), np.sin(angles)
    cc = 1.0 - c
    out = np.empty((axes.shape[0], 3, 3))
    out[:, 0, 0] = c + x * x * cc
    out[:, 0, 1] = x * y * cc - z * s
    out[:, 0, 2] = x * z * cc + y * s
    out[:, 1, 0] = y * x * cc + z * s
    out[:, 1, 1] = c + y * y * cc
    out[:, 1, 2] = y * z * cc - x * s
    out[:, 2, 0] = z * x * cc - y * s
    out[:, 2, 1] = z * y * cc + x * s
    out[:, 2, 2] = c + z * z * cc
    return out


def _batched_grams(model: SerialChainModel, qs: np.ndarray, planar: bool):
    """Rotational/translational Gram matrices and arm scales for all postures."""
    n_batch, n = qs.shape
    rot = np.broadcast_to(np.eye(3), (n_batch, 3, 3)).copy()
    trans = np.zeros((n_batch, 3))
    axes_all = np.empty((n, n_batch, 3))
    anchors_all = np.empty((n, n_batch, 3))
    for i, joint in enumerate(model.joints):
        e = rot @ np.asarray(joint.axis)
        o = (rot @ np.asarray(joint.anchor)) + trans
        axes_all[i] = e
        anchors_all[i] = o
        if joint.kind == "revolute":
            r_i = _rodrigues_batch(e, qs[:, i])
            rot = r_i @ rot
            trans = np.einsum("bij,bj->bi", r_i, trans - o) + o
        else:
            trans = trans + qs[:, i, None] * e
    tool = np.einsum("bij,j->bi", rot, np.asarray(model.tool)) + trans

    cols_rot = np.zeros((n_batch, 3, n))
    cols_trans = np.zeros((n_batch, 3, n))
    for i, joint in enumerate(model.joints):
        if joint.kind == "revolute":
            cols_rot[:, :, i] = axes_all[i]
            cols_trans[:, :, i] = np.cross(axes_all[i], tool - anchors_all[i])
        else:
            cols_trans[:, :, i] = axes_all[i]
    if planar:
        cols_rot = cols_rot[:, 2:3, :]
        cols_trans = cols_trans[:, 0:2, :]
    gr = cols_rot.transpose(0, 2, 1) @ cols_rot
    gt = cols_trans.transpose(0, 2, 1) @ cols_trans
    arm = np.linalg.norm(tool[:, None, :] - anchors_all.transpose(1, 0, 2), axis=2)
    scale = np.where(arm.sum(axis=1) > 0, arm.mean(axis=1), 1.0)
    return gr, gt, np.maximum(scale, 1e-12)


def characteristic_length(
    model: SerialChainModel,
    grid_points: int = 25,
    rel_tol: float = 1e-8,
    prune_margin: float = 4.0,
) -> CharacteristicLength:
    """Conditioning length at the best posture over a joint-space grid.

    Coarse log-L scan batched over every grid posture, golden refinement on
    the candidates whose coarse kappa is within prune_margin of the best
    (unimodality in log L plus the coarse step bound keeps the true winner in
    that set).  Ties break by (kappa, L, posture lexicographic) so the result
    is deterministic.  Raises when every grid posture is singular for all L.
    """
    if grid_points < 1:
        raise ValueError("grid_points must be >= 1")
    planar = model.is_planar()
    qs = _grid_q(model.limits, grid_points)
    gr, gt, scale = _batched_grams(model, qs, planar)
    if not np.any(gt):
        raise ValueError("chain has no translational action; characteristic length undefined")

    log_c = np.log(scale)
    span = _BRACKET_DECADES * math.log(10.0)
    offsets = np.linspace(-span, span, _COARSE_POINTS)
    coarse = np.empty((len(qs), _COARSE_POINTS))
    for j, off in enumerate(offsets):
        coarse[:, j] = _kappa_sq_from_grams(gr, gt, np.exp(log_c + off))
    best_j = np.argmin(coarse, axis=1)
    best_val = coarse[np.arange(len(qs)), best_j]
    finite = np.isfinite(best_val)
    if not np.any(finite):
        raise ValueError("all grid postures are singular; no characteristic length")

    global_best = best_val[finite].min()
    cand = finite & (best_val <= global_best * prune_margin**2)
    idx = np.nonzero(cand)[0]
    j_lo = np.clip(best_j[idx] - 1, 0, _COARSE_POINTS - 1)
    j_hi = np.clip(best_j[idx] + 1, 0, _COARSE_POINTS - 1)
    lo = log_c[idx] + offsets[j_lo]
    hi = log_c[idx] + offsets[j_hi]
    l_star, kappa = _golden_min_batch(gr[idx], gt[idx], lo, hi, rel_tol)

    order = np.lexsort(tuple(qs[idx].T[::-1]) + (l_star, kappa))
    winner = order[0]
    return CharacteristicLength(
        length=float(l_star[winner]),
        kappa=float(kappa[winner]),
        posture=tuple(float(v) for v in qs[idx[winner]]),
        grid_points=grid_points,
    )
