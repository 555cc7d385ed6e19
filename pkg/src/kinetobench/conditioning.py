"""Singular values, condition numbers, and posture classification.

kappa is always the ratio of extreme singular values, sigma_max/sigma_min.
For the five-bar the closed forms are:

- A @ A^T = L2^2 [[1, cos(t3-t4)], [cos(t3-t4), 1]], so the squared singular
  values of A are L2^2*(1 -/+ cos(t3-t4)) and kappa(A) =
  sqrt((1+|cos|)/(1-|cos|)).
- B is diagonal, so its singular values are the absolute diagonal entries
  L1*L2*|sin(t3-t1)| and L3*L4*|sin(t4-t2)|, and kappa(B) is their ratio
  directly (no square root: a ratio of singular values, not of their
  squares).

Some printed treatments give kappa(A) as sqrt(1/tan((t3-t4)/2)) and kappa(B)
with a square root; both disagree with the sigma-ratio definition those same
treatments adopt, so the closed forms here are validated against an SVD
oracle instead (see docs/CONVENTIONS.md and the test suite).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from kinetobench.fivebar import PostureState, velocity_matrices
from kinetobench.model import FiveBarModel

# sigma_min below this fraction of sigma_max counts as numerically zero.
SINGULAR_RTOL = 1e-14


@dataclass(frozen=True)
class ConditioningReport:
    sigma_max: float
    sigma_min: float
    kappa: float  # >= 1, may be math.inf
    inv_kappa: float  # in [0, 1]
    isotropic: bool
    singular: bool


@dataclass(frozen=True)
class FiveBarIndices:
    """Closed-form conditioning data of the velocity matrices at a posture."""

    alpha1: float  # 1 - cos(t3-t4): eigenvalue of A A^T / L2^2
    alpha2: float  # 1 + cos(t3-t4)
    beta1: float  # |sin(t3-t1)|
    beta2: float  # |sin(t4-t2)|
    kappa_a: float
    kappa_b: float
    inv_kappa_a: float
    inv_kappa_b: float


@dataclass(frozen=True)
class Classification:
    """Flag set plus a headline kind ('regular', one flag name, or 'double')."""

    kind: str
    flags: frozenset[str]


def condition_number(m: np.ndarray, tol: float = 1e-9) -> ConditioningReport:
    """Conditioning report from a numerically stable SVD.

    kappa = sigma_max/sigma_min, +inf when sigma_min < SINGULAR_RTOL*sigma_max
    (and for an all-zero matrix).  tol drives the isotropic/singular booleans
    only, not the singular values themselves.
    """
    m = np.asarray(m, dtype=float)
    if m.size == 0:
        raise ValueError("condition_number: empty matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("condition_number: matrix has non-finite entries")
    sigma = np.linalg.svd(m, compute_uv=False)
    sigma_max = float(sigma[0])
    sigma_min = float(sigma[-1])
    if sigma_max == 0.0 or sigma_min < SINGULAR_RTOL * sigma_max:
        kappa = math.inf
    else:
        kappa = sigma_max / sigma_min
    inv_kappa = sigma_min / sigma_max if sigma_max > 0.0 else 0.0
    return ConditioningReport(
        sigma_max=sigma_max,
        sigma_min=sigma_min,
        kappa=kappa,
        inv_kappa=inv_kappa,
        isotropic=math.isfinite(kappa) and kappa - 1.0 < tol,
        singular=inv_kappa < tol,
    )


def indices_from_angles(t1: float, t2: float, t3: float, t4: float) -> FiveBarIndices:
    """Closed-form five-bar indices from the four link angles.

    Scalar-math hot path used by the real-time loop; fivebar_indices is the
    posture-level wrapper.
    """
    cosd = math.cos(t3 - t4)
    abs_cosd = abs(cosd)
    alpha_min = 1.0 - abs_cosd
    alpha_max = 1.0 + abs_cosd
    inv_kappa_a = math.sqrt(alpha_min / alpha_max)
    kappa_a = alpha_max / math.sqrt(alpha_max * alpha_min) if alpha_min > 0.0 else math.inf
    beta1 = abs(math.sin(t3 - t1))
    beta2 = abs(math.sin(t4 - t2))
    beta_min, beta_max = (beta1, beta2) if beta1 < beta2 else (beta2, beta1)
    if beta_max == 0.0:
        kappa_b, inv_kappa_b = math.inf, 0.0
    elif beta_min == 0.0:
        kappa_b, inv_kappa_b = math.inf, 0.0
    else:
        kappa_b = beta_max / beta_min
        inv_kappa_b = beta_min / beta_max
    return FiveBarIndices(
        alpha1=1.0 - cosd,
        alpha2=1.0 + cosd,
        beta1=beta1,
        beta2=beta2,
        kappa_a=kappa_a,
        kappa_b=kappa_b,
        inv_kappa_a=inv_kappa_a,
        inv_kappa_b=inv_kappa_b,
    )


def fivebar_indices(posture: PostureState, model: FiveBarModel | None = None) -> FiveBarIndices:
    """Closed-form conditioning indices of A and B at a posture.

    The model argument is unused by the closed forms (kappa is invariant to
    the uniform L2 / L1*L2 scalings) and kept for interface symmetry.
    """
    return indices_from_angles(posture.theta1, posture.theta2, posture.theta3, posture.theta4)


def fivebar_indices_svd(posture: PostureState, model: FiveBarModel) -> tuple[float, float]:
    """(kappa_a, kappa_b) via the SVD oracle, for cross-checking closed forms."""
    mats = velocity_matrices(model, posture)
    return condition_number(mats.a).kappa, condition_number(mats.b).kappa


def classify_posture(indices: FiveBarIndices, tol: float) -> Classification:
    """Classify a posture by its conditioning indices.

    Flags: A_singular / B_singular when the respective inv_kappa < tol,
    A_isotropic / B_isotropic when kappa - 1 < tol.  kind is 'regular' with
    no flags, the flag name with one, 'double' with several.
    """
    if not 0.0 < tol < 0.5:
        raise ValueError(f"tol must be in (0, 0.5), got {tol}")
    flags = set()
    if indices.inv_kappa_a < tol:
        flags.add("A_singular")
    if indices.inv_kappa_b < tol:
        flags.add("B_singular")
    if math.isfinite(indices.kappa_a) and indices.kappa_a - 1.0 < tol:
        flags.add("A_isotropic")
    if math.isfinite(indices.kappa_b) and indices.kappa_b - 1.0 < tol:
        flags.add("B_isotropic")
    if not flags:
        kind = "regular"
    elif len(flags) == 1:
        kind = next(iter(flags))
    else:
        kind = "double"
    return Classification(kind=kind, flags=frozenset(flags))
