"""Self-verification sweeps: the oracle suite behind `kinetobench verify`.

Each check pits an implementation against an independent route to the same
quantity:

- closed-form kappa(A)/kappa(B) against SVD of the actual matrices;
- IK against FK round trips in matching working modes;
- the velocity relation A pdot = B thetadot against finite differences;
- the serial-chain twist Jacobian against finite differences of the pose map.

Checks return their max observed error plus the worst posture, so a failure
is reportable; run_verification aggregates pass/fail against the standard
tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from kinetobench.batch import fk_batch, ik_batch
from kinetobench.fivebar import forward_kinematics, velocity_relation_check
from kinetobench.model import FiveBarModel, SerialChainModel
from kinetobench.serialchain import chain_pose, twist_jacobian

TOLERANCES = {
    "closed_vs_svd_a": 1e-9,
    "closed_vs_svd_b": 1e-9,
    "fk_ik_roundtrip": 1e-9,
    "velocity_relation": 1e-6,
    "serial_fd": 1e-6,
}

# kappa above this is treated as effectively singular and skipped in
# relative-agreement sweeps
KAPPA_CUTOFF = 1e12


@dataclass
class CheckResult:
    name: str
    max_error: float
    tolerance: float
    samples: int
    worst: dict

    @property
    def passed(self) -> bool:
        return self.samples == 0 or self.max_error < self.tolerance


def sample_postures(
    model: FiveBarModel, n: int, seed: int, min_sine: float = 0.0
) -> dict[str, np.ndarray]:
    """Random reachable postures: uniform hip angles, random assembly side.

    min_sine > 0 rejects postures within that margin of any singular locus
    (used by the finite-difference sweeps, which need smooth neighborhoods).
    Returns arrays from fk_batch plus theta1/theta2/assembly.
    """
    rng = np.random.default_rng(seed)
    lim = model.limits
    keep: list[dict] = []
    total = 0
    batch = max(256, 2 * n)
    while total < n:
        t1 = rng.uniform(lim.q_min[0], lim.q_max[0], batch)
        t2 = rng.uniform(lim.q_min[1], lim.q_max[1], batch)
        side = rng.choice((-1, 1), batch)
        sol = fk_batch(model, t1, t2, assembly=side)
        good = sol["valid"]
        if min_sine > 0.0:
            good &= np.abs(sol["sin31"]) > min_sine
            good &= np.abs(sol["sin42"]) > min_sine
            good &= np.abs(np.sin(sol["theta3"] - sol["theta4"])) > min_sine
        idx = np.nonzero(good)[0]
        keep.append(
            {
                "theta1": t1[idx], "theta2": t2[idx], "assembly": side[idx],
                **{k: sol[k][idx] for k in ("px", "py", "theta3", "theta4",
                                            "sin31", "sin42", "cosd",
                                            "cx", "cy", "dx", "dy")},
            }
        )
        total += len(idx)
    merged = {k: np.concatenate([c[k] for c in keep])[:n] for k in keep[0]}
    return merged


def check_closed_vs_svd(
    model: FiveBarModel,
    n: int = 100_000,
    seed: int = 42,
    indices_fn: Callable[[np.ndarray, np.ndarray, np.ndarray], tuple] | None = None,
) -> tuple[CheckResult, CheckResult]:
    """Closed-form kappa(A), kappa(B) vs the SVD of the assembled matrices.

    indices_fn(sin31, sin42, cosd) -> (kappa_a, kappa_b) can be swapped out
    to exercise the negative-control path in the tests.
    """
    s = sample_postures(model, n, seed)
    if indices_fn is None:
        def indices_fn(sin31, sin42, cosd):
            abs_c = np.abs(cosd)
            ka = np.sqrt((1.0 + abs_c) / (1.0 - abs_c))
            b1, b2 = np.abs(sin31), np.abs(sin42)
            kb = np.maximum(b1, b2) / np.minimum(b1, b2)
            return ka, kb

    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        kappa_a, kappa_b = indices_fn(s["sin31"], s["sin42"], s["cosd"])

    # assemble the actual A and B matrices from posture coordinates and take
    # their singular values with LAPACK
    pc = np.stack([s["px"] - s["cx"], s["py"] - s["cy"]], axis=-1)
    pd = np.stack([s["px"] - s["dx"], s["py"] - s["dy"]], axis=-1)
    a_stack = np.stack([pc, pd], axis=1)
    sv_a = np.linalg.svd(a_stack, compute_uv=False)
    b_stack = np.zeros_like(a_stack)
    b_stack[:, 0, 0] = model.l1 * model.l2 * s["sin31"]
    b_stack[:, 1, 1] = model.l3 * model.l4 * s["sin42"]
    sv_b = np.linalg.svd(b_stack, compute_uv=False)
    with np.errstate(divide="ignore", invalid="ignore"):
        kappa_a_svd = sv_a[:, 0] / sv_a[:, 1]
        kappa_b_svd = sv_b[:, 0] / sv_b[:, 1]

    results = []
    for name, closed, via_svd in (
        ("closed_vs_svd_a", kappa_a, kappa_a_svd),
        ("closed_vs_svd_b", kappa_b, kappa_b_svd),
    ):
        use = np.isfinite(closed) & np.isfinite(via_svd) & (closed < KAPPA_CUTOFF)
        rel = np.abs(closed[use] - via_svd[use]) / via_svd[use]
        worst_idx = int(np.argmax(rel)) if rel.size else 0
        src = np.nonzero(use)[0]
        worst = {}
        if rel.size:
            k = src[worst_idx]
            worst = {"theta1": float(s["theta1"][k]), "theta2": float(s["theta2"][k]),
                     "p": [float(s["px"][k]), float(s["py"][k])]}
        results.append(
            CheckResult(name, float(rel.max()) if rel.size else 0.0,
                        TOLERANCES[name], int(use.sum()), worst)
        )
    return results[0], results[1]


def check_fk_ik_roundtrip(model: FiveBarModel, n: int = 10_000, seed: int = 43) -> CheckResult:
    """IK(FK(theta)) must reproduce theta in the same working mode."""
    s = sample_postures(model, n, seed, min_sine=1e-9)
    s1 = np.where(s["sin31"] > 0, 1, -1)
    s2 = np.where(s["sin42"] > 0, 1, -1)
    worst = {}
    max_err = 0.0
    count = 0
    for group in ((1, 1), (1, -1), (-1, 1), (-1, -1)):
        pick = (s1 == group[0]) & (s2 == group[1])
        if not np.any(pick):
            continue
        sol = ik_batch(model, s["px"][pick], s["py"][pick], group[0], group[1])
        err1 = np.abs(sol["theta1"] - s["theta1"][pick])
        err2 = np.abs(sol["theta2"] - s["theta2"][pick])
        err1 = np.minimum(err1, 2 * math.pi - err1)  # wrap-agnostic
        err2 = np.minimum(err2, 2 * math.pi - err2)
        err = np.where(sol["valid"], np.maximum(err1, err2), np.inf)
        k = int(np.argmax(err))
        if float(err[k]) > max_err:
            max_err = float(err[k])
            src = np.nonzero(pick)[0][k]
            worst = {"theta1": float(s["theta1"][src]), "theta2": float(s["theta2"][src]),
                     "mode": f"{'+' if group[0] > 0 else '-'}{'+' if group[1] > 0 else '-'}"}
        count += int(pick.sum())
    return CheckResult("fk_ik_roundtrip", max_err, TOLERANCES["fk_ik_roundtrip"], count, worst)


def check_velocity_relation(model: FiveBarModel, n: int = 1000, seed: int = 44) -> CheckResult:
    """A pdot = B thetadot against central differences of FK."""
    s = sample_postures(model, n, seed, min_sine=1e-2)
    rng = np.random.default_rng(seed + 1)
    max_resid = 0.0
    worst = {}
    count = 0
    for k in range(len(s["theta1"])):
        posture = forward_kinematics(
            model, float(s["theta1"][k]), float(s["theta2"][k]),
            assembly=int(s["assembly"][k]),
        )
        if posture is None:
            continue
        w = rng.normal(size=2)
        w /= np.linalg.norm(w)
        resid = velocity_relation_check(model, posture, (float(w[0]), float(w[1])))
        count += 1
        if resid > max_resid:
            max_resid = resid
            worst = {"theta1": posture.theta1, "theta2": posture.theta2,
                     "thetadot": [float(w[0]), float(w[1])]}
    return CheckResult(
        "velocity_relation", max_resid, TOLERANCES["velocity_relation"], count, worst
    )


def check_serial_fd(model: SerialChainModel, n: int = 500, seed: int = 45,
                    step: float = 1e-6) -> CheckResult:
    """Positional Jacobian rows vs central differences of the pose map."""
    rng = np.random.default_rng(seed)
    lim = model.limits
    max_err = 0.0
    worst = {}
    for _ in range(n):
        q = rng.uniform(lim.q_min, lim.q_max)
        jac = twist_jacobian(model, q)
        trans = jac.translational
        fd = np.zeros_like(trans)
        for j in range(model.n_joints):
            q_hi = q.copy()
            q_lo = q.copy()
            q_hi[j] += step
            q_lo[j] -= step
            _, _, tool_hi = chain_pose(model, q_hi)
            _, _, tool_lo = chain_pose(model, q_lo)
            col = (tool_hi - tool_lo) / (2 * step)
            fd[:, j] = col if trans.shape[0] == 3 else col[:2]
        err = float(np.abs(trans - fd).max())
        if err > max_err:
            max_err = err
            worst = {"q": [float(v) for v in q]}
    return CheckResult("serial_fd", max_err, TOLERANCES["serial_fd"], n, worst)


def run_verification(
    model: FiveBarModel,
    serial_model: SerialChainModel | None = None,
    samples: int = 10_000,
    seed: int = 42,
) -> dict[str, CheckResult]:
    """Full oracle suite; samples = 0 degenerates to a trivially-passing run."""
    results: dict[str, CheckResult] = {}
    if samples > 0:
        res_a, res_b = check_closed_vs_svd(model, samples, seed)
        results["closed_vs_svd_a"] = res_a
        results["closed_vs_svd_b"] = res_b
        results["fk_ik_roundtrip"] = check_fk_ik_roundtrip(model, min(samples, 10_000), seed + 1)
        results["velocity_relation"] = check_velocity_relation(model, min(samples, 1000), seed + 2)
        if serial_model is not None:
            results["serial_fd"] = check_serial_fd(serial_model, min(samples, 500), seed + 3)
    else:
        for name in ("closed_vs_svd_a", "closed_vs_svd_b", "fk_ik_roundtrip",
                     "velocity_relation"):
            results[name] = CheckResult(name, 0.0, TOLERANCES[name], 0, {})
    return results
