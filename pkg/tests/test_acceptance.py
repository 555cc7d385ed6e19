"""Acceptance suite: one test per release criterion, tolerances pinned.

Run with `pytest tests/test_acceptance.py -v -s` to see one PASS line per
criterion.  Every expected value is either exact geometry (5-12-13 legs,
circle intersections), a closed form cross-checked against an SVD/finite-
difference oracle, or a limit sequence with a proven direction.
"""

import json
import math
import time

import numpy as np
import pytest

from kinetobench.atlas import (
    inward_point,
    make_atlas,
    sample_arc,
    workspace_boundary_arcs,
)
from kinetobench.batch import ik_batch
from kinetobench.conditioning import condition_number, indices_from_angles
from kinetobench.fivebar import ALL_MODES, WorkingMode, inverse_kinematics
from kinetobench.forcefield import (
    ForceEnvelope,
    compose_force,
    conditioning_force,
    joint_limit_force,
)
from kinetobench.serialchain import (
    characteristic_length,
    conditioning_length,
    homogenize,
    twist_jacobian,
)
from kinetobench.session import HapticEngine, replay
from kinetobench.traces import bundled_trace_path
from kinetobench.verify import check_closed_vs_svd, check_velocity_relation
from tests.test_serialchain import scale_chain

MODE = WorkingMode(-1, 1)
F_MAX = 6.4


def report(name: str, detail: str = ""):
    print(f"PASS [{name}] {detail}")


class TestAcceptance:
    def test_closed_form_svd_agreement(self, fivebar):
        """1e5 seeded postures: closed-form kappa_A/kappa_B vs SVD within 1e-9
        relative (kappa < 1e12), in under 5 seconds."""
        t0 = time.perf_counter()
        res_a, res_b = check_closed_vs_svd(fivebar, n=100_000, seed=42)
        elapsed = time.perf_counter() - t0
        assert res_a.samples > 90_000
        assert res_a.max_error < 1e-9, res_a
        assert res_b.max_error < 1e-9, res_b
        assert elapsed < 5.0, f"took {elapsed:.2f} s"
        report("closed-form vs SVD",
               f"max rel err A={res_a.max_error:.2e} B={res_b.max_error:.2e} in {elapsed:.2f}s")

    def test_isotropy_claims(self, fivebar):
        """kappa_A = 1 exactly at |theta3 - theta4| = pi/2; the reference
        posture (3, 12) gives kappa_A = 4/3 and kappa_B = 1 to 1e-12."""
        # bisect along the symmetry axis for cos(theta3 - theta4) = 0
        def cosd_at(y: float) -> float:
            posture = inverse_kinematics(fivebar, (3.0, y), MODE)
            return math.cos(posture.theta3 - posture.theta4)

        lo, hi = 8.0, 12.0  # cosd < 0 near the locus, > 0 high up
        assert cosd_at(lo) < 0 < cosd_at(hi)
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if cosd_at(mid) < 0:
                lo = mid
            else:
                hi = mid
        posture = inverse_kinematics(fivebar, (3.0, 0.5 * (lo + hi)), MODE)
        idx = indices_from_angles(posture.theta1, posture.theta2,
                                  posture.theta3, posture.theta4)
        assert abs(idx.kappa_a - 1.0) < 1e-12

        ref = inverse_kinematics(fivebar, (3.0, 12.0), MODE)
        ref_idx = indices_from_angles(ref.theta1, ref.theta2, ref.theta3, ref.theta4)
        assert abs(ref_idx.kappa_a - 4.0 / 3.0) < 1e-12 * (4.0 / 3.0)
        assert abs(ref_idx.kappa_b - 1.0) < 1e-12
        report("isotropy claims",
               f"kappa_A(locus)-1={idx.kappa_a - 1:.1e}, "
               f"(3,12): kappa_A={ref_idx.kappa_a}, kappa_B={ref_idx.kappa_b}")

    def test_singularity_limits(self, fivebar):
        """inv_kappa_A -> 0 as theta3-theta4 -> pi and inv_kappa_B -> 0 at the
        workspace edge: monotone decreasing sequences dropping below 1e-6."""
        y_locus = math.sqrt(60.0)
        seq_a = []
        for k in range(9):
            posture = inverse_kinematics(fivebar, (3.0, y_locus + 4.0 * 10.0 ** -k), MODE)
            idx = indices_from_angles(posture.theta1, posture.theta2,
                                      posture.theta3, posture.theta4)
            seq_a.append(idx.inv_kappa_a)
        assert all(a > b for a, b in zip(seq_a, seq_a[1:])), seq_a
        assert seq_a[-1] < 1e-6

        ux, uy = 5.0 / 13.0, 12.0 / 13.0
        seq_b = []
        for k in range(1, 14):
            r = 13.0 - 10.0 ** -k
            posture = inverse_kinematics(fivebar, (r * ux, r * uy), MODE)
            idx = indices_from_angles(posture.theta1, posture.theta2,
                                      posture.theta3, posture.theta4)
            seq_b.append(idx.inv_kappa_b)
        assert all(a > b for a, b in zip(seq_b, seq_b[1:])), seq_b
        assert seq_b[-1] < 1e-6
        report("singularity limits",
               f"inv_kappa_A tail={seq_a[-1]:.1e}, inv_kappa_B tail={seq_b[-1]:.1e}")

    def test_velocity_relation_oracle(self, fivebar):
        """A pdot = B thetadot residual < 1e-6 against central finite
        differences on 1000 postures (fixes the printed-equation ambiguity)."""
        res = check_velocity_relation(fivebar, n=1000, seed=44)
        assert res.samples == 1000
        assert res.max_error < 1e-6, res
        report("velocity relation", f"max residual {res.max_error:.2e} over 1000 postures")

    def test_workspace_boundary_singularity(self, fivebar):
        """Boundary arc points (radii L1 +- L2) are B-singular: nudged-inward
        IK yields inv_kappa_B < 1e-6 at every sampled point.

        A 1e-14 nudge keeps the distal sine at the 1e-7 scale (it grows like
        sqrt(nudge)).  Samples are taken strictly inside each arc and points
        within 0.3 units of a corner junction are skipped: where two arcs
        meet, both legs degenerate at once and 1/kappa(B) tends to 0/0, not 0.
        """
        checked = 0
        worst = 0.0
        for arc in workspace_boundary_arcs(fivebar):
            assert arc.radius in (13.0, 3.0)
            other = fivebar.base_b if arc.leg == 0 else fivebar.base_a
            for pt in sample_arc(arc, 100, trim=True):
                r_other = math.hypot(pt[0] - other[0], pt[1] - other[1])
                if min(13.0 - r_other, r_other - 3.0) < 0.3:
                    continue
                nudged = inward_point(fivebar, arc, pt, 1e-14)
                posture = inverse_kinematics(fivebar, nudged, MODE)
                assert posture is not None
                idx = indices_from_angles(posture.theta1, posture.theta2,
                                          posture.theta3, posture.theta4)
                worst = max(worst, idx.inv_kappa_b)
                checked += 1
        assert checked > 300
        assert worst < 1e-6
        report("workspace boundary", f"{checked} points, worst inv_kappa_B={worst:.2e}")

    def test_force_laws(self, fivebar):
        """Joint-limit law: exact zero on the security interval, exact f_max
        at the limits, continuity (max jump < 1e-6 f_max over 1e6 samples
        focused at the breakpoints); composed norm <= 6.4 N always."""
        lo, hi, delta = -2.0, 2.0, 0.2
        rng = np.random.default_rng(7)
        for q in rng.uniform(lo + delta, hi - delta, 10_000):
            assert joint_limit_force(float(q), lo, hi, delta, F_MAX) == 0.0
        assert joint_limit_force(hi, lo, hi, delta, F_MAX) == -F_MAX
        assert joint_limit_force(lo, lo, hi, delta, F_MAX) == F_MAX

        # jumps can only hide at breakpoints; sweep concentrated windows
        # (1.5e6 samples total, step small enough that slope * step stays
        # below the 1e-6 * f_max contract with 2x margin)
        worst_jump = 0.0
        window = delta / 8.0
        for b in (lo, lo + delta, hi - delta, hi):
            xs = np.linspace(b - window / 2, b + window / 2, 250_000)
            vals = np.array([joint_limit_force(float(x), lo, hi, delta, F_MAX) for x in xs])
            worst_jump = max(worst_jump, float(np.abs(np.diff(vals)).max()))
        for b in (0.1, 0.3):
            xs = np.clip(np.linspace(b - 0.0125, b + 0.0125, 250_000), 0.0, 1.0)
            vals = np.array([conditioning_force(float(x), 0.1, 0.3, F_MAX) for x in xs])
            worst_jump = max(worst_jump, float(np.abs(np.diff(vals)).max()))
        assert worst_jump < 1e-6 * F_MAX

        env = ForceEnvelope()
        for _ in range(20_000):
            parts = {
                "joint_limit": tuple(rng.uniform(-20, 20, 2)),
                "boundary": tuple(rng.uniform(-20, 20, 2)),
                "conditioning": tuple(rng.uniform(-20, 20, 2)),
            }
            cmd = compose_force(parts, "peak", env,
                                tuple(rng.uniform(-5, 5, 2)), float(rng.uniform(0, 30)))
            assert math.hypot(*cmd.f) <= 6.4
        report("force laws", f"max breakpoint jump {worst_jump:.2e} N; envelope held")

    def test_atlas_reproduction(self, fivebar):
        """Four 200x200 working-mode atlases in < 10 s; isotropy-locus
        vertices re-evaluate to |cos(theta3-theta4)| < 0.02; the four curve
        sets are pairwise distinct."""
        t0 = time.perf_counter()
        atlases = {
            str(mode): make_atlas(fivebar, mode, "inv_kappa_a", 200, 200,
                                  levels=[0.25, 0.5, 0.75, 1.0])
            for mode in ALL_MODES
        }
        elapsed = time.perf_counter() - t0
        assert elapsed < 10.0, f"took {elapsed:.2f} s"

        worst_cos = 0.0
        for mode_text, atlas in atlases.items():
            mode = WorkingMode.parse(mode_text)
            chains = atlas.curves.polylines[1.0]
            assert chains, f"no isotropy locus in mode {mode_text}"
            for chain in chains:
                for x, y in chain:
                    sol = ik_batch(fivebar, np.array([x]), np.array([y]), mode.s1, mode.s2)
                    assert bool(sol["valid"][0])
                    worst_cos = max(worst_cos, abs(float(sol["cosd"][0])))
        assert worst_cos < 0.02

        # pairwise distinct contour geometry: the ++/-- pair are congruent
        # mirror images (every reflection-invariant aggregate agrees), so the
        # signature must be the oriented vertex multiset itself
        signatures = {}
        for mode_text, atlas in atlases.items():
            sig = tuple(
                (level, len(chains),
                 tuple(sorted((round(float(x), 6), round(float(y), 6))
                              for c in chains for x, y in c)))
                for level, chains in sorted(atlas.curves.polylines.items())
            )
            signatures[mode_text] = sig
        assert len(set(signatures.values())) == 4, \
            {k: (v[0][0], v[0][1]) for k, v in signatures.items()}
        report("atlas reproduction",
               f"4 modes at 200x200 in {elapsed:.2f}s, worst |cos|={worst_cos:.3f}")

    def test_replay_determinism_and_budget(self, session_config):
        """Identical trace + config give byte-identical logs; haptic_tick p99
        < 1 ms over 1e6 ticks."""
        lines = bundled_trace_path("cross_a_locus").read_text().splitlines()
        log1 = [json.dumps(s.force.f) for s in replay(session_config, lines)]
        from kinetobench.session import encode_snapshot

        log_a = "\n".join(encode_snapshot(s) for s in replay(session_config, lines))
        log_b = "\n".join(encode_snapshot(s) for s in replay(session_config, lines))
        assert log_a == log_b
        assert log1  # trace is non-trivial

        engine = HapticEngine(session_config)
        rng = np.random.default_rng(3)
        # pointer path: a slow orbit inside the workspace plus noise
        angles = rng.uniform(0, 2 * math.pi, 1_000_000)
        radii = 1.5 + 0.5 * rng.random(1_000_000)
        pxs = 3.0 + radii * np.cos(angles)
        pys = 9.0 + radii * np.sin(angles)
        times = np.empty(1_000_000)
        for i in range(1_000_000):
            t0 = time.perf_counter_ns()
            engine.tick((float(pxs[i]), float(pys[i])))
            times[i] = time.perf_counter_ns() - t0
        p99 = float(np.percentile(times, 99))
        assert p99 < 1e6, f"p99 = {p99 / 1e3:.1f} us"
        report("replay determinism + budget",
               f"{len(log1)} identical ticks; p99 tick {p99 / 1e3:.1f} us over 1e6 ticks")

    def test_serial_chain_checks(self, rr_model, rrr_model):
        """2R Jacobian matches the symbolic derivation; kappa of
        [[-1,-1],[1,0]] = (3+sqrt5)/2 within 1e-12; conditioning length
        matches the log-grid oracle within 1e-4; characteristic length scales
        linearly with the model."""
        jac = twist_jacobian(rr_model, (0.0, math.pi / 2))
        assert np.allclose(jac.translational, [[-1.0, -1.0], [1.0, 0.0]], atol=1e-12)

        kappa = condition_number(np.array([[-1.0, -1.0], [1.0, 0.0]])).kappa
        golden = (3.0 + math.sqrt(5.0)) / 2.0
        assert abs(kappa - golden) < 1e-12 * golden

        q = (0.35, -0.9, 1.4)
        res = conditioning_length(rrr_model, q)
        jac3 = twist_jacobian(rrr_model, q)
        grid = np.logspace(-3, 3, 10_000)
        kappas = np.array([np.linalg.cond(homogenize(jac3, float(L)).matrix) for L in grid])
        k = int(np.argmin(kappas))
        xs = np.log(grid[k - 1: k + 2])
        fs = kappas[k - 1: k + 2]
        x_star = xs[1] - 0.5 * (xs[2] - xs[0]) / 2 * (fs[2] - fs[0]) / (fs[0] - 2 * fs[1] + fs[2])
        assert res.l_star == pytest.approx(math.exp(x_star), rel=1e-4)

        base = characteristic_length(rrr_model, grid_points=9)
        for s in (0.5, 4.0):
            scaled = characteristic_length(scale_chain(rrr_model, s), grid_points=9)
            assert scaled.length == pytest.approx(s * base.length, rel=1e-6)
        report("serial-chain checks",
               f"2R block exact, kappa={kappa:.12f}, L*={res.l_star:.6f}, "
               f"char length scales linearly")
