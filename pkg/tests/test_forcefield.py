import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kinetobench.fivebar import boundary_distance
from kinetobench.forcefield import (
    ForceEnvelope,
    RampLaw,
    boundary_force,
    compose_force,
    conditioning_force,
    joint_limit_force,
    joint_limit_forces,
    viscosity_coefficient,
)

F_MAX = 6.4


class TestEnvelope:
    def test_defaults(self):
        env = ForceEnvelope()
        assert env.f_peak == 6.4
        assert env.f_continuous == 1.4
        assert env.position_resolution == 2e-5

    def test_invariant(self):
        with pytest.raises(ValueError):
            ForceEnvelope(f_peak=1.0, f_continuous=2.0)

    def test_ramp_law_invariants(self):
        with pytest.raises(ValueError):
            RampLaw(threshold=0.0, f_max=1.0)
        with pytest.raises(ValueError):
            RampLaw(threshold=0.1, f_max=-1.0)
        with pytest.raises(ValueError):
            RampLaw(threshold=0.1, f_max=1.0, shape="cubic")


class TestJointLimitForce:
    def test_interior_is_zero(self):
        assert joint_limit_force(0.0, -2.0, 2.0, 0.2, F_MAX) == 0.0

    def test_full_force_at_limit(self):
        assert joint_limit_force(2.0, -2.0, 2.0, 0.2, F_MAX) == -F_MAX
        assert joint_limit_force(-2.0, -2.0, 2.0, 0.2, F_MAX) == F_MAX

    def test_ramp_midpoint(self):
        assert joint_limit_force(1.9, -2.0, 2.0, 0.2, F_MAX) == pytest.approx(-3.2)

    def test_clamped_beyond_limit(self):
        assert joint_limit_force(2.7, -2.0, 2.0, 0.2, F_MAX) == -F_MAX

    def test_sign_points_toward_center(self):
        assert joint_limit_force(-1.95, -2.0, 2.0, 0.2, F_MAX) > 0
        assert joint_limit_force(1.95, -2.0, 2.0, 0.2, F_MAX) < 0

    @given(st.floats(-1.9, 1.9))
    def test_odd_symmetry(self, x):
        f_hi = joint_limit_force(x, -2.0, 2.0, 0.2, F_MAX)
        f_lo = joint_limit_force(-x, -2.0, 2.0, 0.2, F_MAX)
        assert f_hi == pytest.approx(-f_lo, abs=1e-12)

    def test_zero_threshold_is_hard_wall(self):
        assert joint_limit_force(1.999, -2.0, 2.0, 0.0, F_MAX) == 0.0
        assert joint_limit_force(2.5, -2.0, 2.0, 0.0, F_MAX) == -F_MAX

    def test_vector_wrapper(self, fivebar):
        forces = joint_limit_forces((0.0, 3.1), fivebar.limits, F_MAX)
        assert forces[0] == 0.0
        assert forces[1] < 0  # inside the upper threshold band (pi - 0.2)


class TestConditioningForce:
    def test_isotropic_is_free(self):
        assert conditioning_force(1.0, 0.1, 0.3, F_MAX) == 0.0

    def test_singular_is_full(self):
        assert conditioning_force(0.0, 0.1, 0.3, F_MAX) == F_MAX

    def test_ramp_midpoint(self):
        assert conditioning_force(0.2, 0.1, 0.3, F_MAX) == pytest.approx(3.2)

    def test_domain_validation(self):
        with pytest.raises(ValueError):
            conditioning_force(1.2, 0.1, 0.3, F_MAX)
        with pytest.raises(ValueError):
            conditioning_force(-0.1, 0.1, 0.3, F_MAX)
        with pytest.raises(ValueError):
            conditioning_force(0.5, 0.3, 0.1, F_MAX)

    def test_monotone_nonincreasing(self):
        xs = np.linspace(0.0, 1.0, 2000)
        vals = [conditioning_force(float(x), 0.1, 0.3, F_MAX) for x in xs]
        assert all(a >= b for a, b in zip(vals, vals[1:]))

    def test_viscosity_ramp(self):
        assert viscosity_coefficient(0.05, 0.1, 0.3, 20.0) == 20.0
        assert viscosity_coefficient(0.2, 0.1, 0.3, 20.0) == pytest.approx(10.0)
        assert viscosity_coefficient(0.9, 0.1, 0.3, 20.0) == 0.0


class TestBoundaryForce:
    def test_deep_interior_zero(self, fivebar):
        assert boundary_force(fivebar, (3.0, 6.0), 0.5, F_MAX) == (0.0, 0.0)

    def test_outer_circle_points_at_base(self, fivebar):
        f = boundary_force(fivebar, (5.0, 12.0), 0.5, F_MAX)
        norm = math.hypot(*f)
        assert norm == pytest.approx(F_MAX, rel=1e-12)
        # direction: radially toward base_a = -(5, 12)/13
        assert f[0] / norm == pytest.approx(-5.0 / 13.0, abs=1e-12)
        assert f[1] / norm == pytest.approx(-12.0 / 13.0, abs=1e-12)

    def test_half_depth_half_force(self, fivebar):
        delta = 0.5
        r = 13.0 - delta / 2.0
        p = (5.0 * r / 13.0, 12.0 * r / 13.0)
        assert boundary_distance(fivebar, p) == pytest.approx(delta / 2.0, abs=1e-12)
        f = boundary_force(fivebar, p, delta, F_MAX)
        assert math.hypot(*f) == pytest.approx(F_MAX / 2.0, rel=1e-9)

    def test_outside_pulls_back_at_full_force(self, fivebar):
        f = boundary_force(fivebar, (6.0, 14.4), 0.5, F_MAX)
        assert math.hypot(*f) == pytest.approx(F_MAX, rel=1e-12)
        # most violated constraint is leg a's outer circle: pull toward base_a
        assert f[0] < 0 and f[1] < 0

    def test_inner_circle_pushes_outward(self, fivebar):
        p = (0.2, 3.0)  # near base_a's inner circle, radially outward push
        f = boundary_force(fivebar, p, 0.5, F_MAX)
        r = math.hypot(*p)
        assert np.dot(f, p) / r > 0

    def test_delta_validation(self, fivebar):
        with pytest.raises(ValueError):
            boundary_force(fivebar, (3.0, 6.0), 0.0, F_MAX)


class TestComposeForce:
    def test_all_zero(self):
        cmd = compose_force({"conditioning": (0.0, 0.0)}, "peak", ForceEnvelope())
        assert cmd.f == (0.0, 0.0)
        assert not cmd.clamped

    def test_clamps_preserving_direction(self):
        cmd = compose_force({"boundary": (6.0, 8.0)}, "peak", ForceEnvelope())
        assert cmd.clamped
        norm = math.hypot(*cmd.f)
        assert norm <= 6.4
        assert norm == pytest.approx(6.4, rel=1e-12)
        assert cmd.f[1] / cmd.f[0] == pytest.approx(8.0 / 6.0, rel=1e-12)

    def test_continuous_mode_bound(self):
        cmd = compose_force({"boundary": (6.0, 8.0)}, "continuous", ForceEnvelope())
        assert math.hypot(*cmd.f) == pytest.approx(1.4, rel=1e-12)

    def test_zero_velocity_means_no_viscous(self):
        cmd = compose_force({}, "peak", ForceEnvelope(), velocity=(0.0, 0.0), viscosity=50.0)
        assert cmd.components["viscous"] == (0.0, 0.0)

    def test_viscous_opposes_velocity(self):
        cmd = compose_force({}, "peak", ForceEnvelope(), velocity=(1.0, 0.0), viscosity=2.0)
        assert cmd.components["viscous"] == (-2.0, 0.0)

    def test_rejects_nonfinite_component(self):
        with pytest.raises(ValueError):
            compose_force({"boundary": (math.inf, 0.0)}, "peak", ForceEnvelope())

    @given(
        st.lists(st.tuples(st.floats(-50, 50), st.floats(-50, 50)), min_size=1, max_size=4),
        st.tuples(st.floats(-10, 10), st.floats(-10, 10)),
        st.floats(0, 30),
    )
    def test_norm_never_exceeds_bound(self, vecs, velocity, viscosity):
        parts = {f"c{i}": v for i, v in enumerate(vecs)}
        cmd = compose_force(parts, "peak", ForceEnvelope(), velocity, viscosity)
        assert math.hypot(*cmd.f) <= 6.4


class TestContinuity:
    """Laws are piecewise linear: jumps can only hide at the breakpoints, so
    the sweeps concentrate there (a uniform sweep of the whole range would
    bound the jump by slope * step, which says nothing near 1e-6 * f_max)."""

    def test_joint_limit_continuity(self):
        lo, hi, delta = -2.0, 2.0, 0.2
        window = delta / 8.0
        breakpoints = (lo, lo + delta, hi - delta, hi)
        worst = 0.0
        for b in breakpoints:
            xs = np.linspace(b - window / 2, b + window / 2, 250_000)
            vals = np.array([joint_limit_force(float(x), lo, hi, delta, F_MAX) for x in xs])
            worst = max(worst, float(np.abs(np.diff(vals)).max()))
        assert worst < 1e-6 * F_MAX

    def test_conditioning_continuity(self):
        s_full, s_zero = 0.1, 0.3
        window = (s_zero - s_full) / 8.0
        worst = 0.0
        for b in (s_full, s_zero):
            xs = np.linspace(b - window / 2, b + window / 2, 500_000)
            xs = np.clip(xs, 0.0, 1.0)
            vals = np.array([conditioning_force(float(x), s_full, s_zero, F_MAX) for x in xs])
            worst = max(worst, float(np.abs(np.diff(vals)).max()))
        assert worst < 1e-6 * F_MAX
