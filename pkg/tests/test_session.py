import io
import json
import math

import pytest

from kinetobench.session import (
    HapticEngine,
    SessionConfig,
    TraceError,
    WorkingMode,
    encode_snapshot,
    load_session_config,
    replay,
    replay_to_log,
    sensitivity_map,
)
from kinetobench.traces import bundled_trace_path, pointer_line


class TestSensitivityMap:
    def test_fine_fixed_scale(self):
        assert sensitivity_map((2.0, 0.0), "fine", scale_factors={"fine": 0.5}) == (1.0, 0.0)

    def test_screen_mode_tracks_zoom(self):
        v1 = sensitivity_map((1.0, 2.0), "screen", view_zoom=1.5)
        v2 = sensitivity_map((1.0, 2.0), "screen", view_zoom=3.0)
        assert v2 == (2.0 * v1[0], 2.0 * v1[1])

    def test_origin_preserving(self):
        for mode in ("rough", "medium", "fine"):
            assert sensitivity_map((0.0, 0.0), mode) == (0.0, 0.0)
        assert sensitivity_map((0.0, 0.0), "screen", view_zoom=2.0) == (0.0, 0.0)

    def test_zoom_validation(self):
        with pytest.raises(ValueError):
            sensitivity_map((1.0, 0.0), "screen", view_zoom=0.0)

    def test_unknown_sensitivity(self):
        with pytest.raises(ValueError):
            sensitivity_map((1.0, 0.0), "hyperfine")


class TestSessionConfig:
    def test_rate_ordering_enforced(self, fivebar):
        with pytest.raises(ValueError, match="rates"):
            SessionConfig(model=fivebar, haptic_hz=100, analysis_hz=1000, broadcast_hz=60)

    def test_default_home_inside_workspace(self, fivebar):
        cfg = SessionConfig(model=fivebar)
        engine = HapticEngine(cfg)  # would raise if home were unreachable
        assert engine.tick(None).posture is not None

    def test_bundled_session_config_loads(self):
        from kinetobench.model import bundled_model_path

        cfg = load_session_config(bundled_model_path("session_6_8_5").parent / "session_6_8_5.yaml")
        assert cfg.haptic_hz == 1000
        assert cfg.mode == WorkingMode(-1, 1)
        assert cfg.envelope.f_peak == 6.4

    def test_bad_home_rejected(self, fivebar):
        cfg = SessionConfig(model=fivebar, home=(100.0, 0.0))
        with pytest.raises(ValueError, match="outside"):
            HapticEngine(cfg)


class TestHapticTick:
    def test_stationary_healthy_point_zero_force(self, session_config):
        engine = HapticEngine(session_config)
        # (3, 12): B isotropic, inv_kappa_a = 0.75 > s_zero, limits far,
        # boundary margin 0.63 > delta: every law is silent
        snap = engine.tick((3.0, 12.0))
        assert snap.posture is not None and not snap.out_of_workspace
        assert snap.force.f == (0.0, 0.0)
        assert not snap.force.clamped
        assert snap.classification.kind == "B_isotropic"

    def test_boundary_point_saturates(self, session_config):
        engine = HapticEngine(session_config)
        snap = engine.tick((5.0, 12.0))
        assert snap.posture is not None
        assert snap.indices.inv_kappa_b == pytest.approx(0.0, abs=1e-9)
        norm = math.hypot(*snap.force.f)
        assert norm == pytest.approx(6.4, rel=1e-9)
        assert snap.force.clamped
        assert math.hypot(*snap.force.components["boundary"]) == pytest.approx(6.4, rel=1e-9)
        assert math.hypot(*snap.force.components["conditioning"]) > 0

    def test_out_of_workspace_pullback(self, session_config):
        engine = HapticEngine(session_config)
        snap = engine.tick((3.0, 20.0))
        assert snap.out_of_workspace
        assert snap.posture is not None  # retains the last valid posture
        assert snap.indices is None
        norm = math.hypot(*snap.force.f)
        assert norm == pytest.approx(6.4, rel=1e-9)
        # pull-back points broadly back toward the workspace (downward here)
        assert snap.force.f[1] < 0

    def test_every_tick_produces_snapshot(self, session_config):
        engine = HapticEngine(session_config)
        points = [(3.0, 10.0), (3.0, 20.0), (100.0, 0.0), (3.0, 8.0), None]
        ticks = [engine.tick(p) for p in points]
        assert [s.tick for s in ticks] == [0, 1, 2, 3, 4]

    def test_velocity_estimate(self, session_config):
        engine = HapticEngine(session_config)
        engine.tick((3.0, 10.0))
        snap = engine.tick((3.0, 10.1))
        # 0.1 units per 1 ms tick = 100 units/s
        assert snap.velocity[1] == pytest.approx(100.0, rel=1e-9)

    def test_mode_changes_only_explicitly(self, session_config):
        engine = HapticEngine(session_config)
        for y in (12.0, 10.0, 8.0, math.sqrt(60.0), 7.5, 7.0):
            snap = engine.tick((3.0, y))
            assert engine.mode == WorkingMode(-1, 1)
            if snap.posture is not None and snap.posture.mode is not None:
                assert snap.posture.mode == WorkingMode(-1, 1)
        engine.set_mode(WorkingMode(1, -1))
        assert engine.mode == WorkingMode(1, -1)

    def test_update_params(self, session_config):
        engine = HapticEngine(session_config)
        engine.update_params(s_zero=0.9, sensitivity="rough")
        assert engine.config.force.s_zero == 0.9
        assert engine.config.sensitivity == "rough"

    def test_joint_limit_force_activates(self, fivebar):
        # drive theta1 into its security band via a point near full fold
        cfg = SessionConfig(model=fivebar, mode=WorkingMode(-1, 1), sensitivity="medium",
                            home=(3.0, 10.0))
        engine = HapticEngine(cfg)
        found = False
        for x, y in [(-3.05, 0.5), (-3.1, 0.3), (-3.2, 0.7)]:
            snap = engine.tick((x, y))
            if snap.posture is None or snap.out_of_workspace:
                continue
            if snap.force.components.get("joint_limit", (0.0, 0.0)) != (0.0, 0.0):
                found = True
                break
        assert found, "expected a joint-limit force near the wrap seam"


class TestSnapshotEncoding:
    def test_infinite_kappa_maps_to_null(self, session_config):
        engine = HapticEngine(session_config)
        snap = engine.tick((3.0, math.sqrt(60.0)))  # A singular: kappa_a = inf
        doc = json.loads(encode_snapshot(snap))
        assert doc["indices"]["kappa_a"] is None
        assert doc["indices"]["inv_kappa_a"] == 0.0
        # symmetric posture: A-singular and B-isotropic at once
        assert doc["class"] == "double"
        assert "A_singular" in doc["flags"]

    def test_force_reserves_third_component(self, session_config):
        engine = HapticEngine(session_config)
        doc = json.loads(encode_snapshot(engine.tick((3.0, 10.0))))
        assert doc["force"]["f"][2] == 0.0


class TestReplay:
    def test_empty_trace_empty_log(self, session_config, tmp_path):
        trace = tmp_path / "empty.jsonl"
        trace.write_text("")
        out = io.StringIO()
        count = replay_to_log(session_config, trace, out)
        assert count == 0
        assert out.getvalue() == ""

    def test_deterministic_bitwise(self, session_config, tmp_path):
        trace = bundled_trace_path("cross_a_locus")
        a = io.StringIO()
        b = io.StringIO()
        replay_to_log(session_config, trace, a)
        replay_to_log(session_config, trace, b)
        assert a.getvalue() == b.getvalue()
        assert a.getvalue()

    def test_singularity_crossing_saturates(self, session_config):
        lines = bundled_trace_path("cross_a_locus").read_text().splitlines()
        min_inv_a = math.inf
        max_norm = 0.0
        for snap in replay(session_config, lines):
            if snap.indices is not None:
                min_inv_a = min(min_inv_a, snap.indices.inv_kappa_a)
            max_norm = max(max_norm, math.hypot(*snap.force.f))
        assert min_inv_a < 1e-3
        assert max_norm == pytest.approx(6.4, abs=1e-9)

    def test_latest_value_semantics(self, session_config):
        # samples 2 and 3 both land between tick 0 and tick 1: the tick
        # consumes only the most recent one, never a queue
        lines = [
            pointer_line(1, 0, 3.0, 10.0),
            pointer_line(2, 500_000, 3.0, 11.0),
            pointer_line(3, 900_000, 3.0, 12.0),
        ]
        snaps = list(replay(session_config, lines))
        assert len(snaps) == 2
        assert snaps[0].target == (3.0, 10.0)
        assert snaps[1].target == (3.0, 12.0)

    def test_malformed_line_reports_number(self, session_config):
        lines = [pointer_line(1, 0, 3.0, 10.0), "{not json"]
        with pytest.raises(TraceError, match="line 2"):
            list(replay(session_config, lines))

    def test_seq_must_increase(self, session_config):
        lines = [pointer_line(5, 0, 3.0, 10.0), pointer_line(5, 1000, 3.0, 10.0)]
        with pytest.raises(TraceError, match="strictly increasing"):
            list(replay(session_config, lines))

    def test_time_must_not_go_backwards(self, session_config):
        lines = [pointer_line(1, 5000, 3.0, 10.0), pointer_line(2, 100, 3.0, 10.0)]
        with pytest.raises(TraceError, match="backwards"):
            list(replay(session_config, lines))
