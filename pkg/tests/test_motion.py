"""Motion signals, turn detection and pruning, halt detection."""

from __future__ import annotations

import numpy as np
import pytest

from junctionscan.bundle import DistanceProfile, Telemetry
from junctionscan.errors import GridDimMismatch
from junctionscan.models import Direction
from junctionscan.motion import (
    HaltInterval,
    compute_signals,
    detect_halts,
    detect_turns,
)

RATE = 30.0


def flow_stack(n, value=0.0):
    return np.full((n, 4, 12), value, dtype="<f4")


def telemetry_for(speeds):
    speeds = np.asarray(speeds, dtype=float)
    ts = np.arange(speeds.size) * (1000.0 / RATE)
    return Telemetry(ts, speeds)


def profile_for(speeds):
    from junctionscan.bundle import integrate_distance
    return integrate_distance(telemetry_for(speeds))


class TestComputeSignals:
    def test_uniform_positive_flow(self):
        signals = compute_signals(flow_stack(40, 2.0))
        assert np.allclose(signals.m1, 2.0)
        assert np.allclose(signals.m2, 4.0)

    def test_antisymmetric_radial_cancels_in_m2(self):
        n = 40
        cols = np.arange(12, dtype=float)
        radial = (cols - 5.5) * 0.7
        flow = np.tile(radial, (n, 4, 1)).astype("<f4")
        signals = compute_signals(flow)
        assert np.allclose(signals.m2, 0.0, atol=1e-6)
        assert np.allclose(signals.m1, 0.0, atol=1e-6)

    def test_zero_flow(self):
        signals = compute_signals(flow_stack(20))
        assert not np.any(signals.m1)
        assert not np.any(signals.m2)

    def test_noisy_flag_widens_window(self):
        assert compute_signals(flow_stack(40), noisy=False).smoothing_window == 15
        assert compute_signals(flow_stack(40), noisy=True).smoothing_window == 31

    def test_bad_grid_shape(self):
        with pytest.raises(GridDimMismatch):
            compute_signals(np.zeros((10, 4, 10), dtype="<f4"))

    def test_median_windows_smooth_spikes(self):
        flow = flow_stack(60)
        flow[30] = 9.0  # one-frame glitch
        signals = compute_signals(flow)
        assert np.allclose(signals.m1, 0.0)


def turn_flow(n, start, end, amplitude):
    flow = flow_stack(n)
    flow[start:end] += amplitude
    return flow


class TestDetectTurns:
    def test_flat_signal_means_straight(self):
        signals = compute_signals(flow_stack(200))
        turns = detect_turns(signals, telemetry_for(np.full(200, 8.0)),
                             profile_for(np.full(200, 8.0)), RATE)
        assert turns == []

    def test_positive_pulse_is_left_turn(self):
        speeds = np.full(300, 8.0)
        signals = compute_signals(turn_flow(300, 120, 165, 3.0))  # 45 frames = 12 m
        turns = detect_turns(signals, telemetry_for(speeds), profile_for(speeds), RATE)
        assert len(turns) == 1
        turn = turns[0]
        assert turn.direction == Direction.LEFT
        assert turn.start_frame == pytest.approx(120, abs=1)
        assert turn.end_frame == pytest.approx(164, abs=1)
        assert turn.distance_span >= 4.5
        assert turn.speed_at_peak == 8.0
        assert turn.peak_value == pytest.approx(1.0)

    def test_negative_pulse_is_right_turn(self):
        speeds = np.full(300, 8.0)
        signals = compute_signals(turn_flow(300, 120, 165, -3.0))
        turns = detect_turns(signals, telemetry_for(speeds), profile_for(speeds), RATE)
        assert [t.direction for t in turns] == [Direction.RIGHT]
        assert turns[0].peak_value == pytest.approx(-1.0)

    def test_short_span_pruned(self):
        speeds = np.full(300, 8.0)
        signals = compute_signals(turn_flow(300, 120, 132, 3.0))  # 12 frames = 3.2 m
        turns = detect_turns(signals, telemetry_for(speeds), profile_for(speeds), RATE)
        assert turns == []

    def test_slow_creep_pruned_by_speed(self):
        speeds = np.full(300, 1.5)  # below 5 mph
        signals = compute_signals(turn_flow(300, 60, 260, 3.0))
        turns = detect_turns(signals, telemetry_for(speeds), profile_for(speeds), RATE)
        assert turns == []

    def test_weak_absolute_signal_pruned(self):
        speeds = np.full(300, 8.0)
        signals = compute_signals(turn_flow(300, 120, 165, 0.3))  # below the px/frame floor
        turns = detect_turns(signals, telemetry_for(speeds), profile_for(speeds), RATE)
        assert turns == []

    def test_direction_matches_m1_sign_at_peak(self):
        speeds = np.full(400, 9.0)
        flow = turn_flow(400, 60, 110, 3.0)
        flow[250:300] -= 2.5
        signals = compute_signals(flow)
        turns = detect_turns(signals, telemetry_for(speeds), profile_for(speeds), RATE)
        assert [t.direction for t in turns] == [Direction.LEFT, Direction.RIGHT]
        for t in turns:
            assert (signals.m1[t.peak_frame] > 0) == (t.direction == Direction.LEFT)

    def test_scaling_invariance(self):
        speeds = np.full(300, 8.0)
        base = turn_flow(300, 120, 165, 3.0)
        small = detect_turns(compute_signals(base), telemetry_for(speeds),
                             profile_for(speeds), RATE)
        big = detect_turns(compute_signals(base * 4.0), telemetry_for(speeds),
                           profile_for(speeds), RATE)
        assert [(t.start_frame, t.end_frame, t.direction) for t in small] == \
               [(t.start_frame, t.end_frame, t.direction) for t in big]

    def test_close_opposite_peaks_keep_stronger(self):
        speeds = np.full(300, 8.0)
        flow = turn_flow(300, 100, 145, 3.0)
        flow[150:190] -= 2.0  # opposite swing within 3 s of the first
        signals = compute_signals(flow)
        turns = detect_turns(signals, telemetry_for(speeds), profile_for(speeds), RATE)
        assert [t.direction for t in turns] == [Direction.LEFT]


class TestDetectHalts:
    def test_mid_clip_stop_detected(self):
        speeds = np.concatenate([np.full(100, 8.0), np.zeros(180), np.full(100, 8.0)])
        signals = compute_signals(flow_stack(380))
        halts = detect_halts(telemetry_for(speeds), signals, RATE)
        assert len(halts) == 1
        assert halts[0].start_frame == 100
        assert halts[0].end_frame == 280
        assert halts[0].min_speed == 0.0

    def test_brief_dip_rejected(self):
        speeds = np.concatenate([np.full(100, 8.0), np.zeros(12), np.full(100, 8.0)])
        signals = compute_signals(flow_stack(212))
        assert detect_halts(telemetry_for(speeds), signals, RATE) == []

    def test_never_slow_no_halts(self):
        speeds = np.full(200, 6.0)
        signals = compute_signals(flow_stack(200))
        assert detect_halts(telemetry_for(speeds), signals, RATE) == []

    def test_stop_and_go_merged(self):
        speeds = np.concatenate([np.full(60, 8.0), np.zeros(45), np.full(8, 1.2),
                                 np.zeros(45), np.full(60, 8.0)])
        signals = compute_signals(flow_stack(speeds.size))
        halts = detect_halts(telemetry_for(speeds), signals, RATE)
        assert len(halts) == 1
        assert halts[0].duration_s(RATE) > 3.0

    def test_m2_activity_vetoes_halt(self):
        speeds = np.concatenate([np.full(60, 8.0), np.zeros(60), np.full(60, 8.0)])
        flow = flow_stack(180, 0.0)
        flow[:, :, :] = 1.5  # persistent image motion even while "stopped"
        signals = compute_signals(flow)
        assert detect_halts(telemetry_for(speeds), signals, RATE) == []

    def test_duration_helper(self):
        assert HaltInterval(0, 60, 0.0).duration_s(RATE) == pytest.approx(2.0)
