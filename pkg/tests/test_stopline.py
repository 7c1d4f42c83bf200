"""Stop-line detection: profiles, rotation search, tracking, crossings."""

from __future__ import annotations

import math

import numpy as np
import pytest

from junctionscan.bundle import DistanceProfile
from junctionscan.signalkit import PeakParams
from junctionscan.stopline import (
    DEFAULT_PEAK_PARAMS,
    LineCandidate,
    crossing_event,
    detect_candidates,
    detect_candidates_stack,
    row_profile,
    track_lines,
)

BG = 30
BRIGHT = 255


def blank_frame(value=BG):
    return np.full((100, 500), value, dtype=np.uint8)


def band_frame(row, thickness=4, value=BRIGHT, tilt_deg=0, bg=BG):
    frame = blank_frame(bg)
    cols = np.arange(500)
    cx = (500 - 1) / 2.0
    centers = np.rint(row - (cols - cx) * math.tan(math.radians(tilt_deg))).astype(int)
    for off in range(thickness):
        rr = centers + off
        ok = (rr >= 0) & (rr < 100)
        frame[rr[ok], cols[ok]] = value
    return frame


class TestRowProfile:
    def test_uniform_frame_constant_profile(self):
        profile = row_profile(blank_frame(77), 0)
        assert np.allclose(profile, 77 / 255.0)

    def test_band_rows_peak_at_full_height(self):
        frame = band_frame(40, thickness=4)
        profile = row_profile(frame, 0)
        assert np.allclose(profile[40:44], 1.0)
        assert np.all(profile[:39] < 0.2)
        assert np.all(profile[45:] < 0.2)

    def test_tilted_band_recovered_at_matching_rotation(self):
        for tilt in (-3, 3):
            frame = band_frame(50, thickness=3, tilt_deg=tilt)
            best = max(range(-4, 9), key=lambda rot: float(row_profile(frame, rot).max()))
            assert best == tilt
            matched = row_profile(frame, tilt)
            assert matched.max() == pytest.approx(1.0)
            assert row_profile(frame, 0).max() < 0.6

    def test_offset_invariance_of_candidates(self):
        lifted = band_frame(40, value=240, bg=70)
        base = band_frame(40, value=210, bg=40)  # same contrast, shifted by +30
        got_base = detect_candidates(base)
        got_lifted = detect_candidates(lifted)
        assert [(c.row, c.rotation) for c in got_base] == [(c.row, c.rotation) for c in got_lifted]


class TestDetectCandidates:
    def test_single_band(self):
        cands = detect_candidates(band_frame(40), frame_idx=5)
        assert len(cands) == 1
        assert cands[0].frame_idx == 5
        assert cands[0].row in (40, 41, 42)
        assert cands[0].rotation == 0

    def test_wide_blob_rejected_by_width(self):
        frame = blank_frame()
        frame[35:65, 50:450] = BRIGHT  # arrow-sized blob
        assert detect_candidates(frame) == []

    def test_two_parallel_bands_give_two_candidates(self):
        frame = band_frame(30)
        cols = np.arange(500)
        frame[50:54, :] = BRIGHT
        cands = detect_candidates(frame)
        assert len(cands) == 2
        rows = sorted(c.row for c in cands)
        assert rows[0] in (30, 31, 32) and rows[1] in (50, 51, 52)

    def test_noise_only_frame_has_no_candidates(self, rng):
        frame = np.clip(rng.normal(BG, 8, (100, 500)), 0, 255).astype(np.uint8)
        assert detect_candidates(frame) == []

    def test_faint_band_rejected_by_height(self):
        # bright enough to be prominent but far below half of full scale
        frame = band_frame(40, value=100, bg=20)
        assert detect_candidates(frame) == []


class TestPrescreen:
    def test_stack_matches_per_frame_search(self, rng):
        frames = np.stack([
            band_frame(20), blank_frame(), band_frame(60, tilt_deg=2),
            np.clip(rng.normal(BG, 8, (100, 500)), 0, 255).astype(np.uint8),
            band_frame(90),
        ])
        screened = detect_candidates_stack(frames, prescreen=True)
        full = detect_candidates_stack(frames, prescreen=False)
        assert screened == full


def linear_track_candidates(rows, start_frame=0):
    return [[LineCandidate(start_frame + i, int(r), 0.9, 0)] for i, r in enumerate(rows)]


def profile_for(n, speed_mps=10.0, rate=30.0):
    return DistanceProfile(np.arange(n) * speed_mps / rate)


class TestTrackLines:
    def test_valid_descent_accepted(self):
        rows = np.linspace(10, 95, 20).astype(int)
        cands = linear_track_candidates(rows)
        distance = profile_for(25)
        tracks = track_lines(cands, distance)
        assert len(tracks) == 1
        assert tracks[0].first_frame == 0
        assert tracks[0].last_frame == 19
        assert tracks[0].distance_span >= 1.0

    def test_four_frames_rejected(self):
        rows = [10, 30, 50, 70]
        tracks = track_lines(linear_track_candidates(rows), profile_for(10))
        assert tracks == []

    def test_top_half_only_rejected(self):
        rows = np.linspace(10, 40, 12).astype(int)
        tracks = track_lines(linear_track_candidates(rows), profile_for(15))
        assert tracks == []

    def test_bottom_start_rejected(self):
        rows = np.linspace(55, 95, 12).astype(int)
        tracks = track_lines(linear_track_candidates(rows), profile_for(15))
        assert tracks == []

    def test_short_travel_rejected(self):
        rows = np.linspace(10, 95, 20).astype(int)
        slow = DistanceProfile(np.arange(25) * 0.03)  # 0.9 m/s at 30 Hz
        assert track_lines(linear_track_candidates(rows), slow) == []

    def test_gap_breaks_track(self):
        rows = np.linspace(10, 88, 20).astype(int)
        cands = linear_track_candidates(rows)
        cands[10] = []  # drop one frame
        tracks = track_lines(cands, profile_for(25))
        assert tracks == []  # first half never reaches the bottom; second half starts there

    def test_two_parallel_lines_tracked_separately(self):
        rows_a = np.linspace(10, 70, 18).astype(int)
        rows_b = rows_a + 25
        cands = [[LineCandidate(i, int(a), 0.9, 0), LineCandidate(i, int(b), 0.8, 0)]
                 for i, (a, b) in enumerate(zip(rows_a, rows_b))]
        tracks = track_lines(cands, profile_for(20))
        assert len(tracks) == 2

    def test_large_jump_starts_new_track(self):
        rows = list(np.linspace(10, 45, 10).astype(int)) + [95] * 3
        tracks = track_lines(linear_track_candidates(rows), profile_for(15))
        assert tracks == []  # descent never leaves the top half; jump segment too short


class TestCrossingEvent:
    def test_buffer_is_exactly_one_meter(self):
        rows = np.linspace(10, 95, 20).astype(int)
        distance = profile_for(40)
        track = track_lines(linear_track_candidates(rows), distance)[0]
        crossing = crossing_event(track, distance)
        assert crossing.distance - distance.at(track.last_frame) == pytest.approx(1.0)
        assert distance.at(crossing.frame_idx) >= crossing.distance
        assert distance.at(crossing.frame_idx - 1) < crossing.distance
        assert not crossing.clamped

    def test_stationary_vehicle_crosses_after_motion_resumes(self):
        rows = np.linspace(10, 95, 20).astype(int)
        meters = np.concatenate([np.arange(20) * 0.4, np.full(30, 7.6),
                                 7.6 + np.arange(10) * 0.4])
        distance = DistanceProfile(meters)
        track = track_lines(linear_track_candidates(rows), distance)[0]
        crossing = crossing_event(track, distance)
        assert crossing.frame_idx >= 50  # waits out the stationary stretch

    def test_track_at_clip_end_clamps(self):
        rows = np.linspace(10, 95, 20).astype(int)
        distance = profile_for(20)
        track = track_lines(linear_track_candidates(rows), distance)[0]
        crossing = crossing_event(track, distance)
        assert crossing.clamped
        assert crossing.frame_idx == 19
