"""Bundle model, serialization round-trips, and stream operations."""

from __future__ import annotations

import json

import numpy as np
import pytest

from junctionscan.bundle import (
    MPH_TO_MPS,
    DistanceProfile,
    Telemetry,
    align_streams,
    clip_segment,
    haversine_m,
    integrate_distance,
    load_bundle,
    write_bundle,
)
from junctionscan.errors import (
    EmptyTelemetry,
    FrameCountMismatch,
    MarkOutsideTrip,
    MissingStream,
    NonMonotonicTimestamps,
    SchemaViolation,
)
from junctionscan.models import Waypoint
from junctionscan.synth import Scenario, generate
from junctionscan.models import Maneuver, Signage


def make_case(tmp_path=None, **overrides):
    kwargs = dict(name="bundle-fixture", seed=7, signage=Signage.TRAFFIC_LIGHT,
                  maneuver=Maneuver.STRAIGHT, approach_speed_mps=10.0,
                  clip_length_m=80.0)
    kwargs.update(overrides)
    return generate(Scenario(**kwargs))


class TestRoundTrip:
    def test_write_load_write_is_byte_identical(self, tmp_path):
        case = make_case()
        first = tmp_path / "first"
        second = tmp_path / "second"
        write_bundle(case.bundle, first)
        reloaded = load_bundle(first)
        write_bundle(reloaded, second)
        for name in ["manifest.json", "telemetry.jsonl", "waypoints.jsonl",
                     "detections.jsonl", "headpose.jsonl", "roi.bin", "flow.bin",
                     "groundtruth.json"]:
            assert (first / name).read_bytes() == (second / name).read_bytes(), name

    def test_reload_preserves_streams(self, tmp_path):
        case = make_case()
        write_bundle(case.bundle, tmp_path / "b")
        reloaded = load_bundle(tmp_path / "b")
        assert reloaded.manifest.frame_count == case.bundle.manifest.frame_count
        assert np.array_equal(reloaded.roi, case.bundle.roi)
        assert np.array_equal(reloaded.flow, case.bundle.flow)
        assert np.array_equal(reloaded.telemetry.speed_mps, case.bundle.telemetry.speed_mps)
        assert reloaded.groundtruth == case.bundle.groundtruth

    def test_mph_speeds_converted_on_load(self, tmp_path):
        case = make_case()
        root = write_bundle(case.bundle, tmp_path / "b")
        manifest = json.loads((root / "manifest.json").read_text())
        manifest["speed_unit"] = "mph"
        (root / "manifest.json").write_text(json.dumps(manifest))
        lines = (root / "telemetry.jsonl").read_text().splitlines()
        record = json.loads(lines[0])
        record["speed"] = 5.0
        lines[0] = json.dumps(record)
        (root / "telemetry.jsonl").write_text("\n".join(lines) + "\n")
        reloaded = load_bundle(root)
        assert reloaded.telemetry.speed_mps[0] == pytest.approx(2.2352, abs=1e-12)

    def test_mph_and_mps_integrate_identically(self, tmp_path):
        ts = np.arange(100) * 33.0
        speeds = np.linspace(3.0, 9.0, 100)
        mps = integrate_distance(Telemetry(ts, speeds))
        mph_values = speeds / MPH_TO_MPS
        mph = integrate_distance(Telemetry(ts, mph_values * MPH_TO_MPS))
        assert np.max(np.abs(mps.meters - mph.meters)) < 1e-9


class TestLoaderErrors:
    def test_missing_stream_names_file(self, tmp_path):
        case = make_case()
        root = write_bundle(case.bundle, tmp_path / "b")
        (root / "flow.bin").unlink()
        with pytest.raises(MissingStream) as err:
            load_bundle(root)
        assert "flow.bin" in str(err.value)

    def test_non_monotonic_timestamps_indexed(self, tmp_path):
        case = make_case()
        root = write_bundle(case.bundle, tmp_path / "b")
        lines = (root / "telemetry.jsonl").read_text().splitlines()
        rec1 = json.loads(lines[1])
        rec2 = json.loads(lines[2])
        rec2["timestamp_ms"] = rec1["timestamp_ms"]
        lines[2] = json.dumps(rec2)
        (root / "telemetry.jsonl").write_text("\n".join(lines) + "\n")
        with pytest.raises(NonMonotonicTimestamps) as err:
            load_bundle(root)
        assert err.value.index == 2
        assert err.value.file == "telemetry.jsonl"

    def test_frame_count_mismatch(self, tmp_path):
        case = make_case()
        root = write_bundle(case.bundle, tmp_path / "b")
        lines = (root / "telemetry.jsonl").read_text().splitlines()
        (root / "telemetry.jsonl").write_text("\n".join(lines[:-1]) + "\n")
        with pytest.raises(FrameCountMismatch):
            load_bundle(root)

    def test_bad_detection_class(self, tmp_path):
        case = make_case()
        root = write_bundle(case.bundle, tmp_path / "b")
        with (root / "detections.jsonl").open("a") as fh:
            fh.write(json.dumps({"frame_idx": 0, "class": "zebra", "conf": 0.5,
                                 "x": 1, "y": 1, "w": 5, "h": 5}) + "\n")
        with pytest.raises(SchemaViolation) as err:
            load_bundle(root)
        assert "zebra" in str(err.value)

    def test_negative_speed_rejected(self, tmp_path):
        case = make_case()
        root = write_bundle(case.bundle, tmp_path / "b")
        lines = (root / "telemetry.jsonl").read_text().splitlines()
        rec = json.loads(lines[0])
        rec["speed"] = -1.0
        lines[0] = json.dumps(rec)
        (root / "telemetry.jsonl").write_text("\n".join(lines) + "\n")
        with pytest.raises(SchemaViolation):
            load_bundle(root)


class TestIntegrateDistance:
    def test_constant_speed_exact(self):
        ts = np.arange(60) * (1000.0 / 30.0)
        profile = integrate_distance(Telemetry(ts, np.full(60, 10.0)))
        assert profile.meters[-1] == pytest.approx(59 / 30 * 10, abs=1e-9)

    def test_zero_speed_zero_distance(self):
        ts = np.arange(10) * 33.0
        profile = integrate_distance(Telemetry(ts, np.zeros(10)))
        assert np.array_equal(profile.meters, np.zeros(10))

    def test_linear_ramp_is_exact_for_trapezoid(self):
        n = 301
        ts = np.linspace(0.0, 10_000.0, n)
        speeds = np.linspace(0.0, 10.0, n)
        profile = integrate_distance(Telemetry(ts, speeds))
        assert profile.meters[-1] == pytest.approx(50.0, abs=1e-6)

    def test_starts_at_zero_and_non_decreasing(self, rng):
        ts = np.cumsum(rng.uniform(20, 40, 50))
        speeds = rng.uniform(0, 20, 50)
        profile = integrate_distance(Telemetry(ts, speeds))
        assert profile.meters[0] == 0.0
        assert np.all(np.diff(profile.meters) >= 0)

    def test_empty_rejected(self):
        with pytest.raises(EmptyTelemetry):
            integrate_distance(Telemetry(np.array([]), np.array([])))


class TestAlignStreams:
    def test_identical_timestamps_identity(self):
        ts = np.arange(10) * 33.3
        assert align_streams(ts, ts) == list(range(10))

    def test_small_offset_all_valid(self):
        ref = np.arange(20) * (1000.0 / 30.0)
        other = ref + 10.0
        mapping = align_streams(ref, other, max_skew_ms=17.0)
        assert mapping == list(range(20))

    def test_missing_middle_frames_invalid(self):
        ref = np.arange(20) * (1000.0 / 30.0)
        keep = [i for i in range(20) if not 8 <= i < 13]
        other = ref[keep]
        mapping = align_streams(ref, other, max_skew_ms=17.0)
        for i in range(20):
            if 8 <= i < 13:
                if mapping[i] is not None:
                    # nearest surviving frame must still be within skew
                    assert abs(other[mapping[i]] - ref[i]) <= 17.0
            else:
                assert other[mapping[i]] == ref[i]
        assert mapping[9] is None and mapping[10] is None and mapping[11] is None

    def test_empty_input(self):
        assert align_streams(np.array([]), np.array([1.0])) == []


class TestClipSegment:
    def build_trip(self, n=1800, speed=10.0):
        ts = np.arange(n) * (1000.0 / 30.0)
        telemetry = Telemetry(ts, np.full(n, speed))
        meters = integrate_distance(telemetry).meters
        lat0, lon0 = 42.30, -71.10
        waypoints = tuple(
            Waypoint(float(ts[f]), lat0 + meters[f] / 111194.9, lon0)
            for f in range(0, n, 60))
        case = make_case()
        base = case.bundle
        roi = np.zeros((n, 100, 500), dtype=np.uint8)
        flow = np.zeros((n, 4, 12), dtype="<f4")
        from dataclasses import replace
        manifest = replace(base.manifest, segment_id="trip-1", frame_count=n)
        from junctionscan.bundle import SegmentBundle
        return SegmentBundle(manifest, telemetry, waypoints, (), roi, flow), lat0, lon0, meters

    def test_mark_at_midpoint_gives_20s_clip(self):
        trip, lat0, lon0, meters = self.build_trip()
        mid = meters[900]
        clip = clip_segment(trip, lat0 + mid / 111194.9, lon0)
        # 100 m at 10 m/s on each side is 10 s each way
        duration = clip.telemetry.timestamp_ms[-1] / 1000.0
        assert duration == pytest.approx(20.0, abs=0.3)
        assert not clip.truncated
        assert clip.telemetry.timestamp_ms[0] == 0.0
        d = integrate_distance(clip.telemetry)
        assert d.meters[-1] == pytest.approx(200.0, abs=1.0)

    def test_far_mark_rejected(self):
        trip, lat0, lon0, _ = self.build_trip()
        with pytest.raises(MarkOutsideTrip):
            clip_segment(trip, lat0 + 5000 / 111194.9, lon0)

    def test_short_leadin_truncated(self):
        trip, lat0, lon0, meters = self.build_trip()
        near_start = meters[120]
        clip = clip_segment(trip, lat0 + near_start / 111194.9, lon0)
        assert clip.truncated
        assert clip.telemetry.timestamp_ms[0] == 0.0

    def test_all_streams_share_frame_count(self):
        trip, lat0, lon0, meters = self.build_trip()
        clip = clip_segment(trip, lat0 + meters[900] / 111194.9, lon0)
        n = clip.frame_count
        assert len(clip.telemetry) == n
        assert clip.roi.shape[0] == n
        assert clip.flow.shape[0] == n


class TestHaversine:
    def test_zero_distance(self):
        assert haversine_m(42.3, -71.1, 42.3, -71.1) == 0.0

    def test_one_degree_latitude(self):
        assert haversine_m(42.0, -71.0, 43.0, -71.0) == pytest.approx(111194.9, rel=1e-3)


class TestDistanceProfile:
    def test_frame_at_first_reaching(self):
        profile = DistanceProfile(np.array([0.0, 1.0, 2.0, 3.0]))
        assert profile.frame_at(1.5) == (2, False)
        assert profile.frame_at(0.0) == (0, False)

    def test_frame_at_clamps(self):
        profile = DistanceProfile(np.array([0.0, 1.0]))
        assert profile.frame_at(99.0) == (1, True)
