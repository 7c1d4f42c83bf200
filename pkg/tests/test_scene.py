"""Detection filtering, signage classification, density, traffic features."""

from __future__ import annotations

import numpy as np
import pytest

from junctionscan.errors import EmptyStream
from junctionscan.models import DetectionBox, Manifest, RoiRect, Signage
from junctionscan.scene import (
    build_signage_evidence,
    classify_signage,
    density_and_passing,
    filter_detections,
    traffic_features,
)

MANIFEST = Manifest("seg", "veh", 30.0, 900, 1920, 1080, RoiRect(710, 900), "mps",
                    "2025-01-01T00:00:00Z")


def box(frame, label, x=1300.0, y=300.0, w=60.0, h=60.0, conf=0.9):
    return DetectionBox(frame, label, conf, x, y, w, h)


class TestFilterDetections:
    def test_left_half_stop_sign_dropped(self):
        filtered = filter_detections([box(0, "stop_sign", x=400.0)], MANIFEST)
        assert filtered.stop_signs == ()

    def test_tall_traffic_light_dropped(self):
        filtered = filter_detections([box(0, "traffic_light", x=900.0, h=120.0)], MANIFEST)
        assert filtered.traffic_lights == ()

    def test_peripheral_traffic_light_dropped(self):
        filtered = filter_detections([box(0, "traffic_light", x=100.0, h=40.0)], MANIFEST)
        assert filtered.traffic_lights == ()

    def test_vehicles_pass_through(self):
        filtered = filter_detections([box(0, "car", x=50.0), box(0, "bus", x=1800.0, w=100.0)],
                                     MANIFEST)
        assert len(filtered.vehicles) == 2

    def test_idempotent(self):
        raw = [box(0, "stop_sign", x=1500.0, h=100.0), box(0, "traffic_light", x=950.0, h=50.0),
               box(1, "car"), box(2, "person", x=200.0)]
        once = filter_detections(raw, MANIFEST)
        again = filter_detections(
            list(once.stop_signs + once.traffic_lights + once.vehicles + once.persons), MANIFEST)
        assert once == again


def sign_boxes(frames, x=1400.0, h=80.0, label="stop_sign"):
    return tuple(box(f, label, x=x, h=h, w=0.9 * h) for f in frames)


class TestClassifySignage:
    def test_many_stop_sign_frames(self):
        filtered = filter_detections(sign_boxes(range(150)), MANIFEST)
        assert classify_signage(filtered).signage == Signage.STOP_SIGN

    def test_twenty_frames_is_not_enough(self):
        filtered = filter_detections(sign_boxes(range(20)), MANIFEST)
        assert classify_signage(filtered).signage == Signage.NONE
        filtered = filter_detections(sign_boxes(range(21)), MANIFEST)
        assert classify_signage(filtered).signage == Signage.STOP_SIGN

    def test_nothing_qualifies(self):
        assert classify_signage(filter_detections([], MANIFEST)).signage == Signage.NONE

    def test_both_qualify_more_frames_wins(self):
        raw = sign_boxes(range(80)) + sign_boxes(range(30), x=950.0, h=50.0,
                                                 label="traffic_light")
        ev = classify_signage(filter_detections(raw, MANIFEST))
        assert ev.signage == Signage.STOP_SIGN
        assert ev.qualifying_frames == 80

    def test_tie_prefers_traffic_light(self):
        raw = sign_boxes(range(40)) + sign_boxes(range(40), x=950.0, h=50.0,
                                                 label="traffic_light")
        assert classify_signage(filter_detections(raw, MANIFEST)).signage == Signage.TRAFFIC_LIGHT


class TestDensityAndPassing:
    def test_growing_sign_then_vanishing(self):
        frames = range(100, 500)
        boxes = tuple(box(f, "stop_sign", x=1400.0, h=20.0 + 0.1 * (f - 100),
                          w=18.0 + 0.09 * (f - 100)) for f in frames)
        density, peaks, passing = density_and_passing(boxes, Signage.STOP_SIGN, 900, 30.0)
        assert passing == 499
        assert density.size == 900
        assert len(peaks) >= 1

    def test_cluster_bridges_small_gaps(self):
        frames = [f for f in range(100, 400) if f % 40 != 0]  # 1-frame dropouts
        boxes = sign_boxes(frames)
        _, _, passing = density_and_passing(boxes, Signage.STOP_SIGN, 900, 30.0)
        assert passing == 399

    def test_two_clusters_longest_wins(self):
        boxes = sign_boxes(list(range(50, 90)) + list(range(300, 500)))
        _, _, passing = density_and_passing(boxes, Signage.STOP_SIGN, 900, 30.0)
        assert passing == 499

    def test_single_light_array_passing_is_last_frame(self):
        boxes = tuple(box(f, "traffic_light", x=950.0, h=10.0 + 0.1 * f, w=25.0 + 0.25 * f)
                      for f in range(0, 420))
        density, peaks, passing = density_and_passing(boxes, Signage.TRAFFIC_LIGHT, 900, 30.0)
        assert len(peaks) == 1
        assert passing == 419

    def test_two_arrays_passing_at_interpeak_minimum(self):
        near = tuple(box(f, "traffic_light", x=950.0, h=5.0 + 0.2 * f, w=12.0 + 0.5 * f)
                     for f in range(0, 300))
        far = tuple(box(f, "traffic_light", x=980.0, h=5.0 + 0.18 * (f - 250),
                        w=12.0 + 0.45 * (f - 250)) for f in range(250, 600))
        density, peaks, passing = density_and_passing(near + far, Signage.TRAFFIC_LIGHT, 900, 30.0)
        assert len(peaks) == 2
        assert 299 < passing < peaks[1].index
        assert passing == 300  # first far-only frame is the raw minimum

    def test_empty_stream_rejected(self):
        with pytest.raises(EmptyStream):
            density_and_passing((), Signage.STOP_SIGN, 900, 30.0)

    def test_density_ignores_confidence(self):
        low = tuple(box(f, "stop_sign", x=1400.0, conf=0.3) for f in range(40))
        high = tuple(box(f, "stop_sign", x=1400.0, conf=0.99) for f in range(40))
        d1, _, _ = density_and_passing(low, Signage.STOP_SIGN, 100, 30.0)
        d2, _, _ = density_and_passing(high, Signage.STOP_SIGN, 100, 30.0)
        assert np.array_equal(d1, d2)

    def test_duplicate_boxes_take_max(self):
        single = tuple(box(f, "traffic_light", x=950.0, h=40.0, w=100.0) for f in range(40))
        doubled = single + tuple(box(f, "traffic_light", x=950.0, h=20.0, w=50.0)
                                 for f in range(40))
        d1, _, _ = density_and_passing(single, Signage.TRAFFIC_LIGHT, 100, 30.0)
        d2, _, _ = density_and_passing(doubled, Signage.TRAFFIC_LIGHT, 100, 30.0)
        assert np.array_equal(d1, d2)

    def test_evidence_passing_within_appearance(self):
        boxes = sign_boxes(range(60, 200))
        ev = build_signage_evidence(filter_detections(boxes, MANIFEST), 900, 30.0)
        assert ev.signage == Signage.STOP_SIGN
        assert ev.first_frame <= ev.passing_frame <= ev.last_frame


class TestTrafficFeatures:
    def test_constant_three_cars(self):
        boxes = tuple(box(f, "car", x=100.0 + 120 * k) for f in range(120) for k in range(3))
        features = traffic_features(boxes, 120, 30.0)
        assert np.allclose(features.density, 3.0)

    def test_empty(self):
        features = traffic_features((), 60, 30.0)
        assert not np.any(features.density)
        assert not np.any(features.cross_traffic_fraction)

    def test_alternating_counts_average_out(self):
        boxes = []
        for f in range(200):
            count = 2 if f % 2 == 0 else 4
            boxes.extend(box(f, "car", x=100.0 + 120 * k) for k in range(count))
        features = traffic_features(tuple(boxes), 200, 30.0)
        assert np.allclose(features.density[30:170], 3.0)

    def test_cross_traffic_fraction(self):
        wide = box(0, "truck", x=100.0, w=160.0, h=80.0)   # aspect 2.0
        square = box(0, "car", x=600.0, w=80.0, h=80.0)    # aspect 1.0
        features = traffic_features((wide, square), 10, 30.0)
        assert features.cross_traffic_fraction[0] == pytest.approx(0.5)
