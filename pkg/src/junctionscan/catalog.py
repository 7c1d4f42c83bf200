"""The standard scenario catalog.

Deterministic table of generator scenarios covering every signage and
maneuver combination (except the excluded unsigned straight-through),
every entry/exit rule branch at least twice, the stop-line failure modes
(absent line, crosswalk and road-arrow distractors, tilted lines),
curve-versus-turn confusers, two constructed complete-failure cases, and
a moderate-noise sweep.  The packaged ``data/catalog.json`` is the
runtime copy of this table; a unit test keeps the two in sync.

Catalog conventions: crosswalk distractors only appear together with a
present stop line (the association rule prefers the latest crossing, so
a mid-block crosswalk with no stop line would win the association);
two-array scenarios stay at or below 12 m/s so the array density peaks
clear the 2 s peak spacing.
"""

from __future__ import annotations

import json
from pathlib import Path

from .models import Direction, Geometry, Maneuver, Signage
from .synth import (
    DistractorSpec,
    HaltSpec,
    NoiseSpec,
    ScanSpec,
    Scenario,
    scenario_seed,
)

MODERATE_NOISE = NoiseSpec(flow_sigma=0.15, roi_sigma=8.0,
                           detection_dropout_rate=0.05, detection_jitter_px=2.0)

_ENTRY_GUESS = {
    "stop_sign": 89.0,
    "light_line": 88.0,
    "light_noline_single": 93.0,
    "light_noline_multi": 92.0,
    "none": 94.0,
}


def _scans(kind: str, extra: tuple[ScanSpec, ...] = ()) -> tuple[ScanSpec, ...]:
    entry = _ENTRY_GUESS[kind]
    base = (
        ScanSpec(entry - 22.0, Direction.LEFT, 42.0, 14),
        ScanSpec(entry + 6.0, Direction.RIGHT, 35.0, 11),
    )
    return base + extra


def _s(name: str, **kwargs) -> Scenario:
    kwargs.setdefault("seed", scenario_seed(name))
    return Scenario(name=name, **kwargs)


def build_catalog() -> list[Scenario]:
    scenarios: list[Scenario] = []
    add = scenarios.append

    # --- stop signs -------------------------------------------------------
    add(_s("ss-straight-08", signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=8.0, stop_line_present=False,
           halt=HaltSpec(1.5, 2.2), scans=_scans("stop_sign")))
    add(_s("ss-straight-11-rolling", signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=11.0, stop_line_present=False, scans=_scans("stop_sign")))
    add(_s("ss-straight-12", signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=12.0, stop_line_present=False,
           halt=HaltSpec(1.5, 2.0), scans=_scans("stop_sign")))
    add(_s("ss-straight-09-line", signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=9.0, stop_line_present=True,
           halt=HaltSpec(1.5, 2.5), scans=_scans("stop_sign")))
    add(_s("ss-straight-08-arrow", signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=8.0, stop_line_present=False,
           distractors=DistractorSpec(road_arrows=1), scans=_scans("stop_sign")))
    add(_s("ss-straight-10-wiggle", signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=10.0, stop_line_present=False,
           distractors=DistractorSpec(curve_instead_of_turn=True), scans=_scans("stop_sign")))
    add(_s("ss-left-09", signage=Signage.STOP_SIGN, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, stop_line_present=False,
           halt=HaltSpec(1.5, 2.0), scans=_scans("stop_sign")))
    add(_s("ss-left-06-slow", signage=Signage.STOP_SIGN, maneuver=Maneuver.LEFT,
           approach_speed_mps=6.0, stop_line_present=False, scans=_scans("stop_sign")))
    add(_s("ss-left-09-curve", signage=Signage.STOP_SIGN, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, stop_line_present=False,
           distractors=DistractorSpec(curve_instead_of_turn=True), scans=_scans("stop_sign")))
    add(_s("ss-left-11-traffic", signage=Signage.STOP_SIGN, maneuver=Maneuver.LEFT,
           approach_speed_mps=11.0, stop_line_present=False,
           ambient_vehicles=3, cross_traffic=True, scans=_scans("stop_sign")))
    add(_s("ss-right-09", signage=Signage.STOP_SIGN, maneuver=Maneuver.RIGHT,
           approach_speed_mps=9.0, stop_line_present=False,
           halt=HaltSpec(1.5, 2.0), geometry=Geometry.T, scans=_scans("stop_sign")))
    add(_s("ss-right-08-scans", signage=Signage.STOP_SIGN, maneuver=Maneuver.RIGHT,
           approach_speed_mps=8.0, stop_line_present=False,
           scans=_scans("stop_sign", (ScanSpec(40.0, Direction.LEFT, 55.0, 16),
                                      ScanSpec(120.0, Direction.RIGHT, 30.0, 9)))))

    # --- traffic lights, stop line present --------------------------------
    add(_s("tl-straight-1a-line-10", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=10.0, light_arrays=1, scans=_scans("light_line")))
    add(_s("tl-straight-1a-line-08", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=8.0, light_arrays=1, ambient_vehicles=2,
           scans=_scans("light_line")))
    add(_s("tl-straight-1a-line-14", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=14.0, light_arrays=1, scans=_scans("light_line")))
    add(_s("tl-straight-2a-line-10", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=10.0, light_arrays=2, scans=_scans("light_line")))
    add(_s("tl-straight-2a-line-08", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=8.0, light_arrays=2, scans=_scans("light_line")))
    add(_s("tl-straight-2a-line-12", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=12.0, light_arrays=2, scans=_scans("light_line")))
    add(_s("tl-left-1a-line-09", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, light_arrays=1, scans=_scans("light_line")))
    add(_s("tl-left-2a-line-11", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=11.0, light_arrays=2, scans=_scans("light_line")))
    add(_s("tl-left-1a-line-09-curve", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, light_arrays=1,
           distractors=DistractorSpec(curve_instead_of_turn=True), scans=_scans("light_line")))
    add(_s("tl-left-2a-line-09-crosswalk", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, light_arrays=2,
           distractors=DistractorSpec(crosswalk_lines=2), scans=_scans("light_line")))
    add(_s("tl-right-1a-line-09", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
           approach_speed_mps=9.0, light_arrays=1, geometry=Geometry.T,
           scans=_scans("light_line")))
    add(_s("tl-right-2a-line-11", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
           approach_speed_mps=11.0, light_arrays=2, scans=_scans("light_line")))
    add(_s("tl-right-2a-line-10-tilt", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
           approach_speed_mps=10.0, light_arrays=2, line_tilt_deg=3,
           scans=_scans("light_line")))
    add(_s("tl-straight-1a-line-10-tilt", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=10.0, light_arrays=1,
           line_tilt_deg=2, scans=_scans("light_line")))
    add(_s("tl-left-1a-line-09-tilt", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, light_arrays=1, line_tilt_deg=-3,
           scans=_scans("light_line")))
    add(_s("tl-straight-1a-line-10-crosswalk", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=10.0, light_arrays=1,
           distractors=DistractorSpec(crosswalk_lines=2), scans=_scans("light_line")))
    add(_s("tl-straight-1a-line-09-wiggle", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=9.0, light_arrays=1,
           distractors=DistractorSpec(curve_instead_of_turn=True), scans=_scans("light_line")))
    add(_s("tl-straight-1a-line-10-traffic", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=10.0, light_arrays=1,
           ambient_vehicles=3, cross_traffic=True, scans=_scans("light_line")))

    # --- traffic lights, halts at the line --------------------------------
    add(_s("tl-straight-1a-haltpast-10", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=10.0, light_arrays=1,
           halt=HaltSpec(-1.0, 6.0), scans=_scans("light_line")))
    add(_s("tl-straight-2a-haltpast-08", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=8.0, light_arrays=2,
           halt=HaltSpec(-1.5, 4.0), scans=_scans("light_line")))
    add(_s("tl-left-1a-haltpast-09", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, light_arrays=1, halt=HaltSpec(-1.0, 5.0),
           scans=_scans("light_line")))
    add(_s("tl-right-1a-haltpast-10", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
           approach_speed_mps=10.0, light_arrays=1, halt=HaltSpec(-1.2, 4.5),
           scans=_scans("light_line")))
    add(_s("tl-straight-1a-haltbefore-09", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=9.0, light_arrays=1,
           halt=HaltSpec(2.0, 3.0), scans=_scans("light_line")))
    add(_s("tl-right-2a-haltbefore-09", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
           approach_speed_mps=9.0, light_arrays=2, halt=HaltSpec(2.0, 2.5),
           scans=_scans("light_line")))

    # --- traffic lights, no usable stop line ------------------------------
    add(_s("tl-straight-1a-noline-10", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=10.0, light_arrays=1, stop_line_present=False,
           scans=_scans("light_noline_single")))
    add(_s("tl-straight-1a-noline-13", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=13.0, light_arrays=1, stop_line_present=False,
           scans=_scans("light_noline_single")))
    add(_s("tl-straight-2a-noline-10", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=10.0, light_arrays=2, stop_line_present=False,
           scans=_scans("light_noline_multi")))
    add(_s("tl-straight-2a-noline-12", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=12.0, light_arrays=2, stop_line_present=False,
           scans=_scans("light_noline_multi")))
    add(_s("tl-left-2a-noline-09", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, light_arrays=2, stop_line_present=False,
           scans=_scans("light_noline_multi")))
    add(_s("tl-left-1a-noline-11", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=11.0, light_arrays=1, stop_line_present=False,
           scans=_scans("light_noline_single")))
    add(_s("tl-right-1a-noline-10", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
           approach_speed_mps=10.0, light_arrays=1, stop_line_present=False,
           scans=_scans("light_noline_single")))
    add(_s("tl-straight-1a-noline-halt-09", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=9.0, light_arrays=1,
           stop_line_present=False, halt=HaltSpec(2.0, 3.0),
           scans=_scans("light_noline_single")))

    # --- unsigned intersections -------------------------------------------
    add(_s("none-left-08", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=8.0, stop_line_present=False, geometry=Geometry.T,
           scans=_scans("none")))
    add(_s("none-left-10", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=10.0, stop_line_present=False, geometry=Geometry.T,
           scans=_scans("none")))
    add(_s("none-left-12", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=12.0, stop_line_present=False, geometry=Geometry.Y,
           scans=_scans("none")))
    add(_s("none-left-06-tee", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=6.0, stop_line_present=False, geometry=Geometry.T,
           scans=_scans("none")))
    add(_s("none-left-09-bigscan", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, stop_line_present=False, geometry=Geometry.T,
           scans=_scans("none", (ScanSpec(96.0, Direction.LEFT, 95.0, 30),))))
    add(_s("none-right-08", signage=Signage.NONE, maneuver=Maneuver.RIGHT,
           approach_speed_mps=8.0, stop_line_present=False, geometry=Geometry.T,
           scans=_scans("none")))
    add(_s("none-right-10-arrow", signage=Signage.NONE, maneuver=Maneuver.RIGHT,
           approach_speed_mps=10.0, stop_line_present=False, geometry=Geometry.T,
           distractors=DistractorSpec(road_arrows=1), scans=_scans("none")))
    add(_s("none-right-12", signage=Signage.NONE, maneuver=Maneuver.RIGHT,
           approach_speed_mps=12.0, stop_line_present=False, geometry=Geometry.Y,
           scans=_scans("none")))
    add(_s("none-right-09-curve", signage=Signage.NONE, maneuver=Maneuver.RIGHT,
           approach_speed_mps=9.0, stop_line_present=False, geometry=Geometry.T,
           distractors=DistractorSpec(curve_instead_of_turn=True), scans=_scans("none")))
    add(_s("none-left-09-compound", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, stop_line_present=False, geometry=Geometry.T,
           scans=_scans("none", (ScanSpec(80.0, Direction.LEFT, 60.0, 24, compound=True),))))

    # --- constructed complete failures (pipeline must report Unsupported) --
    add(_s("none-left-08-shortturn", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=8.0, stop_line_present=False, geometry=Geometry.T,
           turn_arc_m=3.0, scans=_scans("none")))
    add(_s("none-left-09-flatturn", signage=Signage.NONE, maneuver=Maneuver.LEFT,
           approach_speed_mps=9.0, stop_line_present=False, geometry=Geometry.T,
           turn_amplitude=0.3, scans=_scans("none")))

    # --- compound-scan and scan-burst coverage on signed clips -------------
    add(_s("tl-straight-1a-line-08-scanburst", signage=Signage.TRAFFIC_LIGHT,
           maneuver=Maneuver.STRAIGHT, approach_speed_mps=8.0, light_arrays=1,
           scans=_scans("light_line", (ScanSpec(55.0, Direction.LEFT, 48.0, 40, compound=True),
                                       ScanSpec(130.0, Direction.LEFT, 28.0, 8)))))
    add(_s("tl-straight-2a-line-09", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=9.0, light_arrays=2, scans=_scans("light_line")))
    add(_s("tl-straight-2a-line-11", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=11.0, light_arrays=2, ambient_vehicles=1,
           scans=_scans("light_line")))
    add(_s("tl-left-1a-line-12", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
           approach_speed_mps=12.0, light_arrays=1, scans=_scans("light_line")))
    add(_s("tl-right-1a-line-11", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
           approach_speed_mps=11.0, light_arrays=1, scans=_scans("light_line")))
    add(_s("ss-right-10", signage=Signage.STOP_SIGN, maneuver=Maneuver.RIGHT,
           approach_speed_mps=10.0, stop_line_present=False, halt=HaltSpec(1.5, 2.0),
           scans=_scans("stop_sign")))
    add(_s("ss-left-08", signage=Signage.STOP_SIGN, maneuver=Maneuver.LEFT,
           approach_speed_mps=8.0, stop_line_present=False, scans=_scans("stop_sign")))
    add(_s("tl-straight-1a-noline-08", signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.STRAIGHT,
           approach_speed_mps=8.0, light_arrays=1, stop_line_present=False,
           scans=_scans("light_noline_single")))
    add(_s("none-right-11", signage=Signage.NONE, maneuver=Maneuver.RIGHT,
           approach_speed_mps=11.0, stop_line_present=False, geometry=Geometry.T,
           scans=_scans("none")))

    # --- moderate-noise sweep ----------------------------------------------
    noisy = [
        ("nz-tl-straight-1a-line-10", dict(signage=Signage.TRAFFIC_LIGHT,
                                           maneuver=Maneuver.STRAIGHT, approach_speed_mps=10.0,
                                           light_arrays=1, scans=_scans("light_line"))),
        ("nz-tl-left-2a-line-09", dict(signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
                                       approach_speed_mps=9.0, light_arrays=2,
                                       scans=_scans("light_line"))),
        ("nz-tl-right-1a-noline-10", dict(signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.RIGHT,
                                          approach_speed_mps=10.0, light_arrays=1,
                                          stop_line_present=False,
                                          scans=_scans("light_noline_single"))),
        ("nz-tl-straight-2a-noline-11", dict(signage=Signage.TRAFFIC_LIGHT,
                                             maneuver=Maneuver.STRAIGHT,
                                             approach_speed_mps=11.0, light_arrays=2,
                                             stop_line_present=False,
                                             scans=_scans("light_noline_multi"))),
        ("nz-ss-straight-09", dict(signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
                                   approach_speed_mps=9.0, stop_line_present=False,
                                   halt=HaltSpec(1.5, 2.2), scans=_scans("stop_sign"))),
        ("nz-ss-left-09", dict(signage=Signage.STOP_SIGN, maneuver=Maneuver.LEFT,
                               approach_speed_mps=9.0, stop_line_present=False,
                               scans=_scans("stop_sign"))),
        ("nz-ss-right-10", dict(signage=Signage.STOP_SIGN, maneuver=Maneuver.RIGHT,
                                approach_speed_mps=10.0, stop_line_present=False,
                                halt=HaltSpec(1.5, 2.0), scans=_scans("stop_sign"))),
        ("nz-ss-straight-11-arrow", dict(signage=Signage.STOP_SIGN, maneuver=Maneuver.STRAIGHT,
                                         approach_speed_mps=11.0, stop_line_present=False,
                                         distractors=DistractorSpec(road_arrows=1),
                                         scans=_scans("stop_sign"))),
        ("nz-none-left-09", dict(signage=Signage.NONE, maneuver=Maneuver.LEFT,
                                 approach_speed_mps=9.0, stop_line_present=False,
                                 geometry=Geometry.T, scans=_scans("none"))),
        ("nz-none-right-11", dict(signage=Signage.NONE, maneuver=Maneuver.RIGHT,
                                  approach_speed_mps=11.0, stop_line_present=False,
                                  geometry=Geometry.T, scans=_scans("none"))),
        ("nz-none-left-12", dict(signage=Signage.NONE, maneuver=Maneuver.LEFT,
                                 approach_speed_mps=12.0, stop_line_present=False,
                                 geometry=Geometry.Y, scans=_scans("none"))),
        ("nz-tl-straight-1a-haltpast-09", dict(signage=Signage.TRAFFIC_LIGHT,
                                               maneuver=Maneuver.STRAIGHT,
                                               approach_speed_mps=9.0, light_arrays=1,
                                               halt=HaltSpec(-1.0, 5.0),
                                               scans=_scans("light_line"))),
        ("nz-tl-straight-2a-line-08", dict(signage=Signage.TRAFFIC_LIGHT,
                                           maneuver=Maneuver.STRAIGHT, approach_speed_mps=8.0,
                                           light_arrays=2, scans=_scans("light_line"))),
        ("nz-tl-left-1a-line-11", dict(signage=Signage.TRAFFIC_LIGHT, maneuver=Maneuver.LEFT,
                                       approach_speed_mps=11.0, light_arrays=1,
                                       scans=_scans("light_line"))),
        ("nz-tl-straight-1a-noline-12", dict(signage=Signage.TRAFFIC_LIGHT,
                                             maneuver=Maneuver.STRAIGHT,
                                             approach_speed_mps=12.0, light_arrays=1,
                                             stop_line_present=False,
                                             scans=_scans("light_noline_single"))),
        ("nz-tl-right-2a-line-10-crosswalk", dict(signage=Signage.TRAFFIC_LIGHT,
                                                  maneuver=Maneuver.RIGHT,
                                                  approach_speed_mps=10.0, light_arrays=2,
                                                  distractors=DistractorSpec(crosswalk_lines=2),
                                                  scans=_scans("light_line"))),
    ]
    for name, kwargs in noisy:
        add(_s(name, noise=MODERATE_NOISE, group="noise", **kwargs))

    return scenarios


def catalog_to_json(scenarios: list[Scenario]) -> str:
    payload = {
        "format": "junctionscan-catalog/1",
        "notes": "Scenario fields are documented in README.md; add cases freely.",
        "scenarios": [s.to_dict() for s in scenarios],
    }
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


def write_catalog(path: str | Path, scenarios: list[Scenario] | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(catalog_to_json(scenarios or build_catalog()), encoding="utf-8")
    return path
