"""Hierarchical fusion of scene evidence into intersection bounds.

Evidence association first: the signage passing frame anchors the
intersection (clip midpoint when there is no signage), the latest stop
line crossed at or before the anchor is taken as the intersection's stop
line, and the turn starting nearest the anchor as the intersection's
maneuver.  The entry/exit rule table then runs on the associated
evidence:

* stop sign: enter when the sign leaves the camera view; exit at the end
  of the turn, or 30 m past entry when going straight.
* traffic light with a crossed stop line: enter at the later of the
  crossing and the first motion after a halt near the line; exit at the
  end of the turn, or a fixed offset past the last light array (2.5 m
  for multiple arrays, 15 m for a single mid-intersection array).
* traffic light without a usable stop line: enter 15 m before passing a
  single array, or where the near array of a multi-array intersection
  drops out of view; exits as above.
* no signage: the turn bounds are the intersection bounds; without a
  turn the clip cannot be bounded (Unsupported).

Every result records which branch fired so the decision can be audited
and replayed.  All preset distances are exposed through FusionConfig
because intersection design varies by region.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .bundle import DistanceProfile, Telemetry
from .errors import MissingEvidence, Unsupported
from .models import Maneuver, Signage
from .motion import HaltInterval, TurnEvent
from .scene import SignageEvidence, TrafficFeatures
from .stopline import CrossingEvent


class EntryRule(str, Enum):
    STOP_SIGN_LEAVE_VIEW = "stop_sign_leave_view"
    STOP_LINE_CROSSING = "stop_line_crossing"
    HALT_RELEASE_AFTER_CROSSING = "halt_release_after_crossing"
    LIGHT_SINGLE_ARRAY_BACKOFF = "light_single_array_backoff"
    LIGHT_MULTI_ARRAY_INTERPEAK = "light_multi_array_interpeak"
    TURN_START = "turn_start"


class ExitRule(str, Enum):
    TURN_END = "turn_end"
    STOP_SIGN_STRAIGHT_30M = "stop_sign_straight_30m"
    LIGHT_MULTI_ARRAY_2_5M = "light_multi_array_2_5m"
    LIGHT_SINGLE_ARRAY_15M = "light_single_array_15m"


@dataclass(frozen=True)
class FusionConfig:
    single_array_entry_offset_m: float = 15.0
    multi_array_exit_offset_m: float = 2.5
    single_array_exit_offset_m: float = 15.0
    stop_sign_straight_exit_m: float = 30.0
    halt_near_line_window_m: float = 5.0
    association_window_s: float = 10.0

    def __post_init__(self):
        for name, value in self.__dict__.items():
            if value <= 0:
                raise ValueError(f"FusionConfig.{name} must be positive, got {value}")


@dataclass(frozen=True)
class Association:
    anchor_frame: int
    crossing: CrossingEvent | None
    turn: TurnEvent | None


@dataclass(frozen=True)
class SceneContext:
    mean_density: float
    max_density: float
    mean_cross_fraction: float
    max_cross_fraction: float


@dataclass(frozen=True)
class IntersectionResult:
    signage: Signage
    maneuver: Maneuver
    entry_frame: int
    exit_frame: int
    entry_distance: float
    exit_distance: float
    entry_rule: EntryRule
    exit_rule: ExitRule
    associated_crossing: CrossingEvent | None
    associated_turn: TurnEvent | None
    halts: tuple[HaltInterval, ...]
    truncated: bool = False

    def __post_init__(self):
        if self.entry_frame >= self.exit_frame:
            raise ValueError(
                f"entry_frame {self.entry_frame} must precede exit_frame {self.exit_frame}")
        if self.maneuver in (Maneuver.LEFT, Maneuver.RIGHT) and self.associated_turn is None:
            raise ValueError("turn maneuvers require an associated turn event")


def associate(crossings: list[CrossingEvent], turns: list[TurnEvent],
              evidence: SignageEvidence, frame_count: int, frame_rate: float,
              config: FusionConfig = FusionConfig(),
              telemetry: Telemetry | None = None) -> Association:
    """Pick the crossing and turn that belong to the intersection.

    The anchor is the signage passing frame, or the clip midpoint when no
    signage was seen.  The crossing is the latest one at or before the
    anchor within the association window; the turn is the one whose start
    is nearest the anchor within the window.

    Proximity is measured in moving time: frames where the vehicle is
    effectively stationary do not widen the gap, so a long red light
    cannot push the intersection's own stop line out of the window.
    """
    if evidence.signage != Signage.NONE and evidence.passing_frame is not None:
        anchor = int(evidence.passing_frame)
    else:
        anchor = frame_count // 2

    if telemetry is not None:
        moving = np.cumsum(telemetry.speed_mps >= 0.5) / frame_rate

        def gap_s(frame_a: int, frame_b: int) -> float:
            lo, hi = sorted((frame_a, frame_b))
            return float(moving[min(hi, frame_count - 1)] - moving[min(lo, frame_count - 1)])
    else:
        def gap_s(frame_a: int, frame_b: int) -> float:
            return abs(frame_a - frame_b) / frame_rate

    window = config.association_window_s

    crossing = None
    eligible = [c for c in crossings
                if c.frame_idx <= anchor and gap_s(c.frame_idx, anchor) <= window]
    if eligible:
        crossing = max(eligible, key=lambda c: c.frame_idx)

    turn = None
    in_window = [t for t in turns if gap_s(t.start_frame, anchor) <= window]
    if in_window:
        turn = min(in_window, key=lambda t: (gap_s(t.start_frame, anchor), t.start_frame))
    return Association(anchor, crossing, turn)


def _qualifying_halt(halts: tuple[HaltInterval, ...] | list[HaltInterval],
                     crossing: CrossingEvent, distance: DistanceProfile,
                     window_m: float, frame_count: int) -> HaltInterval | None:
    """Latest halt whose end lies within ``window_m`` of the crossing."""
    best = None
    for halt in halts:
        end = min(halt.end_frame, frame_count - 1)
        if abs(distance.at(end) - crossing.distance) <= window_m:
            if best is None or halt.end_frame > best.end_frame:
                best = halt
    return best


def infer_bounds(evidence: SignageEvidence, association: Association,
                 halts: list[HaltInterval], distance: DistanceProfile,
                 telemetry: Telemetry, frame_count: int,
                 config: FusionConfig = FusionConfig()) -> IntersectionResult:
    """Apply the entry/exit rule table; see the module docstring.

    Raises Unsupported for unsigned straight-through clips and
    MissingEvidence for a traffic light with neither a crossed stop line
    nor any density peaks.
    """
    turn = association.turn
    crossing = association.crossing
    truncated = False
    signage = evidence.signage

    if signage == Signage.NONE:
        if turn is None:
            raise Unsupported("no signage and no turn maneuver: bounds are undefined")
        entry_frame, entry_rule = turn.start_frame, EntryRule.TURN_START
    elif signage == Signage.STOP_SIGN:
        if evidence.passing_frame is None:
            raise MissingEvidence("stop sign classified but no passing frame")
        entry_frame = min(int(evidence.passing_frame) + 1, frame_count - 1)
        entry_rule = EntryRule.STOP_SIGN_LEAVE_VIEW
    else:  # traffic light
        if crossing is not None:
            entry_frame, entry_rule = crossing.frame_idx, EntryRule.STOP_LINE_CROSSING
            halt = _qualifying_halt(halts, crossing, distance,
                                    config.halt_near_line_window_m, frame_count)
            if halt is not None:
                release = min(halt.end_frame, frame_count - 1)
                if release > entry_frame:
                    entry_frame, entry_rule = release, EntryRule.HALT_RELEASE_AFTER_CROSSING
        else:
            if not evidence.array_peaks:
                raise MissingEvidence(
                    "traffic light without a crossed stop line or density peaks")
            if len(evidence.array_peaks) >= 2:
                entry_frame = int(evidence.passing_frame)
                entry_rule = EntryRule.LIGHT_MULTI_ARRAY_INTERPEAK
            else:
                target = distance.at(int(evidence.passing_frame)) - config.single_array_entry_offset_m
                entry_frame, _ = distance.frame_at(max(target, 0.0))
                entry_rule = EntryRule.LIGHT_SINGLE_ARRAY_BACKOFF

    if turn is not None and turn.end_frame > entry_frame:
        exit_frame, exit_rule = turn.end_frame, ExitRule.TURN_END
    elif signage == Signage.STOP_SIGN or signage == Signage.NONE:
        target = distance.at(entry_frame) + config.stop_sign_straight_exit_m
        exit_frame, clamped = distance.frame_at(target, start=entry_frame)
        exit_rule = ExitRule.STOP_SIGN_STRAIGHT_30M
        truncated |= clamped
    else:
        last_seen = int(evidence.last_frame if evidence.last_frame is not None
                        else association.anchor_frame)
        if len(evidence.array_peaks) >= 2:
            offset, exit_rule = config.multi_array_exit_offset_m, ExitRule.LIGHT_MULTI_ARRAY_2_5M
        else:
            offset, exit_rule = config.single_array_exit_offset_m, ExitRule.LIGHT_SINGLE_ARRAY_15M
        exit_frame, clamped = distance.frame_at(distance.at(last_seen) + offset, start=last_seen)
        truncated |= clamped

    if exit_frame <= entry_frame:
        exit_frame = min(entry_frame + 1, frame_count - 1)
        truncated = True
        if exit_frame <= entry_frame:
            entry_frame = exit_frame - 1

    maneuver = Maneuver.STRAIGHT
    if turn is not None:
        maneuver = Maneuver.LEFT if turn.direction.value == "left" else Maneuver.RIGHT

    return IntersectionResult(
        signage=signage,
        maneuver=maneuver,
        entry_frame=int(entry_frame),
        exit_frame=int(exit_frame),
        entry_distance=distance.at(int(entry_frame)),
        exit_distance=distance.at(int(exit_frame)),
        entry_rule=entry_rule,
        exit_rule=exit_rule,
        associated_crossing=crossing,
        associated_turn=turn,
        halts=tuple(halts),
        truncated=truncated,
    )


def select_scene_context(result: IntersectionResult, features: TrafficFeatures,
                         frame_rate: float,
                         approach_window_s: float = 10.0) -> SceneContext:
    """Traffic features summarized over the approach and intersection span
    ([entry - window, exit])."""
    lo = max(0, result.entry_frame - round(approach_window_s * frame_rate))
    hi = min(result.exit_frame + 1, features.density.size)
    density = features.density[lo:hi]
    fraction = features.cross_traffic_fraction[lo:hi]
    if density.size == 0:
        return SceneContext(0.0, 0.0, 0.0, 0.0)
    return SceneContext(float(np.mean(density)), float(np.max(density)),
                        float(np.mean(fraction)), float(np.max(fraction)))
