"""junctionscan: intersection bounds and head-scan extraction from
naturalistic driving feature streams."""

from .bounds import (
    Association,
    EntryRule,
    ExitRule,
    FusionConfig,
    IntersectionResult,
    associate,
    infer_bounds,
)
from .bundle import (
    DistanceProfile,
    HeadPose,
    SegmentBundle,
    Telemetry,
    align_streams,
    clip_segment,
    integrate_distance,
    load_bundle,
    write_bundle,
)
from .config import PipelineConfig, load_config
from .evaluate import CaseMetrics, Report, aggregate, compare, dice
from .headscan import HeadScan, ScanParams, detect_scans, scans_in_bounds, scans_in_window
from .models import (
    DetectionBox,
    Direction,
    Geometry,
    GroundTruth,
    Maneuver,
    Manifest,
    RoiRect,
    Signage,
    Waypoint,
)
from .motion import HaltInterval, MotionSignals, TurnEvent, compute_signals, detect_halts, detect_turns
from .pipeline import PipelineOutput, run_pipeline
from .scene import (
    SignageEvidence,
    TrafficFeatures,
    classify_signage,
    density_and_passing,
    filter_detections,
    traffic_features,
)
from .signalkit import Peak, PeakParams, find_peaks, moving_mean, moving_median, normalize
from .stopline import (
    CrossingEvent,
    LineCandidate,
    StopLineTrack,
    crossing_event,
    detect_candidates,
    row_profile,
    track_lines,
)
from .synth import GeneratedCase, Scenario, generate, standard_catalog, standard_suite

__version__ = "0.1.0"
