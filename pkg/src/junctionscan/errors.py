"""Exception types shared across the toolkit.

Loader errors identify the offending file and record index so a broken
bundle can be repaired without guesswork.
"""

from __future__ import annotations


class JunctionScanError(Exception):
    """Base class for all toolkit errors."""


class BundleError(JunctionScanError):
    """A bundle directory failed validation."""

    def __init__(self, message: str, file: str | None = None, index: int | None = None):
        self.file = file
        self.index = index
        parts = [message]
        if file is not None:
            parts.append(f"file={file}")
        if index is not None:
            parts.append(f"index={index}")
        super().__init__("; ".join(parts))


class MissingStream(BundleError):
    """A required stream file is absent from the bundle directory."""


class FrameCountMismatch(BundleError):
    """A stream's frame count disagrees with the manifest."""


class NonMonotonicTimestamps(BundleError):
    """Timestamps in a stream are not strictly increasing."""


class SchemaViolation(BundleError):
    """A record does not satisfy the published stream schema."""


class EmptyTelemetry(JunctionScanError):
    """Telemetry stream contains no records."""


class MarkOutsideTrip(JunctionScanError):
    """The marked location is farther than the accepted radius from the trip."""


class EvenWindow(JunctionScanError):
    """Moving-median windows must be odd."""


class GridDimMismatch(JunctionScanError):
    """Flow grid does not have the expected column/row layout."""


class EmptyStream(JunctionScanError):
    """An operation was handed an empty detection stream."""


class Unsupported(JunctionScanError):
    """Scenario cannot be bounded: no signage and no turn maneuver."""


class MissingEvidence(JunctionScanError):
    """Signage implies bounds evidence that was not found in the clip."""


class DegenerateInterval(JunctionScanError):
    """Interval has zero or negative length."""


class SegmentMismatch(JunctionScanError):
    """Result and ground truth belong to different segments."""


class EmptyCases(JunctionScanError):
    """Aggregation requires at least one case."""


class NoPairsFound(JunctionScanError):
    """No result/ground-truth pairs discovered for evaluation."""


class InvalidScenario(JunctionScanError):
    """Scenario parameters violate a construction constraint."""
