"""End-to-end helpers: score streams to detections to an eval report."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

from .errors import ValidationError
from .evaluation import EvalReport, annotation_groups, average_map
from .streams import (
    AnnotationSet,
    DetectionGroups,
    ScoreStream,
    ToleranceSchedule,
    displace,
    group_detections,
    merge_groups,
    threshold_detections,
)
from .suppression import DEFAULT_SOFT_WINDOW, SuppressionConfig, suppress_all

__all__ = ["PipelineConfig", "evaluate_streams", "spot_stream", "spot_streams"]


@dataclass(frozen=True)
class PipelineConfig:
    """Configuration of the spot -> suppress -> evaluate pipeline."""

    suppression: SuppressionConfig = SuppressionConfig("soft", DEFAULT_SOFT_WINDOW)
    schedule: ToleranceSchedule = field(default_factory=ToleranceSchedule.tight)
    threshold: float = 0.0

    def __post_init__(self):
        if not (math.isfinite(self.threshold) and 0.0 <= self.threshold <= 1.0):
            raise ValidationError(f"threshold must be in [0, 1], got {self.threshold}")

    def echo(self) -> dict:
        return {
            "threshold": self.threshold,
            "method": self.suppression.method,
            "window": self.suppression.window,
            "floor": self.suppression.floor,
            "schedule": list(self.schedule.deltas),
        }


def spot_stream(
    stream: ScoreStream,
    threshold: float = 0.0,
    clamp: Optional[Tuple[float, float]] = None,
) -> DetectionGroups:
    """Displace anchors into detections, threshold, and group by class."""
    dets = threshold_detections(displace(stream, clamp=clamp), threshold)
    return group_detections(stream.game_id, dets)


def spot_streams(streams: Sequence[ScoreStream], threshold: float = 0.0) -> DetectionGroups:
    """Spot a collection of games into one detection grouping."""
    ids = [s.game_id for s in streams]
    if len(set(ids)) != len(ids):
        raise ValidationError(f"duplicate game_id among streams: {ids}")
    return merge_groups([spot_stream(s, threshold=threshold) for s in streams])


def evaluate_streams(
    streams: Sequence[ScoreStream],
    annotations: Sequence[AnnotationSet],
    cfg: Optional[PipelineConfig] = None,
) -> EvalReport:
    """Run the full pipeline over matched streams and annotations."""
    cfg = cfg or PipelineConfig()
    if not streams:
        raise ValidationError("no streams to evaluate")
    groups = spot_streams(streams, threshold=cfg.threshold)
    suppressed = suppress_all(groups, cfg.suppression)
    return average_map(
        suppressed,
        annotation_groups(annotations),
        cfg.schedule,
        class_names=streams[0].class_names,
        config=cfg.echo(),
    )
