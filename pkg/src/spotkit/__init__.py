"""Post-processing and evaluation toolkit for dense-anchor action spotting.

The pipeline: score streams (per-anchor confidences plus temporal
displacements) are optionally resampled and fused, turned into candidate
detections by displacing each anchor, suppressed per class (hard or soft
NMS), and scored with tolerance-based average-mAP.
"""

from ._backend import BACKEND_NAME, USING_COMPILED
from .errors import SchemaError, SpotkitError, ValidationError
from .evaluation import (
    EvalReport,
    MatchResult,
    annotation_groups,
    average_map,
    average_precision,
    map_at_tolerance,
    match_detections,
    sweep_window,
)
from .fusion import FusionWeights, fuse_streams, logit, search_fusion_weight, sigmoid
from .pipeline import PipelineConfig, evaluate_streams, spot_stream, spot_streams
from .streams import (
    AnnotationSet,
    Detection,
    ScoreStream,
    ToleranceSchedule,
    displace,
    group_detections,
    resample_stream,
    threshold_detections,
)
from .suppression import (
    DEFAULT_HARD_WINDOW,
    DEFAULT_SOFT_WINDOW,
    SuppressionConfig,
    decay_factor,
    hard_nms,
    soft_nms,
    suppress_all,
)
from .synth import SynthConfig, synth_generate, synth_scores

__version__ = "0.1.0"

__all__ = [
    "AnnotationSet",
    "BACKEND_NAME",
    "DEFAULT_HARD_WINDOW",
    "DEFAULT_SOFT_WINDOW",
    "Detection",
    "EvalReport",
    "FusionWeights",
    "MatchResult",
    "PipelineConfig",
    "SchemaError",
    "ScoreStream",
    "SpotkitError",
    "SuppressionConfig",
    "SynthConfig",
    "ToleranceSchedule",
    "USING_COMPILED",
    "ValidationError",
    "annotation_groups",
    "average_map",
    "average_precision",
    "decay_factor",
    "displace",
    "evaluate_streams",
    "fuse_streams",
    "group_detections",
    "hard_nms",
    "logit",
    "map_at_tolerance",
    "match_detections",
    "resample_stream",
    "search_fusion_weight",
    "sigmoid",
    "soft_nms",
    "spot_stream",
    "spot_streams",
    "suppress_all",
    "sweep_window",
    "synth_generate",
    "synth_scores",
    "threshold_detections",
]
