"""Late fusion of two detector score streams in logit space.

Fused confidences are the sigmoid of a convex combination of the two
streams' confidence logits.  Displacements are never fused: the output
carries stream ``a``'s displacement channel, so ``a`` is by convention
the designated displacement model.  The fusion weight is found by
exhaustive grid search against validation annotations.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from ._parallel import map_ordered
from .errors import ValidationError
from .pipeline import PipelineConfig, evaluate_streams
from .streams import AnnotationSet, ScoreStream

__all__ = [
    "FusionWeights",
    "LOGIT_EPS",
    "fuse_streams",
    "logit",
    "search_fusion_weight",
    "sigmoid",
]

#: Probabilities are clamped to [eps, 1 - eps] before the log-odds
#: transform so saturated confidences keep finite logits
#: (logit(1.0) == logit(1 - 1e-7) ~= 16.1181).
LOGIT_EPS = 1e-7


def logit(p):
    """Log-odds ln(p / (1 - p)) with p clamped to [eps, 1 - eps].

    Accepts scalars or arrays of probabilities in [0, 1]; NaN anywhere
    is an error.
    """
    arr = np.asarray(p, dtype=np.float64)
    if np.any(np.isnan(arr)):
        raise ValidationError("logit input contains NaN")
    if np.any((arr < 0.0) | (arr > 1.0)):
        raise ValidationError("logit input must lie in [0, 1]")
    clamped = np.clip(arr, LOGIT_EPS, 1.0 - LOGIT_EPS)
    out = np.log(clamped / (1.0 - clamped))
    return float(out) if arr.ndim == 0 else out


def sigmoid(x):
    """Numerically stable inverse of the log-odds transform."""
    arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
    out = np.empty_like(arr)
    pos = arr >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-arr[pos]))
    expx = np.exp(arr[~pos])
    out[~pos] = expx / (1.0 + expx)
    if np.ndim(x) == 0:
        return float(out[0])
    return out.reshape(np.shape(x))


@dataclass(frozen=True)
class FusionWeights:
    """Convex combination weights; weight_b is implied as 1 - weight_a."""

    weight_a: float

    def __post_init__(self):
        object.__setattr__(self, "weight_a", float(self.weight_a))
        if not (math.isfinite(self.weight_a) and 0.0 <= self.weight_a <= 1.0):
            raise ValidationError(f"weight_a must be in [0, 1], got {self.weight_a}")

    @property
    def weight_b(self) -> float:
        return 1.0 - self.weight_a


def fuse_streams(a: ScoreStream, b: ScoreStream, weights: FusionWeights) -> ScoreStream:
    """Fuse two aligned streams' confidences in logit space.

    Both streams must describe the same game on the same anchor grid
    with the same class ordering.  The fused stream keeps ``a``'s
    displacements.
    """
    mismatched = [
        name
        for name, va, vb in (
            ("game_id", a.game_id, b.game_id),
            ("fps", a.fps, b.fps),
            ("num_anchors", a.num_anchors, b.num_anchors),
            ("class_names", a.class_names, b.class_names),
        )
        if va != vb
    ]
    if mismatched:
        raise ValidationError(f"streams disagree on: {', '.join(mismatched)}")
    fused = sigmoid(
        weights.weight_a * logit(a.confidences)
        + weights.weight_b * logit(b.confidences)
    )
    return ScoreStream(
        game_id=a.game_id,
        class_names=a.class_names,
        fps=a.fps,
        confidences=fused,
        displacements=a.displacements,
    )


def _weight_grid(grid_step: float) -> List[float]:
    """{0, step, 2*step, ...} capped and completed with 1.0."""
    weights = []
    k = 0
    while k * grid_step < 1.0 - 1e-12:
        weights.append(k * grid_step)
        k += 1
    weights.append(1.0)
    return weights


def search_fusion_weight(
    pairs: Sequence[Tuple[ScoreStream, ScoreStream]],
    labels: Sequence[AnnotationSet],
    eval_cfg: Optional[PipelineConfig] = None,
    grid_step: float = 0.05,
) -> Tuple[FusionWeights, List[Tuple[float, float]]]:
    """Exhaustive search for the fusion weight on a validation set.

    Every candidate weight_a runs the full fuse -> spot -> suppress ->
    evaluate pipeline; the returned weight maximizes average-mAP under
    ``eval_cfg`` (second-scale schedule by default), ties going to the
    smaller weight_a.  Also returns the full (weight, score) table.
    """
    if not pairs:
        raise ValidationError("fusion weight search needs a non-empty validation set")
    grid_step = float(grid_step)
    if not 0.0 < grid_step <= 0.5:
        raise ValidationError(f"grid_step must be in (0, 0.5], got {grid_step}")
    if len(pairs) != len(labels):
        raise ValidationError(
            f"{len(pairs)} stream pairs but {len(labels)} annotation sets"
        )
    by_game = {ann.game_id: ann for ann in labels}
    for a, b in pairs:
        if a.game_id != b.game_id:
            raise ValidationError(
                f"pair mismatch: {a.game_id!r} fused against {b.game_id!r}"
            )
        if a.game_id not in by_game:
            raise ValidationError(f"no annotations for game {a.game_id!r}")
    cfg = eval_cfg or PipelineConfig()

    def score(weight_a: float) -> float:
        wts = FusionWeights(weight_a)
        fused = [fuse_streams(a, b, wts) for a, b in pairs]
        anns = [by_game[s.game_id] for s in fused]
        return evaluate_streams(fused, anns, cfg).average_map

    weights = _weight_grid(grid_step)
    scores = map_ordered(score, weights)
    table = list(zip(weights, scores))
    best_weight, best_score = table[0]
    for weight, value in table[1:]:
        if value > best_score:
            best_weight, best_score = weight, value
    return FusionWeights(best_weight), table
