"""Per-class 1-D non-maximum suppression, hard and soft.

Hard suppression greedily accepts the highest-confidence detection and
removes every same-class detection strictly within half a window of it.
Soft suppression decays instead of removing: after accepting a detection
at time ``t``, every remaining same-class detection at time ``s`` has its
confidence multiplied by ``min(|s - t| / (w / 2), 1)``, which is 0 at
zero distance and saturates to a no-op at half the window size.  Decay
compounds multiplicatively across successive accepted detections.

Default windows come from validation sweeps that optimize the
second-scale (tight) metric: 3 s for hard, 8 s for soft.  Both are
plain configuration and are meant to be swept.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Sequence

import numpy as np

from ._backend import hard_nms_kernel, soft_nms_kernel
from ._parallel import map_ordered
from .errors import ValidationError
from .streams import Detection, DetectionGroups

__all__ = [
    "DEFAULT_HARD_WINDOW",
    "DEFAULT_SOFT_WINDOW",
    "SuppressionConfig",
    "decay_factor",
    "hard_nms",
    "soft_nms",
    "suppress_all",
]

DEFAULT_HARD_WINDOW = 3.0
DEFAULT_SOFT_WINDOW = 8.0

_METHODS = ("hard", "soft")


@dataclass(frozen=True)
class SuppressionConfig:
    """Suppression method plus window size in seconds.

    ``floor`` only applies to the soft method: decayed detections whose
    confidence falls below it are dropped from the output.  The default
    of 0 drops nothing, so soft suppression is purely a re-scoring.
    """

    method: str
    window: float
    floor: float = 0.0

    def __post_init__(self):
        if self.method not in _METHODS:
            raise ValidationError(f"method must be one of {_METHODS}, got {self.method!r}")
        object.__setattr__(self, "window", float(self.window))
        object.__setattr__(self, "floor", float(self.floor))
        if not (math.isfinite(self.window) and self.window > 0):
            raise ValidationError(f"window must be positive and finite, got {self.window}")
        if not 0.0 <= self.floor <= 1.0:
            raise ValidationError(f"floor must be in [0, 1], got {self.floor}")


def decay_factor(t: float, s: float, w: float) -> float:
    """Soft decay applied to a detection at time ``s`` after accepting one
    at time ``t``: ``min(|s - t| / (w / 2), 1)``."""
    if w <= 0:
        raise ValidationError(f"window must be positive, got {w}")
    return min(abs(s - t) / (w / 2.0), 1.0)


def _require_single_class(dets: Sequence[Detection], op: str) -> int:
    classes = {d.class_index for d in dets}
    if len(classes) > 1:
        raise ValidationError(
            f"{op} operates on a single class; got classes {sorted(classes)}"
        )
    return next(iter(classes)) if classes else -1


def soft_nms(
    dets: Sequence[Detection],
    cfg: SuppressionConfig,
    *,
    _indicator: bool = False,
) -> List[Detection]:
    """Soft-suppress one class of detections.

    Repeatedly accepts the detection with the highest current confidence
    (ties: earlier time, then input order) and decays the rest; stops
    when everything is accepted or has fallen below ``cfg.floor``.
    Output is in acceptance order, which is descending confidence.

    ``_indicator`` swaps the linear decay for the 0/1 indicator of
    ``|s - t| >= w / 2``; it exists so tests can check the reduction to
    hard suppression and is not part of the public surface.
    """
    if cfg.method != "soft":
        raise ValidationError(f"soft_nms requires method='soft', got {cfg.method!r}")
    cls = _require_single_class(dets, "soft_nms")
    if not dets:
        return []
    times = np.array([d.time for d in dets], dtype=np.float64)
    confs = np.array([d.confidence for d in dets], dtype=np.float64)
    order, decayed = soft_nms_kernel(times, confs, cfg.window, cfg.floor, _indicator)
    return [
        Detection(class_index=cls, time=times[i], confidence=conf)
        for i, conf in zip(order, decayed)
    ]


def hard_nms(dets: Sequence[Detection], cfg: SuppressionConfig) -> List[Detection]:
    """Hard-suppress one class of detections.

    Accepts in descending confidence (ties: earlier time, then input
    order) and removes everything strictly within ``w / 2`` seconds of an
    accepted detection; a detection at exactly ``w / 2`` survives.
    Confidences are never modified.
    """
    if cfg.method != "hard":
        raise ValidationError(f"hard_nms requires method='hard', got {cfg.method!r}")
    _require_single_class(dets, "hard_nms")
    if not dets:
        return []
    times = np.array([d.time for d in dets], dtype=np.float64)
    confs = np.array([d.confidence for d in dets], dtype=np.float64)
    kept = hard_nms_kernel(times, confs, cfg.window)
    return [dets[i] for i in kept]


def suppress(dets: Sequence[Detection], cfg: SuppressionConfig) -> List[Detection]:
    """Apply the configured suppressor to one class of detections."""
    if cfg.method == "hard":
        return hard_nms(dets, cfg)
    return soft_nms(dets, cfg)


def suppress_all(groups: DetectionGroups, cfg: SuppressionConfig) -> DetectionGroups:
    """Suppress every (game, class) group independently.

    Groups are processed in sorted key order and may run on multiple
    workers (SPOTKIT_WORKERS); the result mapping is always assembled in
    canonical order, so output is deterministic either way.
    """
    keys = sorted(groups)

    def run(key):
        try:
            return suppress(groups[key], cfg)
        except ValidationError as exc:
            raise ValidationError(f"group (game={key[0]!r}, class={key[1]}): {exc}") from exc

    results = map_ordered(run, keys)
    return {key: result for key, result in zip(keys, results)}
