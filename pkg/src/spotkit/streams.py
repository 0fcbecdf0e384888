"""Domain types and anchor-grid operations for score streams.

A score stream is the dense per-game output of a spotting model: a T x C
matrix of per-anchor confidences, where anchor ``i`` of every class sits
at time ``i / fps`` seconds, plus an optional T x C matrix of signed
temporal displacements in seconds.  This module owns everything that
happens on the anchor grid before suppression: temporal resampling,
conversion of anchors into candidate detections by applying the
displacements, and confidence thresholding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .errors import ValidationError

__all__ = [
    "AnnotationSet",
    "Detection",
    "DetectionGroups",
    "ScoreStream",
    "ToleranceSchedule",
    "displace",
    "group_detections",
    "merge_groups",
    "resample_stream",
    "threshold_detections",
]


def _readonly_matrix(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if arr.ndim != 2:
        raise ValidationError(f"{name} must be a 2-D matrix, got {arr.ndim} dimension(s)")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Detection:
    """A candidate event: class index, time in seconds, confidence in [0, 1]."""

    class_index: int
    time: float
    confidence: float

    def __post_init__(self):
        object.__setattr__(self, "class_index", int(self.class_index))
        object.__setattr__(self, "time", float(self.time))
        object.__setattr__(self, "confidence", float(self.confidence))
        if self.class_index < 0:
            raise ValidationError(f"class_index must be >= 0, got {self.class_index}")
        if not (math.isfinite(self.time) and self.time >= 0.0):
            raise ValidationError(f"detection time must be finite and >= 0, got {self.time}")
        if not 0.0 <= self.confidence <= 1.0:
            raise ValidationError(f"confidence must be in [0, 1], got {self.confidence}")


#: Detections partitioned by (game_id, class_index); the unit of work for
#: suppression and matching.  All reductions iterate keys in sorted order.
DetectionGroups = Dict[Tuple[str, int], List[Detection]]


@dataclass(frozen=True, eq=False)
class ScoreStream:
    """Per-game matrix of per-anchor, per-class confidences at a fixed rate.

    ``confidences[i, c]`` is the probability that an event of class ``c``
    happens near anchor time ``i / fps``.  ``displacements[i, c]``, when
    present, is the signed offset in seconds from the anchor time to the
    predicted event time.
    """

    game_id: str
    class_names: Tuple[str, ...]
    fps: float
    confidences: np.ndarray
    displacements: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(str(n) for n in self.class_names))
        object.__setattr__(self, "fps", float(self.fps))
        if not (math.isfinite(self.fps) and self.fps > 0):
            raise ValidationError(f"fps must be positive and finite, got {self.fps}")
        conf = _readonly_matrix(self.confidences, "confidences")
        object.__setattr__(self, "confidences", conf)
        t, c = conf.shape
        if t < 1 or c < 1:
            raise ValidationError(f"confidences must be at least 1x1, got {t}x{c}")
        if c != len(self.class_names):
            raise ValidationError(
                f"confidences have {c} columns but {len(self.class_names)} class names given"
            )
        if not np.all((conf >= 0.0) & (conf <= 1.0)):
            bad = np.argwhere(~((conf >= 0.0) & (conf <= 1.0)))[0]
            raise ValidationError(
                f"confidence out of [0, 1] at anchor {bad[0]}, class {bad[1]}: "
                f"{conf[bad[0], bad[1]]}"
            )
        if self.displacements is not None:
            disp = _readonly_matrix(self.displacements, "displacements")
            object.__setattr__(self, "displacements", disp)
            if disp.shape != conf.shape:
                raise ValidationError(
                    f"displacements shape {disp.shape} does not match confidences {conf.shape}"
                )
            if not np.all(np.isfinite(disp)):
                bad = np.argwhere(~np.isfinite(disp))[0]
                raise ValidationError(
                    f"non-finite displacement at anchor {bad[0]}, class {bad[1]}"
                )

    @property
    def num_anchors(self) -> int:
        return self.confidences.shape[0]

    @property
    def num_classes(self) -> int:
        return self.confidences.shape[1]

    @property
    def duration(self) -> float:
        """Time of the last anchor, (T - 1) / fps."""
        return (self.num_anchors - 1) / self.fps

    def anchor_times(self) -> np.ndarray:
        return np.arange(self.num_anchors, dtype=np.float64) / self.fps

    def __eq__(self, other) -> bool:
        if not isinstance(other, ScoreStream):
            return NotImplemented
        if (
            self.game_id != other.game_id
            or self.class_names != other.class_names
            or self.fps != other.fps
            or not np.array_equal(self.confidences, other.confidences)
        ):
            return False
        if (self.displacements is None) != (other.displacements is None):
            return False
        return self.displacements is None or np.array_equal(
            self.displacements, other.displacements
        )


@dataclass(frozen=True)
class AnnotationSet:
    """Ground-truth events for one game: (class_index, time) pairs."""

    game_id: str
    events: Tuple[Tuple[int, float], ...]
    duration: Optional[float] = None

    def __post_init__(self):
        events = tuple((int(c), float(t)) for c, t in self.events)
        object.__setattr__(self, "events", events)
        for c, t in events:
            if c < 0:
                raise ValidationError(f"event class_index must be >= 0, got {c}")
            if not (math.isfinite(t) and t >= 0.0):
                raise ValidationError(f"event time must be finite and >= 0, got {t}")
        if self.duration is not None:
            duration = float(self.duration)
            object.__setattr__(self, "duration", duration)
            if not (math.isfinite(duration) and duration >= 0.0):
                raise ValidationError(f"duration must be finite and >= 0, got {duration}")

    def times_for_class(self, class_index: int) -> List[float]:
        return [t for c, t in self.events if c == class_index]


@dataclass(frozen=True)
class ToleranceSchedule:
    """Ordered tolerance window sizes (seconds) over which mAP is averaged.

    A detection counts as correct at tolerance ``delta`` when it lies
    within ``delta / 2`` seconds of an unmatched ground truth, so the
    matching radius is half the window size.
    """

    deltas: Tuple[float, ...]

    def __post_init__(self):
        deltas = tuple(float(d) for d in self.deltas)
        object.__setattr__(self, "deltas", deltas)
        if not deltas:
            raise ValidationError("tolerance schedule must not be empty")
        for d in deltas:
            if not (math.isfinite(d) and d > 0):
                raise ValidationError(f"tolerance must be positive and finite, got {d}")
        if any(b <= a for a, b in zip(deltas, deltas[1:])):
            raise ValidationError(f"tolerances must be strictly increasing, got {deltas}")

    @property
    def radii(self) -> Tuple[float, ...]:
        return tuple(d / 2.0 for d in self.deltas)

    @classmethod
    def tight(cls) -> "ToleranceSchedule":
        """Second-scale tolerances; radii grow in half-second steps."""
        return cls((1.0, 2.0, 3.0, 4.0, 5.0))

    @classmethod
    def loose(cls) -> "ToleranceSchedule":
        """Tens-of-seconds tolerances, 5 s to 60 s."""
        return cls(tuple(float(d) for d in range(5, 65, 5)))

    @classmethod
    def from_spec(cls, spec: str) -> "ToleranceSchedule":
        """Parse ``"tight"``, ``"loose"``, or a comma-separated delta list."""
        name = spec.strip().lower()
        if name == "tight":
            return cls.tight()
        if name == "loose":
            return cls.loose()
        try:
            deltas = tuple(float(part) for part in spec.split(",") if part.strip())
        except ValueError as exc:
            raise ValidationError(f"cannot parse tolerance schedule {spec!r}") from exc
        return cls(deltas)


def resample_stream(stream: ScoreStream, target_fps: float) -> ScoreStream:
    """Linearly resample a stream onto the grid k / target_fps.

    The output covers exactly the original time span [0, (T-1)/fps]; no
    extrapolation happens beyond the last sample.  Output samples whose
    timestamps coincide with input samples are copied bit-for-bit, so
    resampling at the original rate is the identity.
    """
    target_fps = float(target_fps)
    if not (math.isfinite(target_fps) and target_fps > 0):
        raise ValidationError(f"target_fps must be positive and finite, got {target_fps}")
    if target_fps == stream.fps:
        return stream

    t = stream.num_anchors
    # Exact rational positions: output sample k falls at input index
    # k * fps_ratio.  Fractions keep coincidence detection exact for any
    # rational rate pair, which float arithmetic cannot guarantee.
    ratio = Fraction(stream.fps) / Fraction(target_fps)
    n_out = int(Fraction(t - 1) / ratio) + 1 if t > 1 else 1

    lower = np.empty(n_out, dtype=np.int64)
    weight = np.empty(n_out, dtype=np.float64)
    for k in range(n_out):
        pos = k * ratio
        i0 = int(pos)
        lower[k] = i0
        weight[k] = float(pos - i0)

    exact = weight == 0.0
    upper = np.minimum(lower + 1, t - 1)

    def interp(matrix: np.ndarray) -> np.ndarray:
        out = (1.0 - weight)[:, None] * matrix[lower] + weight[:, None] * matrix[upper]
        out[exact] = matrix[lower[exact]]
        return out

    return ScoreStream(
        game_id=stream.game_id,
        class_names=stream.class_names,
        fps=target_fps,
        confidences=interp(stream.confidences),
        displacements=None
        if stream.displacements is None
        else interp(stream.displacements),
    )


def displace(
    stream: ScoreStream,
    clamp: Optional[Tuple[float, float]] = None,
) -> List[Detection]:
    """Turn every anchor into a candidate detection at its displaced time.

    Detection (i, c) sits at ``i / fps + displacements[i, c]`` clamped to
    ``clamp`` (by default [0, duration], keeping boundary events
    detectable) and carries ``confidences[i, c]``.  Missing displacements
    are treated as all-zero.  Output holds exactly T * C detections,
    grouped by class (class-contiguous, anchors in order).
    """
    if clamp is None:
        clamp = (0.0, stream.duration)
    lo, hi = float(clamp[0]), float(clamp[1])
    if not (math.isfinite(lo) and math.isfinite(hi)):
        raise ValidationError(f"clamp bounds must be finite, got ({lo}, {hi})")
    if lo > hi:
        raise ValidationError(f"clamp lower bound {lo} exceeds upper bound {hi}")

    if stream.displacements is None:
        disp = np.zeros_like(stream.confidences)
    else:
        disp = stream.displacements
        if not np.all(np.isfinite(disp)):
            i, c = np.argwhere(~np.isfinite(disp))[0]
            raise ValidationError(f"non-finite displacement at anchor {i}, class {c}")

    times = np.clip(stream.anchor_times()[:, None] + disp, lo, hi)
    conf = stream.confidences
    return [
        Detection(class_index=c, time=times[i, c], confidence=conf[i, c])
        for c in range(stream.num_classes)
        for i in range(stream.num_anchors)
    ]


def threshold_detections(dets: Sequence[Detection], floor: float) -> List[Detection]:
    """Keep detections with confidence >= floor, preserving order."""
    floor = float(floor)
    if not 0.0 <= floor <= 1.0:
        raise ValidationError(f"threshold floor must be in [0, 1], got {floor}")
    return [d for d in dets if d.confidence >= floor]


def group_detections(game_id: str, dets: Sequence[Detection]) -> DetectionGroups:
    """Partition one game's detections by (game_id, class_index)."""
    groups: DetectionGroups = {}
    for det in dets:
        groups.setdefault((game_id, det.class_index), []).append(det)
    return groups


def merge_groups(parts: Sequence[DetectionGroups]) -> DetectionGroups:
    """Merge per-game groupings into one mapping; keys must not collide."""
    merged: DetectionGroups = {}
    for part in parts:
        for key, dets in part.items():
            if key in merged:
                raise ValidationError(f"duplicate detection group {key}")
            merged[key] = dets
    return merged
