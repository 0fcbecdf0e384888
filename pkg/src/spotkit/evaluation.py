"""Tolerance-based matching, average precision, and mAP over schedules.

A detection counts as a true positive at tolerance ``delta`` when it
lies within ``delta / 2`` seconds of a still-unmatched ground truth of
its class.  Matching is greedy in descending confidence; each detection
takes the nearest available ground truth.  Per-class average precision
uses the all-point interpolated convention (area under the precision
envelope over recall), detections pooled across games per class.  mAP
averages classes that have at least one ground truth; average-mAP is the
arithmetic mean of per-tolerance mAPs over a schedule.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ._backend import match_kernel
from ._parallel import map_ordered
from .errors import ValidationError
from .streams import (
    AnnotationSet,
    Detection,
    DetectionGroups,
    ToleranceSchedule,
)
from .suppression import SuppressionConfig, suppress_all

__all__ = [
    "EvalReport",
    "GtGroups",
    "MatchResult",
    "annotation_groups",
    "average_map",
    "average_precision",
    "map_at_tolerance",
    "match_detections",
    "rank_detections",
    "sweep_window",
]

#: Ground-truth event times partitioned by (game_id, class_index).
GtGroups = Dict[Tuple[str, int], List[float]]


@dataclass(frozen=True, eq=False)
class MatchResult:
    """Per-detection true/false-positive flags in rank order.

    ``flags[k]`` is 1 when the k-th detection (descending confidence)
    matched a ground truth.  Each ground truth is matched at most once.
    """

    flags: np.ndarray
    num_matched: int
    num_gt: int

    def __post_init__(self):
        flags = np.ascontiguousarray(np.asarray(self.flags, dtype=np.uint8))
        flags.setflags(write=False)
        object.__setattr__(self, "flags", flags)
        if self.num_matched != int(flags.sum()):
            raise ValidationError("num_matched does not agree with flags")
        if self.num_matched > self.num_gt:
            raise ValidationError(
                f"matched {self.num_matched} ground truths but only {self.num_gt} exist"
            )


def rank_detections(dets: Sequence[Detection]) -> List[Detection]:
    """Descending confidence; ties break to earlier time, then input order."""
    return sorted(dets, key=lambda d: (-d.confidence, d.time))


def annotation_groups(annotations: Sequence[AnnotationSet]) -> GtGroups:
    """Partition ground-truth event times by (game_id, class_index)."""
    groups: GtGroups = {}
    for ann in annotations:
        for cls, time in ann.events:
            groups.setdefault((ann.game_id, cls), []).append(time)
    return groups


def match_detections(
    dets: Sequence[Detection], gts: Sequence[float], delta: float
) -> MatchResult:
    """Match one game's single-class detections against ground truth.

    Detections are processed in rank order; each matches the nearest
    unmatched ground truth within ``delta / 2`` seconds (equidistant
    ties go to the earlier ground truth).
    """
    delta = float(delta)
    if not (math.isfinite(delta) and delta > 0):
        raise ValidationError(f"tolerance delta must be positive, got {delta}")
    classes = {d.class_index for d in dets}
    if len(classes) > 1:
        raise ValidationError(
            f"match_detections operates on a single class; got {sorted(classes)}"
        )
    ranked = rank_detections(dets)
    det_times = np.array([d.time for d in ranked], dtype=np.float64)
    gt_times = np.sort(np.asarray(list(gts), dtype=np.float64))
    flags = match_kernel(det_times, gt_times, delta / 2.0)
    return MatchResult(flags=flags, num_matched=int(flags.sum()), num_gt=len(gts))


def _ap_from_flags(flags: np.ndarray, num_gt: int) -> float:
    """All-point interpolated AP from rank-ordered TP/FP flags."""
    if num_gt == 0 or flags.size == 0:
        return 0.0
    tp_mask = flags == 1
    tp = np.cumsum(tp_mask)
    if tp[-1] == 0:
        return 0.0
    fp = np.cumsum(~tp_mask)
    precision = tp / (tp + fp)
    envelope = np.maximum.accumulate(precision[::-1])[::-1]
    # Recall increases by 1 / num_gt at every TP; the envelope value
    # there is the interpolated precision for that recall step.
    return float(envelope[tp_mask].sum() / num_gt)


def average_precision(match: MatchResult) -> float:
    """Area under the precision envelope as a function of recall."""
    return _ap_from_flags(match.flags, match.num_gt)


def _pooled_class_ap(
    dets: DetectionGroups, gts: GtGroups, class_index: int, delta: float
) -> float:
    """AP for one class with detections pooled across games.

    Matching stays per game; the ranked lists are then merged by
    (confidence desc, time asc, game_id asc) before integrating.
    """
    games = sorted(
        {g for (g, c) in dets if c == class_index}
        | {g for (g, c) in gts if c == class_index}
    )
    pooled: List[Tuple[float, float, str, int]] = []
    num_gt = 0
    for game in games:
        game_dets = rank_detections(dets.get((game, class_index), []))
        game_gts = gts.get((game, class_index), [])
        num_gt += len(game_gts)
        det_times = np.array([d.time for d in game_dets], dtype=np.float64)
        gt_times = np.sort(np.asarray(game_gts, dtype=np.float64))
        flags = match_kernel(det_times, gt_times, delta / 2.0)
        pooled.extend(
            (d.confidence, d.time, game, int(f)) for d, f in zip(game_dets, flags)
        )
    pooled.sort(key=lambda row: (-row[0], row[1], row[2]))
    merged = np.array([row[3] for row in pooled], dtype=np.uint8)
    return _ap_from_flags(merged, num_gt)


def map_at_tolerance(
    dets: DetectionGroups, gts: GtGroups, delta: float
) -> Tuple[Dict[int, Optional[float]], float]:
    """Per-class AP and mAP at one tolerance.

    Classes with zero ground truth across the evaluated games are
    excluded from the mean and reported with AP ``None``.
    """
    delta = float(delta)
    if not (math.isfinite(delta) and delta > 0):
        raise ValidationError(f"tolerance delta must be positive, got {delta}")
    classes_with_gt = sorted({c for (g, c), times in gts.items() if times})
    if not classes_with_gt:
        raise ValidationError("no class has any ground truth")
    all_classes = sorted(set(classes_with_gt) | {c for (g, c) in dets})
    per_class: Dict[int, Optional[float]] = {}
    for cls in all_classes:
        if cls in classes_with_gt:
            per_class[cls] = _pooled_class_ap(dets, gts, cls, delta)
        else:
            per_class[cls] = None
    scores = [per_class[c] for c in classes_with_gt]
    return per_class, float(np.mean(scores))


@dataclass(frozen=True, eq=False)
class EvalReport:
    """Average-mAP over a tolerance schedule, with the full breakdown."""

    schedule: ToleranceSchedule
    per_class_ap: Dict[float, Dict[int, Optional[float]]]
    per_delta_map: Dict[float, float]
    average_map: float
    class_names: Optional[Tuple[str, ...]] = None
    config: Dict[str, object] = field(default_factory=dict)

    def __post_init__(self):
        for delta, table in self.per_class_ap.items():
            for cls, ap in table.items():
                if ap is not None and not 0.0 <= ap <= 1.0:
                    raise ValidationError(f"AP out of range at delta={delta}: {ap}")
        mean = float(np.mean(list(self.per_delta_map.values())))
        if not math.isclose(mean, self.average_map, rel_tol=0, abs_tol=1e-12):
            raise ValidationError("average-mAP is not the mean of per-tolerance mAPs")

    def excluded_classes(self) -> List[int]:
        """Classes present in detections but with zero ground truth."""
        first = self.per_class_ap[self.schedule.deltas[0]]
        return sorted(c for c, ap in first.items() if ap is None)

    def _class_label(self, cls: int) -> str:
        if self.class_names and 0 <= cls < len(self.class_names):
            return self.class_names[cls]
        return f"class_{cls}"

    def to_json_dict(self) -> dict:
        deltas = list(self.schedule.deltas)
        return {
            "version": 1,
            "schedule": deltas,
            "average_map": self.average_map,
            "per_delta": [
                {
                    "delta": d,
                    "map": self.per_delta_map[d],
                    "per_class": [
                        {
                            "class_index": cls,
                            "class_name": self._class_label(cls),
                            "ap": ap,
                        }
                        for cls, ap in sorted(self.per_class_ap[d].items())
                    ],
                }
                for d in deltas
            ],
            "classes_without_ground_truth": self.excluded_classes(),
            "config": self.config,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    def format_table(self) -> str:
        """Human-readable aligned table, 4 decimal places."""
        deltas = list(self.schedule.deltas)
        classes = sorted(self.per_class_ap[deltas[0]])
        label_width = max(
            [len(self._class_label(c)) for c in classes] + [len("average-mAP")]
        )
        header = "delta (s)".ljust(label_width) + "".join(
            f"{d:>9.1f}" for d in deltas
        )
        lines = [header]
        for cls in classes:
            row = self._class_label(cls).ljust(label_width)
            for d in deltas:
                ap = self.per_class_ap[d][cls]
                row += f"{ap:>9.4f}" if ap is not None else f"{'-':>9}"
            lines.append(row)
        map_row = "mAP".ljust(label_width) + "".join(
            f"{self.per_delta_map[d]:>9.4f}" for d in deltas
        )
        lines.append(map_row)
        lines.append(f"average-mAP: {self.average_map:.4f}")
        return "\n".join(lines)


def average_map(
    dets: DetectionGroups,
    gts: GtGroups,
    schedule: ToleranceSchedule,
    class_names: Optional[Sequence[str]] = None,
    config: Optional[dict] = None,
) -> EvalReport:
    """Evaluate mAP at every tolerance in the schedule and average."""
    results = map_ordered(
        lambda d: map_at_tolerance(dets, gts, d), schedule.deltas
    )
    per_class = {d: table for d, (table, _) in zip(schedule.deltas, results)}
    per_delta = {d: score for d, (_, score) in zip(schedule.deltas, results)}
    return EvalReport(
        schedule=schedule,
        per_class_ap=per_class,
        per_delta_map=per_delta,
        average_map=float(np.mean(list(per_delta.values()))),
        class_names=None if class_names is None else tuple(class_names),
        config=dict(config or {}),
    )


def sweep_window(
    dets: DetectionGroups,
    gts: GtGroups,
    candidates: Sequence[float],
    method: str,
    schedule: ToleranceSchedule,
    floor: float = 0.0,
) -> Tuple[float, List[Tuple[float, float]]]:
    """Average-mAP for every candidate suppression window.

    Returns the best window (ties go to the smaller one) plus the full
    (window, score) table in candidate order.
    """
    candidates = [float(w) for w in candidates]
    if not candidates:
        raise ValidationError("sweep requires at least one candidate window")

    def run(window: float) -> float:
        cfg = SuppressionConfig(method=method, window=window, floor=floor)
        return average_map(suppress_all(dets, cfg), gts, schedule).average_map

    scores = map_ordered(run, candidates)
    table = list(zip(candidates, scores))
    best_score = max(scores)
    best_window = min(w for w, s in table if s == best_score)
    return best_window, table
