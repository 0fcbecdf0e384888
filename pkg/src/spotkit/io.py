"""File formats and label ingestion.

All documents are versioned JSON with a fixed key order and default
float formatting (shortest round-trip representation), so writes are
canonical: the same value always serializes to the same bytes, and a
write-then-read round trip is numerically lossless.  Writes go through
a temp file and an atomic rename.  Schemas are documented in
``docs/formats.md``.
"""

from __future__ import annotations

import json
import os
import re
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from .errors import SchemaError, ValidationError
from .evaluation import EvalReport
from .streams import AnnotationSet, Detection, DetectionGroups, ScoreStream

__all__ = [
    "DetectionDocument",
    "import_soccernet_labels",
    "read_detections",
    "read_labels",
    "read_stream",
    "write_detections",
    "write_labels",
    "write_report",
    "write_stream",
]


def _write_text_atomic(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_json(doc: dict, path) -> None:
    _write_text_atomic(path, json.dumps(doc, indent=2) + "\n")


def _load_json(path) -> dict:
    with open(path, "r", encoding="utf-8") as handle:
        try:
            doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"not valid JSON: {exc}", "$") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"expected a JSON object, got {type(doc).__name__}", "$")
    return doc


def _require(doc: dict, key: str, kind, path: str = "$"):
    if key not in doc:
        raise SchemaError("missing required key", f"{path}.{key}")
    value = doc[key]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise SchemaError(f"expected a number, got {type(value).__name__}", f"{path}.{key}")
        return float(value)
    if not isinstance(value, kind):
        raise SchemaError(
            f"expected {kind.__name__}, got {type(value).__name__}", f"{path}.{key}"
        )
    return value


def _check_version(doc: dict) -> None:
    version = _require(doc, "version", int)
    if version != 1:
        raise SchemaError(f"unsupported version {version}, expected 1", "$.version")


def _parse_matrix(doc: dict, key: str, num_classes: int, expected_rows: Optional[int]) -> np.ndarray:
    rows = _require(doc, key, list)
    if expected_rows is not None and len(rows) != expected_rows:
        raise SchemaError(
            f"expected {expected_rows} rows, got {len(rows)}", f"$.{key}"
        )
    if not rows:
        raise SchemaError("matrix must have at least one row", f"$.{key}")
    for i, row in enumerate(rows):
        if not isinstance(row, list):
            raise SchemaError(f"expected a row of numbers, got {type(row).__name__}", f"$.{key}[{i}]")
        if len(row) != num_classes:
            raise SchemaError(
                f"expected {num_classes} entries, got {len(row)}", f"$.{key}[{i}]"
            )
        for j, value in enumerate(row):
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise SchemaError(
                    f"expected a number, got {type(value).__name__}", f"$.{key}[{i}][{j}]"
                )
    return np.asarray(rows, dtype=np.float64)


# -- score streams -----------------------------------------------------


def read_stream(path) -> ScoreStream:
    """Load a StreamFile document."""
    doc = _load_json(path)
    _check_version(doc)
    game_id = _require(doc, "game_id", str)
    fps = _require(doc, "fps", float)
    if fps <= 0:
        raise SchemaError(f"fps must be positive, got {fps}", "$.fps")
    class_names = _require(doc, "class_names", list)
    if not class_names or not all(isinstance(n, str) for n in class_names):
        raise SchemaError("expected a non-empty list of strings", "$.class_names")
    conf = _parse_matrix(doc, "confidences", len(class_names), None)
    bad = np.argwhere(~((conf >= 0.0) & (conf <= 1.0)))
    if bad.size:
        i, j = bad[0]
        raise SchemaError(
            f"confidence {conf[i, j]} out of range [0, 1]", f"$.confidences[{i}][{j}]"
        )
    disp = None
    if "displacements" in doc and doc["displacements"] is not None:
        disp = _parse_matrix(doc, "displacements", len(class_names), conf.shape[0])
        bad = np.argwhere(~np.isfinite(disp))
        if bad.size:
            i, j = bad[0]
            raise SchemaError("displacement is not finite", f"$.displacements[{i}][{j}]")
    return ScoreStream(
        game_id=game_id,
        class_names=tuple(class_names),
        fps=fps,
        confidences=conf,
        displacements=disp,
    )


def write_stream(stream: ScoreStream, path) -> None:
    """Write a StreamFile document (lossless round trip)."""
    doc = {
        "version": 1,
        "game_id": stream.game_id,
        "fps": stream.fps,
        "class_names": list(stream.class_names),
        "confidences": stream.confidences.tolist(),
    }
    if stream.displacements is not None:
        doc["displacements"] = stream.displacements.tolist()
    _write_json(doc, path)


# -- detections --------------------------------------------------------


@dataclass(frozen=True)
class DetectionDocument:
    """One game's detections plus the class list they index into."""

    game_id: str
    class_names: Tuple[str, ...]
    detections: Tuple[Detection, ...]

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "detections", tuple(self.detections))
        for det in self.detections:
            if det.class_index >= len(self.class_names):
                raise ValidationError(
                    f"detection class {det.class_index} out of range for "
                    f"{len(self.class_names)} classes"
                )

    def groups(self) -> DetectionGroups:
        out: DetectionGroups = {}
        for det in self.detections:
            out.setdefault((self.game_id, det.class_index), []).append(det)
        return out


def read_detections(path) -> DetectionDocument:
    """Load a DetectionFile document."""
    doc = _load_json(path)
    _check_version(doc)
    game_id = _require(doc, "game_id", str)
    class_names = _require(doc, "class_names", list)
    if not class_names or not all(isinstance(n, str) for n in class_names):
        raise SchemaError("expected a non-empty list of strings", "$.class_names")
    rows = _require(doc, "detections", list)
    dets: List[Detection] = []
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != 3:
            raise SchemaError(
                "expected [class_index, time, confidence]", f"$.detections[{i}]"
            )
        cls, time, conf = row
        if isinstance(cls, bool) or not isinstance(cls, int):
            raise SchemaError("class_index must be an integer", f"$.detections[{i}][0]")
        if not 0 <= cls < len(class_names):
            raise SchemaError(
                f"class_index {cls} out of range for {len(class_names)} classes",
                f"$.detections[{i}][0]",
            )
        try:
            dets.append(Detection(class_index=cls, time=time, confidence=conf))
        except ValidationError as exc:
            raise SchemaError(str(exc), f"$.detections[{i}]") from None
    return DetectionDocument(game_id=game_id, class_names=tuple(class_names), detections=tuple(dets))


def write_detections(doc: DetectionDocument, path) -> None:
    """Write a DetectionFile document."""
    _write_json(
        {
            "version": 1,
            "game_id": doc.game_id,
            "class_names": list(doc.class_names),
            "detections": [
                [d.class_index, d.time, d.confidence] for d in doc.detections
            ],
        },
        path,
    )


# -- ground-truth labels -----------------------------------------------


def read_labels(path, class_names: Sequence[str]) -> AnnotationSet:
    """Load a LabelFile, resolving class names against ``class_names``."""
    doc = _load_json(path)
    _check_version(doc)
    game_id = _require(doc, "game_id", str)
    entries = _require(doc, "events", list)
    index = {name: i for i, name in enumerate(class_names)}
    events: List[Tuple[int, float]] = []
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise SchemaError("expected an event object", f"$.events[{i}]")
        name = _require(entry, "class", str, f"$.events[{i}]")
        time = _require(entry, "time", float, f"$.events[{i}]")
        if name not in index:
            raise ValidationError(
                f"label class {name!r} does not resolve against classes {list(class_names)}"
            )
        events.append((index[name], time))
    duration = None
    if "duration" in doc and doc["duration"] is not None:
        duration = _require(doc, "duration", float)
    return AnnotationSet(game_id=game_id, events=tuple(events), duration=duration)


def write_labels(ann: AnnotationSet, class_names: Sequence[str], path) -> None:
    """Write a LabelFile document."""
    doc = {
        "version": 1,
        "game_id": ann.game_id,
        "events": [
            {"class": class_names[cls], "time": time} for cls, time in ann.events
        ],
    }
    if ann.duration is not None:
        doc["duration"] = ann.duration
    _write_json(doc, path)


_CLOCK_RE = re.compile(r"^\s*(\d+):([0-5]?\d)\s*$")


def _parse_clock(clock: str, index: int) -> float:
    match = _CLOCK_RE.match(clock)
    if not match:
        raise ValidationError(f"entry {index}: malformed clock string {clock!r}")
    return 60.0 * int(match.group(1)) + int(match.group(2))


def import_soccernet_labels(
    path,
    class_map: Mapping[str, int],
    half_offsets: Optional[Mapping[int, float]] = None,
) -> Tuple[List[AnnotationSet], List[str]]:
    """Ingest a SoccerNet-style annotation document.

    Each annotation carries a label string, a half indicator, and a game
    clock ("MM:SS", usually inside a ``gameTime`` field like
    ``"1 - 12:34"``); a millisecond ``position`` field takes precedence
    over the clock when present.  Labels resolve through ``class_map``;
    unmapped labels are skipped and reported in the returned warning
    list rather than raising.

    With ``half_offsets`` (half number -> offset seconds) the halves
    merge into a single annotation set on one game clock.  Without it,
    each half becomes its own annotation set with ``_half<n>`` appended
    to the game id, which matches per-half evaluation.
    """
    doc = _load_json(path)
    entries = _require(doc, "annotations", list)
    game_id = doc.get("game_id") or doc.get("UrlLocal") or Path(path).stem
    game_id = str(game_id).strip().strip("/").replace("/", "_")

    per_half: Dict[int, List[Tuple[int, float]]] = {}
    skipped: Dict[str, int] = {}
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise SchemaError("expected an annotation object", f"$.annotations[{i}]")
        label = _require(entry, "label", str, f"$.annotations[{i}]")
        if "gameTime" in entry:
            game_time = _require(entry, "gameTime", str, f"$.annotations[{i}]")
            half_str, _, clock = game_time.partition(" - ")
            try:
                half = int(half_str)
            except ValueError:
                raise ValidationError(
                    f"entry {i}: malformed gameTime {game_time!r}"
                ) from None
        else:
            half = _require(entry, "half", int, f"$.annotations[{i}]")
            clock = _require(entry, "clock", str, f"$.annotations[{i}]")
        if "position" in entry:
            try:
                seconds = float(entry["position"]) / 1000.0
            except (TypeError, ValueError):
                raise ValidationError(
                    f"entry {i}: malformed position {entry['position']!r}"
                ) from None
        else:
            seconds = _parse_clock(clock, i)
        if label not in class_map:
            skipped[label] = skipped.get(label, 0) + 1
            continue
        per_half.setdefault(half, []).append((class_map[label], seconds))

    warnings = [
        f"label {label!r} not in class map ({count} event(s) skipped)"
        for label, count in sorted(skipped.items())
    ]
    if half_offsets is not None:
        events: List[Tuple[int, float]] = []
        for half in sorted(per_half):
            if half not in half_offsets:
                raise ValidationError(f"no offset supplied for half {half}")
            events.extend(
                (cls, half_offsets[half] + t) for cls, t in per_half[half]
            )
        return [AnnotationSet(game_id=game_id, events=tuple(events))], warnings
    return [
        AnnotationSet(game_id=f"{game_id}_half{half}", events=tuple(per_half[half]))
        for half in sorted(per_half)
    ], warnings


# -- reports -----------------------------------------------------------


def write_report(report: EvalReport, path) -> None:
    """Write an EvalReport as canonical JSON."""
    _write_text_atomic(path, report.to_json() + "\n")
