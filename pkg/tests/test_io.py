"""File formats: round trips, schema errors, and label ingestion."""

import json

import numpy as np
import pytest

from spotkit import (
    Detection,
    ScoreStream,
    SchemaError,
    ToleranceSchedule,
    ValidationError,
    average_map,
)
from spotkit.io import (
    DetectionDocument,
    import_soccernet_labels,
    read_detections,
    read_labels,
    read_stream,
    write_detections,
    write_labels,
    write_report,
    write_stream,
)
from spotkit.streams import AnnotationSet


def sample_stream(seed=0, t=7, c=2, disp=True):
    rng = np.random.default_rng(seed)
    return ScoreStream(
        game_id="match-001",
        class_names=("goal", "card"),
        fps=2.0,
        confidences=rng.random((t, c)),
        displacements=rng.uniform(-1, 1, (t, c)) if disp else None,
    )


class TestStreamFiles:
    def test_roundtrip_is_lossless(self, tmp_path):
        stream = sample_stream()
        path = tmp_path / "s.json"
        write_stream(stream, path)
        assert read_stream(path) == stream

    def test_roundtrip_without_displacements(self, tmp_path):
        stream = sample_stream(disp=False)
        path = tmp_path / "s.json"
        write_stream(stream, path)
        loaded = read_stream(path)
        assert loaded == stream
        assert loaded.displacements is None

    def test_writes_are_canonical_bytes(self, tmp_path):
        stream = sample_stream(seed=5)
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        write_stream(stream, a)
        write_stream(stream, b)
        assert a.read_bytes() == b.read_bytes()

    def test_out_of_range_confidence_rejected_with_path(self, tmp_path):
        path = tmp_path / "bad.json"
        doc = {
            "version": 1,
            "game_id": "g",
            "fps": 1.0,
            "class_names": ["a", "b", "c"],
            "confidences": [[0.2, 0.3, 1.3]],
        }
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match=r"\$\.confidences\[0\]\[2\]"):
            read_stream(path)

    def test_ragged_matrix_rejected_with_dimensions(self, tmp_path):
        path = tmp_path / "bad.json"
        doc = {
            "version": 1,
            "game_id": "g",
            "fps": 1.0,
            "class_names": ["a", "b"],
            "confidences": [[0.2, 0.3], [0.5]],
        }
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match="expected 2 entries, got 1"):
            read_stream(path)

    def test_displacement_row_count_must_match(self, tmp_path):
        path = tmp_path / "bad.json"
        doc = {
            "version": 1,
            "game_id": "g",
            "fps": 1.0,
            "class_names": ["a"],
            "confidences": [[0.2], [0.3]],
            "displacements": [[0.0]],
        }
        path.write_text(json.dumps(doc))
        with pytest.raises(SchemaError, match="expected 2 rows, got 1"):
            read_stream(path)

    def test_missing_key_names_json_path(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"version": 1, "game_id": "g"}))
        with pytest.raises(SchemaError, match=r"\$\.fps"):
            read_stream(path)

    def test_wrong_version_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"version": 2}))
        with pytest.raises(SchemaError, match="unsupported version"):
            read_stream(path)

    def test_invalid_json_rejected(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text("{not json")
        with pytest.raises(SchemaError, match="not valid JSON"):
            read_stream(path)


class TestDetectionFiles:
    def test_roundtrip(self, tmp_path):
        doc = DetectionDocument(
            game_id="g",
            class_names=("a", "b"),
            detections=(Detection(0, 1.25, 0.9), Detection(1, 3.75, 0.4)),
        )
        path = tmp_path / "d.json"
        write_detections(doc, path)
        assert read_detections(path) == doc

    def test_class_index_out_of_range_rejected(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(
            json.dumps(
                {
                    "version": 1,
                    "game_id": "g",
                    "class_names": ["a"],
                    "detections": [[3, 1.0, 0.5]],
                }
            )
        )
        with pytest.raises(SchemaError, match=r"\$\.detections\[0\]\[0\]"):
            read_detections(path)

    def test_bad_confidence_rejected_with_entry(self, tmp_path):
        path = tmp_path / "d.json"
        path.write_text(
            json.dumps(
                {
                    "version": 1,
                    "game_id": "g",
                    "class_names": ["a"],
                    "detections": [[0, 1.0, 1.5]],
                }
            )
        )
        with pytest.raises(SchemaError, match=r"\$\.detections\[0\]"):
            read_detections(path)

    def test_groups(self):
        doc = DetectionDocument(
            game_id="g",
            class_names=("a", "b"),
            detections=(Detection(1, 1.0, 0.5), Detection(0, 2.0, 0.6)),
        )
        groups = doc.groups()
        assert set(groups) == {("g", 0), ("g", 1)}


class TestLabelFiles:
    def test_roundtrip(self, tmp_path):
        ann = AnnotationSet("g", ((0, 754.0), (1, 12.5)), duration=2700.0)
        path = tmp_path / "l.json"
        write_labels(ann, ("goal", "card"), path)
        assert read_labels(path, ("goal", "card")) == ann

    def test_unresolvable_class_rejected(self, tmp_path):
        ann = AnnotationSet("g", ((0, 10.0),))
        path = tmp_path / "l.json"
        write_labels(ann, ("goal",), path)
        with pytest.raises(ValidationError, match="resolve"):
            read_labels(path, ("card",))


class TestSoccernetImport:
    def _write(self, tmp_path, annotations, game_id="league/2015/g1"):
        path = tmp_path / "Labels.json"
        path.write_text(json.dumps({"game_id": game_id, "annotations": annotations}))
        return path

    def test_clock_arithmetic(self, tmp_path):
        path = self._write(
            tmp_path, [{"label": "Goal", "gameTime": "1 - 12:34"}]
        )
        anns, warnings = import_soccernet_labels(path, {"Goal": 0}, half_offsets={1: 0.0})
        assert warnings == []
        assert anns[0].events == ((0, 754.0),)

    def test_position_field_overrides_clock(self, tmp_path):
        path = self._write(
            tmp_path,
            [{"label": "Goal", "gameTime": "1 - 12:34", "position": "754321"}],
        )
        anns, _ = import_soccernet_labels(path, {"Goal": 0}, half_offsets={1: 0.0})
        assert anns[0].events == ((0, 754.321),)

    def test_unmapped_labels_become_warnings(self, tmp_path):
        path = self._write(
            tmp_path,
            [
                {"label": "SubstitutionX", "gameTime": "1 - 01:00"},
                {"label": "Goal", "gameTime": "1 - 02:00"},
            ],
        )
        anns, warnings = import_soccernet_labels(path, {"Goal": 0}, half_offsets={1: 0.0})
        assert len(warnings) == 1 and "SubstitutionX" in warnings[0]
        assert anns[0].events == ((0, 120.0),)

    def test_half_offset_applied(self, tmp_path):
        path = self._write(
            tmp_path,
            [
                {"label": "Goal", "gameTime": "1 - 10:00"},
                {"label": "Goal", "gameTime": "2 - 10:00"},
            ],
        )
        anns, _ = import_soccernet_labels(
            path, {"Goal": 0}, half_offsets={1: 0.0, 2: 2700.0}
        )
        assert len(anns) == 1
        assert anns[0].events == ((0, 600.0), (0, 3300.0))

    def test_default_splits_halves_into_games(self, tmp_path):
        path = self._write(
            tmp_path,
            [
                {"label": "Goal", "gameTime": "1 - 10:00"},
                {"label": "Goal", "gameTime": "2 - 10:00"},
            ],
        )
        anns, _ = import_soccernet_labels(path, {"Goal": 0})
        assert [a.game_id for a in anns] == [
            "league_2015_g1_half1",
            "league_2015_g1_half2",
        ]
        assert all(a.events == ((0, 600.0),) for a in anns)

    def test_malformed_clock_names_entry(self, tmp_path):
        path = self._write(
            tmp_path,
            [
                {"label": "Goal", "gameTime": "1 - 10:00"},
                {"label": "Goal", "gameTime": "1 - 99x"},
            ],
        )
        with pytest.raises(ValidationError, match="entry 1"):
            import_soccernet_labels(path, {"Goal": 0})

    def test_separate_half_and_clock_fields(self, tmp_path):
        path = self._write(tmp_path, [{"label": "Goal", "half": 2, "clock": "0:30"}])
        anns, _ = import_soccernet_labels(path, {"Goal": 0}, half_offsets={2: 2700.0})
        assert anns[0].events == ((0, 2730.0),)


class TestReportFiles:
    def test_report_serializes_canonically(self, tmp_path):
        dets = {("g", 0): [Detection(0, 10.0, 1.0)]}
        gts = {("g", 0): [10.0]}
        report = average_map(dets, gts, ToleranceSchedule.tight(), class_names=("a",))
        p1, p2 = tmp_path / "r1.json", tmp_path / "r2.json"
        write_report(report, p1)
        write_report(report, p2)
        assert p1.read_bytes() == p2.read_bytes()
        doc = json.loads(p1.read_text())
        assert doc["average_map"] == 1.0
        assert doc["per_delta"][0]["per_class"][0]["class_name"] == "a"
