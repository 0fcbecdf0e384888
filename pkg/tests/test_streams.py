"""Stream types, resampling, displacement, and thresholding."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spotkit import (
    Detection,
    ScoreStream,
    ToleranceSchedule,
    ValidationError,
    displace,
    resample_stream,
    threshold_detections,
)

from oracles import interp_at


def make_stream(conf, fps=1.0, disp=None, game_id="g0", names=None):
    conf = np.atleast_2d(np.asarray(conf, dtype=np.float64))
    if conf.shape[0] == 1 and conf.shape[1] > 1:
        conf = conf.T
    if names is None:
        names = tuple(f"c{i}" for i in range(conf.shape[1]))
    if disp is not None:
        disp = np.atleast_2d(np.asarray(disp, dtype=np.float64))
        if disp.shape[0] == 1 and disp.shape[1] > 1:
            disp = disp.T
    return ScoreStream(
        game_id=game_id, class_names=names, fps=fps, confidences=conf, displacements=disp
    )


class TestScoreStreamValidation:
    def test_rejects_confidence_above_one(self):
        with pytest.raises(ValidationError, match=r"out of \[0, 1\]"):
            make_stream([0.2, 1.3, 0.1])

    def test_rejects_negative_confidence(self):
        with pytest.raises(ValidationError):
            make_stream([-0.1, 0.5])

    def test_rejects_nan_confidence(self):
        with pytest.raises(ValidationError):
            make_stream([0.5, float("nan")])

    def test_rejects_bad_fps(self):
        for fps in (0.0, -1.0, float("inf")):
            with pytest.raises(ValidationError):
                make_stream([0.5], fps=fps)

    def test_rejects_displacement_shape_mismatch(self):
        with pytest.raises(ValidationError, match="shape"):
            ScoreStream(
                "g", ("a",), 1.0, np.zeros((3, 1)), displacements=np.zeros((2, 1))
            )

    def test_rejects_non_finite_displacement_naming_anchor(self):
        disp = np.zeros((3, 2))
        disp[1, 0] = float("nan")
        with pytest.raises(ValidationError, match="anchor 1, class 0"):
            ScoreStream("g", ("a", "b"), 1.0, np.zeros((3, 2)), displacements=disp)

    def test_rejects_empty_stream(self):
        with pytest.raises(ValidationError):
            ScoreStream("g", ("a",), 1.0, np.zeros((0, 1)))

    def test_matrices_are_readonly(self):
        stream = make_stream([0.1, 0.2])
        with pytest.raises(ValueError):
            stream.confidences[0, 0] = 0.5


class TestDetection:
    def test_rejects_negative_time(self):
        with pytest.raises(ValidationError):
            Detection(0, -1.0, 0.5)

    def test_rejects_out_of_range_confidence(self):
        with pytest.raises(ValidationError):
            Detection(0, 1.0, 1.5)


class TestToleranceSchedule:
    def test_tight_and_loose_defaults(self):
        assert ToleranceSchedule.tight().deltas == (1.0, 2.0, 3.0, 4.0, 5.0)
        assert ToleranceSchedule.loose().deltas == tuple(float(d) for d in range(5, 65, 5))

    def test_radius_is_half_window(self):
        assert ToleranceSchedule((1.0, 3.0)).radii == (0.5, 1.5)

    def test_rejects_non_increasing(self):
        with pytest.raises(ValidationError):
            ToleranceSchedule((1.0, 1.0))

    def test_from_spec_csv(self):
        assert ToleranceSchedule.from_spec("1, 2.5, 4").deltas == (1.0, 2.5, 4.0)


class TestResample:
    def test_midpoints_at_double_rate(self):
        stream = make_stream([0.0, 1.0, 0.0])
        out = resample_stream(stream, 2.0)
        assert out.fps == 2.0
        np.testing.assert_array_equal(
            out.confidences.ravel(), [0.0, 0.5, 1.0, 0.5, 0.0]
        )

    def test_same_rate_is_identity(self):
        stream = make_stream([0.3, 0.7, 0.1], disp=[0.1, -0.2, 0.0])
        assert resample_stream(stream, 1.0) == stream

    def test_quarter_steps_match_pointwise_oracle(self):
        # Derived case: 1 Hz [0.2, 0.8] at 4 Hz steps k/4.
        stream = make_stream([0.2, 0.8])
        out = resample_stream(stream, 4.0)
        expected = [interp_at([0.2, 0.8], 1.0, k / 4) for k in range(5)]
        np.testing.assert_array_equal(out.confidences.ravel(), expected)
        np.testing.assert_allclose(
            out.confidences.ravel(), [0.2, 0.35, 0.5, 0.65, 0.8], atol=1e-12
        )

    def test_output_length_formula(self):
        # T' = floor((T - 1) * target / fps) + 1
        for t, fps, target in [(3, 1.0, 2.0), (5, 2.0, 3.0), (4, 1.0, 0.5), (1, 1.0, 7.0)]:
            stream = make_stream([0.5] * t, fps=fps)
            out = resample_stream(stream, target)
            assert out.num_anchors == math.floor((t - 1) * target / fps) + 1

    def test_displacements_resampled_identically(self):
        stream = make_stream([0.0, 1.0, 0.0], disp=[-1.0, 0.0, 1.0])
        out = resample_stream(stream, 2.0)
        np.testing.assert_array_equal(
            out.displacements.ravel(), [-1.0, -0.5, 0.0, 0.5, 1.0]
        )

    def test_rejects_bad_target(self):
        stream = make_stream([0.5, 0.5])
        for target in (0.0, -2.0, float("nan")):
            with pytest.raises(ValidationError):
                resample_stream(stream, target)

    @given(
        values=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=12),
        factor=st.sampled_from([2, 3, 4, 5]),
        fps=st.sampled_from([0.5, 1.0, 2.0, 3.0]),
    )
    @settings(max_examples=150, deadline=None)
    def test_upsampling_preserves_original_samples(self, values, factor, fps):
        stream = make_stream(values, fps=fps)
        out = resample_stream(stream, factor * fps)
        original = out.confidences[::factor]
        np.testing.assert_array_equal(original, stream.confidences)

    @given(
        values=st.lists(st.floats(0.0, 1.0), min_size=2, max_size=12),
        target=st.sampled_from([0.5, 1.5, 2.0, 3.0, 7.0]),
    )
    @settings(max_examples=150, deadline=None)
    def test_resampled_values_stay_within_channel_bounds(self, values, target):
        stream = make_stream(values)
        out = resample_stream(stream, target)
        assert out.confidences.min() >= min(values) - 1e-15
        assert out.confidences.max() <= max(values) + 1e-15

    @given(
        values=st.lists(st.floats(0.0, 1.0), min_size=1, max_size=10),
        fps=st.sampled_from([0.5, 1.0, 2.0]),
    )
    @settings(max_examples=150, deadline=None)
    def test_up_then_down_roundtrip_is_exact(self, values, fps):
        stream = make_stream(values, fps=fps)
        up = resample_stream(stream, 2 * fps)
        back = resample_stream(up, fps)
        assert back == stream


class TestDisplace:
    def test_displaced_time_from_anchor_grid(self):
        conf = np.full((5, 1), 0.5)
        disp = np.zeros((5, 1))
        conf[3, 0] = 0.9
        disp[3, 0] = -0.25
        stream = ScoreStream("g", ("a",), 2.0, conf, displacements=disp)
        dets = displace(stream)
        assert dets[3] == Detection(0, 3 / 2 - 0.25, 0.9)

    def test_zero_displacement_lands_on_anchor_times(self):
        stream = make_stream([0.1, 0.2, 0.3], fps=2.0, disp=[0.0, 0.0, 0.0])
        dets = displace(stream)
        assert [d.time for d in dets] == [0.0, 0.5, 1.0]

    def test_missing_displacements_treated_as_zero(self):
        stream = make_stream([0.1, 0.2, 0.3], fps=2.0)
        assert [d.time for d in displace(stream)] == [0.0, 0.5, 1.0]

    def test_clamped_to_stream_start(self):
        stream = make_stream([0.5, 0.5, 0.5], disp=[-5.0, 0.0, 0.0])
        assert displace(stream)[0].time == 0.0

    def test_clamped_to_duration(self):
        stream = make_stream([0.5, 0.5, 0.5], disp=[0.0, 0.0, 9.0])
        assert displace(stream)[2].time == 2.0

    def test_caller_supplied_clamp(self):
        stream = make_stream([0.5, 0.5, 0.5], disp=[0.0, 0.0, 9.0])
        assert displace(stream, clamp=(0.0, 30.0))[2].time == 11.0

    def test_detection_count_is_anchors_times_classes(self):
        rng = np.random.default_rng(7)
        conf = rng.random((11, 3))
        stream = ScoreStream("g", ("a", "b", "c"), 2.0, conf)
        assert len(displace(stream)) == 11 * 3

    def test_output_grouped_by_class(self):
        conf = np.random.default_rng(0).random((4, 2))
        stream = ScoreStream("g", ("a", "b"), 1.0, conf)
        classes = [d.class_index for d in displace(stream)]
        assert classes == [0] * 4 + [1] * 4

    def test_zero_displacement_argmax_matches_matrix_argmax(self):
        rng = np.random.default_rng(3)
        conf = rng.random((20, 4))
        stream = ScoreStream("g", tuple("abcd"), 2.0, conf)
        dets = displace(stream)
        for cls in range(4):
            cls_dets = [d for d in dets if d.class_index == cls]
            best = max(range(len(cls_dets)), key=lambda i: cls_dets[i].confidence)
            assert best == int(np.argmax(conf[:, cls]))

    def test_non_finite_displacement_rejected_with_anchor(self):
        stream = make_stream([0.5, 0.5], disp=[0.0, 0.0])
        bad = np.array([[0.0], [np.inf]])
        object.__setattr__(stream, "displacements", bad)
        with pytest.raises(ValidationError, match="anchor 1"):
            displace(stream)

    def test_rejects_non_finite_clamp(self):
        stream = make_stream([0.5, 0.5])
        with pytest.raises(ValidationError):
            displace(stream, clamp=(0.0, float("inf")))


class TestThreshold:
    def test_keeps_at_or_above_floor(self):
        dets = [Detection(0, 1.0, 0.9), Detection(0, 2.0, 0.1)]
        assert threshold_detections(dets, 0.5) == [dets[0]]

    def test_zero_floor_keeps_everything(self):
        dets = [Detection(0, 1.0, 0.9), Detection(0, 2.0, 0.1)]
        assert threshold_detections(dets, 0.0) == dets

    def test_floor_one_drops_all_below_one(self):
        dets = [Detection(0, 1.0, 0.99), Detection(0, 2.0, 0.1)]
        assert threshold_detections(dets, 1.0) == []

    def test_boundary_is_inclusive(self):
        dets = [Detection(0, 1.0, 0.5)]
        assert threshold_detections(dets, 0.5) == dets

    def test_rejects_bad_floor(self):
        with pytest.raises(ValidationError):
            threshold_detections([], 1.5)
