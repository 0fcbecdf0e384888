"""Command-line surface.

Every subcommand is a thin shell over one library operation; running
through the CLI or the library on the same inputs produces identical
outputs.  Exit codes: 0 success, 1 usage error, 2 data or validation
error.  With ``--json-errors`` data errors also emit one machine-
readable JSON object on stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

from . import io as skio
from .errors import SpotkitError, ValidationError
from .evaluation import annotation_groups, average_map, sweep_window
from .fusion import FusionWeights, fuse_streams, search_fusion_weight
from .pipeline import PipelineConfig, spot_stream
from .streams import (
    AnnotationSet,
    DetectionGroups,
    ScoreStream,
    ToleranceSchedule,
    displace,
    merge_groups,
    threshold_detections,
)
from .suppression import (
    DEFAULT_HARD_WINDOW,
    DEFAULT_SOFT_WINDOW,
    SuppressionConfig,
    suppress_all,
)
from .synth import SynthConfig, synth_generate

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on usage errors by default; the CLI contract
    # reserves 2 for data errors, so remap to 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _expand_inputs(paths: Sequence[str]) -> List[Path]:
    """Expand directory arguments into their sorted *.json contents."""
    out: List[Path] = []
    for raw in paths:
        path = Path(raw)
        if path.is_dir():
            found = sorted(path.glob("*.json"))
            if not found:
                raise ValidationError(f"no .json files in directory {path}")
            out.extend(found)
        else:
            out.append(path)
    return out


def _load_detection_inputs(
    paths: Sequence[str], threshold: float
) -> Tuple[DetectionGroups, Tuple[str, ...]]:
    """Read detection or stream files into one grouping.

    Stream files are spotted (displace + threshold) on the fly, so sweeps
    can start from raw model output.
    """
    groups: List[DetectionGroups] = []
    class_names: Optional[Tuple[str, ...]] = None
    for path in _expand_inputs(paths):
        doc = skio._load_json(path)
        if "confidences" in doc:
            stream = skio.read_stream(path)
            groups.append(spot_stream(stream, threshold=threshold))
            names = stream.class_names
        else:
            det_doc = skio.read_detections(path)
            groups.append(det_doc.groups())
            names = det_doc.class_names
        if class_names is None:
            class_names = names
        elif class_names != names:
            raise ValidationError(
                f"class list in {path} disagrees with earlier inputs: "
                f"{list(names)} vs {list(class_names)}"
            )
    assert class_names is not None
    return merge_groups(groups), class_names


def _load_annotations(paths: Sequence[str], class_names: Sequence[str]) -> List[AnnotationSet]:
    return [skio.read_labels(path, class_names) for path in _expand_inputs(paths)]


def _flatten_groups(groups: DetectionGroups) -> List:
    dets = []
    for key in sorted(groups):
        dets.extend(groups[key])
    return dets


def _schedule(spec: str) -> ToleranceSchedule:
    return ToleranceSchedule.from_spec(spec)


# -- subcommands --------------------------------------------------------


def _cmd_resample(args) -> int:
    from .streams import resample_stream

    stream = skio.read_stream(args.input)
    skio.write_stream(resample_stream(stream, args.fps), args.output)
    return EXIT_OK


def _cmd_spot(args) -> int:
    stream = skio.read_stream(args.input)
    dets = threshold_detections(displace(stream), args.threshold)
    skio.write_detections(
        skio.DetectionDocument(
            game_id=stream.game_id,
            class_names=stream.class_names,
            detections=tuple(dets),
        ),
        args.output,
    )
    return EXIT_OK


def _cmd_suppress(args) -> int:
    doc = skio.read_detections(args.input)
    window = args.window
    if window is None:
        window = DEFAULT_HARD_WINDOW if args.method == "hard" else DEFAULT_SOFT_WINDOW
    cfg = SuppressionConfig(method=args.method, window=window, floor=args.floor)
    suppressed = suppress_all(doc.groups(), cfg)
    skio.write_detections(
        skio.DetectionDocument(
            game_id=doc.game_id,
            class_names=doc.class_names,
            detections=tuple(_flatten_groups(suppressed)),
        ),
        args.output,
    )
    return EXIT_OK


def _cmd_fuse(args) -> int:
    a = skio.read_stream(args.a)
    b = skio.read_stream(args.b)
    if args.search:
        if not args.labels:
            raise ValidationError("--search requires --labels")
        labels = _load_annotations(args.labels, a.class_names)
        cfg = PipelineConfig(
            suppression=SuppressionConfig("soft", DEFAULT_SOFT_WINDOW),
            schedule=ToleranceSchedule.tight(),
            threshold=args.threshold,
        )
        best, table = search_fusion_weight(
            [(a, b)] if len(labels) == 1 else _pair_games(a, b, labels),
            labels,
            eval_cfg=cfg,
            grid_step=args.grid_step,
        )
        print(f"{'weight_a':>10}  {'avg-mAP':>8}")
        for weight, score in table:
            print(f"{weight:>10.4f}  {score:>8.4f}")
        print(f"best weight_a: {best.weight_a:.4f}")
        if args.output:
            skio.write_stream(fuse_streams(a, b, best), args.output)
        return EXIT_OK
    if args.weight_a is None:
        raise ValidationError("either --weight-a or --search is required")
    if not args.output:
        raise ValidationError("--out is required when fusing at a fixed weight")
    skio.write_stream(fuse_streams(a, b, FusionWeights(args.weight_a)), args.output)
    return EXIT_OK


def _pair_games(a: ScoreStream, b: ScoreStream, labels) -> List[Tuple[ScoreStream, ScoreStream]]:
    # Single-pair CLI invocation; multi-game search goes through the API.
    return [(a, b)]


def _cmd_evaluate(args) -> int:
    groups, class_names = _load_detection_inputs(args.dets, threshold=0.0)
    annotations = _load_annotations(args.labels, class_names)
    report = average_map(
        groups,
        annotation_groups(annotations),
        _schedule(args.schedule),
        class_names=class_names,
        config={"schedule": args.schedule},
    )
    print(report.format_table())
    if args.json_out:
        skio.write_report(report, args.json_out)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    try:
        windows = [float(w) for w in args.windows.split(",") if w.strip()]
    except ValueError:
        raise ValidationError(f"cannot parse --windows {args.windows!r}") from None
    groups, class_names = _load_detection_inputs(args.inputs, threshold=args.threshold)
    annotations = _load_annotations(args.labels, class_names)
    best, table = sweep_window(
        groups,
        annotation_groups(annotations),
        windows,
        method=args.method,
        schedule=_schedule(args.schedule),
        floor=args.floor,
    )
    print(f"{'window (s)':>11}  {'avg-mAP':>8}")
    for window, score in table:
        print(f"{window:>11.2f}  {score:>8.4f}")
    print(f"best window: {best:g}")
    return EXIT_OK


def _cmd_synth(args) -> int:
    with open(args.config, "r", encoding="utf-8") as handle:
        cfg = SynthConfig.from_dict(json.load(handle))
    annotations, streams = synth_generate(cfg)
    out_dir = Path(args.out_dir)
    for ann, stream in zip(annotations, streams):
        skio.write_stream(stream, out_dir / "streams" / f"{stream.game_id}.json")
        skio.write_labels(ann, cfg.class_names, out_dir / "labels" / f"{ann.game_id}.json")
    print(f"wrote {len(streams)} games to {out_dir}")
    return EXIT_OK


# -- parser -------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="spotkit", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--json-errors",
        action="store_true",
        help="emit data errors as one JSON object on stderr",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("resample", help="resample a stream to a new anchor rate")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--fps", type=float, required=True)
    p.set_defaults(func=_cmd_resample)

    p = sub.add_parser("spot", help="turn a stream into candidate detections")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--threshold", type=float, default=0.0)
    p.set_defaults(func=_cmd_spot)

    p = sub.add_parser("suppress", help="apply hard or soft NMS to detections")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", dest="output", required=True)
    p.add_argument("--method", choices=("hard", "soft"), required=True)
    p.add_argument("--window", type=float, default=None, help="seconds; defaults to 3 (hard) / 8 (soft)")
    p.add_argument("--floor", type=float, default=0.0)
    p.set_defaults(func=_cmd_suppress)

    p = sub.add_parser("fuse", help="fuse two streams in logit space")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--weight-a", dest="weight_a", type=float, default=None)
    p.add_argument("--out", dest="output", default=None)
    p.add_argument("--search", action="store_true", help="grid-search the weight on --labels")
    p.add_argument("--labels", nargs="+", default=None)
    p.add_argument("--grid-step", dest="grid_step", type=float, default=0.05)
    p.add_argument("--threshold", type=float, default=0.0, help="spot threshold inside the search pipeline")
    p.set_defaults(func=_cmd_fuse)

    p = sub.add_parser("evaluate", help="average-mAP of detections against labels")
    p.add_argument("--dets", nargs="+", required=True)
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--schedule", default="tight", help="tight, loose, or CSV of deltas")
    p.add_argument("--json-out", dest="json_out", default=None)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("sweep", help="sweep suppression windows, report the best")
    p.add_argument("--in", dest="inputs", nargs="+", required=True,
                   help="detection or stream files (streams are spotted first)")
    p.add_argument("--labels", nargs="+", required=True)
    p.add_argument("--method", choices=("hard", "soft"), required=True)
    p.add_argument("--windows", required=True, help="CSV of window sizes in seconds")
    p.add_argument("--schedule", default="tight")
    p.add_argument("--threshold", type=float, default=0.0)
    p.add_argument("--floor", type=float, default=0.0)
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("synth", help="generate a synthetic corpus")
    p.add_argument("--config", required=True)
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except SpotkitError as exc:
        _report_error(exc, args.json_errors)
        return EXIT_DATA
    except FileNotFoundError as exc:
        _report_error(exc, args.json_errors)
        return EXIT_DATA


def _report_error(exc: Exception, as_json: bool) -> None:
    if as_json:
        payload = {"error": type(exc).__name__, "message": str(exc)}
        if hasattr(exc, "path"):
            payload["path"] = exc.path
        print(json.dumps(payload), file=sys.stderr)
    else:
        print(f"spotkit: error: {exc}", file=sys.stderr)


if __name__ == "__main__":
    sys.exit(main())
