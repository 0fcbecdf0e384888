"""Synthetic fixtures: games with known events plus imperfect streams.

The generator draws ground-truth events per class, then emits score
streams that imitate a detector looking at those games: a confidence
peak near each event with decaying side-lobes, uniform confidence
noise, and a displacement channel pointing from each anchor toward the
nearest true event, clipped to the side-lobe width.  Temporal jitter
models detector error twice over: each event's perceived peak location
is jittered once, and the displacement channel carries independent
per-anchor jitter (which is what makes denser anchor grids genuinely
informative, since interpolation averages that noise down).

Everything is driven by one seeded PCG64 generator, so a config is a
complete, portable recipe: identical configs give bit-identical output.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .errors import SchemaError, ValidationError
from .streams import AnnotationSet, ScoreStream

__all__ = ["MIN_EVENT_SPACING", "SynthConfig", "synth_generate", "synth_scores"]

#: Events of one class are kept at least this far apart (seconds), so
#: suppression windows and tolerance radii never couple distinct events.
MIN_EVENT_SPACING = 10.0

#: Peak heights at distance 0, 2L, 4L from the (perceived) event.
_LOBE_HEIGHTS = (1.0, 0.45, 0.2)


@dataclass(frozen=True)
class SynthConfig:
    """Recipe for one deterministic synthetic corpus."""

    seed: int
    num_games: int
    duration: float
    class_names: Tuple[str, ...]
    events_per_class: float
    noise_level: float
    jitter_std: float
    fps: float
    lobe_width: float

    def __post_init__(self):
        object.__setattr__(self, "class_names", tuple(str(n) for n in self.class_names))
        if self.num_games < 1:
            raise ValidationError(f"num_games must be >= 1, got {self.num_games}")
        if not self.class_names:
            raise ValidationError("class_names must not be empty")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ValidationError(f"duration must be positive, got {self.duration}")
        if self.events_per_class < 0:
            raise ValidationError(f"events_per_class must be >= 0, got {self.events_per_class}")
        if not 0.0 <= self.noise_level <= 1.0:
            raise ValidationError(f"noise_level must be in [0, 1], got {self.noise_level}")
        if self.jitter_std < 0:
            raise ValidationError(f"jitter_std must be >= 0, got {self.jitter_std}")
        if not (math.isfinite(self.fps) and self.fps > 0):
            raise ValidationError(f"fps must be positive, got {self.fps}")
        if not (math.isfinite(self.lobe_width) and self.lobe_width > 0):
            raise ValidationError(f"lobe_width must be positive, got {self.lobe_width}")

    @classmethod
    def from_dict(cls, doc: dict) -> "SynthConfig":
        required = {
            "seed": int,
            "num_games": int,
            "duration": float,
            "class_names": list,
            "events_per_class": float,
            "noise_level": float,
            "jitter_std": float,
            "fps": float,
            "lobe_width": float,
        }
        kwargs = {}
        for key, kind in required.items():
            if key not in doc:
                raise SchemaError("missing required key", f"$.{key}")
            value = doc[key]
            if kind is float:
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise SchemaError("expected a number", f"$.{key}")
                value = float(value)
            elif kind is int:
                if isinstance(value, bool) or not isinstance(value, int):
                    raise SchemaError("expected an integer", f"$.{key}")
            elif not isinstance(value, kind):
                raise SchemaError(f"expected {kind.__name__}", f"$.{key}")
            kwargs[key] = value
        kwargs["class_names"] = tuple(kwargs["class_names"])
        return cls(**kwargs)

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "num_games": self.num_games,
            "duration": self.duration,
            "class_names": list(self.class_names),
            "events_per_class": self.events_per_class,
            "noise_level": self.noise_level,
            "jitter_std": self.jitter_std,
            "fps": self.fps,
            "lobe_width": self.lobe_width,
        }


def _draw_events(cfg: SynthConfig, rng: np.random.Generator) -> List[float]:
    """Uniform event times respecting the minimum spacing."""
    count = int(rng.poisson(cfg.events_per_class))
    margin = min(2.0 * cfg.lobe_width, cfg.duration / 4.0)
    lo, hi = margin, cfg.duration - margin
    if hi <= lo:
        lo, hi = 0.0, cfg.duration
    times: List[float] = []
    for _ in range(count):
        for _attempt in range(200):
            t = float(rng.uniform(lo, hi))
            if all(abs(t - u) >= MIN_EVENT_SPACING for u in times):
                times.append(t)
                break
    return sorted(times)


def _emit_stream(
    game_id: str,
    annotations: AnnotationSet,
    cfg: SynthConfig,
    rng: np.random.Generator,
) -> ScoreStream:
    num_anchors = int(math.floor(cfg.duration * cfg.fps)) + 1
    anchor_times = np.arange(num_anchors, dtype=np.float64) / cfg.fps
    num_classes = len(cfg.class_names)
    conf = np.zeros((num_anchors, num_classes), dtype=np.float64)
    disp = np.zeros((num_anchors, num_classes), dtype=np.float64)
    lobe = cfg.lobe_width

    for cls in range(num_classes):
        events = np.asarray(annotations.times_for_class(cls), dtype=np.float64)
        peak = np.zeros(num_anchors, dtype=np.float64)
        if events.size:
            perceived = events + rng.standard_normal(events.size) * cfg.jitter_std
            for center in perceived:
                for k, height in enumerate(_LOBE_HEIGHTS):
                    for side in ((0,) if k == 0 else (-1, 1)):
                        offset = center + side * 2.0 * k * lobe
                        bump = height * np.maximum(
                            0.0, 1.0 - np.abs(anchor_times - offset) / lobe
                        )
                        np.maximum(peak, bump, out=peak)
            nearest = events[
                np.argmin(np.abs(anchor_times[:, None] - events[None, :]), axis=1)
            ]
            disp[:, cls] = np.clip(nearest - anchor_times, -lobe, lobe)
        conf_noise = cfg.noise_level * (rng.random(num_anchors) - 0.5)
        disp_noise = rng.standard_normal(num_anchors) * cfg.jitter_std
        conf[:, cls] = np.clip(peak + conf_noise, 0.0, 1.0)
        disp[:, cls] += disp_noise

    return ScoreStream(
        game_id=game_id,
        class_names=cfg.class_names,
        fps=cfg.fps,
        confidences=conf,
        displacements=disp,
    )


def synth_generate(cfg: SynthConfig) -> Tuple[List[AnnotationSet], List[ScoreStream]]:
    """Draw ground truth and matching score streams for a whole corpus."""
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    annotations: List[AnnotationSet] = []
    for g in range(cfg.num_games):
        events: List[Tuple[int, float]] = []
        for cls in range(len(cfg.class_names)):
            events.extend((cls, t) for t in _draw_events(cfg, rng))
        annotations.append(
            AnnotationSet(
                game_id=f"game_{g:03d}", events=tuple(events), duration=cfg.duration
            )
        )
    streams = [
        _emit_stream(ann.game_id, ann, cfg, rng) for ann in annotations
    ]
    return annotations, streams


def synth_scores(
    annotations: Sequence[AnnotationSet],
    cfg: SynthConfig,
    seed: Optional[int] = None,
) -> List[ScoreStream]:
    """Emit a fresh detector view of existing ground truth.

    Same peak/noise model as ``synth_generate`` but with an independent
    random stream, so two views of the same games make a natural
    late-fusion pair.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed if seed is None else seed))
    return [_emit_stream(ann.game_id, ann, cfg, rng) for ann in annotations]
