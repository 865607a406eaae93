"""Synthetic scenario generator: ground-truth tracks plus a controllably
degraded detection stream.

Tracks move with constant velocity, perturbed by per-frame Gaussian noise and
reflected at the frame boundary so every ground-truth box stays inside the
frame. Detections derive from the tracks through center/size jitter,
independent per-frame drops, multi-frame burst dropouts, score noise, and
Poisson false positives with uniform random boxes.

All randomness comes from one numpy PCG64 generator seeded from the config,
drawn in a fixed order (per frame: per track ascending, then false
positives), so a seed reproduces the exact same files anywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from numpy.random import Generator, PCG64

from .errors import ConfigError, ValidationError
from .geometry import BBox, Detection, FrameShape
from .io import GroundTruth, TrackBox, VideoDetections

MAX_TRACKS = 30
MIN_BOX_SIDE = 2.0  # jittered sizes are clamped here so boxes stay valid


@dataclass(frozen=True)
class ScenarioConfig:
    """Full description of one synthetic scenario.

    The field order below is the serialization order used by describe() and
    parse_config(); every key mirrors the matching simulate CLI flag.
    """

    seed: int = 0
    video_id: str = "sim"
    frame_count: int = 300
    width: int = 1280
    height: int = 720
    num_tracks: int = 8
    classes: int = 1
    box_min: float = 24.0
    box_max: float = 64.0
    speed_max: float = 4.0
    sigma_motion: float = 0.5
    jitter_sigma: float = 0.0
    drop_prob: float = 0.0
    burst_prob: float = 0.0
    burst_max: int = 0
    fp_rate: float = 0.0
    tp_score_mean: float = 0.8
    tp_score_sigma: float = 0.1
    fp_score_mean: float = 0.6
    fp_score_sigma: float = 0.2
    appearance_dim: int = 0
    appearance_noise: float = 0.1

    def __post_init__(self):
        if self.frame_count < 1:
            raise ValidationError(f"frame_count must be >= 1, got {self.frame_count}")
        if not (0 <= self.num_tracks <= MAX_TRACKS):
            raise ValidationError(
                f"num_tracks must be in [0, {MAX_TRACKS}], got {self.num_tracks}"
            )
        if self.classes < 1:
            raise ValidationError(f"classes must be >= 1, got {self.classes}")
        for name in ("drop_prob", "burst_prob"):
            p = getattr(self, name)
            if not (0.0 <= p < 1.0):
                raise ValidationError(f"{name} must be in [0,1), got {p}")
        if self.fp_rate < 0:
            raise ValidationError(f"fp_rate must be >= 0, got {self.fp_rate}")
        if self.burst_max < 0:
            raise ValidationError(f"burst_max must be >= 0, got {self.burst_max}")
        if not (MIN_BOX_SIDE <= self.box_min <= self.box_max):
            raise ValidationError(
                f"need {MIN_BOX_SIDE} <= box_min <= box_max, got "
                f"{self.box_min}..{self.box_max}"
            )
        if self.box_max >= min(self.width, self.height):
            raise ValidationError("box_max must be smaller than the frame")
        for name in ("speed_max", "sigma_motion", "jitter_sigma", "appearance_noise",
                     "tp_score_sigma", "fp_score_sigma"):
            if getattr(self, name) < 0:
                raise ValidationError(f"{name} must be >= 0")
        for name in ("tp_score_mean", "fp_score_mean"):
            if not (0.0 <= getattr(self, name) <= 1.0):
                raise ValidationError(f"{name} must be in [0,1]")
        if self.appearance_dim < 0:
            raise ValidationError(f"appearance_dim must be >= 0")

    @property
    def frame_shape(self) -> FrameShape:
        return FrameShape(self.width, self.height)


def standard_scenario(seed: int) -> ScenarioConfig:
    """The degradation mix used by the benchmark suite and the demos:
    independent drops, occasional multi-frame bursts, 2 px jitter, half a
    false positive per frame, and overlapping TP/FP score distributions.
    """
    return ScenarioConfig(
        seed=seed,
        video_id=f"sim-{seed}",
        frame_count=300,
        num_tracks=8,
        drop_prob=0.15,
        burst_prob=0.05,
        burst_max=8,
        jitter_sigma=2.0,
        fp_rate=0.5,
        tp_score_mean=0.75,
        tp_score_sigma=0.12,
        fp_score_mean=0.72,
        fp_score_sigma=0.15,
    )


def _reflect(pos: float, lo: float, hi: float) -> tuple[float, float]:
    """Fold a coordinate back into [lo, hi]; returns (position, sign flip)."""
    flip = 1.0
    span = hi - lo
    if span <= 0:
        return lo, flip
    while pos < lo or pos > hi:
        if pos < lo:
            pos = 2 * lo - pos
        else:
            pos = 2 * hi - pos
        flip = -flip
    return pos, flip


def generate(config: ScenarioConfig) -> tuple[GroundTruth, VideoDetections]:
    """Simulate a scenario; bitwise deterministic for a given config."""
    rng = Generator(PCG64(config.seed))
    W, H = float(config.width), float(config.height)

    # track initialization, per track ascending
    tracks = []
    for tid in range(config.num_tracks):
        class_id = int(rng.integers(0, config.classes))
        w = float(rng.uniform(config.box_min, config.box_max))
        h = float(rng.uniform(config.box_min, config.box_max))
        cx = float(rng.uniform(w / 2, W - w / 2))
        cy = float(rng.uniform(h / 2, H - h / 2))
        vx = float(rng.uniform(-config.speed_max, config.speed_max))
        vy = float(rng.uniform(-config.speed_max, config.speed_max))
        base = None
        if config.appearance_dim > 0:
            raw = rng.normal(size=config.appearance_dim)
            base = raw / max(1e-12, float(math.sqrt(float(raw @ raw))))
        tracks.append({
            "class_id": class_id, "w": w, "h": h, "cx": cx, "cy": cy,
            "vx": vx, "vy": vy, "base": base, "burst_left": 0,
        })

    gt_frames: dict[int, list[TrackBox]] = {f: [] for f in range(config.frame_count)}
    det_frames: dict[int, list[Detection]] = {f: [] for f in range(config.frame_count)}

    for f in range(config.frame_count):
        for tid, tr in enumerate(tracks):
            if f > 0:
                dx, dy = tr["vx"], tr["vy"]
                if config.sigma_motion > 0:
                    dx += float(rng.normal(0.0, config.sigma_motion))
                    dy += float(rng.normal(0.0, config.sigma_motion))
                tr["cx"] += dx
                tr["cy"] += dy
                tr["cx"], fx = _reflect(tr["cx"], tr["w"] / 2, W - tr["w"] / 2)
                tr["cy"], fy = _reflect(tr["cy"], tr["h"] / 2, H - tr["h"] / 2)
                tr["vx"] *= fx
                tr["vy"] *= fy
            box = BBox(tr["cx"] - tr["w"] / 2, tr["cy"] - tr["h"] / 2, tr["w"], tr["h"])
            gt_frames[f].append(TrackBox(f, tr["class_id"], tid, box))

            # dropout decisions
            dropped = False
            if tr["burst_left"] > 0:
                tr["burst_left"] -= 1
                dropped = True
            elif config.burst_prob > 0 and float(rng.random()) < config.burst_prob:
                length = int(rng.integers(1, config.burst_max + 1)) if config.burst_max > 0 else 0
                if length > 0:
                    tr["burst_left"] = length - 1
                    dropped = True
            if not dropped and config.drop_prob > 0 and float(rng.random()) < config.drop_prob:
                dropped = True
            if dropped:
                continue

            cx, cy, w, h = tr["cx"], tr["cy"], tr["w"], tr["h"]
            if config.jitter_sigma > 0:
                cx += float(rng.normal(0.0, config.jitter_sigma))
                cy += float(rng.normal(0.0, config.jitter_sigma))
                w = max(MIN_BOX_SIDE, w + float(rng.normal(0.0, config.jitter_sigma)))
                h = max(MIN_BOX_SIDE, h + float(rng.normal(0.0, config.jitter_sigma)))
            score = _clamped_score(rng, config.tp_score_mean, config.tp_score_sigma)
            appearance = None
            if tr["base"] is not None:
                noisy = tr["base"] + rng.normal(0.0, config.appearance_noise, size=config.appearance_dim)
                norm = float(math.sqrt(float(noisy @ noisy)))
                appearance = tuple(float(a) for a in noisy / max(1e-12, norm))
            det_frames[f].append(
                Detection(f, tr["class_id"], BBox(cx - w / 2, cy - h / 2, w, h), score, appearance)
            )

        # false positives after the tracks
        if config.fp_rate > 0:
            for _ in range(int(rng.poisson(config.fp_rate))):
                class_id = int(rng.integers(0, config.classes))
                w = float(rng.uniform(config.box_min, config.box_max))
                h = float(rng.uniform(config.box_min, config.box_max))
                cx = float(rng.uniform(w / 2, W - w / 2))
                cy = float(rng.uniform(h / 2, H - h / 2))
                score = _clamped_score(rng, config.fp_score_mean, config.fp_score_sigma)
                det_frames[f].append(
                    Detection(f, class_id, BBox(cx - w / 2, cy - h / 2, w, h), score)
                )

    shape = config.frame_shape
    gt = GroundTruth(config.video_id, shape, config.frame_count, gt_frames)
    dets = VideoDetections(config.video_id, shape, config.frame_count, det_frames)
    return gt, dets


def _clamped_score(rng: Generator, mean: float, sigma: float) -> float:
    s = mean + float(rng.normal(0.0, sigma)) if sigma > 0 else mean
    return min(1.0, max(0.0, s))


def describe(config: ScenarioConfig) -> str:
    """Stable key = value summary of a scenario; parse_config inverts it."""
    lines = [f"{f.name} = {getattr(config, f.name)}" for f in fields(ScenarioConfig)]
    return "\n".join(lines) + "\n"


def parse_config(text: str) -> ScenarioConfig:
    """Parse a key = value scenario description (unknown keys are errors)."""
    by_name = {f.name: f for f in fields(ScenarioConfig)}
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}: expected 'key = value', got {line!r}")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in by_name:
            raise ConfigError(f"line {line_no}: unknown scenario key {key!r}")
        f = by_name[key]
        try:
            if f.type == "int":
                values[key] = int(val)
            elif f.type == "float":
                values[key] = float(val)
            else:
                values[key] = val
        except ValueError:
            raise ConfigError(f"line {line_no}: bad value for {key}: {val!r}") from None
    return ScenarioConfig(**values)
