"""Synthetic scenes with exact ground truth: a rectangle sliding over a noisy background."""
from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from pathlib import Path

import numpy as np

from .core import FOREGROUND, Frame, Mask
from .frameio import FrameIOError, write_frame, write_mask

NOISE_GENERATOR = "numpy.random.Generator(PCG64(SeedSequence([seed, t]))).standard_normal; rint; clip[0,255]"
MANIFEST_NAME = "manifest.txt"


@dataclass(frozen=True)
class SynthSpec:
    width: int = 320
    height: int = 240
    frames: int = 300
    bg_intensity: int = 104
    fg_intensity: int = 200
    rect_width: int = 20
    rect_height: int = 20
    velocity: int = 2
    start_x: int = 0
    start_y: int = 110
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("width", "height", "frames", "rect_width", "rect_height"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        for name in ("bg_intensity", "fg_intensity"):
            if not 0 <= getattr(self, name) <= 255:
                raise ValueError(f"{name} must lie in [0, 255]")
        if self.fg_intensity == self.bg_intensity:
            raise ValueError("fg_intensity must differ from bg_intensity")
        if self.start_x < 0 or self.start_y < 0:
            raise ValueError("start position must be non-negative")
        if self.start_x + self.rect_width > self.width or self.start_y + self.rect_height > self.height:
            raise ValueError("rectangle must fit inside the frame at t=0")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "SynthSpec":
        kw = {}
        for f in fields(cls):
            if f.name in d:
                kw[f.name] = float(d[f.name]) if f.name == "noise_sigma" else int(d[f.name])
        return cls(**kw)


def synth_frame(spec: SynthSpec, t: int) -> tuple[Frame, Mask]:
    if not 0 <= t < spec.frames:
        raise IndexError(f"frame index {t} outside [0, {spec.frames})")
    img = np.full((spec.height, spec.width), float(spec.bg_intensity))
    if spec.noise_sigma > 0:
        rng = np.random.default_rng([spec.seed, t])
        img += np.rint(rng.standard_normal(img.shape) * spec.noise_sigma)
    img = np.clip(img, 0, 255).astype(np.uint8)

    gt = np.zeros((spec.height, spec.width), dtype=np.uint8)
    x0 = (spec.start_x + t * spec.velocity) % spec.width
    cols = (x0 + np.arange(min(spec.rect_width, spec.width))) % spec.width
    rows = slice(spec.start_y, spec.start_y + spec.rect_height)
    gt[rows, cols] = FOREGROUND
    img[gt == FOREGROUND] = spec.fg_intensity
    return Frame(img), Mask(gt)


def iter_frames(spec: SynthSpec, start: int = 0, stop: int | None = None):
    for t in range(start, spec.frames if stop is None else stop):
        yield synth_frame(spec, t)


def write_manifest(values: dict, path) -> Path:
    path = Path(path)
    lines = [f"{k}={v}" for k, v in values.items()]
    try:
        path.write_text("\n".join(lines) + "\n")
    except OSError as exc:
        raise FrameIOError(f"cannot write {path}: {exc}") from exc
    return path


def read_manifest(path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if line.strip() and not line.startswith("#"):
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out


def synth_sequence(spec: SynthSpec, out_dir, ext: str = "pgm") -> dict:
    """Write frame_%06d / gt_%06d files plus a key=value manifest.

    Returns a dict with the written ``frames``, ``masks`` and ``manifest`` paths.
    """
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise FrameIOError(f"cannot create {out_dir}: {exc}") from exc
    frames, masks = [], []
    for t in range(spec.frames):
        frame, gt = synth_frame(spec, t)
        frames.append(write_frame(frame, out_dir / f"frame_{t:06d}.{ext}"))
        masks.append(write_mask(gt, out_dir / f"gt_{t:06d}.{ext}"))
    meta = dict(spec.to_dict())
    meta.update(
        frame_pattern=f"frame_%06d.{ext}",
        gt_pattern=f"gt_%06d.{ext}",
        noise_generator=NOISE_GENERATOR,
    )
    manifest = write_manifest(meta, out_dir / MANIFEST_NAME)
    return {"frames": frames, "masks": masks, "manifest": manifest}

