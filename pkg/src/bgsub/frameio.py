"""Numbered image sequences on disk: PGM (P5), PPM (P6) and 8-bit PNG."""
from __future__ import annotations

import re
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

import numpy as np
from PIL import Image, UnidentifiedImageError

from .core import (
    BACKGROUND,
    FOREGROUND,
    MASK_LABELS,
    BgsubError,
    Frame,
    Mask,
    check_labels,
    rgb_to_gray,
)

GROUND_TRUTH_LABELS = (BACKGROUND, FOREGROUND)
_FORMATS = {"PNG", "PPM"}
_WRITE_FORMATS = {".png": "PNG", ".pgm": "PPM", ".ppm": "PPM"}


class FrameIOError(BgsubError, OSError):
    pass


class MissingFileError(FrameIOError, FileNotFoundError):
    pass


class CorruptImageError(FrameIOError):
    pass


class UnsupportedFormatError(FrameIOError):
    pass


class UnsupportedBitDepthError(UnsupportedFormatError):
    pass


def _read_array(path) -> np.ndarray:
    """Decode an image to uint8, either (H, W) or (H, W, 3)."""
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(f"no such image file: {path}")
    try:
        with Image.open(path) as img:
            fmt = img.format
            mode = img.mode
            if fmt not in _FORMATS:
                raise UnsupportedFormatError(f"{path}: unsupported image format {fmt}")
            if mode in ("I;16", "I;16B", "I;16L", "I", "F") or mode.startswith("I;"):
                raise UnsupportedBitDepthError(f"{path}: unsupported bit depth (mode {mode})")
            if mode == "P":
                img = img.convert("RGB")
                mode = "RGB"
            if mode not in ("L", "RGB"):
                raise UnsupportedFormatError(f"{path}: unsupported pixel mode {mode}")
            img.load()
            arr = np.asarray(img, dtype=np.uint8)
    except FrameIOError:
        raise
    except (UnidentifiedImageError, SyntaxError, ValueError, OSError) as exc:
        raise CorruptImageError(f"{path}: cannot decode image ({exc})") from exc
    return arr


def load_frame(path) -> Frame:
    arr = _read_array(path)
    if arr.ndim == 3:
        arr = rgb_to_gray(arr)
    return Frame(arr)


def load_mask(path, ground_truth: bool = False) -> Mask:
    """Read a mask file; ground-truth masks may hold only 0 and 255."""
    arr = _read_array(path)
    if arr.ndim != 2:
        raise UnsupportedFormatError(f"{path}: masks must be single-channel")
    check_labels(arr, GROUND_TRUTH_LABELS if ground_truth else MASK_LABELS, source=str(path))
    return Mask(arr)


def _write(arr: np.ndarray, path) -> Path:
    path = Path(path)
    fmt = _WRITE_FORMATS.get(path.suffix.lower())
    if fmt is None:
        raise UnsupportedFormatError(f"{path}: cannot infer format from extension")
    try:
        Image.fromarray(np.ascontiguousarray(arr, dtype=np.uint8), mode="L").save(path, format=fmt)
    except OSError as exc:
        raise FrameIOError(f"cannot write {path}: {exc}") from exc
    return path


def write_mask(mask: Mask, path) -> Path:
    return _write(mask.labels, path)


def write_frame(frame: Frame, path) -> Path:
    return _write(frame.pixels, path)


def _pattern_regex(pattern: str) -> re.Pattern:
    m = re.search(r"%0?(\d*)d", pattern)
    if m is None:
        raise ValueError(f"pattern {pattern!r} has no %d index field")
    head, tail = pattern[: m.start()], pattern[m.end():]
    return re.compile(re.escape(head) + r"(\d+)" + re.escape(tail) + r"$")


@dataclass(frozen=True)
class SequenceRef:
    """Files ``directory / (pattern % i)`` for ``start <= i <= end``."""

    directory: Path
    pattern: str
    start: int
    end: int

    def __post_init__(self):
        object.__setattr__(self, "directory", Path(self.directory))
        _pattern_regex(self.pattern)
        if self.end < self.start:
            raise ValueError(f"end index {self.end} precedes start index {self.start}")

    def path(self, index: int) -> Path:
        return self.directory / (self.pattern % index)

    def __len__(self) -> int:
        return self.end - self.start + 1

    def indices(self) -> range:
        return range(self.start, self.end + 1)

    def frames(self, start: int | None = None, stop: int | None = None) -> Iterator[Frame]:
        """Frames with index in ``[start, stop)`` (defaults: the whole sequence)."""
        lo = self.start if start is None else start
        hi = self.end + 1 if stop is None else stop
        for i in range(lo, hi):
            yield load_frame(self.path(i))

    def validate(self) -> None:
        missing = [str(self.path(i)) for i in self.indices() if not self.path(i).is_file()]
        if missing:
            raise MissingFileError(f"{len(missing)} sequence file(s) missing, first: {missing[0]}")


def scan_indices(directory, pattern: str) -> list[int]:
    rx = _pattern_regex(pattern)
    found = []
    for p in Path(directory).iterdir():
        m = rx.match(p.name)
        if m:
            found.append(int(m.group(1)))
    return sorted(found)


def open_sequence(directory, pattern: str = "frame_%06d.pgm", start: int | None = None,
                  end: int | None = None) -> SequenceRef:
    """Build a SequenceRef, discovering the index range from the directory when omitted."""
    directory = Path(directory)
    if not directory.is_dir():
        raise MissingFileError(f"no such directory: {directory}")
    if start is None or end is None:
        found = scan_indices(directory, pattern)
        if not found:
            raise MissingFileError(f"no files matching {pattern!r} in {directory}")
        start = found[0] if start is None else start
        end = found[-1] if end is None else end
    ref = SequenceRef(directory, pattern, start, end)
    ref.validate()
    return ref
