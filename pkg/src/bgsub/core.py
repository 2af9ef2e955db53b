"""Frame and mask types shared by every subtractor.

Grids are row-major with a top-left origin. A frame holds 8-bit intensities;
a mask holds labels 0 (background), 127 (shadow) and 255 (foreground).
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np

BACKGROUND = 0
SHADOW = 127
FOREGROUND = 255
MASK_LABELS = (BACKGROUND, SHADOW, FOREGROUND)

THREADS_ENV = "BGSUB_THREADS"


class BgsubError(Exception):
    """Base class for errors raised by this package."""


class InvalidParameterError(BgsubError, ValueError):
    def __init__(self, field: str, value, reason: str):
        self.field = field
        self.value = value
        super().__init__(f"invalid parameter {field}={value!r}: {reason}")


class DimensionError(BgsubError, ValueError):
    pass


class InvalidLabelError(BgsubError, ValueError):
    """A mask pixel holds a value outside the allowed label set."""

    def __init__(self, value: int, row: int, col: int, allowed=MASK_LABELS, source=None):
        self.value = int(value)
        self.row = int(row)
        self.col = int(col)
        self.source = source
        where = f" in {source}" if source else ""
        super().__init__(
            f"label {self.value} at (row={self.row}, col={self.col}){where} "
            f"not in {sorted(allowed)}"
        )


def _frozen_u8(data) -> np.ndarray:
    arr = np.array(data, dtype=np.uint8, copy=True)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Frame:
    """Single-channel 8-bit intensity grid of shape (height, width)."""

    pixels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.pixels)
        if raw.ndim != 2:
            raise DimensionError(f"frame must be 2-D, got shape {raw.shape}")
        if raw.shape[0] < 1 or raw.shape[1] < 1:
            raise DimensionError(f"frame must be at least 1x1, got shape {raw.shape}")
        if raw.dtype != np.uint8:
            if raw.size and (raw.min() < 0 or raw.max() > 255):
                raise ValueError("frame intensities must lie in [0, 255]")
            if np.issubdtype(raw.dtype, np.floating) and not np.all(raw == np.floor(raw)):
                raise ValueError("frame intensities must be integers")
        object.__setattr__(self, "pixels", _frozen_u8(raw))

    @classmethod
    def from_flat(cls, width: int, height: int, data) -> "Frame":
        flat = np.asarray(data)
        if flat.size != width * height:
            raise DimensionError(
                f"data length {flat.size} != width*height = {width * height}"
            )
        return cls(flat.reshape(height, width))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def data(self) -> np.ndarray:
        """Row-major flat view of the intensities."""
        return self.pixels.reshape(-1)

    def __eq__(self, other):
        if not isinstance(other, Frame):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(
            np.array_equal(self.pixels, other.pixels)
        )

    __hash__ = None


@dataclass(frozen=True, eq=False)
class Mask:
    """Label grid of shape (height, width) with values in {0, 127, 255}."""

    labels: np.ndarray

    def __post_init__(self):
        raw = np.asarray(self.labels)
        if raw.ndim != 2:
            raise DimensionError(f"mask must be 2-D, got shape {raw.shape}")
        if raw.shape[0] < 1 or raw.shape[1] < 1:
            raise DimensionError(f"mask must be at least 1x1, got shape {raw.shape}")
        check_labels(raw, MASK_LABELS)
        object.__setattr__(self, "labels", _frozen_u8(raw))

    @classmethod
    def from_flat(cls, width: int, height: int, data) -> "Mask":
        flat = np.asarray(data)
        if flat.size != width * height:
            raise DimensionError(
                f"data length {flat.size} != width*height = {width * height}"
            )
        return cls(flat.reshape(height, width))

    @classmethod
    def _trusted(cls, labels: np.ndarray) -> "Mask":
        # Skips validation for arrays produced by the subtractors themselves.
        obj = object.__new__(cls)
        arr = np.ascontiguousarray(labels, dtype=np.uint8)
        arr.flags.writeable = False
        object.__setattr__(obj, "labels", arr)
        return obj

    @property
    def width(self) -> int:
        return self.labels.shape[1]

    @property
    def height(self) -> int:
        return self.labels.shape[0]

    @property
    def data(self) -> np.ndarray:
        return self.labels.reshape(-1)

    def foreground_count(self) -> int:
        return int(np.count_nonzero(self.labels == FOREGROUND))

    def nonzero_count(self) -> int:
        return int(np.count_nonzero(self.labels))

    def __eq__(self, other):
        if not isinstance(other, Mask):
            return NotImplemented
        return masks_equal(self, other)

    __hash__ = None


def check_labels(arr: np.ndarray, allowed, source=None) -> None:
    """Raise InvalidLabelError at the first (row-major) pixel outside ``allowed``."""
    arr = np.asarray(arr)
    bad = ~np.isin(arr, np.asarray(allowed))
    if bad.any():
        flat_idx = int(np.flatnonzero(bad.reshape(-1))[0])
        row, col = divmod(flat_idx, arr.shape[1])
        raise InvalidLabelError(arr.reshape(-1)[flat_idx], row, col, allowed, source)


def to_grayscale(r: int, g: int, b: int) -> int:
    """Luma of one RGB triple, rounded half up."""
    value = int(np.floor(0.299 * r + 0.587 * g + 0.114 * b + 0.5))
    return min(255, max(0, value))


def rgb_to_gray(rgb: np.ndarray) -> np.ndarray:
    """Vectorised :func:`to_grayscale` over an (H, W, 3) uint8 array."""
    rgb = np.asarray(rgb, dtype=np.float64)
    luma = 0.299 * rgb[..., 0] + 0.587 * rgb[..., 1] + 0.114 * rgb[..., 2]
    return np.clip(np.floor(luma + 0.5), 0, 255).astype(np.uint8)


def masks_equal(a: Mask, b: Mask) -> bool:
    return a.labels.shape == b.labels.shape and bool(np.array_equal(a.labels, b.labels))


def as_frame(frame) -> Frame:
    return frame if isinstance(frame, Frame) else Frame(frame)


def default_workers() -> int:
    raw = os.environ.get(THREADS_ENV, "").strip()
    if not raw:
        return 1
    try:
        n = int(raw)
    except ValueError:
        raise InvalidParameterError(THREADS_ENV, raw, "must be a positive integer") from None
    if n < 1:
        raise InvalidParameterError(THREADS_ENV, raw, "must be a positive integer")
    return n


class PixelSubtractor:
    """Shared plumbing for per-pixel background models.

    Subclasses keep their state in arrays whose last axis is the flattened
    pixel index, and implement ``_step(lo, hi, x, alpha)`` over the pixel
    range ``[lo, hi)``. Because pixels are independent, splitting the range
    across threads gives the same result as a single pass.
    """

    name = "base"

    def __init__(self, width: int, height: int, workers: int | None = None, debug: bool = False):
        if int(width) < 1:
            raise InvalidParameterError("width", width, "must be >= 1")
        if int(height) < 1:
            raise InvalidParameterError("height", height, "must be >= 1")
        self.width = int(width)
        self.height = int(height)
        self.workers = default_workers() if workers is None else int(workers)
        if self.workers < 1:
            raise InvalidParameterError("workers", workers, "must be >= 1")
        self.debug = debug
        self.frames_seen = 0
        self.reset()

    @property
    def n_pixels(self) -> int:
        return self.width * self.height

    def reset(self) -> None:
        self.frames_seen = 0
        self._init_state()

    def _init_state(self) -> None:
        raise NotImplementedError

    def _check_frame(self, frame) -> np.ndarray:
        frame = as_frame(frame)
        if frame.width != self.width or frame.height != self.height:
            raise DimensionError(
                f"frame is {frame.width}x{frame.height}, model expects "
                f"{self.width}x{self.height}"
            )
        return frame.data

    def _run(self, step: Callable[[int, int], np.ndarray]) -> np.ndarray:
        n = self.n_pixels
        if self.workers == 1 or n < 2 * self.workers:
            return step(0, n)
        bounds = np.linspace(0, n, self.workers + 1).astype(int)
        out = np.empty(n, dtype=np.uint8)
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            futures = [
                (lo, hi, pool.submit(step, lo, hi))
                for lo, hi in zip(bounds[:-1], bounds[1:])
                if hi > lo
            ]
            for lo, hi, fut in futures:
                out[lo:hi] = fut.result()
        return out
