"""GMG-style background model: per-pixel quantized intensity histograms.

Two stages. During the first ``initialization_frames`` frames each pixel only
accumulates a histogram of quantized intensities and the output is all black.
Afterwards a pixel is foreground when the histogram gives its current bin a
low share of the total weight; the raw decision is then median-filtered.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .core import FOREGROUND, InvalidParameterError, Mask, PixelSubtractor

QUANTIZATION_LEVELS = 16
LEARNING_RATE = 0.025
MAX_FEATURES = 64
SMOOTHING_RADIUS = 7


@dataclass(frozen=True)
class GmgParams:
    initialization_frames: int = 120
    decision_threshold: float = 0.8
    quantization_levels: int = QUANTIZATION_LEVELS
    learning_rate: float = LEARNING_RATE
    max_features: int = MAX_FEATURES
    smoothing_radius: int = SMOOTHING_RADIUS

    def __post_init__(self):
        if int(self.initialization_frames) != self.initialization_frames or self.initialization_frames < 1:
            raise InvalidParameterError(
                "initialization_frames", self.initialization_frames, "must be an integer >= 1"
            )
        if not 0.0 < self.decision_threshold < 1.0:
            raise InvalidParameterError(
                "decision_threshold", self.decision_threshold, "must lie in (0, 1)"
            )
        if not 1 <= self.quantization_levels <= 256:
            raise InvalidParameterError(
                "quantization_levels", self.quantization_levels, "must lie in 1..256"
            )
        if not 0.0 < self.learning_rate < 1.0:
            raise InvalidParameterError("learning_rate", self.learning_rate, "must lie in (0, 1)")
        if self.max_features < 1:
            raise InvalidParameterError("max_features", self.max_features, "must be >= 1")
        if self.smoothing_radius < 0:
            raise InvalidParameterError("smoothing_radius", self.smoothing_radius, "must be >= 0")

    def to_dict(self) -> dict:
        return asdict(self)


def quantize(x: int, levels: int) -> int:
    return (int(x) * int(levels)) // 256


def smooth(raw: Mask, radius: int) -> Mask:
    """Binary median filter over a (2r+1)^2 window clipped at the borders.

    For an even-sized clipped window the lower median is used, so a pixel
    becomes foreground only when foreground is a strict majority.
    """
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if radius == 0:
        return raw
    fg = (raw.labels == FOREGROUND).astype(np.int32)
    h, w = fg.shape
    r0 = np.clip(np.arange(h) - radius, 0, h)
    r1 = np.clip(np.arange(h) + radius + 1, 0, h)
    c0 = np.clip(np.arange(w) - radius, 0, w)
    c1 = np.clip(np.arange(w) + radius + 1, 0, w)
    # Separable box sums over the clipped window.
    cs = np.zeros((h + 1, w), dtype=np.int32)
    np.cumsum(fg, axis=0, out=cs[1:])
    rows = cs[r1] - cs[r0]
    cs = np.zeros((h, w + 1), dtype=np.int32)
    np.cumsum(rows, axis=1, out=cs[:, 1:])
    hits = cs[:, c1] - cs[:, c0]
    size = (r1 - r0)[:, None] * (c1 - c0)[None, :]
    return Mask._trusted(np.where(2 * hits > size, FOREGROUND, 0).astype(np.uint8))


@njit(cache=True, nogil=True)
def _add_weight(bins, w, count, i, q, amount):
    n = count[i]
    for k in range(n):
        if bins[i, k] == q:
            w[i, k] += amount
            return
    F = bins.shape[1]
    if n < F:
        s = n
        count[i] = n + 1
    else:
        s = 0
        for k in range(1, n):
            if w[i, k] < w[i, s]:
                s = k
    bins[i, s] = q
    w[i, s] = amount


@njit(cache=True, nogil=True)
def _gmg_kernel(x, bins, w, count, out, levels, accumulating, init_weight,
                threshold, lr):
    npix = w.shape[0]
    for i in range(npix):
        q = (np.int64(x[i]) * levels) // 256
        if accumulating:
            _add_weight(bins, w, count, i, q, init_weight)
            out[i] = 0
            continue
        n = count[i]
        total = 0.0
        wq = 0.0
        for k in range(n):
            total += w[i, k]
            if bins[i, k] == q:
                wq = w[i, k]
        p = 1.0 - wq / total if total > 0.0 else 1.0
        out[i] = 255 if p > threshold else 0
        for k in range(n):
            w[i, k] = w[i, k] * (1.0 - lr)
        _add_weight(bins, w, count, i, q, lr)


class GMG(PixelSubtractor):
    """Histogram-per-pixel subtractor with an all-black initialization stage."""

    name = "gmg"

    def __init__(self, width: int, height: int, params: GmgParams | None = None, **kw):
        self.params = params or GmgParams()
        super().__init__(width, height, **kw)

    def _init_state(self) -> None:
        # A histogram never holds more distinct bins than there are levels.
        n = self.n_pixels
        f = min(self.params.max_features, self.params.quantization_levels)
        self.bins = np.full((n, f), -1, dtype=np.int16)
        self.weight = np.zeros((n, f))
        self.count = np.zeros(n, dtype=np.int64)
        self.last_raw: Mask | None = None

    @property
    def initializing(self) -> bool:
        return self.frames_seen < self.params.initialization_frames

    def apply(self, frame) -> Mask:
        x = self._check_frame(frame)
        p = self.params
        accumulating = self.initializing

        def step(lo, hi):
            out = np.empty(hi - lo, dtype=np.uint8)
            _gmg_kernel(
                x[lo:hi], self.bins[lo:hi], self.weight[lo:hi], self.count[lo:hi], out,
                p.quantization_levels, accumulating, 1.0 / p.initialization_frames,
                p.decision_threshold, p.learning_rate,
            )
            return out

        raw = Mask._trusted(self._run(step).reshape(self.height, self.width))
        self.last_raw = raw
        self.frames_seen += 1
        if self.debug:
            self.check_invariants()
        if accumulating:
            return raw
        return smooth(raw, p.smoothing_radius)

    def histogram(self, row: int, col: int) -> dict[int, float]:
        """Bin -> weight map of one pixel, in insertion order."""
        i = row * self.width + col
        return {int(self.bins[i, k]): float(self.weight[i, k]) for k in range(int(self.count[i]))}

    def check_invariants(self, tol: float = 1e-9) -> None:
        F = self.bins.shape[1]
        if self.count.max(initial=0) > self.params.max_features:
            raise AssertionError("histogram exceeds max_features")
        active = np.arange(F) < self.count[:, None]
        if np.any(active & (self.weight < 0)):
            raise AssertionError("negative histogram weight")
        if np.any(np.where(active, self.weight, 0.0).sum(axis=1) > 1.0 + tol):
            raise AssertionError("histogram weight exceeds 1")
        b = np.where(active, self.bins, -1 - np.arange(F))
        s = np.sort(b, axis=1)
        if np.any(s[:, 1:] == s[:, :-1]):
            raise AssertionError("duplicate bins in a histogram")
