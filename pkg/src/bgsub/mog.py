"""Fixed-size Gaussian mixture per pixel (Stauffer-Grimson style MOG)."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .core import FOREGROUND, InvalidParameterError, Mask, PixelSubtractor

VAR_MIN = 0.01
DEFAULT_NOISE_SIGMA = 15.0
MATCH_SIGMAS_SQ = 6.25  # 2.5 standard deviations
MAX_MIXTURES = 8


@dataclass(frozen=True)
class MogParams:
    history: int = 200
    nmixtures: int = 5
    background_ratio: float = 0.7
    noise_sigma: float = 0.0
    # None floors variances at the effective noise variance; pass VAR_MIN
    # to let them shrink freely.
    min_variance: float | None = None

    def __post_init__(self):
        if int(self.history) != self.history or self.history < 1:
            raise InvalidParameterError("history", self.history, "must be an integer >= 1")
        if int(self.nmixtures) != self.nmixtures or not 1 <= self.nmixtures <= MAX_MIXTURES:
            raise InvalidParameterError(
                "nmixtures", self.nmixtures, f"must be an integer in 1..{MAX_MIXTURES}"
            )
        if not 0.0 < self.background_ratio <= 1.0:
            raise InvalidParameterError(
                "background_ratio", self.background_ratio, "must lie in (0, 1]"
            )
        if not self.noise_sigma >= 0.0:
            raise InvalidParameterError("noise_sigma", self.noise_sigma, "must be >= 0")
        if self.min_variance is not None and not self.min_variance >= VAR_MIN:
            raise InvalidParameterError(
                "min_variance", self.min_variance, f"must be >= {VAR_MIN}"
            )

    @property
    def effective_sigma(self) -> float:
        return DEFAULT_NOISE_SIGMA if self.noise_sigma == 0 else float(self.noise_sigma)

    @property
    def initial_variance(self) -> float:
        return self.effective_sigma ** 2

    @property
    def variance_floor(self) -> float:
        if self.min_variance is not None:
            return float(self.min_variance)
        return max(VAR_MIN, self.initial_variance)

    def to_dict(self) -> dict:
        return asdict(self)


def background_count(weights_sorted, background_ratio: float) -> int:
    """Length of the shortest prefix whose cumulative weight exceeds the ratio.

    Falls back to the full length when no prefix gets there.
    """
    total = 0.0
    for i, w in enumerate(weights_sorted):
        total += w
        if total > background_ratio:
            return i + 1
    return len(weights_sorted)


@njit(cache=True, nogil=True)
def _mog_kernel(x, w, mu, var, count, out, alpha, ratio, var0, var_floor):
    npix, K = w.shape
    fit = np.empty(K)
    order = np.empty(K, dtype=np.int64)
    tw = np.empty(K)
    tm = np.empty(K)
    tv = np.empty(K)
    for i in range(npix):
        xi = float(x[i])
        n = count[i]
        m = -1
        for k in range(n):
            d = xi - mu[i, k]
            if d * d < 6.25 * var[i, k]:
                m = k
                break

        if m >= 0:
            for k in range(n):
                w[i, k] = (1.0 - alpha) * w[i, k]
            w[i, m] += alpha
            rho = min(1.0, alpha / w[i, m])
            mean = mu[i, m] + rho * (xi - mu[i, m])
            mu[i, m] = mean
            d = xi - mean
            var[i, m] = max(var_floor, var[i, m] + rho * (d * d - var[i, m]))
        else:
            if n < K:
                s = n
                n += 1
                count[i] = n
            else:
                s = K - 1
            w[i, s] = alpha
            mu[i, s] = xi
            var[i, s] = var0
            total = 0.0
            for k in range(n):
                total += w[i, k]
            for k in range(n):
                w[i, k] = w[i, k] / total

        # Stable insertion sort on fitness, descending.
        for k in range(n):
            fit[k] = w[i, k] / np.sqrt(var[i, k])
            order[k] = k
        moved = False
        for a in range(1, n):
            key = order[a]
            b = a - 1
            while b >= 0 and fit[order[b]] < fit[key]:
                order[b + 1] = order[b]
                b -= 1
            if b + 1 != a:
                moved = True
            order[b + 1] = key
        pos = m
        if moved:
            for k in range(n):
                j = order[k]
                tw[k] = w[i, j]
                tm[k] = mu[i, j]
                tv[k] = var[i, j]
                if j == m:
                    pos = k
            for k in range(n):
                w[i, k] = tw[k]
                mu[i, k] = tm[k]
                var[i, k] = tv[k]

        bg = n
        total = 0.0
        for k in range(n):
            total += w[i, k]
            if total > ratio:
                bg = k + 1
                break
        out[i] = 0 if (m >= 0 and pos < bg) else 255


class MOG(PixelSubtractor):
    """Per-pixel mixture of ``nmixtures`` Gaussians over grayscale intensity.

    Each pixel keeps up to ``nmixtures`` components sorted by fitness
    ``w / sigma``. A pixel is background when it matches (within 2.5 sigma) a
    component inside the background prefix selected by ``background_ratio``.
    """

    name = "mog"

    def __init__(self, width: int, height: int, params: MogParams | None = None, **kw):
        self.params = params or MogParams()
        super().__init__(width, height, **kw)

    def _init_state(self) -> None:
        n, k = self.n_pixels, self.params.nmixtures
        self.weight = np.zeros((n, k))
        self.mean = np.zeros((n, k))
        self.var = np.zeros((n, k))
        self.count = np.zeros(n, dtype=np.int64)

    def apply(self, frame) -> Mask:
        x = self._check_frame(frame)
        p = self.params
        alpha = 1.0 / min(self.frames_seen + 1, p.history)

        def step(lo, hi):
            out = np.empty(hi - lo, dtype=np.uint8)
            _mog_kernel(
                x[lo:hi], self.weight[lo:hi], self.mean[lo:hi], self.var[lo:hi],
                self.count[lo:hi], out, alpha, p.background_ratio,
                p.initial_variance, p.variance_floor,
            )
            return out

        labels = self._run(step)
        self.frames_seen += 1
        if self.debug:
            self.check_invariants()
        return Mask._trusted(labels.reshape(self.height, self.width))

    def components(self, row: int, col: int) -> list[tuple[float, float, float]]:
        """(weight, mean, variance) of one pixel's components in fitness order."""
        i = row * self.width + col
        return [
            (float(self.weight[i, k]), float(self.mean[i, k]), float(self.var[i, k]))
            for k in range(int(self.count[i]))
        ]

    def check_invariants(self, tol: float = 1e-9) -> None:
        K = self.params.nmixtures
        if self.count.max(initial=0) > K:
            raise AssertionError("component count exceeds nmixtures")
        active = np.arange(K) < self.count[:, None]
        live = self.count > 0
        sums = np.where(active, self.weight, 0.0).sum(axis=1)
        if np.any(np.abs(sums[live] - 1.0) > tol):
            raise AssertionError("mixture weights do not sum to 1")
        if np.any(active & (self.var < self.params.variance_floor)):
            raise AssertionError("variance below floor")
        fit = np.where(active, self.weight / np.sqrt(np.where(active, self.var, 1.0)), -np.inf)
        if np.any(fit[:, :-1] < fit[:, 1:]):
            raise AssertionError("components not sorted by fitness")
