"""Adaptive Gaussian mixture with a variable number of components per pixel.

Follows Zivkovic's scheme: a complexity prior drains every component's weight
each frame, and components whose weight reaches zero are dropped, so pixels
with a simple history end up with a single Gaussian.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np
from numba import njit

from .core import InvalidParameterError, Mask, PixelSubtractor

MAX_COMPONENTS = 5
BACKGROUND_RATIO = 0.9
VAR_INIT = 225.0
VAR_MIN = 4.0
VAR_MAX = 5 * VAR_INIT
COMPLEXITY_PRIOR = 0.05
SHADOW_THRESHOLD = 0.5
SHADOW_LABEL = 127


@dataclass(frozen=True)
class Mog2Params:
    history: int = 200
    var_threshold: float = 16.0
    detect_shadows: bool = True
    max_components: int = MAX_COMPONENTS
    background_ratio: float = BACKGROUND_RATIO
    var_init: float = VAR_INIT
    var_min: float = VAR_MIN
    var_max: float = VAR_MAX
    complexity_prior: float = COMPLEXITY_PRIOR
    shadow_threshold: float = SHADOW_THRESHOLD

    def __post_init__(self):
        if int(self.history) != self.history or self.history < 1:
            raise InvalidParameterError("history", self.history, "must be an integer >= 1")
        if not self.var_threshold > 0:
            raise InvalidParameterError("var_threshold", self.var_threshold, "must be > 0")
        if int(self.max_components) != self.max_components or self.max_components < 1:
            raise InvalidParameterError("max_components", self.max_components, "must be >= 1")
        if not 0.0 < self.background_ratio <= 1.0:
            raise InvalidParameterError("background_ratio", self.background_ratio, "must lie in (0, 1]")
        if not 0.0 < self.var_min <= self.var_init <= self.var_max:
            raise InvalidParameterError(
                "var_init", self.var_init, "need 0 < var_min <= var_init <= var_max"
            )
        if not 0.0 <= self.complexity_prior < 1.0:
            raise InvalidParameterError("complexity_prior", self.complexity_prior, "must lie in [0, 1)")
        if not 0.0 < self.shadow_threshold < 1.0:
            raise InvalidParameterError("shadow_threshold", self.shadow_threshold, "must lie in (0, 1)")

    def to_dict(self) -> dict:
        return asdict(self)


@njit(cache=True, nogil=True)
def shadow_test(x, mu_bg, tau):
    """True when ``x`` looks like a darkened copy of the background mean."""
    if mu_bg <= 0.0:
        return False
    r = x / mu_bg
    return tau <= r < 1.0


@njit(cache=True, nogil=True)
def _mog2_kernel(x, w, mu, var, count, out, alpha, var_threshold, detect_shadows,
                 ratio, var_init, var_min, var_max, c_t, tau):
    npix, K = w.shape
    order = np.empty(K, dtype=np.int64)
    tw = np.empty(K)
    tm = np.empty(K)
    tv = np.empty(K)
    decay = alpha * c_t
    for i in range(npix):
        xi = float(x[i])
        n = count[i]
        if n == 1:
            # Lone matched component: renormalizes to exactly 1 and is the
            # whole background prefix, so only its mean/variance change.
            d = xi - mu[i, 0]
            if d * d < var_threshold * var[i, 0]:
                wk = w[i, 0] + alpha * (1.0 - w[i, 0]) - decay
                rho = min(1.0, alpha / wk)
                mean = mu[i, 0] + rho * d
                mu[i, 0] = mean
                d = xi - mean
                v = var[i, 0] + rho * (d * d - var[i, 0])
                var[i, 0] = min(var_max, max(var_min, v))
                w[i, 0] = wk / wk
                out[i] = 0
                continue
        m = -1
        for k in range(n):
            d = xi - mu[i, k]
            if d * d < var_threshold * var[i, k]:
                m = k
                break

        # Decay with the complexity prior, compacting away dead components.
        j = 0
        new_m = -1
        for k in range(n):
            hit = 1.0 if k == m else 0.0
            wk = w[i, k] + alpha * (hit - w[i, k]) - decay
            if wk > 0.0:
                w[i, j] = wk
                if j != k:
                    mu[i, j] = mu[i, k]
                    var[i, j] = var[i, k]
                if k == m:
                    new_m = j
                j += 1
        for k in range(j, n):
            w[i, k] = 0.0
        n = j
        m = new_m

        if m >= 0:
            rho = min(1.0, alpha / w[i, m])
            mean = mu[i, m] + rho * (xi - mu[i, m])
            mu[i, m] = mean
            d = xi - mean
            v = var[i, m] + rho * (d * d - var[i, m])
            var[i, m] = min(var_max, max(var_min, v))
        else:
            if n < K:
                s = n
                n += 1
            else:
                s = 0
                for k in range(1, n):
                    if w[i, k] <= w[i, s]:
                        s = k
            w[i, s] = alpha
            mu[i, s] = xi
            var[i, s] = var_init
        count[i] = n

        total = 0.0
        for k in range(n):
            total += w[i, k]
        for k in range(n):
            w[i, k] = w[i, k] / total

        for k in range(n):
            order[k] = k
        moved = False
        for a in range(1, n):
            key = order[a]
            b = a - 1
            while b >= 0 and w[i, order[b]] < w[i, key]:
                order[b + 1] = order[b]
                b -= 1
            if b + 1 != a:
                moved = True
            order[b + 1] = key
        pos = m
        if moved:
            for k in range(n):
                jj = order[k]
                tw[k] = w[i, jj]
                tm[k] = mu[i, jj]
                tv[k] = var[i, jj]
                if jj == m:
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
        if m >= 0 and pos < bg:
            out[i] = 0
        elif detect_shadows and shadow_test(xi, mu[i, 0], tau):
            out[i] = 127
        else:
            out[i] = 255


class MOG2(PixelSubtractor):
    """Variable-size per-pixel Gaussian mixture with optional shadow labelling (127)."""

    name = "mog2"

    def __init__(self, width: int, height: int, params: Mog2Params | None = None, **kw):
        self.params = params or Mog2Params()
        super().__init__(width, height, **kw)

    def _init_state(self) -> None:
        n, k = self.n_pixels, self.params.max_components
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
            _mog2_kernel(
                x[lo:hi], self.weight[lo:hi], self.mean[lo:hi], self.var[lo:hi],
                self.count[lo:hi], out, alpha, float(p.var_threshold), bool(p.detect_shadows),
                p.background_ratio, p.var_init, p.var_min, p.var_max,
                p.complexity_prior, p.shadow_threshold,
            )
            return out

        labels = self._run(step)
        self.frames_seen += 1
        if self.debug:
            self.check_invariants()
        return Mask._trusted(labels.reshape(self.height, self.width))

    def components(self, row: int, col: int) -> list[tuple[float, float, float]]:
        """(weight, mean, variance) of one pixel's components, heaviest first."""
        i = row * self.width + col
        return [
            (float(self.weight[i, k]), float(self.mean[i, k]), float(self.var[i, k]))
            for k in range(int(self.count[i]))
        ]

    def check_invariants(self, tol: float = 1e-9) -> None:
        p = self.params
        K = p.max_components
        if self.count.max(initial=0) > K:
            raise AssertionError("component count exceeds max_components")
        active = np.arange(K) < self.count[:, None]
        live = self.count > 0
        if np.any(active & (self.weight < 0)):
            raise AssertionError("negative component weight")
        sums = np.where(active, self.weight, 0.0).sum(axis=1)
        if np.any(np.abs(sums[live] - 1.0) > tol):
            raise AssertionError("mixture weights do not sum to 1")
        if np.any(active & ((self.var < p.var_min) | (self.var > p.var_max))):
            raise AssertionError("variance outside [var_min, var_max]")
        ws = np.where(active, self.weight, -np.inf)
        if np.any(ws[:, :-1] < ws[:, 1:]):
            raise AssertionError("components not sorted by weight")
