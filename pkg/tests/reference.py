"""Slow, list-based per-pixel re-statements of each algorithm.

Written straight from the update rules, independent of the compiled kernels,
and used as oracles in equivalence tests. Components are [weight, mean, var]
lists; histograms are [bin, weight] lists in insertion order.
"""
import math


def bg_prefix(weights, ratio):
    total = 0.0
    for i, w in enumerate(weights):
        total += w
        if total > ratio:
            return i + 1
    return len(weights)


def mog_pixel(comps, x, alpha, K, ratio, var0, floor):
    x = float(x)
    m = None
    for k, (w, mu, var) in enumerate(comps):
        d = x - mu
        if d * d < 6.25 * var:
            m = k
            break
    if m is not None:
        for c in comps:
            c[0] = (1.0 - alpha) * c[0]
        comps[m][0] += alpha
        rho = min(1.0, alpha / comps[m][0])
        mu = comps[m][1] + rho * (x - comps[m][1])
        comps[m][1] = mu
        d = x - mu
        comps[m][2] = max(floor, comps[m][2] + rho * (d * d - comps[m][2]))
    else:
        new = [alpha, x, var0]
        if len(comps) < K:
            comps.append(new)
        else:
            comps[-1] = new
        total = 0.0
        for c in comps:
            total += c[0]
        for c in comps:
            c[0] = c[0] / total
    tagged = [(c, k == m) for k, c in enumerate(comps)]
    tagged.sort(key=lambda t: -(t[0][0] / math.sqrt(t[0][2])))
    comps[:] = [c for c, _ in tagged]
    pos = next((i for i, (_, hit) in enumerate(tagged) if hit), None)
    b = bg_prefix([c[0] for c in comps], ratio)
    return 0 if (pos is not None and pos < b) else 255


def mog2_pixel(comps, x, alpha, vt, shadows, K=5, ratio=0.9, var_init=225.0,
               var_min=4.0, var_max=1125.0, ct=0.05, tau=0.5):
    x = float(x)
    m = None
    for k, (w, mu, var) in enumerate(comps):
        d = x - mu
        if d * d < vt * var:
            m = k
            break
    kept = []
    new_m = None
    for k, c in enumerate(comps):
        hit = 1.0 if k == m else 0.0
        w = c[0] + alpha * (hit - c[0]) - alpha * ct
        if w > 0.0:
            if k == m:
                new_m = len(kept)
            kept.append([w, c[1], c[2]])
    comps[:] = kept
    m = new_m
    if m is not None:
        c = comps[m]
        rho = min(1.0, alpha / c[0])
        c[1] = c[1] + rho * (x - c[1])
        d = x - c[1]
        c[2] = min(var_max, max(var_min, c[2] + rho * (d * d - c[2])))
    else:
        new = [alpha, x, var_init]
        if len(comps) < K:
            comps.append(new)
        else:
            smallest = min(c[0] for c in comps)
            s = max(i for i, c in enumerate(comps) if c[0] == smallest)
            comps[s] = new
    total = 0.0
    for c in comps:
        total += c[0]
    for c in comps:
        c[0] = c[0] / total
    tagged = [(c, k == m) for k, c in enumerate(comps)]
    tagged.sort(key=lambda t: -t[0][0])
    comps[:] = [c for c, _ in tagged]
    pos = next((i for i, (_, hit) in enumerate(tagged) if hit), None)
    b = bg_prefix([c[0] for c in comps], ratio)
    if pos is not None and pos < b:
        return 0
    mu_bg = comps[0][1]
    if shadows and mu_bg > 0 and tau <= x / mu_bg < 1.0:
        return 127
    return 255


def _hist_add(hist, q, amount, max_features):
    for e in hist:
        if e[0] == q:
            e[1] += amount
            return
    if len(hist) < max_features:
        hist.append([q, amount])
    else:
        smallest = min(e[1] for e in hist)
        s = min(i for i, e in enumerate(hist) if e[1] == smallest)
        hist[s] = [q, amount]


def gmg_pixel(hist, x, accumulating, init_frames, threshold, levels=16, lr=0.025,
              max_features=64):
    q = (int(x) * levels) // 256
    if accumulating:
        _hist_add(hist, q, 1.0 / init_frames, max_features)
        return 0
    total = 0.0
    wq = 0.0
    for b, w in hist:
        total += w
        if b == q:
            wq = w
    p = 1.0 - wq / total if total > 0.0 else 1.0
    label = 255 if p > threshold else 0
    for e in hist:
        e[1] = e[1] * (1.0 - lr)
    _hist_add(hist, q, lr, max_features)
    return label


def median_filter(grid, radius):
    """Lower median over clipped square windows, by sorting every window."""
    h, w = len(grid), len(grid[0])
    out = [[0] * w for _ in range(h)]
    for r in range(h):
        for c in range(w):
            vals = sorted(
                grid[rr][cc]
                for rr in range(max(0, r - radius), min(h, r + radius + 1))
                for cc in range(max(0, c - radius), min(w, c + radius + 1))
            )
            out[r][c] = vals[(len(vals) - 1) // 2]
    return out


class RefMOG:
    def __init__(self, n, history=200, K=5, ratio=0.7, sigma=15.0, floor=None):
        self.px = [[] for _ in range(n)]
        self.t = 0
        self.history, self.K, self.ratio = history, K, ratio
        self.var0 = sigma * sigma
        self.floor = max(0.01, self.var0) if floor is None else floor

    def apply(self, xs):
        alpha = 1.0 / min(self.t + 1, self.history)
        out = [mog_pixel(c, x, alpha, self.K, self.ratio, self.var0, self.floor)
               for c, x in zip(self.px, xs)]
        self.t += 1
        return out


class RefMOG2:
    def __init__(self, n, history=200, vt=16.0, shadows=True):
        self.px = [[] for _ in range(n)]
        self.t = 0
        self.history, self.vt, self.shadows = history, vt, shadows

    def apply(self, xs):
        alpha = 1.0 / min(self.t + 1, self.history)
        out = [mog2_pixel(c, x, alpha, self.vt, self.shadows) for c, x in zip(self.px, xs)]
        self.t += 1
        return out


class RefGMG:
    def __init__(self, width, height, init_frames=120, threshold=0.8, levels=16,
                 max_features=64, radius=7):
        self.w, self.h = width, height
        self.px = [[] for _ in range(width * height)]
        self.t = 0
        self.init, self.threshold = init_frames, threshold
        self.levels, self.max_features, self.radius = levels, max_features, radius

    def apply(self, xs):
        acc = self.t < self.init
        raw = [gmg_pixel(hh, x, acc, self.init, self.threshold, self.levels,
                         max_features=self.max_features) for hh, x in zip(self.px, xs)]
        self.t += 1
        if acc or self.radius == 0:
            return raw
        grid = [raw[r * self.w:(r + 1) * self.w] for r in range(self.h)]
        return [v for row in median_filter(grid, self.radius) for v in row]
