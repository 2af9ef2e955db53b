import numpy as np
import pytest

from bgsub.core import Frame


def random_walk_frames(rng, width, height, n, levels=(30, 128, 220), noise=6.0, p_switch=0.05):
    """Per-pixel piecewise-constant intensity with noise: exercises every branch of the mixtures."""
    state = rng.integers(0, len(levels), size=(height, width))
    frames = []
    for _ in range(n):
        flip = rng.random((height, width)) < p_switch
        state = np.where(flip, rng.integers(0, len(levels), size=(height, width)), state)
        base = np.asarray(levels, dtype=float)[state]
        img = np.clip(np.rint(base + rng.normal(0, noise, size=base.shape)), 0, 255)
        frames.append(Frame(img.astype(np.uint8)))
    return frames


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
