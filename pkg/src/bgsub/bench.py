"""Warm-up-then-repeat timing of a subtractor's apply call."""
from __future__ import annotations

import itertools
import statistics
import time
from dataclasses import asdict, dataclass
from typing import Callable, Iterable

from .core import BgsubError

DEFAULT_WARMUP = 1000
DEFAULT_REPETITIONS = (100, 1000, 10000)
REPORT_COLUMNS = [
    "algorithm", "width", "height", "warmup_frames", "repetitions",
    "total_seconds", "mean_seconds_per_op", "fps",
]


class SourceExhaustedError(BgsubError):
    pass


@dataclass(frozen=True)
class TimingReport:
    algorithm: str
    repetitions: int
    warmup_frames: int
    total_seconds: float
    width: int = 0
    height: int = 0

    @property
    def mean_seconds_per_op(self) -> float:
        return self.total_seconds / self.repetitions

    @property
    def fps(self) -> float:
        return self.repetitions / self.total_seconds

    def as_row(self) -> dict:
        row = asdict(self)
        row["mean_seconds_per_op"] = self.mean_seconds_per_op
        row["fps"] = self.fps
        return {k: row[k] for k in REPORT_COLUMNS}


def warmup(subtractor, frames: Iterable, n: int = DEFAULT_WARMUP, cycle: bool = True) -> int:
    """Feed exactly ``n`` frames to the subtractor and discard the masks.

    With ``cycle`` the source is replayed from its start when it runs out.
    Returns the number of frames consumed.
    """
    if n < 0:
        raise ValueError("warm-up frame count must be >= 0")
    if n == 0:
        return 0
    source = itertools.cycle(frames) if cycle else iter(frames)
    used = 0
    for frame in itertools.islice(source, n):
        subtractor.apply(frame)
        used += 1
    if used < n:
        raise SourceExhaustedError(f"frame source ran out after {used} of {n} warm-up frames")
    return used


def time_apply(subtractor, frame, repetitions: int, warmup_frames: int = 0,
               multi_worker: bool = False,
               clock: Callable[[], float] = time.perf_counter) -> TimingReport:
    """Time ``repetitions`` back-to-back apply calls on one frame.

    The model keeps learning across repetitions. Internal pixel parallelism is
    pinned to one worker unless ``multi_worker`` is set.
    """
    if repetitions < 1:
        raise ValueError("repetitions must be >= 1")
    saved = getattr(subtractor, "workers", None)
    if saved is not None and not multi_worker:
        subtractor.workers = 1
    apply = subtractor.apply
    try:
        start = clock()
        for _ in range(repetitions):
            apply(frame)
        total = clock() - start
    finally:
        if saved is not None:
            subtractor.workers = saved
    return TimingReport(
        algorithm=getattr(subtractor, "name", type(subtractor).__name__),
        repetitions=repetitions,
        warmup_frames=warmup_frames,
        total_seconds=total,
        width=getattr(subtractor, "width", 0),
        height=getattr(subtractor, "height", 0),
    )


def median_report(reports: list[TimingReport]) -> TimingReport:
    """The run whose mean time per op is the (lower) median."""
    ranked = sorted(reports, key=lambda r: r.mean_seconds_per_op)
    return ranked[(len(ranked) - 1) // 2]


def median_seconds(reports: list[TimingReport]) -> float:
    return statistics.median(r.mean_seconds_per_op for r in reports)
