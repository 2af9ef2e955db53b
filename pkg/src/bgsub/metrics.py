"""Pixel confusion matrices, accuracy/precision, and occurrence histograms."""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .core import BgsubError, DimensionError, FOREGROUND, Mask, check_labels

GT_LABELS = (0, FOREGROUND)
DEFAULT_BINS = 10

METRIC_COLUMNS = ["video", "frame_index", "algorithm", "tp", "fp", "fn", "tn", "accuracy", "precision"]
HISTOGRAM_COLUMNS = ["metric", "bin_start", "bin_end", "count", "cumulative"]
UNDEFINED = "undefined"


class EmptyMatrixError(BgsubError, ZeroDivisionError):
    pass


class UndefinedPrecisionError(BgsubError, ZeroDivisionError):
    """Raised when a prediction has no foreground pixels (tp + fp == 0)."""


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    @property
    def positives(self) -> int:
        return self.tp + self.fn

    @property
    def negatives(self) -> int:
        return self.fp + self.tn

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


def confusion(pred: Mask, gt: Mask) -> ConfusionMatrix:
    """Compare a prediction with binary ground truth; shadow (127) counts as background."""
    if pred.labels.shape != gt.labels.shape:
        raise DimensionError(
            f"prediction is {pred.width}x{pred.height}, ground truth is {gt.width}x{gt.height}"
        )
    check_labels(gt.labels, GT_LABELS, source="ground truth")
    p = pred.labels == FOREGROUND
    g = gt.labels == FOREGROUND
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    return ConfusionMatrix(tp, fp, fn, p.size - tp - fp - fn)


def accuracy(cm: ConfusionMatrix) -> float:
    if cm.total == 0:
        raise EmptyMatrixError("accuracy of an empty confusion matrix")
    return (cm.tp + cm.tn) / cm.total


def precision(cm: ConfusionMatrix) -> float:
    if cm.tp + cm.fp == 0:
        raise UndefinedPrecisionError("precision undefined: no predicted foreground")
    return cm.tp / (cm.tp + cm.fp)


def precision_or_none(cm: ConfusionMatrix) -> float | None:
    try:
        return precision(cm)
    except UndefinedPrecisionError:
        return None


@dataclass(frozen=True)
class HistogramReport:
    bin_edges: tuple[float, ...]
    counts: tuple[int, ...]
    cumulative: tuple[int, ...]

    @property
    def total(self) -> int:
        return self.cumulative[-1] if self.cumulative else 0

    def rows(self):
        for i, (c, cum) in enumerate(zip(self.counts, self.cumulative)):
            yield self.bin_edges[i], self.bin_edges[i + 1], c, cum


def histogram(values: Iterable[float], bin_count: int = DEFAULT_BINS) -> HistogramReport:
    """Equal-width bins on [0, 1]; each bin is [lo, hi) except the last, which is closed."""
    if bin_count < 1:
        raise ValueError("bin_count must be >= 1")
    vals = np.asarray(list(values), dtype=np.float64)
    if vals.size and (np.any(~np.isfinite(vals)) or vals.min() < 0.0 or vals.max() > 1.0):
        bad = vals[~((vals >= 0.0) & (vals <= 1.0))][0]
        raise ValueError(f"value {bad!r} outside [0, 1]")
    edges = np.linspace(0.0, 1.0, bin_count + 1)
    idx = np.minimum(np.searchsorted(edges, vals, side="right") - 1, bin_count - 1)
    counts = np.bincount(idx, minlength=bin_count)
    cumulative = np.cumsum(counts)
    return HistogramReport(
        tuple(float(e) for e in edges),
        tuple(int(c) for c in counts),
        tuple(int(c) for c in cumulative),
    )


def metric_row(video: str, frame_index: int, algorithm: str, cm: ConfusionMatrix) -> dict:
    prec = precision_or_none(cm)
    return {
        "video": video,
        "frame_index": frame_index,
        "algorithm": algorithm,
        "tp": cm.tp,
        "fp": cm.fp,
        "fn": cm.fn,
        "tn": cm.tn,
        "accuracy": repr(accuracy(cm)),
        "precision": UNDEFINED if prec is None else repr(prec),
    }


def write_metrics_csv(rows: Sequence[dict], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=METRIC_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return path


def write_histogram_csv(reports: dict[str, HistogramReport], path) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(HISTOGRAM_COLUMNS)
        for metric, report in reports.items():
            for lo, hi, count, cum in report.rows():
                writer.writerow([metric, repr(lo), repr(hi), count, cum])
    return path
