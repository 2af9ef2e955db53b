import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bgsub.core import DimensionError, InvalidLabelError, Mask
from bgsub.metrics import (
    HISTOGRAM_COLUMNS,
    METRIC_COLUMNS,
    ConfusionMatrix,
    EmptyMatrixError,
    UndefinedPrecisionError,
    accuracy,
    confusion,
    histogram,
    metric_row,
    precision,
    write_histogram_csv,
    write_metrics_csv,
)


def row(*labels):
    return Mask(np.array([labels]))


def brute_confusion(pred, gt):
    tp = fp = fn = tn = 0
    for p, g in zip(pred.data.tolist(), gt.data.tolist()):
        if p == 255 and g == 255:
            tp += 1
        elif p == 255:
            fp += 1
        elif g == 255:
            fn += 1
        else:
            tn += 1
    return ConfusionMatrix(tp, fp, fn, tn)


@pytest.mark.parametrize(
    "pred, gt, expected",
    [
        ((255, 0, 255, 0), (255, 255, 0, 0), ConfusionMatrix(1, 1, 1, 1)),
        ((255, 255, 255), (255, 255, 255), ConfusionMatrix(3, 0, 0, 0)),
        ((127, 255), (255, 255), ConfusionMatrix(1, 0, 1, 0)),
    ],
)
def test_confusion_examples(pred, gt, expected):
    assert confusion(row(*pred), row(*gt)) == expected


def test_confusion_errors():
    with pytest.raises(DimensionError):
        confusion(row(0, 0), row(0, 0, 0))
    with pytest.raises(InvalidLabelError):
        confusion(row(0, 0), row(0, 127))


def test_accuracy_examples():
    assert accuracy(ConfusionMatrix(tp=98, fp=20, fn=2, tn=880)) == pytest.approx(0.978, abs=1e-12)
    assert accuracy(ConfusionMatrix(5, 0, 0, 5)) == 1.0
    assert accuracy(ConfusionMatrix(0, 5, 5, 0)) == 0.0
    with pytest.raises(EmptyMatrixError):
        accuracy(ConfusionMatrix(0, 0, 0, 0))


def test_precision_examples():
    assert precision(ConfusionMatrix(30, 70, 0, 0)) == pytest.approx(0.30, abs=1e-12)
    assert precision(ConfusionMatrix(50, 0, 3, 9)) == 1.0
    with pytest.raises(UndefinedPrecisionError):
        precision(ConfusionMatrix(0, 0, 4, 4))
    assert metric_row("v", 1, "mog", ConfusionMatrix(0, 0, 4, 4))["precision"] == "undefined"


masks = st.integers(1, 16).flatmap(
    lambda h: st.integers(1, 16).flatmap(
        lambda w: st.tuples(
            st.lists(st.sampled_from([0, 127, 255]), min_size=h * w, max_size=h * w),
            st.lists(st.sampled_from([0, 255]), min_size=h * w, max_size=h * w),
            st.just((h, w)),
        )
    )
)


@given(masks)
def test_confusion_properties(case):
    p, g, shape = case
    pred, gt = Mask(np.reshape(p, shape)), Mask(np.reshape(g, shape))
    cm = confusion(pred, gt)
    assert cm == brute_confusion(pred, gt)
    assert cm.total == shape[0] * shape[1]
    folded = np.where(pred.labels == 127, 0, pred.labels)
    assert (accuracy(cm) == 1.0) == bool(np.array_equal(folded, gt.labels))
    # Swapping roles (shadow folded) transposes fp and fn.
    swapped = confusion(gt, Mask(folded))
    assert (swapped.fp, swapped.fn, swapped.tp, swapped.tn) == (cm.fn, cm.fp, cm.tp, cm.tn)
    assert accuracy(swapped) == accuracy(cm)


def test_histogram_examples():
    rep = histogram([0.98, 0.99, 0.80], 10)
    assert rep.counts[8] == 1 and rep.counts[9] == 2 and sum(rep.counts) == 3
    assert rep.cumulative[-1] == 3
    assert histogram([], 10).counts == (0,) * 10
    assert histogram([1.0], 4).counts == (0, 0, 0, 1)
    assert histogram([0.0, 0.25], 4).counts == (1, 1, 0, 0)
    with pytest.raises(ValueError):
        histogram([1.2])
    with pytest.raises(ValueError):
        histogram([0.5], 0)


@given(st.lists(st.floats(0.0, 1.0), max_size=60), st.integers(1, 25))
def test_histogram_properties(values, bins):
    rep = histogram(values, bins)
    assert sum(rep.counts) == len(values) == rep.total
    assert list(rep.cumulative) == sorted(rep.cumulative)
    assert len(rep.bin_edges) == bins + 1
    assert rep.bin_edges[0] == 0.0 and rep.bin_edges[-1] == 1.0


def test_csv_columns(tmp_path):
    rows = [metric_row("vid", 3, "mog2", ConfusionMatrix(1, 2, 3, 4))]
    p = write_metrics_csv(rows, tmp_path / "m.csv")
    with open(p) as fh:
        got = list(csv.DictReader(fh))
    assert list(got[0]) == METRIC_COLUMNS
    assert float(got[0]["accuracy"]) == 0.5
    h = write_histogram_csv({"accuracy": histogram([0.5, 1.0], 2)}, tmp_path / "h.csv")
    lines = h.read_text().splitlines()
    assert lines[0].split(",") == HISTOGRAM_COLUMNS
    assert lines[1:] == ["accuracy,0.0,0.5,0,0", "accuracy,0.5,1.0,2,2"]
