import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from croppat.metrics import (ConfusionMatrix, MetricSet, accuracy, confusion, expected_agreement,
                             kappa, kappa_band, sensitivity, specificity)

from oracles import count_metrics

HAND = [[45, 5], [15, 35]]


def test_confusion_counts():
    assert confusion([0, 1], [0, 1], 2).counts.tolist() == [[1, 0], [0, 1]]
    assert confusion([0, 0], [1, 1], 2).counts.tolist() == [[0, 2], [0, 0]]


def test_confusion_order_invariant(rng):
    t = rng.integers(0, 5, 200)
    p = rng.integers(0, 5, 200)
    perm = rng.permutation(200)
    assert np.array_equal(confusion(t, p, 5).counts, confusion(t[perm], p[perm], 5).counts)


@pytest.mark.parametrize("t, p", [([0, 1], [0]), ([0, 3], [0, 1]), ([0, 1], [0, -1]), ([], [])])
def test_confusion_errors(t, p):
    with pytest.raises(ValueError):
        confusion(t, p, 3)


def test_hand_case():
    cm = ConfusionMatrix(HAND)
    assert accuracy(cm) == pytest.approx(0.80, abs=1e-12)
    assert expected_agreement(cm) == pytest.approx(0.50, abs=1e-12)
    assert kappa(cm) == pytest.approx(0.60, abs=1e-12)
    assert sensitivity(cm, 0) == pytest.approx(0.90, abs=1e-12)
    assert specificity(cm, 0) == pytest.approx(0.70, abs=1e-12)


def test_accuracy_extremes():
    assert accuracy(ConfusionMatrix(np.diag([3, 4, 5]))) == 1.0
    assert accuracy(ConfusionMatrix([[0, 3], [4, 0]])) == 0.0


def test_kappa_special_cases():
    assert kappa(ConfusionMatrix(np.diag([3, 4]))) == 1.0
    # P0 == Pe: rows (2,2), cols (2,2), diagonal 2 of 4
    assert kappa(ConfusionMatrix([[1, 1], [1, 1]])) == 0.0
    # all mass in one cell: Pe == 1
    assert kappa(ConfusionMatrix([[7, 0], [0, 0]])) is None


def test_absent_rates():
    cm = ConfusionMatrix([[3, 1], [0, 0]])
    assert sensitivity(cm, 1) is None
    assert specificity(cm, 1) == 0.75
    assert specificity(ConfusionMatrix([[0, 0], [0, 4]]), 1) is None


@pytest.mark.parametrize("value, band", [
    (0.9288, "nearly perfect"),
    (0.6201, "substantial"),
    (1.0, "perfect"),
    (0.0, "equivalent to chance"),
    (0.15, "slight"),
    (0.20, "slight"),
    (0.205, "slight"),
    (0.21, "fair"),
    (0.40, "fair"),
    (0.405, "fair"),
    (0.41, "moderate"),
    (0.60, "moderate"),
    (0.61, "substantial"),
    (0.80, "substantial"),
    (0.81, "nearly perfect"),
    (0.995, "nearly perfect"),
    (-0.2, "less than chance"),
    (None, None),
])
def test_kappa_bands(value, band):
    assert kappa_band(value) == band


def test_metricset_json_keys():
    doc = MetricSet.from_confusion(ConfusionMatrix(HAND, ("rice", "cane"))).to_dict()
    assert list(doc) == ["accuracy", "kappa", "kappa_band", "per_class"]
    assert list(doc["per_class"][0]) == ["class", "sensitivity", "specificity"]
    assert doc["per_class"][0]["class"] == "rice"
    assert MetricSet.from_dict(doc).to_dict() == doc


matrices = st.integers(2, 6).flatmap(
    lambda k: st.lists(st.lists(st.integers(0, 40), min_size=k, max_size=k), min_size=k, max_size=k)
).filter(lambda m: sum(map(sum, m)) > 0)


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_metrics_match_counting_oracle(m):
    cm = ConfusionMatrix(m)
    p0, kap, sens, spec = count_metrics(m)
    assert abs(accuracy(cm) - float(p0)) <= 1e-12
    if kap is None:
        assert kappa(cm) is None
    else:
        assert abs(kappa(cm) - float(kap)) <= 1e-12
    for k in range(len(m)):
        for got, want in ((sensitivity(cm, k), sens[k]), (specificity(cm, k), spec[k])):
            assert (got is None) == (want is None)
            if want is not None:
                assert abs(got - float(want)) <= 1e-12


@settings(max_examples=200, deadline=None)
@given(matrices)
def test_kappa_not_above_accuracy(m):
    cm = ConfusionMatrix(m)
    pe = expected_agreement(cm)
    if 0 < pe < 1:
        assert kappa(cm) <= accuracy(cm)


@settings(max_examples=100, deadline=None)
@given(matrices, st.integers(2, 50))
def test_kappa_scale_invariant(m, c):
    a = kappa(ConfusionMatrix(m))
    b = kappa(ConfusionMatrix(np.array(m) * c))
    assert (a is None) == (b is None)
    if a is not None:
        assert b == pytest.approx(a, abs=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=4, max_size=4).filter(lambda v: sum(v) > 0))
def test_binary_sensitivity_specificity_swap(v):
    cm = ConfusionMatrix(np.array(v).reshape(2, 2))
    assert sensitivity(cm, 0) == specificity(cm, 1)
    assert sensitivity(cm, 1) == specificity(cm, 0)
