import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fncreg.metrics import aggregate, evaluate
from fncreg.model import EvaluationMetrics, GroundTruth


def truth(p, support):
    b = np.zeros(p)
    b[list(support)] = 1.0
    return GroundTruth(b, 1.0)


def test_perfect_selection():
    m = evaluate([0, 1, 2], truth(6, [0, 1, 2]))
    assert (m.fnp, m.fdp, m.f_measure) == (0.0, 0.0, 1.0)


def test_empty_selection():
    m = evaluate([], truth(6, [0, 1, 2]))
    assert (m.fnp, m.fdp, m.f_measure) == (1.0, 0.0, 0.0)
    assert m.n_selected == 0


def test_hand_count():
    # 1-based {1,2,4,5} selected against support {1,2,3}
    m = evaluate([0, 1, 3, 4], truth(6, [0, 1, 2]))
    assert (m.tp, m.fp, m.fn) == (2, 2, 1)
    assert m.fnp == pytest.approx(1 / 3)
    assert m.fdp == pytest.approx(1 / 2)
    assert m.f_measure == pytest.approx(4 / 7)


def test_null_signal_record():
    m = evaluate([2], truth(5, []))
    assert m.null_signal and math.isnan(m.fnp) and math.isnan(m.f_measure)
    assert m.fdp == 1.0


def test_out_of_range_index():
    with pytest.raises(ValueError):
        evaluate([6], truth(6, [0]))


@settings(max_examples=200, deadline=None)
@given(p=st.integers(1, 40), data=st.data())
def test_count_invariants(p, data):
    sup = data.draw(st.sets(st.integers(0, p - 1), min_size=1))
    sel = data.draw(st.sets(st.integers(0, p - 1)))
    m = evaluate(sel, truth(p, sup))
    m.validate()
    assert m.tp + m.fn == m.s == len(sup)
    assert m.tp + m.fp == len(sel) == m.n_selected
    for v in (m.fnp, m.fdp, m.f_measure):
        assert 0 <= v <= 1
    assert (m.f_measure == 1) == (m.fnp == 0 and m.fdp == 0)


def _m(fnp):
    return EvaluationMetrics(0, 0, 0, fnp, 0.0, 1 - fnp, 10, 0)


def test_aggregate_examples():
    one = aggregate([_m(0.3)])
    assert one.mean["fnp"] == 0.3 and one.sd["fnp"] == 0.0
    two = aggregate([_m(0.2), _m(0.4)])
    assert two.mean["fnp"] == pytest.approx(0.3)
    assert two.sd["fnp"] == pytest.approx(0.1414, abs=5e-5)
    three = aggregate([_m(0.05), _m(0.15), _m(0.08)], epsilon=0.1)
    assert three.freq_fnp_le == pytest.approx(2 / 3)
    with pytest.raises(ValueError):
        aggregate([])


def test_aggregate_independent_recompute():
    rng = np.random.default_rng(0)
    rows = [_m(v) for v in rng.uniform(0, 1, 100)]
    s = aggregate(rows, epsilon=0.2)
    vals = np.array([r.fnp for r in rows])
    assert s.mean["fnp"] == pytest.approx(vals.mean(), rel=1e-14)
    assert s.sd["fnp"] == pytest.approx(vals.std(ddof=1), rel=1e-12)
    assert s.freq_fnp_le == np.mean(vals <= 0.2)


@settings(max_examples=50, deadline=None)
@given(vals=st.lists(st.floats(0, 1), min_size=1, max_size=50), seed=st.integers(0, 1000))
def test_aggregate_permutation_invariant(vals, seed):
    rows = [_m(v) for v in vals]
    perm = np.random.default_rng(seed).permutation(len(rows))
    a = aggregate(rows, epsilon=0.3)
    b = aggregate([rows[i] for i in perm], epsilon=0.3)
    assert a.mean == b.mean and a.freq_fnp_le == b.freq_fnp_le
    for k in a.sd:
        assert a.sd[k] == pytest.approx(b.sd[k], rel=1e-12, abs=1e-15)


def test_aggregate_skips_null_signal_rows():
    rows = [evaluate([0], truth(4, [0])), evaluate([1], truth(4, []))]
    s = aggregate(rows, epsilon=0.1)
    assert s.mean["fnp"] == 0.0 and s.freq_fnp_le == 1.0
    assert s.mean["fdp"] == 0.5
