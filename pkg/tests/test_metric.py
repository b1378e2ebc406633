import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from behavmetric.metric import (EPS, INF, PseudometricMatrix, check_axioms, check_value, discrete_distance,
                                euclid, parse_top, sup_join, sup_norm_diff)
from strategies import pseudometrics

reals = st.one_of(st.floats(0, 1e6, allow_nan=False), st.just(INF))


def test_euclid_cases():
    assert euclid(0.2, 0.7) == pytest.approx(0.5)
    assert euclid(INF, INF) == 0.0
    assert euclid(INF, 3.0) == INF
    assert euclid(3.0, INF) == INF
    assert euclid(1.5, 1.5) == 0.0


@given(reals, reals, reals)
def test_euclid_is_a_metric_on_extended_reals(a, b, c):
    assert euclid(a, b) == euclid(b, a)
    assert (euclid(a, b) == 0) == (a == b)
    assert euclid(a, c) <= euclid(a, b) + euclid(b, c) + 1e-9 * max(1.0, abs(a if a < INF else 0))


@pytest.mark.parametrize("raw,expected", [(1, 1.0), ("inf", INF), (".inf", INF), (float("inf"), INF), ("1", 1.0)])
def test_parse_top(raw, expected):
    assert parse_top(raw) == expected


@pytest.mark.parametrize("raw", [0.5, 2, "big", -1])
def test_parse_top_rejects(raw):
    with pytest.raises(ValueError):
        parse_top(raw)


def test_check_value_snaps_noise_and_rejects_overshoot():
    assert check_value(1.0 + EPS / 2, 1.0) == 1.0
    assert check_value(-EPS / 2, 1.0) == 0.0
    with pytest.raises(ValueError):
        check_value(1.1, 1.0)
    with pytest.raises(ValueError):
        check_value(-0.1, 1.0)
    with pytest.raises(ValueError):
        check_value(float("nan"), INF)
    assert check_value(INF, INF) == INF


def test_matrix_lookup_and_immutability():
    d = PseudometricMatrix(("a", "b"), [[0, 0.3], [0.3, 0]])
    assert d("a", "b") == pytest.approx(0.3)
    assert d.index("b") == 1
    with pytest.raises(ValueError):
        d("a", "zzz")
    with pytest.raises(ValueError):
        d.entries[0, 1] = 0.5


@pytest.mark.parametrize("entries", [
    [[0, 0.5]],                      # wrong shape
    [[0, -0.5], [-0.5, 0]],          # negative
    [[0, 1.5], [1.5, 0]],            # above top 1
    [[0, float("nan")], [0, 0]],     # NaN
])
def test_matrix_rejects_bad_tables(entries):
    with pytest.raises(ValueError):
        PseudometricMatrix(("a", "b"), entries, 1.0)


def test_matrix_rejects_duplicate_states():
    with pytest.raises(ValueError):
        PseudometricMatrix(("a", "a"), np.zeros((2, 2)))


def test_zero_and_discrete():
    z = PseudometricMatrix.zero(("a", "b", "c"))
    assert z.is_pseudometric() and not z.entries.any()
    d = PseudometricMatrix.discrete(("a", "b"), INF)
    assert d("a", "b") == INF and d("a", "a") == 0.0
    assert d.is_pseudometric()
    assert discrete_distance(1.0)("x", "y") == 1.0
    assert discrete_distance(1.0)("x", "x") == 0.0


def test_check_axioms_reports_each_kind():
    bad = PseudometricMatrix(("a", "b", "c"), [[0.1, 0.2, 0.9], [0.3, 0, 0.1], [0.9, 0.1, 0]])
    kinds = {v.axiom for v in check_axioms(bad)}
    assert kinds == {"reflexivity", "symmetry", "triangle"}
    tri = [v for v in check_axioms(bad) if v.axiom == "triangle" and v.states == ("a", "b", "c")]
    assert tri and tri[0].slack == pytest.approx(0.9 - 0.2 - 0.1)


def test_triangle_with_infinite_entries():
    d = PseudometricMatrix(("a", "b", "c"), [[0, INF, 1], [INF, 0, INF], [1, INF, 0]], INF)
    assert d.is_pseudometric()
    broken = PseudometricMatrix(("a", "b", "c"), [[0, INF, 1], [INF, 0, 2], [1, 2, 0]], INF)
    assert any(v.axiom == "triangle" for v in check_axioms(broken))


@given(pseudometrics(max_n=6))
def test_closure_generated_tables_are_pseudometrics(d):
    assert check_axioms(d) == []


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(pseudometrics(n=n), pseudometrics(n=n))))
def test_join_of_pseudometrics_is_a_pseudometric_upper_bound(pair):
    d1, d2 = pair
    j = sup_join([d1, d2])
    assert j.is_pseudometric()
    assert d1.leq(j) and d2.leq(j)
    assert sup_norm_diff(j, j) == 0.0


@given(st.integers(1, 5).flatmap(lambda n: st.tuples(pseudometrics(n=n, top=INF, allow_inf=True),
                                                     pseudometrics(n=n, top=INF, allow_inf=True))))
def test_sup_norm_diff_is_symmetric_and_zero_on_equal(pair):
    d1, d2 = pair
    assert sup_norm_diff(d1, d2) == sup_norm_diff(d2, d1)
    assert (sup_norm_diff(d1, d2) == 0) == (d1 == d2)


@given(pseudometrics(), st.floats(0.01, 1.0))
def test_scaling_preserves_axioms(d, c):
    s = d.scaled(c)
    assert s.is_pseudometric()
    assert np.allclose(s.entries, c * d.entries)


def test_sup_join_needs_same_carrier():
    with pytest.raises(ValueError):
        sup_join([PseudometricMatrix.zero(("a",)), PseudometricMatrix.zero(("b",))])
    with pytest.raises(ValueError):
        sup_join([])


def test_as_dict_round_trip():
    d = PseudometricMatrix(("a", "b"), [[0, 0.25], [0.25, 0]])
    assert d.as_dict() == {"a": {"a": 0.0, "b": 0.25}, "b": {"a": 0.25, "b": 0.0}}
    assert math.isclose(PseudometricMatrix.from_function(("a", "b"), lambda x, y: d(x, y))("b", "a"), 0.25)
