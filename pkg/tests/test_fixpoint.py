import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from behavmetric.fixpoint import (FixpointConfig, apply_step, bisim_metric, dfa_distance_closed_form,
                                  kleene_iterates, shortest_distinguishing_word, step_function)
from behavmetric.metric import INF, check_axioms, sup_norm_diff
from behavmetric.systems import DFA, PTS, builtin_examples, fig2_pts
from behavmetric.transport import FiniteDistribution
from generators import random_dfa
from oracles import dfa_accepts, dfa_product_equivalent, shortest_by_enumeration

EX = builtin_examples()


def test_fig2_distances():
    res = bisim_metric(fig2_pts(0.9, 0.1))
    d = res.metric
    assert res.converged
    assert d("u", "z") == 1.0
    assert d("x", "y") == pytest.approx(0.09, abs=1e-8)
    assert res.iterations <= 250


def test_fig2_undiscounted():
    d = bisim_metric(fig2_pts(1.0, 0.1)).metric
    assert d("x", "y") == pytest.approx(0.1, abs=1e-8)


@given(st.floats(0.05, 1.0), st.floats(0.0, 0.5))
def test_fig2_distance_is_discounted_perturbation(c, eps):
    # u and z sit at distance 1, so moving eps mass between them costs c * eps
    d = bisim_metric(fig2_pts(c, eps)).metric
    assert d("x", "y") == pytest.approx(c * eps, abs=1e-8)
    assert d("u", "z") == 1.0


def test_fig4_values_and_exact_termination():
    res = bisim_metric(EX["fig4-mts"])
    d = res.metric
    expected = {("x2", "y2"): 0.1, ("x2", "y3"): 0.6, ("x3", "y2"): 0.2, ("x3", "y3"): 0.3, ("x1", "y1"): 0.3}
    for (a, b), v in expected.items():
        assert d(a, b) == pytest.approx(v, abs=1e-9)
    assert res.final_delta == 0.0
    assert res.iterations <= 10


def test_dfa_fixture():
    dfa = EX["dfa-aa"]
    assert shortest_distinguishing_word(dfa, "p", "q") == ("a", "a")
    assert bisim_metric(dfa).metric("p", "q") == pytest.approx(0.25)


def test_real_machine_fixture():
    d = bisim_metric(EX["real-machine-small"]).metric
    assert d("p", "r") == pytest.approx(0.0, abs=1e-9)
    # p and q differ by 0.5 in output, their successors swap roles
    assert d("p", "q") > 0.2


def test_single_state_system():
    s = PTS(("a",), {"a": FiniteDistribution.dirac("a")})
    res = bisim_metric(s)
    assert res.metric.entries.tolist() == [[0.0]]
    assert res.converged and res.iterations == 1


def test_non_convergence_is_reported():
    res = bisim_metric(fig2_pts(1.0, 0.1), FixpointConfig(max_iterations=1))
    assert not res.converged
    assert res.iterations == 1
    assert res.final_delta > 0


def test_trace_records_deltas():
    res = bisim_metric(EX["dfa-aa"], FixpointConfig(record_trace=True))
    assert len(res.trace) == res.iterations
    assert res.trace[-1] == res.final_delta


@pytest.mark.parametrize("kw", [dict(tolerance=0.0), dict(max_iterations=0), dict(max_iterations=2.5)])
def test_config_validation(kw):
    with pytest.raises(ValueError):
        FixpointConfig(**kw)


def test_unsupported_kind():
    with pytest.raises(ValueError):
        step_function(EX["nfa-ab"])


@pytest.mark.parametrize("name", ["fig2-pts", "fig4-mts", "dfa-aa", "real-machine-small"])
def test_kleene_iterates_increase_and_stay_pseudometrics(name):
    system = EX[name]
    prev = None
    for d in itertools.islice(kleene_iterates(system), 12):
        assert check_axioms(d) == []
        if prev is not None:
            assert prev.leq(d)
        prev = d


@pytest.mark.parametrize("name", ["fig2-pts", "fig4-mts", "dfa-aa", "real-machine-small"])
def test_result_is_a_fixed_point(name):
    system = EX[name]
    d = bisim_metric(system).metric
    assert sup_norm_diff(apply_step(system, d), d) <= 1e-8


@given(st.integers(0, 10_000))
def test_dfa_closed_form_matches_fixpoint(seed):
    dfa = random_dfa(np.random.default_rng(seed), max_states=6)
    d = bisim_metric(dfa).metric
    for x, y in itertools.combinations(dfa.states, 2):
        assert d(x, y) == pytest.approx(dfa_distance_closed_form(dfa, x, y), abs=1e-8)


@given(st.integers(0, 10_000))
def test_shortest_word_matches_enumeration(seed):
    dfa = random_dfa(np.random.default_rng(seed), max_states=5, max_letters=2)
    accepts = lambda s, w: dfa_accepts(dfa, s, w)
    for x, y in itertools.combinations(dfa.states, 2):
        w = shortest_distinguishing_word(dfa, x, y)
        # a distinguishing word, if any, has length below the number of states
        n = shortest_by_enumeration(accepts, dfa.alphabet, x, y, len(dfa.states))
        assert (None if w is None else len(w)) == n
        assert (w is None) == dfa_product_equivalent(dfa, x, y)
        if w is not None:
            assert dfa_accepts(dfa, x, w) != dfa_accepts(dfa, y, w)


def test_closed_form_rejects_undiscounted():
    with pytest.raises(ValueError):
        dfa_distance_closed_form(EX["dfa-aa"], "p", "q", c=1.0)


def test_mts_with_infinite_distances():
    from behavmetric.systems import parse_system
    s = parse_system("kind: mts\ntop: inf\nstates: [p, q]\npropositions: {r: {points: [0, 1]}}\n"
                     "valuation: {p: {r: 0}, q: {r: 1}}\ntransitions: {p: [p], q: []}\n")
    d = bisim_metric(s).metric
    assert d("p", "q") == INF
