import pytest
import yaml
from hypothesis import given
from hypothesis import strategies as st

from behavmetric.metric import INF
from behavmetric.systems import (DFA, DONE, MTS, NFA, PA, PTS, RealMachine, SystemFormatError,
                                 SystemValidationError, builtin_examples, builtin_text, fig2_pts, parse_system,
                                 serialize_system, to_document)
from behavmetric.transport import FiniteDistribution


@pytest.mark.parametrize("name", sorted(builtin_examples()))
def test_fixtures_parse_and_round_trip(name):
    system = parse_system(builtin_text(name))
    again = parse_system(serialize_system(system))
    assert to_document(again) == to_document(system)
    assert system.description


def test_fixture_kinds():
    kinds = {name: s.kind for name, s in builtin_examples().items()}
    assert kinds == {"fig2-pts": "pts", "fig4-mts": "mts", "dfa-aa": "dfa", "nfa-ab": "nfa",
                     "real-machine-small": "real-machine", "pa-small": "pa"}
    assert isinstance(builtin_examples()["fig4-mts"], MTS)
    assert builtin_examples()["fig4-mts"].top == INF


def test_fig2_builder_matches_fixture():
    assert to_document(fig2_pts()) == {k: v for k, v in to_document(builtin_examples()["fig2-pts"]).items()
                                       if k != "description"}


def test_unknown_builtin():
    with pytest.raises(KeyError):
        builtin_text("nope")


MIN_PTS = """
kind: pts
top: 1
states: [a]
transitions:
  a: {DONE: 1}
"""


def test_minimal_document():
    s = parse_system(MIN_PTS)
    assert isinstance(s, PTS) and s.states == ("a",) and s.c == 1.0
    assert s.transitions["a"] == FiniteDistribution.dirac(DONE)


@pytest.mark.parametrize("text,exc", [
    ("kind: pts\ntop: 1\nstates: [a]\ntransitions: {a: {DONE: 1}}\nextra: 3\n", SystemFormatError),
    ("kind: pts\nstates: [a]\ntransitions: {a: {DONE: 1}}\n", SystemFormatError),
    ("kind: nope\ntop: 1\n", SystemFormatError),
    ("kind: pts\ntop: 2\nstates: [a]\ntransitions: {a: {DONE: 1}}\n", SystemValidationError),
    ("kind: pts\ntop: 1\nstates: [a]\ntransitions: {a: {DONE: 0.5}}\n", SystemValidationError),
    ("kind: pts\ntop: 1\nstates: [a]\ntransitions: {a: {b: 1}}\n", SystemValidationError),
    ("kind: pts\ntop: 1\nstates: [a, a]\ntransitions: {a: {DONE: 1}}\n", SystemValidationError),
    ("kind: pts\ntop: 1\nstates: [DONE]\ntransitions: {DONE: {DONE: 1}}\n", SystemValidationError),
    ("kind: pts\ntop: 1\nparams: {c: 1.5}\nstates: [a]\ntransitions: {a: {DONE: 1}}\n", SystemValidationError),
    ("kind: pts\ntop: 1\nparams: {zz: 1}\nstates: [a]\ntransitions: {a: {DONE: 1}}\n", SystemFormatError),
    ("kind: dfa\ntop: 1\nalphabet: [a]\nstates: [p]\naccepting: []\ntransitions: {p: {}}\n", SystemValidationError),
    ("kind: pa\ntop: 1\nparams: {c1: 0.7, c2: 0.7}\nalphabet: [a]\nstates: [p]\noutputs: {p: 0}\n"
     "transitions: {p: {a: {p: 1}}}\n", SystemValidationError),
    ("kind: pa\ntop: 1\nalphabet: [a]\nstates: [p]\noutputs: {p: 1.5}\ntransitions: {p: {a: {p: 1}}}\n",
     SystemValidationError),
    ("kind: real-machine\ntop: 1\nparams: {mode: sum}\nalphabet: [a]\nstates: [p]\noutputs: {p: 0}\n"
     "transitions: {p: {a: p}}\n", SystemValidationError),
    ("kind: mts\ntop: inf\nstates: [p]\npropositions: {r: {elements: [u, v], distances: [[0, 1], [2, 0]]}}\n"
     "valuation: {p: {r: u}}\ntransitions: {p: []}\n", SystemValidationError),
    ("kind: mts\ntop: inf\nstates: [p]\npropositions: {r: {points: [0, 1]}}\n"
     "valuation: {p: {r: 0.5}}\ntransitions: {p: []}\n", SystemValidationError),
    ("- just\n- a list\n", SystemFormatError),
])
def test_rejects_bad_documents(text, exc):
    with pytest.raises(exc):
        parse_system(text)


def test_syntax_errors_carry_positions():
    with pytest.raises(SystemFormatError) as info:
        parse_system("kind: pts\ntop: 1\nstates: [a\n")
    assert info.value.line is not None and info.value.line >= 3
    assert info.value.column is not None


def test_validation_error_names_rule():
    with pytest.raises(SystemValidationError) as info:
        parse_system("kind: pts\ntop: 1\nstates: [a]\ntransitions: {a: {DONE: 0.5}}\n")
    assert info.value.rule == "row-sum"


def test_nfa_missing_letters_mean_no_successors():
    s = parse_system("kind: nfa\ntop: 1\nalphabet: [a, b]\nstates: [p]\naccepting: [p]\n"
                     "transitions: {p: {a: [p]}}\n")
    assert isinstance(s, NFA)
    assert s.transitions["p"]["b"] == frozenset()


def test_mts_element_tables():
    s = parse_system("kind: mts\ntop: inf\nstates: [p, q]\n"
                     "propositions: {r: {elements: [u, v], distances: [[0, 2], [2, 0]]}}\n"
                     "valuation: {p: {r: u}, q: {r: v}}\ntransitions: {p: [q], q: []}\n")
    assert s.propositions["r"]("u", "v") == 2.0


# -- generated systems round trip ----------------------------------------------

names = st.sampled_from(["p", "q", "r", "s"])


@st.composite
def dfas(draw):
    n = draw(st.integers(1, 4))
    states = tuple(f"q{i}" for i in range(n))
    alphabet = tuple(draw(st.sampled_from([("a",), ("a", "b"), ("a", "b", "c")])))
    acc = frozenset(s for s in states if draw(st.booleans()))
    trans = {s: {a: draw(st.sampled_from(states)) for a in alphabet} for s in states}
    return DFA(states, alphabet, acc, trans, c=draw(st.sampled_from([0.25, 0.5, 0.9])))


@st.composite
def pas(draw):
    n = draw(st.integers(1, 3))
    states = tuple(f"q{i}" for i in range(n))
    alphabet = ("a", "b")[: draw(st.integers(1, 2))]
    def dist():
        w = [draw(st.integers(1, 4)) for _ in states]
        return FiniteDistribution(states, tuple(x / sum(w) for x in w))
    outputs = {s: draw(st.sampled_from([0.0, 0.25, 0.5, 1.0])) for s in states}
    return PA(states, alphabet, outputs, {s: {a: dist() for a in alphabet} for s in states})


@st.composite
def machines(draw):
    n = draw(st.integers(1, 3))
    states = tuple(f"q{i}" for i in range(n))
    outputs = {s: draw(st.sampled_from([0.0, 0.2, 0.7])) for s in states}
    trans = {s: {"a": draw(st.sampled_from(states))} for s in states}
    return RealMachine(states, ("a",), outputs, trans, c1=0.4, c2=0.4, mode="avg")


@given(st.one_of(dfas(), pas(), machines()))
def test_generated_systems_round_trip(system):
    text = serialize_system(system)
    assert yaml.safe_load(text)["kind"] == system.kind
    assert to_document(parse_system(text)) == to_document(system)
