"""Finite coalgebras and their text format.

Six kinds are supported: probabilistic transition systems with
termination, deterministic automata, real-output machines, metric
transition systems, nondeterministic automata and probabilistic automata.
Files are YAML documents; the grammar lives in ``docs/file-format.md``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from importlib import resources
from typing import ClassVar, Union

import numpy as np
import yaml

from .liftings import EvaluationSpec
from .metric import EPS, INF, PseudometricMatrix, check_axioms, euclid, parse_top
from .transport import FiniteDistribution

DONE = "DONE"
KINDS = ("pts", "dfa", "real-machine", "mts", "nfa", "pa")


class SystemFormatError(ValueError):
    """Malformed document: bad syntax, unknown keys or wrong shapes."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = f" (line {line}, column {column})" if line is not None else ""
        super().__init__(message + where)
        self.line = line
        self.column = column


class SystemValidationError(ValueError):
    """A well-formed document whose content breaks an invariant."""

    def __init__(self, rule: str, message: str):
        super().__init__(f"{rule}: {message}")
        self.rule = rule


def _fail(rule, message):
    raise SystemValidationError(rule, message)


def _check_states(states, reserved=()):
    if not states:
        _fail("states", "at least one state is required")
    if len(set(states)) != len(states):
        _fail("states", "duplicate state names")
    for s in states:
        if s in reserved:
            _fail("states", f"state name {s!r} is reserved")


def _check_rows(states, rows, what="transitions"):
    missing = [s for s in states if s not in rows]
    extra = [s for s in rows if s not in states]
    if missing:
        _fail(what, f"no row for state(s) {missing}")
    if extra:
        _fail(what, f"row(s) for unknown state(s) {extra}")


def _check_unit(value, what):
    if not (0.0 <= value <= 1.0):
        _fail("outputs", f"{what} = {value} is outside [0, 1]")


def _check_discount(c, what="c", open_top=False):
    ok = 0 < c < 1 if open_top else 0 < c <= 1
    if not ok:
        _fail("params", f"{what} = {c} out of range")


@dataclass(frozen=True)
class PTS:
    """x -> distribution over states and the terminal symbol DONE."""

    states: tuple
    transitions: dict
    c: float = 1.0
    top: float = 1.0
    eps: float | None = None
    description: str = ""
    kind: ClassVar[str] = "pts"

    def __post_init__(self):
        _check_states(self.states, reserved=(DONE,))
        _check_rows(self.states, self.transitions)
        _check_discount(self.c)
        targets = set(self.states) | {DONE}
        for s, dist in self.transitions.items():
            if dist.sub:
                _fail("row-sum", f"row {s!r} must be a proper distribution")
            for t in dist.support():
                if t not in targets:
                    _fail("transitions", f"row {s!r} moves to unknown state {t!r}")


@dataclass(frozen=True)
class DFA:
    states: tuple
    alphabet: tuple
    accepting: frozenset
    transitions: dict
    c: float = 0.5
    top: float = 1.0
    description: str = ""
    kind: ClassVar[str] = "dfa"

    def __post_init__(self):
        _check_states(self.states)
        _check_rows(self.states, self.transitions)
        _check_discount(self.c)
        if not set(self.accepting) <= set(self.states):
            _fail("accepting", "accepting states must be states")
        for s, row in self.transitions.items():
            if set(row) != set(self.alphabet):
                _fail("transitions", f"row {s!r} is not total on the alphabet")
            for a, t in row.items():
                if t not in self.states:
                    _fail("transitions", f"{s!r} --{a}--> unknown state {t!r}")


@dataclass(frozen=True)
class RealMachine:
    states: tuple
    alphabet: tuple
    outputs: dict
    transitions: dict
    c1: float = 0.5
    c2: float = 0.5
    mode: str = "avg"
    top: float = 1.0
    description: str = ""
    kind: ClassVar[str] = "real-machine"

    def __post_init__(self):
        _check_states(self.states)
        _check_rows(self.states, self.transitions)
        _check_rows(self.states, self.outputs, "outputs")
        try:
            EvaluationSpec("machine", top=self.top, mode=self.mode, c1=self.c1, c2=self.c2)
        except ValueError as exc:
            _fail("params", str(exc))
        for s, o in self.outputs.items():
            _check_unit(o, f"output of {s!r}")
        for s, row in self.transitions.items():
            if set(row) != set(self.alphabet):
                _fail("transitions", f"row {s!r} is not total on the alphabet")
            for a, t in row.items():
                if t not in self.states:
                    _fail("transitions", f"{s!r} --{a}--> unknown state {t!r}")


@dataclass(frozen=True)
class MTS:
    """States carry a valuation into finite metric spaces and a successor set."""

    states: tuple
    propositions: dict
    valuation: dict
    transitions: dict
    top: float = INF
    description: str = ""
    kind: ClassVar[str] = "mts"

    def __post_init__(self):
        _check_states(self.states)
        _check_rows(self.states, self.transitions)
        _check_rows(self.states, self.valuation, "valuation")
        for r, d in self.propositions.items():
            if not np.isfinite(d.entries).all():
                _fail("propositions", f"metric of {r!r} must be bounded")
            if check_axioms(d):
                _fail("propositions", f"table of {r!r} is not a pseudometric")
        for s, val in self.valuation.items():
            if set(val) != set(self.propositions):
                _fail("valuation", f"state {s!r} must value exactly the propositions")
            for r, m in val.items():
                if m not in self.propositions[r].carrier:
                    _fail("valuation", f"{m!r} is not an element of proposition {r!r}")
        for s, succ in self.transitions.items():
            bad = set(succ) - set(self.states)
            if bad:
                _fail("transitions", f"{s!r} has unknown successors {sorted(bad)}")


@dataclass(frozen=True)
class NFA:
    states: tuple
    alphabet: tuple
    accepting: frozenset
    transitions: dict
    c: float = 0.5
    top: float = 1.0
    description: str = ""
    kind: ClassVar[str] = "nfa"

    def __post_init__(self):
        _check_states(self.states)
        _check_rows(self.states, self.transitions)
        _check_discount(self.c)
        if not set(self.accepting) <= set(self.states):
            _fail("accepting", "accepting states must be states")
        for s, row in self.transitions.items():
            if set(row) != set(self.alphabet):
                _fail("transitions", f"row {s!r} must list every letter")
            for a, ts in row.items():
                bad = set(ts) - set(self.states)
                if bad:
                    _fail("transitions", f"{s!r} --{a}--> unknown states {sorted(bad)}")


@dataclass(frozen=True)
class PA:
    states: tuple
    alphabet: tuple
    outputs: dict
    transitions: dict
    c1: float = 0.4
    c2: float = 0.4
    top: float = 1.0
    description: str = ""
    kind: ClassVar[str] = "pa"

    def __post_init__(self):
        _check_states(self.states)
        _check_rows(self.states, self.transitions)
        _check_rows(self.states, self.outputs, "outputs")
        _check_discount(self.c1, "c1", open_top=True)
        _check_discount(self.c2, "c2", open_top=True)
        if self.c1 + self.c2 > 1 + EPS:
            _fail("params", "c1 + c2 must not exceed 1")
        for s, o in self.outputs.items():
            _check_unit(o, f"output of {s!r}")
        for s, row in self.transitions.items():
            if set(row) != set(self.alphabet):
                _fail("transitions", f"row {s!r} must list every letter")
            for a, dist in row.items():
                if dist.sub:
                    _fail("row-sum", f"{s!r} --{a}--> must be a proper distribution")
                bad = set(dist.support()) - set(self.states)
                if bad:
                    _fail("transitions", f"{s!r} --{a}--> unknown states {sorted(bad)}")


SystemSpec = Union[PTS, DFA, RealMachine, MTS, NFA, PA]


# ---------------------------------------------------------------------------
# parsing

_PARAMS = {
    "pts": {"c", "eps"},
    "dfa": {"c"},
    "nfa": {"c"},
    "real-machine": {"c1", "c2", "mode"},
    "pa": {"c1", "c2"},
    "mts": set(),
}
_KEYS = {
    "pts": {"states", "transitions"},
    "dfa": {"alphabet", "states", "accepting", "transitions"},
    "nfa": {"alphabet", "states", "accepting", "transitions"},
    "real-machine": {"alphabet", "states", "outputs", "transitions"},
    "pa": {"alphabet", "states", "outputs", "transitions"},
    "mts": {"states", "propositions", "valuation", "transitions"},
}
_COMMON = {"kind", "top", "params", "description"}


def _name(x) -> str:
    if isinstance(x, (dict, list)) or x is None:
        raise SystemFormatError(f"expected a name, got {x!r}")
    return str(x)


def _names(xs, what) -> tuple:
    if not isinstance(xs, list):
        raise SystemFormatError(f"{what} must be a list")
    return tuple(_name(x) for x in xs)


def _mapping(x, what) -> dict:
    if not isinstance(x, dict):
        raise SystemFormatError(f"{what} must be a mapping")
    return {_name(k): v for k, v in x.items()}


def _number(x, what) -> float:
    if isinstance(x, bool) or not isinstance(x, (int, float)):
        raise SystemFormatError(f"{what} must be a number, got {x!r}")
    return float(x)


def _distribution(x, what) -> FiniteDistribution:
    row = _mapping(x, what)
    weights = {k: _number(v, f"{what}[{k}]") for k, v in row.items()}
    mass = math.fsum(weights.values())
    if abs(mass - 1.0) > EPS:
        _fail("row-sum", f"{what} sums to {mass:.12g}, not 1")
    try:
        return FiniteDistribution.from_dict(weights)
    except ValueError as exc:
        _fail("row-sum", f"{what}: {exc}")


def _element(x):
    if isinstance(x, bool):
        raise SystemFormatError(f"bad proposition element {x!r}")
    if isinstance(x, (int, float)):
        return float(x)
    return _name(x)


def _proposition(name, body, top) -> PseudometricMatrix:
    body = _mapping(body, f"proposition {name!r}")
    keys = set(body)
    if keys == {"points"}:
        pts = [_number(p, f"point of {name!r}") for p in body["points"]]
        return PseudometricMatrix.from_function(pts, euclid, top)
    if keys == {"elements", "distances"}:
        elems = tuple(_element(e) for e in body["elements"])
        table = body["distances"]
        if not isinstance(table, list) or any(not isinstance(r, list) for r in table):
            raise SystemFormatError(f"distances of {name!r} must be a list of rows")
        rows = [[_number(v, f"distance in {name!r}") for v in r] for r in table]
        try:
            return PseudometricMatrix(elems, np.array(rows, dtype=float).reshape(len(rows), -1), top)
        except ValueError as exc:
            _fail("propositions", f"{name!r}: {exc}")
    raise SystemFormatError(
        f"proposition {name!r} needs either 'points' or 'elements' and 'distances', got {sorted(keys)}")


def _from_dict(doc: dict) -> SystemSpec:
    if not isinstance(doc, dict):
        raise SystemFormatError("a system document must be a mapping")
    kind = doc.get("kind")
    if kind not in KINDS:
        raise SystemFormatError(f"unknown kind {kind!r}; expected one of {', '.join(KINDS)}")
    unknown = set(doc) - _COMMON - _KEYS[kind]
    if unknown:
        raise SystemFormatError(f"unknown key(s) for kind {kind}: {sorted(unknown)}")
    missing = ({"top"} | _KEYS[kind]) - set(doc)
    if missing:
        raise SystemFormatError(f"missing key(s): {sorted(missing)}")
    try:
        top = parse_top(doc["top"])
    except ValueError as exc:
        _fail("top", str(exc))
    params = _mapping(doc.get("params") or {}, "params")
    bad = set(params) - _PARAMS[kind]
    if bad:
        raise SystemFormatError(f"unknown parameter(s) for kind {kind}: {sorted(bad)}")
    num = {k: _number(v, k) for k, v in params.items() if k != "mode"}
    desc = str(doc.get("description") or "")
    states = _names(doc["states"], "states")
    rows = _mapping(doc["transitions"], "transitions")

    if kind == "pts":
        trans = {s: _distribution(r, f"transitions[{s}]") for s, r in rows.items()}
        return PTS(states, trans, c=num.get("c", 1.0), top=top, eps=num.get("eps"), description=desc)

    alphabet = _names(doc.get("alphabet", []), "alphabet") if kind != "mts" else ()
    if kind in ("dfa", "nfa"):
        accepting = frozenset(_names(doc["accepting"], "accepting"))
        if kind == "dfa":
            trans = {s: {a: _name(t) for a, t in _mapping(r, f"transitions[{s}]").items()}
                     for s, r in rows.items()}
            return DFA(states, alphabet, accepting, trans, c=num.get("c", 0.5), top=top, description=desc)
        trans = {}
        for s, r in rows.items():
            row = {a: frozenset(_names(ts, f"transitions[{s}][{a}]"))
                   for a, ts in _mapping(r, f"transitions[{s}]").items()}
            for a in alphabet:
                row.setdefault(a, frozenset())
            trans[s] = row
        return NFA(states, alphabet, accepting, trans, c=num.get("c", 0.5), top=top, description=desc)

    if kind in ("real-machine", "pa"):
        outputs = {s: _number(o, f"outputs[{s}]") for s, o in _mapping(doc["outputs"], "outputs").items()}
        if kind == "real-machine":
            trans = {s: {a: _name(t) for a, t in _mapping(r, f"transitions[{s}]").items()}
                     for s, r in rows.items()}
            return RealMachine(states, alphabet, outputs, trans, c1=num.get("c1", 0.5),
                               c2=num.get("c2", 0.5), mode=str(params.get("mode", "avg")),
                               top=top, description=desc)
        trans = {s: {a: _distribution(t, f"transitions[{s}][{a}]")
                     for a, t in _mapping(r, f"transitions[{s}]").items()}
                 for s, r in rows.items()}
        return PA(states, alphabet, outputs, trans, c1=num.get("c1", 0.4), c2=num.get("c2", 0.4),
                  top=top, description=desc)

    props = {r: _proposition(r, body, top) for r, body in _mapping(doc["propositions"], "propositions").items()}
    valuation = {s: {r: _element(m) for r, m in _mapping(v, f"valuation[{s}]").items()}
                 for s, v in _mapping(doc["valuation"], "valuation").items()}
    succ = {s: frozenset(_names(ts, f"transitions[{s}]")) for s, ts in rows.items()}
    return MTS(states, props, valuation, succ, top=top, description=desc)


def parse_system(text: str) -> SystemSpec:
    """Parse and validate a system document."""
    try:
        doc = yaml.safe_load(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark or exc.context_mark
        line = mark.line + 1 if mark else None
        col = mark.column + 1 if mark else None
        raise SystemFormatError(f"syntax error: {exc.problem or exc}", line, col) from None
    except yaml.YAMLError as exc:
        raise SystemFormatError(f"syntax error: {exc}") from None
    return _from_dict(doc)


def load_system(path: str) -> SystemSpec:
    with open(path, encoding="utf-8") as fh:
        return parse_system(fh.read())


# ---------------------------------------------------------------------------
# serialization


def _top_out(top: float):
    return "inf" if math.isinf(top) else 1


def _dist_out(dist: FiniteDistribution) -> dict:
    return {str(k): w for k, w in dist.items()}


def to_document(system: SystemSpec) -> dict:
    doc = {"kind": system.kind, "top": _top_out(system.top)}
    if system.description:
        doc["description"] = system.description
    k = system.kind
    if k == "pts":
        params = {"c": system.c}
        if system.eps is not None:
            params["eps"] = system.eps
        doc["params"] = params
        doc["states"] = list(system.states)
        doc["transitions"] = {s: _dist_out(system.transitions[s]) for s in system.states}
    elif k in ("dfa", "nfa"):
        doc["params"] = {"c": system.c}
        doc["alphabet"] = list(system.alphabet)
        doc["states"] = list(system.states)
        doc["accepting"] = [s for s in system.states if s in system.accepting]
        if k == "dfa":
            doc["transitions"] = {s: dict(system.transitions[s]) for s in system.states}
        else:
            doc["transitions"] = {
                s: {a: [t for t in system.states if t in system.transitions[s][a]] for a in system.alphabet}
                for s in system.states}
    elif k in ("real-machine", "pa"):
        params = {"c1": system.c1, "c2": system.c2}
        if k == "real-machine":
            params["mode"] = system.mode
        doc["params"] = params
        doc["alphabet"] = list(system.alphabet)
        doc["states"] = list(system.states)
        doc["outputs"] = {s: system.outputs[s] for s in system.states}
        if k == "real-machine":
            doc["transitions"] = {s: dict(system.transitions[s]) for s in system.states}
        else:
            doc["transitions"] = {s: {a: _dist_out(system.transitions[s][a]) for a in system.alphabet}
                                  for s in system.states}
    else:
        doc["states"] = list(system.states)
        doc["propositions"] = {
            r: {"elements": list(d.carrier), "distances": d.entries.tolist()}
            for r, d in system.propositions.items()}
        doc["valuation"] = {s: dict(system.valuation[s]) for s in system.states}
        doc["transitions"] = {s: [t for t in system.states if t in system.transitions[s]]
                              for s in system.states}
    return doc


def serialize_system(system: SystemSpec) -> str:
    return yaml.safe_dump(to_document(system), sort_keys=False, default_flow_style=None, allow_unicode=True)


# ---------------------------------------------------------------------------
# fixtures

_FIXTURES = ("fig2-pts", "fig4-mts", "dfa-aa", "nfa-ab", "real-machine-small", "pa-small")


def builtin_text(name: str) -> str:
    if name not in _FIXTURES:
        raise KeyError(f"unknown example {name!r}; known: {', '.join(_FIXTURES)}")
    return resources.files("behavmetric").joinpath("fixtures").joinpath(f"{name}.yaml").read_text(encoding="utf-8")


def builtin_examples() -> dict:
    """Shipped fixtures by name, each parsed and validated."""
    return {name: parse_system(builtin_text(name)) for name in _FIXTURES}


def fig2_pts(c: float = 0.9, eps: float = 0.1) -> PTS:
    """The four-state example with a free perturbation eps of the x-row."""
    P = FiniteDistribution.from_dict
    return PTS(
        states=("x", "y", "u", "z"),
        transitions={
            "x": P({"u": 0.5 - eps, "z": 0.5 + eps}),
            "y": P({"u": 0.5, "z": 0.5}),
            "u": P({"u": 1.0}),
            "z": P({DONE: 1.0}),
        },
        c=c, eps=eps)
