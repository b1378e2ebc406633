"""Least fixed points d = lifted(d) o (c x c) by Kleene iteration from 0."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Iterator

import numpy as np

from .liftings import (CoproductElem, EvaluationSpec, InputFn, MachineElem, Pair, hausdorff,
                       lift_coproduct, lift_machine, lift_product, wasserstein_distribution)
from .metric import EPS, PseudometricMatrix, discrete_distance, euclid, sup_norm_diff
from .systems import DFA, DONE, MTS, PTS, RealMachine


@dataclass(frozen=True)
class FixpointConfig:
    tolerance: float = 1e-9
    max_iterations: int = 10000
    record_trace: bool = False

    def __post_init__(self):
        if not self.tolerance >= EPS:
            raise ValueError(f"tolerance must be at least {EPS}")
        if int(self.max_iterations) != self.max_iterations or self.max_iterations < 1:
            raise ValueError("max_iterations must be a positive integer")


@dataclass(frozen=True)
class FixpointResult:
    metric: PseudometricMatrix
    iterations: int
    converged: bool
    final_delta: float
    trace: tuple | None = None


def _pts_step(system: PTS) -> Callable[[PseudometricMatrix], Callable]:
    # states embed on the left of X + 1, the terminal symbol on the right
    ext = system.states + (DONE,)
    tag = {s: CoproductElem(1, s) for s in system.states}
    tag[DONE] = CoproductElem(2, DONE)
    singleton = PseudometricMatrix.zero((DONE,), system.top)
    rows = {s: system.transitions[s] for s in system.states}

    def step(d):
        scaled = d.scaled(system.c)
        dhat = PseudometricMatrix.from_function(
            ext, lambda a, b: lift_coproduct(scaled, singleton, tag[a], tag[b], system.top), system.top)
        return lambda x, y: wasserstein_distribution(dhat, rows[x], rows[y])
    return step


def _machine_step(system, spec: EvaluationSpec, dB, outputs) -> Callable:
    elems = {s: MachineElem(outputs[s], InputFn.from_dict(system.transitions[s])) for s in system.states}

    def step(d):
        return lambda x, y: lift_machine(dB, d, elems[x], elems[y], spec)
    return step


def _mts_step(system: MTS) -> Callable:
    props = system.propositions
    spec = EvaluationSpec("product", top=system.top, mode="max")
    valuations = {s: tuple(sorted(system.valuation[s].items())) for s in system.states}

    def propositional(v1, v2):
        # the n-ary categorical product of the proposition spaces
        return max((props[r](m1, m2) for (r, m1), (_, m2) in zip(v1, v2)), default=0.0)

    elems = {s: Pair(valuations[s], system.transitions[s]) for s in system.states}

    def step(d):
        succ = lambda S1, S2: hausdorff(d, S1, S2)
        return lambda x, y: lift_product(propositional, succ, elems[x], elems[y], spec)
    return step


def step_function(system) -> Callable[[PseudometricMatrix], Callable]:
    """Return d -> (x, y -> lifted(d)(c(x), c(y))) for a supported system."""
    if isinstance(system, PTS):
        return _pts_step(system)
    if isinstance(system, DFA):
        spec = EvaluationSpec("machine", top=system.top, mode="max", c1=1.0, c2=system.c)
        outputs = {s: s in system.accepting for s in system.states}
        return _machine_step(system, spec, discrete_distance(system.top), outputs)
    if isinstance(system, RealMachine):
        spec = EvaluationSpec("machine", top=system.top, mode=system.mode, c1=system.c1, c2=system.c2)
        return _machine_step(system, spec, euclid, system.outputs)
    if isinstance(system, MTS):
        return _mts_step(system)
    raise ValueError(f"no bisimulation lifting registered for kind {getattr(system, 'kind', system)!r}")


def apply_step(system, d: PseudometricMatrix, step=None) -> PseudometricMatrix:
    """One Jacobi sweep: every pair is evaluated against the frozen d."""
    pair_fn = (step or step_function(system))(d)
    states = system.states
    n = len(states)
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = pair_fn(states[i], states[j])
    return PseudometricMatrix(states, out, system.top)


def kleene_iterates(system) -> Iterator[PseudometricMatrix]:
    """d_0 = 0, d_1, d_2, ... (infinite generator)."""
    step = step_function(system)
    d = PseudometricMatrix.zero(system.states, system.top)
    while True:
        yield d
        d = apply_step(system, d, step)


def bisim_metric(system, config: FixpointConfig = FixpointConfig()) -> FixpointResult:
    """Iterate until the sup-norm change is within tolerance.

    Non-convergence is reported through ``converged=False``; the last
    iterate is still returned.
    """
    iterates = kleene_iterates(system)
    d = next(iterates)
    deltas = []
    delta = math.inf
    iterations = 0
    converged = False
    while iterations < config.max_iterations:
        nxt = next(iterates)
        iterations += 1
        delta = sup_norm_diff(d, nxt)
        deltas.append(delta)
        d = nxt
        if delta <= config.tolerance:
            converged = True
            break
    return FixpointResult(d, iterations, converged, delta, tuple(deltas) if config.record_trace else None)


def shortest_distinguishing_word(dfa: DFA, x, y) -> tuple | None:
    """Breadth-first search on the product automaton from (x, y)."""
    start = (x, y)
    parent = {start: None}
    queue = deque([start])
    while queue:
        p, q = queue.popleft()
        if (p in dfa.accepting) != (q in dfa.accepting):
            word = []
            node = (p, q)
            while parent[node] is not None:
                node, a = parent[node]
                word.append(a)
            return tuple(reversed(word))
        for a in dfa.alphabet:
            nxt = (dfa.transitions[p][a], dfa.transitions[q][a])
            if nxt not in parent:
                parent[nxt] = ((p, q), a)
                queue.append(nxt)
    return None


def dfa_distance_closed_form(dfa: DFA, x, y, c: float | None = None) -> float:
    """c ** n for the shortest distinguishing word length n, 0 if none."""
    c = dfa.c if c is None else c
    if not 0 < c < 1:
        raise ValueError("the closed form needs 0 < c < 1")
    word = shortest_distinguishing_word(dfa, x, y)
    return 0.0 if word is None else c ** len(word)
