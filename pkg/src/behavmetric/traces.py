"""Trace pseudometrics through determinization.

NFAs are determinized by the powerset construction, assembled from the
distributive law of P_f over 2 x (-)^A and the union. For probabilistic
automata the determinized system lives on belief states (distributions over
states), which are explored lazily word by word.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from .liftings import InputFn, MachineElem
from .metric import EPS
from .systems import DFA, NFA, PA
from .transport import FiniteDistribution

MAX_NFA_STATES = 20


def powerset_machine_law(S: frozenset) -> MachineElem:
    """lambda: P_f(2 x X^A) -> 2 x (P_f X)^A.

    The output is 1 if some element outputs 1; the a-successor is the set
    of all a-successors. The alphabet is read off the elements; the empty set
    needs no letters (callers pad it).
    """
    S = list(S)
    output = any(m.output for m in S)
    letters = S[0].successors.letters if S else ()
    for m in S:
        if m.successors.letters != letters:
            raise ValueError("machine elements have different alphabets")
    succ = tuple(frozenset(m.successors[a] for m in S) for a in letters)
    return MachineElem(output, InputFn(letters, succ))


@dataclass(frozen=True)
class DeterminizedNFA:
    subsets: tuple
    alphabet: tuple
    accepting: frozenset
    transitions: dict

    def as_dfa(self, c: float = 0.5) -> DFA:
        """The subset automaton as a DFA whose states are the subsets."""
        return DFA(self.subsets, self.alphabet, self.accepting, self.transitions, c=c)


def _coalgebra(nfa: NFA, x) -> MachineElem:
    row = nfa.transitions[x]
    return MachineElem(x in nfa.accepting, InputFn(nfa.alphabet, tuple(row[a] for a in nfa.alphabet)))


def determinized_step(nfa: NFA, S: frozenset) -> tuple[bool, dict]:
    """c#(S) = F mu (lambda (T c (S))): output and per-letter successor subset."""
    image = frozenset(_coalgebra(nfa, x) for x in S)            # T c
    law = powerset_machine_law(image)                             # lambda
    if not S:
        return False, {a: frozenset() for a in nfa.alphabet}
    nxt = {a: frozenset().union(*law.successors[a]) for a in nfa.alphabet}   # F mu
    return bool(law.output), nxt


def determinize_nfa(nfa: NFA) -> DeterminizedNFA:
    """Subset construction restricted to subsets reachable from singletons."""
    if len(nfa.states) > MAX_NFA_STATES:
        raise ValueError(f"determinization is limited to {MAX_NFA_STATES} states")
    start = [frozenset([x]) for x in nfa.states]
    seen = list(dict.fromkeys(start))
    index = set(seen)
    accepting = set()
    transitions = {}
    queue = deque(seen)
    while queue:
        S = queue.popleft()
        out, nxt = determinized_step(nfa, S)
        if out:
            accepting.add(S)
        transitions[S] = nxt
        for T in nxt.values():
            if T not in index:
                index.add(T)
                seen.append(T)
                queue.append(T)
    return DeterminizedNFA(tuple(seen), nfa.alphabet, frozenset(accepting), transitions)


def nfa_distinguishing_word(nfa: NFA, x, y) -> tuple | None:
    """Shortest word accepted from exactly one of x, y (BFS on subset pairs)."""
    det = determinize_nfa(nfa)
    start = (frozenset([x]), frozenset([y]))
    parent = {start: None}
    queue = deque([start])
    while queue:
        S, T = queue.popleft()
        if (S in det.accepting) != (T in det.accepting):
            word = []
            node = (S, T)
            while parent[node] is not None:
                node, a = parent[node]
                word.append(a)
            return tuple(reversed(word))
        for a in det.alphabet:
            nxt = (det.transitions[S][a], det.transitions[T][a])
            if nxt not in parent:
                parent[nxt] = ((S, T), a)
                queue.append(nxt)
    return None


def trace_metric_nfa(nfa: NFA, x, y, c: float | None = None) -> float:
    c = nfa.c if c is None else c
    if not 0 < c < 1:
        raise ValueError("the trace distance needs 0 < c < 1")
    word = nfa_distinguishing_word(nfa, x, y)
    return 0.0 if word is None else c ** len(word)


# ---------------------------------------------------------------------------
# probabilistic automata


def pa_belief_step(pa: PA, b: FiniteDistribution, a) -> tuple[float, FiniteDistribution]:
    """Output of the belief b and its successor belief under letter a."""
    if a not in pa.alphabet:
        raise ValueError(f"letter {a!r} not in the alphabet")
    output = math.fsum(w * pa.outputs[x] for x, w in b.items())
    nxt: dict = {}
    for x, w in b.items():
        for y, p in pa.transitions[x][a].items():
            nxt[y] = nxt.get(y, 0.0) + w * p
    total = math.fsum(nxt.values())
    return output, FiniteDistribution.from_dict({y: v / total for y, v in nxt.items()})


def pa_trace_depth(c1: float, c2: float, tol: float) -> int:
    """Smallest k with c1 * c2**(k+1) / (1 - c2) <= tol."""
    k = 0
    while c1 * c2 ** (k + 1) / (1 - c2) > tol:
        k += 1
    return k


def _pa_matrices(pa: PA):
    idx = {s: i for i, s in enumerate(pa.states)}
    n = len(pa.states)
    out = np.array([pa.outputs[s] for s in pa.states])
    mats = []
    for a in pa.alphabet:
        M = np.zeros((n, n))
        for s in pa.states:
            for t, p in pa.transitions[s][a].items():
                M[idx[s], idx[t]] += p
        mats.append(M)
    return idx, out, mats


def trace_metric_pa(pa: PA, x, y, c1: float | None = None, c2: float | None = None,
                    tol: float = 1e-8, max_pairs: int = 1 << 21) -> float:
    """c1 * sum over words w of (c2/|A|)^|w| |[[x]](w) - [[y]](w)|, within tol.

    Words are explored breadth first up to the depth given by the tail bound.
    Pairs of belief states that coincide up to a 1e-12 quantum are merged and
    carry a multiplicity, for as long as merging keeps shrinking the frontier.
    """
    c1 = pa.c1 if c1 is None else c1
    c2 = pa.c2 if c2 is None else c2
    if not (0 < c1 < 1 and 0 < c2 < 1 and c1 + c2 <= 1 + EPS):
        raise ValueError("need c1, c2 in ]0, 1[ with c1 + c2 <= 1")
    if tol <= 0:
        raise ValueError("tol must be positive")
    if x == y:
        return 0.0
    idx, out, mats = _pa_matrices(pa)
    n = len(pa.states)
    k = pa_trace_depth(c1, c2, tol)
    bx = np.zeros((1, n))
    by = np.zeros((1, n))
    bx[0, idx[x]] = 1.0
    by[0, idx[y]] = 1.0
    mult = np.ones(1)
    dedupe = True
    weight = c2 / len(pa.alphabet)
    total = 0.0
    for depth in range(k + 1):
        diff = np.abs(bx @ out - by @ out)
        total += weight ** depth * float(mult @ diff)
        if depth == k:
            break
        bx = np.concatenate([bx @ M for M in mats])
        by = np.concatenate([by @ M for M in mats])
        mult = np.tile(mult, len(mats))
        if dedupe:
            key = np.ascontiguousarray(np.round(np.hstack([bx, by]) * 1e12))
            key = key.view(np.dtype((np.void, key.itemsize * key.shape[1]))).ravel()
            _, first, inverse = np.unique(key, return_index=True, return_inverse=True)
            # merging is only a speedup; stop paying for it once it stops paying off
            dedupe = len(first) < 0.75 * len(key)
            mult = np.bincount(inverse.ravel(), weights=mult)
            bx, by = bx[first], by[first]
        if len(bx) > max_pairs:
            raise ValueError(f"belief-state pairs exceed the cap of {max_pairs}")
    return c1 * total
