"""Brute-force oracles and sampled property checks.

Every check draws its instances from a seeded generator, so a (seed, budget)
pair always produces the same report.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .liftings import (CoproductElem, EvaluationSpec, InputFn, MachineElem, Pair, functor_ops,
                       grid_kantorovich, hausdorff, lift_machine, squaring_wasserstein,
                       wasserstein_distribution)
from .metric import EPS, INF, PseudometricMatrix, check_axioms, discrete_distance, euclid, sup_join
from .traces import powerset_machine_law
from .transport import FiniteDistribution, ScaleError, enumerate_couplings_small, solve_transport

DEFAULT_SEED = 42
DEFAULT_BUDGET = 200


@dataclass(frozen=True)
class Violation:
    instance: str
    relation: str
    observed: tuple


@dataclass
class CheckReport:
    name: str
    instances: int = 0
    violations: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations

    def add(self, instance, relation: str, *observed) -> None:
        self.violations.append(Violation(repr(instance), relation, tuple(observed)))

    def to_dict(self, limit: int = 10) -> dict:
        return {
            "check": self.name,
            "passed": self.passed,
            "instances": self.instances,
            "violation_count": len(self.violations),
            "violations": [
                {"instance": v.instance, "relation": v.relation, "observed": list(v.observed)}
                for v in self.violations[:limit]
            ],
        }


# ---------------------------------------------------------------------------
# random instances


def random_pseudometric(rng: np.random.Generator, carrier: Sequence, top: float = 1.0,
                        h: float = 0.05, zero_prob: float = 0.15, inf_prob: float = 0.0,
                        strict: bool = False) -> PseudometricMatrix:
    """A pseudometric with entries on the grid h, 2h, ... (closed under paths).

    With ``strict`` no off-diagonal entry is zero, so the result is a metric.
    With top = inf and ``inf_prob`` > 0 the carrier may split into two
    clusters at infinite distance.
    """
    n = len(carrier)
    unit = top if not math.isinf(top) else 1.0
    k = int(round(unit / h))
    W = h * rng.integers(1, k + 1, size=(n, n)).astype(float)
    if not strict:
        W[rng.random((n, n)) < zero_prob] = 0.0
    W = np.minimum(W, W.T)
    np.fill_diagonal(W, 0.0)
    for m in range(n):
        W = np.minimum(W, W[:, m:m + 1] + W[m:m + 1, :])
    W = np.round(W / h) * h
    if math.isinf(top) and inf_prob > 0 and rng.random() < inf_prob:
        side = rng.integers(0, 2, size=n)
        W[side[:, None] != side[None, :]] = INF
    return PseudometricMatrix(tuple(carrier), np.minimum(W, top), top)


def _grid_weights(rng, k: int, h: float) -> list:
    units = int(round(1 / h))
    cuts = sorted(rng.choice(np.arange(1, units), size=k - 1, replace=False)) if k > 1 else []
    parts = np.diff([0, *cuts, units])
    return [p * h for p in parts]


def random_distribution(rng, pool: Sequence, h: float = 0.05, max_support: int = 3) -> FiniteDistribution:
    k = int(rng.integers(1, min(max_support, len(pool)) + 1))
    pts = [pool[i] for i in rng.choice(len(pool), size=k, replace=False)]
    return FiniteDistribution(tuple(pts), tuple(_grid_weights(rng, k, h)))


def random_subset(rng, pool: Sequence, max_size: int = 3, empty_prob: float = 0.1) -> frozenset:
    if rng.random() < empty_prob:
        return frozenset()
    k = int(rng.integers(1, min(max_size, len(pool)) + 1))
    return frozenset(pool[i] for i in rng.choice(len(pool), size=k, replace=False))


def _pick(rng, pool):
    return pool[int(rng.integers(len(pool)))]


def random_input(rng, pool, alphabet=("a", "b")) -> InputFn:
    return InputFn(tuple(alphabet), tuple(_pick(rng, pool) for _ in alphabet))


def sample_element(spec: EvaluationSpec, rng, pools: Sequence[Sequence], h: float = 0.05,
                   alphabet: Sequence = ("a", "b")):
    """A random element of F over the given pools (one pool per argument)."""
    f = spec.functor
    if f == "distribution":
        return random_distribution(rng, pools[0], h)
    if f == "powerset":
        return random_subset(rng, pools[0])
    if f == "input":
        return random_input(rng, pools[0], alphabet)
    if f == "product":
        return Pair(_pick(rng, pools[0]), _pick(rng, pools[1]))
    if f == "coproduct":
        side = int(rng.integers(1, 3))
        return CoproductElem(side, _pick(rng, pools[side - 1]))
    if f == "squaring":
        return Pair(_pick(rng, pools[0]), _pick(rng, pools[0]))
    if f == "machine":
        return MachineElem(_pick(rng, pools[0]), random_input(rng, pools[1], alphabet))
    raise ValueError(f"no sampler for {f}")


def _carriers(arity: int, size: int = 4) -> list:
    names = "xyz"
    return [tuple(f"{names[k]}{i}" for i in range(size)) for k in range(arity)]


def _alphabet_for(spec: EvaluationSpec, for_grid: bool) -> tuple:
    # keep the number of relevant states small enough for grid enumeration
    if spec.functor == "machine" and for_grid:
        return ("a",)
    return ("a", "b")


# ---------------------------------------------------------------------------
# brute-force oracles


def brute_kantorovich(spec: EvaluationSpec, ds: Sequence, t1, t2, h: float,
                      bound: float | None = None) -> float:
    """Grid Kantorovich value; within 2h below the true supremum."""
    if math.isinf(spec.top) and bound is None and spec.functor not in ("squaring", "input", "machine"):
        raise ValueError("grid enumeration needs a finite top or an explicit bound")
    return grid_kantorovich(spec, ds, t1, t2, h, bound=bound)


def brute_wasserstein(spec: EvaluationSpec, ds: Sequence, t1, t2, h: float | None = None) -> float:
    """Exact minimum of ev(F d(t)) over enumerated couplings; top if none."""
    ops = functor_ops(spec)
    best = INF
    found = False
    for t in ops.couplings(t1, t2, h):
        found = True
        best = min(best, ops.coupling_cost(ds, t))
    return best if found else spec.top


# ---------------------------------------------------------------------------
# well-behavedness


def _value_grid(top: float) -> list:
    unit = top if not math.isinf(top) else 1.0
    vals = [0.0, 0.25 * unit, 0.5 * unit, unit]
    if math.isinf(top):
        vals += [2.0, INF]
    return vals


def _enumerate_elements(spec: EvaluationSpec, G: Sequence) -> list:
    """Every element of F(G) of small shape, for the exact W3 test."""
    f = spec.functor
    letters = ("a", "b")
    if f == "distribution":
        out = [FiniteDistribution.dirac(g) for g in G]
        for g1, g2 in itertools.combinations(G, 2):
            for w in (0.25, 0.5, 0.75):
                out.append(FiniteDistribution((g1, g2), (w, 1 - w)))
        return out
    if f == "powerset":
        return [frozenset(c) for r in range(len(G) + 1) for c in itertools.combinations(G, r)]
    if f == "input":
        return [InputFn(letters, ts) for ts in itertools.product(G, repeat=2)]
    if f in ("product", "squaring"):
        return [Pair(a, b) for a in G for b in G]
    if f == "coproduct":
        return [CoproductElem(s, g) for s in (1, 2) for g in G]
    if f == "machine":
        return [MachineElem(o, InputFn(letters, ts)) for o in G for ts in itertools.product(G, repeat=2)]
    raise ValueError(f"no element enumeration for {f}")


def _named_w2(spec: EvaluationSpec) -> list:
    if spec.functor == "powerset":
        return [frozenset({(0.0, 1.0), (1.0, 1.0)})]
    return []


def _random_fn(rng, pool, values):
    return {x: _pick(rng, values) for x in pool}


def check_well_behaved(spec: EvaluationSpec, budget: int = DEFAULT_BUDGET,
                       seed: int = DEFAULT_SEED) -> CheckReport:
    """Sample W1 and W2, enumerate W3."""
    ops = functor_ops(spec)
    rng = np.random.default_rng(seed)
    report = CheckReport(f"well-behaved:{spec.functor}-{spec.mode}")
    G = _value_grid(spec.top)
    finite_G = [g for g in G if not math.isinf(g)]
    arity = ops.arity

    # W1: f <= g pointwise implies ev(Ff t) <= ev(Fg t)
    pools = _carriers(arity)
    for _ in range(budget):
        t = sample_element(spec, rng, pools)
        fs, gs = [], []
        for pool in pools:
            f = _random_fn(rng, pool, G)
            g = {x: _pick(rng, [v for v in G if v >= f[x]]) for x in pool}
            fs.append(f.__getitem__)
            gs.append(g.__getitem__)
        lo, hi = ops.ev(ops.fmap(t, *fs)), ops.ev(ops.fmap(t, *gs))
        report.instances += 1
        if lo > hi + EPS:
            report.add(t, "W1: ev(Ff t) <= ev(Fg t)", lo, hi)

    # W2: d_e(ev F pi1 t, ev F pi2 t) <= ev F d_e t for t over pairs of reals
    pair_pool = [(a, b) for a in G for b in G]
    first = lambda p: p[0]
    second = lambda p: p[1]
    dist = lambda p: euclid(*p)
    samples = _named_w2(spec) + [sample_element(spec, rng, [pair_pool] * arity) for _ in range(budget)]
    for t in samples:
        left = euclid(ops.ev(ops.fmap(t, *[first] * arity)), ops.ev(ops.fmap(t, *[second] * arity)))
        right = ops.ev(ops.fmap(t, *[dist] * arity))
        report.instances += 1
        if left > right + EPS:
            report.add(t, "W2: d_e(ev F pi1 t, ev F pi2 t) <= ev F d_e t", left, right)

    # W3: ev(t) = 0 exactly on the image of F{0}
    for t in _enumerate_elements(spec, finite_G if spec.functor == "distribution" else G):
        zero = ops.ev(t) == 0.0
        report.instances += 1
        if zero != ops.zero_image(t):
            report.add(t, "W3: ev^-1[0] = F{0}", ops.ev(t), ops.zero_image(t))
    return report


# ---------------------------------------------------------------------------
# liftings: duality, comparison, axioms, monotonicity


def _instance(spec, rng, h, for_grid=True, inf_prob=0.0, strict=False):
    ops = functor_ops(spec)
    carriers = _carriers(ops.arity)
    ds = [random_pseudometric(rng, c, spec.top, h, inf_prob=inf_prob, strict=strict) for c in carriers]
    alphabet = _alphabet_for(spec, for_grid)
    t1 = sample_element(spec, rng, carriers, h, alphabet)
    if rng.random() < 0.1:
        t2 = t1
    else:
        t2 = sample_element(spec, rng, carriers, h, alphabet)
    return ops, ds, t1, t2


def _squaring_swap():
    d = PseudometricMatrix(("x1", "x2"), [[0.0, 0.5], [0.5, 0.0]], INF)
    return [d], Pair("x1", "x2"), Pair("x2", "x1")


def check_duality(spec: EvaluationSpec, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED,
                  h: float | None = None) -> CheckReport:
    """Grid Kantorovich vs closed-form Wasserstein, within 2h."""
    h = h or (spec.top if not math.isinf(spec.top) else 1.0) / 20
    rng = np.random.default_rng(seed)
    report = CheckReport(f"duality:{spec.functor}-{spec.mode}")
    named = []
    if spec.functor == "squaring":
        named.append(_squaring_swap())
    for k in range(len(named) + budget):
        if k < len(named):
            ds, t1, t2 = named[k]
            ops = functor_ops(spec)
        else:
            ops, ds, t1, t2 = _instance(spec, rng, h)
        K = brute_kantorovich(spec, ds, t1, t2, h)
        W = ops.wasserstein(ds, t1, t2)
        report.instances += 1
        if abs(K - W) > 2 * h + EPS:
            report.add((t1, t2), "|K - W| <= 2h", K, W)
    return report


def check_k_le_w(spec: EvaluationSpec, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED,
                 h: float | None = None) -> CheckReport:
    """brute_kantorovich <= brute_wasserstein + 2h."""
    h = h or (spec.top if not math.isinf(spec.top) else 1.0) / 20
    rng = np.random.default_rng(seed)
    report = CheckReport(f"k-le-w:{spec.functor}-{spec.mode}")
    for _ in range(budget):
        ops, ds, t1, t2 = _instance(spec, rng, h)
        K = brute_kantorovich(spec, ds, t1, t2, h)
        W = brute_wasserstein(spec, ds, t1, t2, h)
        report.instances += 1
        if K > W + 2 * h + EPS:
            report.add((t1, t2), "K <= W + 2h", K, W)
    return report


def _lifted_matrix(ops, ds, elems) -> PseudometricMatrix:
    n = len(elems)
    D = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i != j:
                D[i, j] = ops.wasserstein(ds, elems[i], elems[j])
    return PseudometricMatrix(tuple(range(n)), D, ops.spec.top)


def check_lifting_axioms(spec: EvaluationSpec, budget: int = DEFAULT_BUDGET,
                         seed: int = DEFAULT_SEED, size: int = 4) -> CheckReport:
    """The lifted distance over a sampled collection is a pseudometric."""
    rng = np.random.default_rng(seed)
    ops = functor_ops(spec)
    report = CheckReport(f"axioms:{spec.functor}-{spec.mode}")
    for _ in range(budget):
        carriers = _carriers(ops.arity)
        ds = [random_pseudometric(rng, c, spec.top, inf_prob=0.3) for c in carriers]
        elems = [sample_element(spec, rng, carriers) for _ in range(size)]
        D = _lifted_matrix(ops, ds, elems)
        report.instances += 1
        for v in check_axioms(D):
            report.add(elems, f"{v.axiom} on {v.states}", v.slack)
    return report


def check_monotonicity(spec: EvaluationSpec, budget: int = DEFAULT_BUDGET,
                       seed: int = DEFAULT_SEED) -> CheckReport:
    """d1 <= d2 implies lifted(d1) <= lifted(d2)."""
    rng = np.random.default_rng(seed)
    ops = functor_ops(spec)
    report = CheckReport(f"monotone:{spec.functor}-{spec.mode}")
    for _ in range(budget):
        carriers = _carriers(ops.arity)
        d1 = [random_pseudometric(rng, c, spec.top, inf_prob=0.3) for c in carriers]
        d2 = [sup_join([d, random_pseudometric(rng, c, spec.top, inf_prob=0.3)]) for d, c in zip(d1, carriers)]
        t1 = sample_element(spec, rng, carriers)
        t2 = sample_element(spec, rng, carriers)
        a, b = ops.wasserstein(d1, t1, t2), ops.wasserstein(d2, t1, t2)
        report.instances += 1
        if a > b + EPS:
            report.add((t1, t2), "lifted(d1) <= lifted(d2)", a, b)
    return report


def check_metric_preservation(spec: EvaluationSpec, budget: int = DEFAULT_BUDGET,
                              seed: int = DEFAULT_SEED, h: float = 0.05) -> CheckReport:
    """On a metric base, brute Wasserstein distance 0 only between equal elements."""
    if spec.functor not in ("distribution", "powerset"):
        raise ValueError("metric preservation is checked for distribution and powerset")
    rng = np.random.default_rng(seed)
    report = CheckReport(f"metric-preservation:{spec.functor}")
    for _ in range(budget):
        ops, ds, t1, t2 = _instance(spec, rng, h, strict=True)
        if spec.functor == "powerset" and (not t1 or not t2):
            t1, t2 = t1 or frozenset({"x0"}), t2 or frozenset({"x0"})
        W = brute_wasserstein(spec, ds, t1, t2, h)
        report.instances += 1
        if (W <= EPS) != (t1 == t2):
            report.add((t1, t2), "W = 0 iff equal", W, t1 == t2)
    return report


# ---------------------------------------------------------------------------
# compositionality


def _min_covering_cost(candidates: list, T1, T2, top: float) -> float:
    """Least theta such that candidates of cost <= theta cover T1 and T2.

    A composite coupling is any set of inner couplings whose projections
    together are exactly T1 and T2; its max-evaluation is the costliest
    member, so taking every candidate below a threshold is optimal.
    """
    T1, T2 = set(T1), set(T2)
    if not T1 and not T2:
        return 0.0
    covered1, covered2 = set(), set()
    for cost, a, b in sorted(candidates, key=lambda c: c[0]):
        covered1.add(a)
        covered2.add(b)
        if covered1 == T1 and covered2 == T2:
            return cost
    return top


def _brute_pfpf(d, T1, T2, top) -> float:
    cands = []
    for A in T1:
        for B in T2:
            for V in enumerate_couplings_small(A, B, "powerset"):
                cands.append((max((d(x, y) for x, y in V), default=0.0), A, B))
    return _min_covering_cost(cands, T1, T2, top)


def _brute_pfm2(d, T1, T2, c, top) -> float:
    cands = []
    for m1 in T1:
        for m2 in T2:
            if m1.output == m2.output:
                cost = c * max(d(x, y) for x, y in zip(m1.successors.targets, m2.successors.targets))
                cands.append((cost, m1, m2))
    return _min_covering_cost(cands, T1, T2, top)


def _brute_dfdf(d, T1: FiniteDistribution, T2: FiniteDistribution, h: float) -> float:
    # one inner grid coupling per outer pair suffices: the cost is linear in
    # the outer weights, so mixing inner couplings never beats the best one
    inner = {}
    for p in T1.support():
        for q in T2.support():
            inner[(p, q)] = min(
                sum(w * d(x, y) for (x, y), w in V.items())
                for V in enumerate_couplings_small(p, q, "distribution", h))
    best = INF
    for outer in enumerate_couplings_small(T1, T2, "distribution", h):
        best = min(best, sum(w * inner[pq] for pq, w in outer.items()))
    return best


def check_compositionality(pair: str, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED,
                           h: float = 0.05) -> CheckReport:
    """lifted(lifted(d)) against a brute-force lifting of the composite functor."""
    rng = np.random.default_rng(seed)
    report = CheckReport(f"compositionality:{pair}")
    X = ("x0", "x1", "x2")
    for _ in range(budget):
        if pair == "PfPf":
            d = random_pseudometric(rng, X, INF)
            T1 = frozenset(random_subset(rng, X, 2) for _ in range(int(rng.integers(0, 3))))
            T2 = frozenset(random_subset(rng, X, 2) for _ in range(int(rng.integers(0, 3))))
            inner = lambda A, B: hausdorff(d, A, B)
            rhs = hausdorff(inner, T1, T2, top=INF)
            lhs = _brute_pfpf(d, T1, T2, INF)
            tol = EPS
        elif pair == "DfDf":
            d = random_pseudometric(rng, X[:2], 1.0, h)
            T1 = _nested_distribution(rng, X[:2], h)
            T2 = _nested_distribution(rng, X[:2], h)
            inner = lambda p, q: wasserstein_distribution(d, p, q)
            rhs, _ = solve_transport(inner, T1, T2, top=1.0)
            lhs = _brute_dfdf(d, T1, T2, h)
            tol = 2 * h
        elif pair == "PfM2":
            c = 0.5
            d = random_pseudometric(rng, X, 1.0)
            alphabet = ("a", "b")[: int(rng.integers(1, 3))]
            T1 = frozenset(_machine2(rng, X, alphabet) for _ in range(int(rng.integers(0, 3))))
            T2 = frozenset(_machine2(rng, X, alphabet) for _ in range(int(rng.integers(0, 3))))
            spec = EvaluationSpec("machine", top=1.0, mode="max", c1=1.0, c2=c)
            m2 = lambda m1, m2: lift_machine(discrete_distance(1.0), d, m1, m2, spec)
            rhs = hausdorff(m2, T1, T2, top=1.0)
            lhs = _brute_pfm2(d, T1, T2, c, 1.0)
            tol = EPS
        else:
            raise ValueError(f"unsupported functor pair {pair!r}")
        report.instances += 1
        if abs(lhs - rhs) > tol:
            report.add((T1, T2), "lifted(lifted d) = lifted-of-composite d", lhs, rhs)
    return report


def _nested_distribution(rng, X, h) -> FiniteDistribution:
    k = int(rng.integers(1, 3))
    inner = []
    while len(inner) < k:
        p = random_distribution(rng, X, h, max_support=2)
        if p not in inner:
            inner.append(p)
    return FiniteDistribution(tuple(inner), tuple(_grid_weights(rng, k, h)))


def _machine2(rng, X, alphabet) -> MachineElem:
    return MachineElem(bool(rng.integers(0, 2)), random_input(rng, X, alphabet))


# ---------------------------------------------------------------------------
# monads and the distributive law


def check_monad_conditions(monad: str, budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED,
                           h: float = 0.05) -> CheckReport:
    """Unit is an isometry and multiplication is nonexpansive."""
    rng = np.random.default_rng(seed)
    report = CheckReport(f"monad:{monad}")
    X = ("x0", "x1", "x2", "x3")
    for _ in range(budget):
        if monad == "powerset":
            d = random_pseudometric(rng, X, INF, inf_prob=0.3)
            x, y = _pick(rng, X), _pick(rng, X)
            unit = hausdorff(d, {x}, {y})
            S = frozenset(random_subset(rng, X, 2) for _ in range(int(rng.integers(0, 3))))
            T = frozenset(random_subset(rng, X, 2) for _ in range(int(rng.integers(0, 3))))
            flat = hausdorff(d, frozenset().union(*S), frozenset().union(*T))
            nested = hausdorff(lambda A, B: hausdorff(d, A, B), S, T, top=INF)
        elif monad == "distribution":
            d = random_pseudometric(rng, X, 1.0, h)
            x, y = _pick(rng, X), _pick(rng, X)
            unit = wasserstein_distribution(d, FiniteDistribution.dirac(x), FiniteDistribution.dirac(y))
            S = _nested_distribution(rng, X, h)
            T = _nested_distribution(rng, X, h)
            flat = wasserstein_distribution(d, _flatten(S), _flatten(T))
            nested, _ = solve_transport(lambda p, q: wasserstein_distribution(d, p, q), S, T, top=1.0)
        else:
            raise ValueError(f"unsupported monad {monad!r}")
        report.instances += 2
        if abs(unit - d(x, y)) > EPS and not (math.isinf(unit) and math.isinf(d(x, y))):
            report.add((x, y), "lifted(d)(eta x, eta y) = d(x, y)", unit, d(x, y))
        if flat > nested + EPS:
            report.add((S, T), "lifted(d)(mu S, mu T) <= lifted(lifted d)(S, T)", flat, nested)
    return report


def _flatten(S: FiniteDistribution) -> FiniteDistribution:
    out: dict = {}
    for p, w in S.items():
        for x, v in p.items():
            out[x] = out.get(x, 0.0) + w * v
    return FiniteDistribution.from_dict(out)


def _law(S: frozenset, alphabet) -> MachineElem:
    m = powerset_machine_law(S)
    if not S:
        return MachineElem(False, InputFn(tuple(alphabet), tuple(frozenset() for _ in alphabet)))
    return m


def _brute_m2pf(d, m1: MachineElem, m2: MachineElem, c: float, top: float) -> float:
    """Brute Wasserstein for M2 P_f: couplings choose one set coupling per letter."""
    if m1.output != m2.output:
        return top
    worst = 0.0
    for A, B in zip(m1.successors.targets, m2.successors.targets):
        costs = [max((d(x, y) for x, y in V), default=0.0)
                 for V in enumerate_couplings_small(A, B, "powerset")]
        worst = max(worst, min(costs, default=top))
    return min(top, c * worst) if worst < top else top


def check_distlaw_nfa(budget: int = DEFAULT_BUDGET, seed: int = DEFAULT_SEED) -> CheckReport:
    """lambda: P_f(2 x X^A) -> 2 x (P_f X)^A is nonexpansive."""
    rng = np.random.default_rng(seed)
    report = CheckReport("distlaw:nfa")
    c = 0.5
    for _ in range(budget):
        X = ("x0", "x1", "x2")[: int(rng.integers(1, 4))]
        alphabet = ("a", "b")[: int(rng.integers(1, 3))]
        d = random_pseudometric(rng, X, 1.0)
        S1 = frozenset(_machine2(rng, X, alphabet) for _ in range(int(rng.integers(0, 4))))
        S2 = frozenset(_machine2(rng, X, alphabet) for _ in range(int(rng.integers(0, 4))))
        lhs = _brute_m2pf(d, _law(S1, alphabet), _law(S2, alphabet), c, 1.0)
        rhs = _brute_pfm2(d, S1, S2, c, 1.0)
        report.instances += 1
        if lhs > rhs + EPS:
            report.add((S1, S2), "lifted(d)(lambda S1, lambda S2) <= lifted(d)(S1, S2)", lhs, rhs)
    return report


# ---------------------------------------------------------------------------
# named checks

SHIPPED = {
    "distribution": EvaluationSpec("distribution", top=1.0),
    "powerset-max": EvaluationSpec("powerset", top=1.0, mode="max"),
    "input-max": EvaluationSpec("input", top=1.0, mode="max"),
    "input-avg": EvaluationSpec("input", top=1.0, mode="avg"),
    "input-sum": EvaluationSpec("input", top=INF, mode="sum"),
    "product-max": EvaluationSpec("product", top=1.0, mode="max", c1=0.5, c2=1.0),
    "product-pnorm": EvaluationSpec("product", top=1.0, mode="pnorm", c1=0.5, c2=0.5, p=2),
    "coproduct": EvaluationSpec("coproduct", top=1.0),
    "machine-max": EvaluationSpec("machine", top=1.0, mode="max", c1=1.0, c2=0.5),
    "machine-avg": EvaluationSpec("machine", top=1.0, mode="avg", c1=0.4, c2=0.4),
    "machine-sum": EvaluationSpec("machine", top=INF, mode="sum", c1=1.0, c2=0.5),
    "squaring": EvaluationSpec("squaring", top=INF),
}
BAD = {"powerset-min": EvaluationSpec("powerset", top=1.0, mode="min")}
DUALITY = ("distribution", "powerset-max", "input-max", "input-avg", "product-max",
           "product-pnorm", "coproduct")


def _registry() -> dict:
    checks: dict[str, Callable[[int, int], CheckReport]] = {}
    for name, spec in {**SHIPPED, **BAD}.items():
        checks[f"well-behaved:{name}"] = lambda s, b, spec=spec: check_well_behaved(spec, b, s)
    for name, spec in SHIPPED.items():
        checks[f"axioms:{name}"] = lambda s, b, spec=spec: check_lifting_axioms(spec, b, s)
        checks[f"monotone:{name}"] = lambda s, b, spec=spec: check_monotonicity(spec, b, s)
        checks[f"k-le-w:{name}"] = lambda s, b, spec=spec: check_k_le_w(spec, b, s)
    for name in DUALITY + ("squaring",):
        spec = SHIPPED[name]
        checks[f"duality:{name}"] = lambda s, b, spec=spec: check_duality(spec, b, s)
    for pair in ("PfPf", "DfDf", "PfM2"):
        checks[f"compositionality:{pair}"] = lambda s, b, pair=pair: check_compositionality(pair, b, s)
    for monad in ("powerset", "distribution"):
        checks[f"monad:{monad}"] = lambda s, b, monad=monad: check_monad_conditions(monad, b, s)
        checks[f"metric-preservation:{monad}"] = (
            lambda s, b, monad=monad: check_metric_preservation(SHIPPED[
                "distribution" if monad == "distribution" else "powerset-max"], b, s))
    checks["distlaw:nfa"] = lambda s, b: check_distlaw_nfa(b, s)
    return checks


CHECKS = _registry()


def run_check(name: str, seed: int = DEFAULT_SEED, budget: int = DEFAULT_BUDGET) -> CheckReport:
    if name not in CHECKS:
        raise KeyError(f"unknown check {name!r}")
    report = CHECKS[name](seed, budget)
    report.name = name
    return report
