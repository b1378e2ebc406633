"""Wasserstein and Kantorovich liftings for a fixed menu of finite functors.

Each functor comes with an evaluation function ev: F[0, top] -> [0, top].
The Wasserstein lifting minimises ev over couplings, the Kantorovich lifting
maximises the evaluated difference over nonexpansive test functions. Closed
forms are used where the two coincide; ``grid_kantorovich`` is the
brute-force route over grid-valued test functions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterator, Sequence

import numpy as np

from .metric import EPS, INF, check_value
from .transport import (FiniteDistribution, ScaleError, enumerate_couplings_small,
                        kantorovich_subdistribution, solve_dual, solve_transport)

Metric = Callable[[Hashable, Hashable], float]

FUNCTORS = ("distribution", "powerset", "input", "product", "coproduct", "squaring", "machine")
_MODES = {
    "distribution": ("expectation",),
    "powerset": ("max", "min"),
    "input": ("max", "sum", "avg"),
    "product": ("max", "pnorm"),
    "coproduct": ("codiagonal",),
    "squaring": ("sum",),
    "machine": ("max", "avg", "sum"),
}


@dataclass(frozen=True)
class EvaluationSpec:
    """A functor tag plus the parameters of its evaluation function.

    ``mode`` picks the table row: ``max``/``sum``/``avg`` for the input
    functor, ``max``/``pnorm`` for products, ``max``/``avg``/``sum`` for the
    machine bifunctor and ``max``/``min`` for the powerset (``min`` exists
    only to exhibit a badly behaved evaluation).
    """

    functor: str
    top: float = 1.0
    mode: str | None = None
    c1: float = 1.0
    c2: float = 1.0
    p: int = 1

    def __post_init__(self):
        if self.functor not in FUNCTORS:
            raise ValueError(f"unknown functor {self.functor!r}")
        mode = self.mode or _MODES[self.functor][0]
        if mode not in _MODES[self.functor]:
            raise ValueError(f"mode {mode!r} not available for {self.functor}")
        object.__setattr__(self, "mode", mode)
        top = float(self.top)
        object.__setattr__(self, "top", top)
        if not top > 0:
            raise ValueError("top must be positive")
        finite = not math.isinf(top)
        c1, c2 = self.c1, self.c2
        f = self.functor
        if f == "input":
            if mode == "sum" and finite:
                raise ValueError("input sum evaluation needs top = inf")
            if mode == "avg" and not finite:
                raise ValueError("input avg evaluation needs a finite top")
        if f == "squaring" and finite:
            raise ValueError("squaring sum evaluation needs top = inf")
        if f == "product":
            if mode == "max" or finite:
                if not (0 < c1 <= 1 and 0 < c2 <= 1):
                    raise ValueError("product weights must lie in ]0, 1]")
            elif not (c1 > 0 and c2 > 0):
                raise ValueError("product weights must be positive")
            if mode == "pnorm":
                if int(self.p) != self.p or self.p < 1:
                    raise ValueError("p must be a positive integer")
                if finite and c1 + c2 > 1 + EPS:
                    raise ValueError("p-norm with finite top needs c1 + c2 <= 1")
        if f == "machine":
            if mode == "sum":
                if finite:
                    raise ValueError("machine sum evaluation needs top = inf")
                if not (c1 > 0 and c2 > 0):
                    raise ValueError("machine weights must be positive")
            else:
                if not (0 < c1 <= 1 and 0 < c2 <= 1):
                    raise ValueError("machine weights must lie in ]0, 1]")
                if mode == "avg" and c1 + c2 > 1 + EPS:
                    raise ValueError("machine avg evaluation needs c1 + c2 <= 1")


# ---------------------------------------------------------------------------
# functor elements


@dataclass(frozen=True)
class InputFn:
    """A map from a finite alphabet to states, stored sorted by letter."""

    letters: tuple
    targets: tuple

    def __post_init__(self):
        if len(self.letters) != len(self.targets):
            raise ValueError("letters and targets differ in length")
        order = sorted(range(len(self.letters)), key=lambda k: str(self.letters[k]))
        object.__setattr__(self, "letters", tuple(self.letters[k] for k in order))
        object.__setattr__(self, "targets", tuple(self.targets[k] for k in order))

    @classmethod
    def from_dict(cls, mapping) -> "InputFn":
        return cls(tuple(mapping), tuple(mapping.values()))

    def __getitem__(self, a):
        return self.targets[self.letters.index(a)]

    def map(self, f: Callable) -> "InputFn":
        return InputFn(self.letters, tuple(f(x) for x in self.targets))

    def as_dict(self) -> dict:
        return dict(zip(self.letters, self.targets))


@dataclass(frozen=True)
class Pair:
    first: Hashable
    second: Hashable


SquarePair = Pair


@dataclass(frozen=True)
class CoproductElem:
    side: int
    value: Hashable

    def __post_init__(self):
        if self.side not in (1, 2):
            raise ValueError("coproduct side must be 1 or 2")


@dataclass(frozen=True)
class MachineElem:
    output: Hashable
    successors: InputFn


# ---------------------------------------------------------------------------
# closed forms


def _top(d, top):
    if top is not None:
        return float(top)
    return float(getattr(d, "top", INF))


def _lookup(d: Metric, x, y) -> float:
    try:
        return float(d(x, y))
    except KeyError as exc:
        raise ValueError(f"state {exc} not in the carrier of d") from None


def wasserstein_distribution(d: Metric, P1: FiniteDistribution, P2: FiniteDistribution,
                             top: float | None = None) -> float:
    top = _top(d, top)
    cost, _ = solve_transport(d, P1, P2, top=top)
    return cost if math.isinf(cost) else check_value(cost, top)


def kantorovich_distribution(d: Metric, P1: FiniteDistribution, P2: FiniteDistribution,
                             top: float | None = None) -> float:
    top = _top(d, top)
    if P1.sub or P2.sub:
        return check_value(kantorovich_subdistribution(d, P1, P2, top=top), top)
    value, _ = solve_dual(d, P1, P2, top=top)
    return check_value(value, top)


def hausdorff(d: Metric, S1, S2, top: float | None = None) -> float:
    """Hausdorff distance with max of nothing = 0 and min of nothing = top."""
    top = _top(d, top)
    S1, S2 = list(S1), list(S2)
    if not S1 and not S2:
        return 0.0
    if not S1 or not S2:
        return top
    left = max(min(_lookup(d, x, y) for y in S2) for x in S1)
    right = max(min(_lookup(d, x, y) for x in S1) for y in S2)
    return check_value(max(left, right), top)


def _aggregate(values: list, mode: str) -> float:
    if mode == "max":
        return max(values, default=0.0)
    if mode == "sum":
        return math.fsum(values) if not any(math.isinf(v) for v in values) else INF
    if mode == "avg":
        if not values:
            return 0.0
        return _aggregate(values, "sum") / len(values)
    raise ValueError(f"unknown aggregation {mode!r}")


def _check_alphabets(s1: InputFn, s2: InputFn) -> None:
    if s1.letters != s2.letters:
        raise ValueError("input functions have different alphabets")


def lift_input(d: Metric, s1: InputFn, s2: InputFn, mode: str = "max",
               top: float | None = None) -> float:
    top = _top(d, top)
    EvaluationSpec("input", top=top, mode=mode)
    _check_alphabets(s1, s2)
    dists = [_lookup(d, x, y) for x, y in zip(s1.targets, s2.targets)]
    return check_value(_aggregate(dists, mode), top)


def _ev_product(a: float, b: float, spec: EvaluationSpec) -> float:
    if spec.mode == "max":
        return max(spec.c1 * a, spec.c2 * b)
    if math.isinf(a) or math.isinf(b):
        return INF
    return (spec.c1 * a ** spec.p + spec.c2 * b ** spec.p) ** (1.0 / spec.p)


def lift_product(d1: Metric, d2: Metric, x: Pair, y: Pair, spec: EvaluationSpec) -> float:
    if spec.functor != "product":
        raise ValueError("lift_product needs a product evaluation")
    value = _ev_product(_lookup(d1, x.first, y.first), _lookup(d2, x.second, y.second), spec)
    return check_value(value, spec.top)


def lift_coproduct(d1: Metric, d2: Metric, t1: CoproductElem, t2: CoproductElem,
                   top: float = 1.0) -> float:
    if t1.side != t2.side:
        return float(top)
    d = d1 if t1.side == 1 else d2
    return check_value(_lookup(d, t1.value, t2.value), top)


def _ev_machine(o: float, succ: list, spec: EvaluationSpec) -> float:
    if spec.mode == "max":
        return max(spec.c1 * o, spec.c2 * max(succ, default=0.0))
    agg = _aggregate(succ, "avg" if spec.mode == "avg" else "sum")
    if math.isinf(o) or math.isinf(agg):
        return INF
    return spec.c1 * o + spec.c2 * agg


def lift_machine(dB: Metric, d: Metric, t1: MachineElem, t2: MachineElem,
                 spec: EvaluationSpec) -> float:
    """ev_M(dB(o1, o2), a -> d(s1(a), s2(a))) for the chosen table row."""
    if spec.functor != "machine":
        raise ValueError("lift_machine needs a machine evaluation")
    _check_alphabets(t1.successors, t2.successors)
    o = _lookup(dB, t1.output, t2.output)
    succ = [_lookup(d, x, y) for x, y in zip(t1.successors.targets, t2.successors.targets)]
    return check_value(_ev_machine(o, succ, spec), spec.top)


def squaring_wasserstein(d: Metric, t1: Pair, t2: Pair) -> float:
    """The unique coupling of the squaring functor evaluated by the sum."""
    return _lookup(d, t1.first, t2.first) + _lookup(d, t1.second, t2.second)


# ---------------------------------------------------------------------------
# generic per-functor operations


class FunctorOps:
    """Functor action, evaluation and couplings for one EvaluationSpec.

    Bifunctors take one function or metric per argument; endofunctors one.
    """

    arity = 1

    def __init__(self, spec: EvaluationSpec):
        self.spec = spec

    def fmap(self, t, *fs):
        raise NotImplementedError

    def states(self, t) -> tuple:
        """Per argument, the states occurring in t."""
        raise NotImplementedError

    def ev_batch(self, t, values: Sequence[dict]) -> np.ndarray:
        """Evaluate F f(t) for a batch of test functions f.

        values[k] maps each state of argument k to an array of N values.
        """
        raise NotImplementedError

    def ev(self, t) -> float:
        """Evaluate an element of F[0, top] whose states are reals."""
        values = [{x: np.array([float(x)]) for x in xs} for xs in self.states(t)]
        return float(self.ev_batch(t, values)[0])

    def couplings(self, t1, t2, h: float | None = None) -> Iterator:
        raise NotImplementedError

    def coupling_cost(self, ds: Sequence[Metric], t) -> float:
        """ev(F d(t)) for a coupling t whose states are pairs."""
        fs = [(lambda pair, d=d: float(d(*pair))) for d in ds]
        return self.ev(self.fmap(t, *fs))

    def wasserstein(self, ds: Sequence[Metric], t1, t2) -> float:
        raise NotImplementedError

    def kantorovich(self, ds: Sequence[Metric], t1, t2) -> float:
        raise NotImplementedError(f"no closed Kantorovich form for {self.spec.functor}")

    def zero_image(self, t) -> bool:
        """Whether t lies in the image of F{0} (all states are 0)."""
        return all(x == 0 for xs in self.states(t) for x in xs)


class DistributionOps(FunctorOps):
    def fmap(self, t, f):
        return t.pushforward(f)

    def states(self, t):
        return (t.support(),)

    def ev_batch(self, t, values):
        (vals,) = values
        n = len(next(iter(vals.values()))) if vals else 1
        out = np.zeros(n)
        for x, w in t.items():
            out = out + w * vals[x]
        return out

    def couplings(self, t1, t2, h=None):
        return enumerate_couplings_small(t1, t2, "distribution", h)

    def wasserstein(self, ds, t1, t2):
        return wasserstein_distribution(ds[0], t1, t2, top=self.spec.top)

    def kantorovich(self, ds, t1, t2):
        return kantorovich_distribution(ds[0], t1, t2, top=self.spec.top)


class PowersetOps(FunctorOps):
    def fmap(self, t, f):
        return frozenset(f(x) for x in t)

    def states(self, t):
        return (tuple(sorted(t, key=repr)),)

    def ev_batch(self, t, values):
        (vals,) = values
        n = len(next(iter(vals.values()))) if vals else 1
        if not t:
            return np.full(n, 0.0 if self.spec.mode == "max" else self.spec.top)
        stack = np.stack([vals[x] for x in t])
        return stack.max(axis=0) if self.spec.mode == "max" else stack.min(axis=0)

    def couplings(self, t1, t2, h=None):
        return enumerate_couplings_small(t1, t2, "powerset")

    def wasserstein(self, ds, t1, t2):
        if self.spec.mode == "max":
            return hausdorff(ds[0], t1, t2, top=self.spec.top)
        costs = [self.coupling_cost(ds, T) for T in self.couplings(t1, t2)]
        return min(costs, default=self.spec.top)

    def kantorovich(self, ds, t1, t2):
        if self.spec.mode == "max":
            return hausdorff(ds[0], t1, t2, top=self.spec.top)
        return super().kantorovich(ds, t1, t2)


class InputOps(FunctorOps):
    def fmap(self, t, f):
        return t.map(f)

    def states(self, t):
        return (t.targets,)

    def ev_batch(self, t, values):
        (vals,) = values
        if not t.targets:
            return np.zeros(1)
        stack = np.stack([vals[x] for x in t.targets])
        if self.spec.mode == "max":
            return stack.max(axis=0)
        total = stack.sum(axis=0)
        return total if self.spec.mode == "sum" else total / len(t.targets)

    def couplings(self, t1, t2, h=None):
        _check_alphabets(t1, t2)
        yield InputFn(t1.letters, tuple(zip(t1.targets, t2.targets)))

    def wasserstein(self, ds, t1, t2):
        return lift_input(ds[0], t1, t2, self.spec.mode, top=self.spec.top)

    def kantorovich(self, ds, t1, t2):
        # a single test function sees a word only up to permutation of its
        # letters, so swapped targets are invisible once |A| >= 2
        if len(t1.letters) <= 1:
            return self.wasserstein(ds, t1, t2)
        return super().kantorovich(ds, t1, t2)


class ProductOps(FunctorOps):
    arity = 2

    def fmap(self, t, f1, f2):
        return Pair(f1(t.first), f2(t.second))

    def states(self, t):
        return ((t.first,), (t.second,))

    def ev_batch(self, t, values):
        a, b = values[0][t.first], values[1][t.second]
        s = self.spec
        if s.mode == "max":
            return np.maximum(s.c1 * a, s.c2 * b)
        return (s.c1 * a ** s.p + s.c2 * b ** s.p) ** (1.0 / s.p)

    def couplings(self, t1, t2, h=None):
        yield Pair((t1.first, t2.first), (t1.second, t2.second))

    def wasserstein(self, ds, t1, t2):
        return lift_product(ds[0], ds[1], t1, t2, self.spec)

    kantorovich = wasserstein


class CoproductOps(FunctorOps):
    arity = 2

    def fmap(self, t, f1, f2):
        return CoproductElem(t.side, (f1 if t.side == 1 else f2)(t.value))

    def states(self, t):
        return ((t.value,), ()) if t.side == 1 else ((), (t.value,))

    def ev_batch(self, t, values):
        return values[t.side - 1][t.value]

    def couplings(self, t1, t2, h=None):
        if t1.side == t2.side:
            yield CoproductElem(t1.side, (t1.value, t2.value))

    def wasserstein(self, ds, t1, t2):
        return lift_coproduct(ds[0], ds[1], t1, t2, top=self.spec.top)

    kantorovich = wasserstein


class SquaringOps(FunctorOps):
    def fmap(self, t, f):
        return Pair(f(t.first), f(t.second))

    def states(self, t):
        return ((t.first, t.second),)

    def ev_batch(self, t, values):
        (vals,) = values
        return vals[t.first] + vals[t.second]

    def couplings(self, t1, t2, h=None):
        yield Pair((t1.first, t2.first), (t1.second, t2.second))

    def wasserstein(self, ds, t1, t2):
        return squaring_wasserstein(ds[0], t1, t2)


class MachineOps(FunctorOps):
    arity = 2

    def fmap(self, t, fB, f):
        return MachineElem(fB(t.output), t.successors.map(f))

    def states(self, t):
        return ((t.output,), t.successors.targets)

    def ev_batch(self, t, values):
        o = values[0][t.output]
        s = self.spec
        targets = t.successors.targets
        if targets:
            stack = np.stack([values[1][x] for x in targets])
        else:
            stack = np.zeros((1, len(o)))
        if s.mode == "max":
            return np.maximum(s.c1 * o, s.c2 * stack.max(axis=0))
        agg = stack.sum(axis=0)
        if s.mode == "avg" and targets:
            agg = agg / len(targets)
        return s.c1 * o + s.c2 * agg

    def couplings(self, t1, t2, h=None):
        _check_alphabets(t1.successors, t2.successors)
        yield MachineElem((t1.output, t2.output),
                          InputFn(t1.successors.letters,
                                  tuple(zip(t1.successors.targets, t2.successors.targets))))

    def wasserstein(self, ds, t1, t2):
        return lift_machine(ds[0], ds[1], t1, t2, self.spec)


_OPS = {
    "distribution": DistributionOps,
    "powerset": PowersetOps,
    "input": InputOps,
    "product": ProductOps,
    "coproduct": CoproductOps,
    "squaring": SquaringOps,
    "machine": MachineOps,
}


def functor_ops(spec: EvaluationSpec) -> FunctorOps:
    return _OPS[spec.functor](spec)


# ---------------------------------------------------------------------------
# grid Kantorovich


def nonexpansive_grid(points: Sequence, d: Metric, h: float, bound: float) -> np.ndarray:
    """All f: points -> {0, h, ..., bound} with |f(x) - f(y)| <= d(x, y).

    Returns an array of shape (N, len(points)).
    """
    k = round(bound / h)
    if k < 0 or abs(k * h - bound) > EPS:
        raise ValueError(f"grid step {h} does not divide the bound {bound}")
    levels = np.arange(k + 1, dtype=np.int16)
    rows = np.zeros((1, 0), dtype=np.int16)
    for j, y in enumerate(points):
        lims = []
        for x in points[:j]:
            dxy = _lookup(d, x, y)
            lims.append(k if math.isinf(dxy) else min(k, math.floor(dxy / h + 1e-9)))
        n = len(rows)
        new = np.empty((n * (k + 1), j + 1), dtype=np.int16)
        new[:, :j] = np.repeat(rows, k + 1, axis=0)
        new[:, j] = np.tile(levels, n)
        keep = np.ones(len(new), dtype=bool)
        for i, lim in enumerate(lims):
            keep &= np.abs(new[:, i] - new[:, j]) <= lim
        rows = new[keep]
    return rows.astype(float) * h


def _relevant(ops: FunctorOps, t1, t2) -> list:
    out = []
    for xs, ys in zip(ops.states(t1), ops.states(t2)):
        seen = list(dict.fromkeys(list(xs) + list(ys)))
        out.append(seen)
    return out


def grid_kantorovich(spec: EvaluationSpec, ds: Sequence[Metric], t1, t2, h: float,
                     bound: float | None = None, max_points: int = 5,
                     max_rows: int = 3_000_000) -> float:
    """max over grid-valued nonexpansive f of |ev F f(t1) - ev F f(t2)|.

    Only the states occurring in t1 or t2 matter: a nonexpansive map on them
    extends to the whole carrier. ``bound`` is the largest grid value; it
    defaults to top, or for top = inf to the diameter of the relevant states
    rounded up to the grid, which gives a lower bound on the supremum.
    """
    ops = functor_ops(spec)
    if len(ds) != ops.arity:
        raise ValueError(f"{spec.functor} needs {ops.arity} base metric(s)")
    points = _relevant(ops, t1, t2)
    if any(len(p) > max_points for p in points):
        raise ScaleError(f"more than {max_points} relevant states")
    if bound is None:
        if not math.isinf(spec.top):
            bound = spec.top
        else:
            diam = 0.0
            for pts, d in zip(points, ds):
                for x in pts:
                    for y in pts:
                        dxy = _lookup(d, x, y)
                        if not math.isinf(dxy):
                            diam = max(diam, dxy)
            bound = h * math.ceil(diam / h - 1e-9)
    grids = [nonexpansive_grid(p, d, h, bound) for p, d in zip(points, ds)]
    total = math.prod(len(g) for g in grids)
    if total > max_rows:
        raise ScaleError(f"{total} test functions exceed the grid budget")
    idx = np.indices([len(g) for g in grids]).reshape(len(grids), -1)
    values = []
    for k, (pts, g) in enumerate(zip(points, grids)):
        values.append({x: g[idx[k], c] for c, x in enumerate(pts)})
    a = ops.ev_batch(t1, values)
    b = ops.ev_batch(t2, values)
    a = np.broadcast_to(a, (total,))
    b = np.broadcast_to(b, (total,))
    return float(np.max(np.abs(a - b)))


def squaring_kantorovich_oracle(d: Metric, t1: Pair, t2: Pair, h: float,
                                bound: float | None = None) -> float:
    """Grid lower bound on the Kantorovich squaring distance.

    The sum evaluation makes the difference invariant under shifting f, so a
    grid reaching the diameter of the relevant states loses nothing beyond
    the grid error.
    """
    return grid_kantorovich(EvaluationSpec("squaring", top=INF), (d,), t1, t2, h, bound=bound)
