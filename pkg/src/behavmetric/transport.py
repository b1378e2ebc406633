"""Finite optimal transport.

The primal is solved with a transportation (network) simplex on the
bipartite supply/demand graph using Bland's rule; the dual potential is read
off the final spanning-tree basis and turned into a single competitive price
function by a c-transform.
"""

from __future__ import annotations

import itertools
import math
from collections import deque
from dataclasses import dataclass
from typing import Callable, Hashable, Iterator, Mapping, Sequence

import numpy as np

from .metric import EPS, INF

Metric = Callable[[Hashable, Hashable], float]


class ScaleError(ValueError):
    """Raised when a brute-force routine is asked for more than it can enumerate."""


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """A finitely supported (sub)distribution.

    ``sub`` marks the subdistribution variant, whose mass may be below 1.
    """

    carrier: tuple
    weights: tuple
    sub: bool = False

    def __post_init__(self):
        carrier = tuple(self.carrier)
        weights = tuple(float(w) for w in self.weights)
        if len(carrier) != len(weights):
            raise ValueError("carrier and weights differ in length")
        if len(set(carrier)) != len(carrier):
            raise ValueError("carrier has duplicate states")
        for x, w in zip(carrier, weights):
            if math.isnan(w) or w < 0:
                raise ValueError(f"negative weight {w} at {x!r}")
        mass = math.fsum(weights)
        if self.sub:
            if mass > 1 + EPS:
                raise ValueError(f"subdistribution mass {mass} exceeds 1")
        elif abs(mass - 1.0) > EPS:
            raise ValueError(f"weights sum to {mass}, not 1")
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_dict(cls, mapping: Mapping, sub: bool = False) -> "FiniteDistribution":
        return cls(tuple(mapping), tuple(mapping.values()), sub)

    @classmethod
    def dirac(cls, x: Hashable) -> "FiniteDistribution":
        return cls((x,), (1.0,))

    @property
    def mass(self) -> float:
        return math.fsum(self.weights)

    def support(self) -> tuple:
        return tuple(x for x, w in zip(self.carrier, self.weights) if w > 0)

    def items(self) -> list:
        return [(x, w) for x, w in zip(self.carrier, self.weights) if w > 0]

    def __getitem__(self, x: Hashable) -> float:
        for y, w in zip(self.carrier, self.weights):
            if y == x:
                return w
        return 0.0

    def as_dict(self) -> dict:
        return dict(self.items())

    def pushforward(self, f: Callable) -> "FiniteDistribution":
        """Image distribution D(f); weights of colliding images add up."""
        out: dict = {}
        for x, w in self.items():
            y = f(x)
            out[y] = out.get(y, 0.0) + w
        return FiniteDistribution.from_dict(out, sub=self.sub)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteDistribution):
            return NotImplemented
        return self.sub == other.sub and self.as_dict() == other.as_dict()

    def __hash__(self) -> int:
        return hash((self.sub, frozenset(self.items())))

    def __repr__(self) -> str:
        tag = "sub" if self.sub else ""
        return f"FiniteDistribution{tag}({self.as_dict()!r})"


@dataclass(frozen=True, eq=False)
class TransportPlan:
    rows: tuple
    cols: tuple
    entries: np.ndarray

    def marginal_residual(self, P: FiniteDistribution, Q: FiniteDistribution) -> float:
        """Largest deviation of the plan's marginals from P and Q."""
        res = 0.0
        for i, x in enumerate(self.rows):
            res = max(res, abs(self.entries[i].sum() - P[x]))
        for j, y in enumerate(self.cols):
            res = max(res, abs(self.entries[:, j].sum() - Q[y]))
        for x in P.support():
            if x not in self.rows:
                res = max(res, P[x])
        for y in Q.support():
            if y not in self.cols:
                res = max(res, Q[y])
        return float(res)

    def as_dict(self) -> dict:
        return {(x, y): float(self.entries[i, j])
                for i, x in enumerate(self.rows) for j, y in enumerate(self.cols)
                if self.entries[i, j] > 0}


@dataclass(frozen=True, eq=False)
class DualPotential:
    carrier: tuple
    values: tuple

    def __getitem__(self, x: Hashable) -> float:
        return self.values[self.carrier.index(x)]

    def is_competitive(self, d: Metric, tol: float = EPS) -> bool:
        for (x, fx), (y, fy) in itertools.combinations(zip(self.carrier, self.values), 2):
            if abs(fx - fy) > d(x, y) + tol:
                return False
        return True

    def as_dict(self) -> dict:
        return dict(zip(self.carrier, self.values))


def _top_of(d: Metric, top: float | None) -> float:
    if top is not None:
        return top
    return getattr(d, "top", INF)


# ---------------------------------------------------------------------------
# transportation simplex


@dataclass
class _SimplexResult:
    flow: np.ndarray
    u: np.ndarray
    v: np.ndarray
    forbidden_mass: float
    pivots: int


def _tree_potentials(basic_cells, m, n, cost):
    """Solve u_i + v_j = cost[i, j] over the basis tree, with u_0 = 0."""
    adj_row = [[] for _ in range(m)]
    adj_col = [[] for _ in range(n)]
    for i, j in basic_cells:
        adj_row[i].append(j)
        adj_col[j].append(i)
    u = np.zeros(m)
    v = np.zeros(n)
    seen_r = [False] * m
    seen_c = [False] * n
    seen_r[0] = True
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        if kind == "r":
            for j in adj_row[k]:
                if not seen_c[j]:
                    seen_c[j] = True
                    v[j] = cost[k, j] - u[k]
                    queue.append(("c", j))
        else:
            for i in adj_col[k]:
                if not seen_r[i]:
                    seen_r[i] = True
                    u[i] = cost[i, k] - v[k]
                    queue.append(("r", i))
    return u, v


def _tree_path(basic_cells, m, n, start_col, end_row):
    """Cells on the basis-tree path from column node start_col to row node end_row."""
    # nodes: rows 0..m-1, columns m..m+n-1
    adj = [[] for _ in range(m + n)]
    for i, j in basic_cells:
        adj[i].append(m + j)
        adj[m + j].append(i)
    parent = {m + start_col: None}
    queue = deque([m + start_col])
    while queue:
        node = queue.popleft()
        if node == end_row:
            break
        for nxt in adj[node]:
            if nxt not in parent:
                parent[nxt] = node
                queue.append(nxt)
    path = []
    node = end_row
    while parent[node] is not None:
        prev = parent[node]
        a, b = (node, prev) if node < m else (prev, node)
        path.append((a, b - m))
        node = prev
    path.reverse()
    return path


def _transport_simplex(supply: np.ndarray, demand: np.ndarray, cost: np.ndarray) -> _SimplexResult:
    """Minimise sum(flow * cost) subject to the marginals.

    Infinite cells are priced by a symbolic big-M: reduced costs are pairs
    (penalty, finite part) compared lexicographically, so the solver first
    minimises the mass sent through infinite cells and then the finite cost.
    """
    m, n = len(supply), len(demand)
    forbidden = np.isinf(cost)
    penalty = forbidden.astype(float)
    fin = np.where(forbidden, 0.0, cost)

    flow = np.zeros((m, n))
    basic = []
    s = supply.astype(float).copy()
    r = demand.astype(float).copy()
    i = j = 0
    # northwest corner start: m + n - 1 cells forming a spanning tree
    while True:
        x = min(s[i], r[j])
        flow[i, j] = x
        basic.append((i, j))
        s[i] -= x
        r[j] -= x
        if i == m - 1 and j == n - 1:
            break
        if (s[i] <= r[j] and i < m - 1) or j == n - 1:
            i += 1
        else:
            j += 1

    pivots = 0
    max_pivots = 1000 + 50 * m * n * (m + n)
    while True:
        up, vp = _tree_potentials(basic, m, n, penalty)
        uf, vf = _tree_potentials(basic, m, n, fin)
        rp = penalty - up[:, None] - vp[None, :]
        rf = fin - uf[:, None] - vf[None, :]
        is_basic = np.zeros((m, n), dtype=bool)
        for cell in basic:
            is_basic[cell] = True
        improving = (~is_basic) & ((rp < -0.5) | ((np.abs(rp) < 0.5) & (rf < -EPS * 1e-3)))
        if not improving.any():
            break
        if pivots >= max_pivots:
            raise RuntimeError("transport simplex exceeded its pivot budget")
        pivots += 1
        # Bland: lowest-index improving cell enters
        ei, ej = map(int, np.argwhere(improving)[0])
        path = _tree_path(basic, m, n, ej, ei)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(flow[c] for c in minus)
        # Bland: among tied blocking cells the lowest index leaves
        leaving = min((c for c in minus if flow[c] <= theta + 1e-15), key=lambda c: c[0] * n + c[1])
        theta = flow[leaving]
        for c in minus:
            flow[c] -= theta
        for c in plus:
            flow[c] += theta
        flow[ei, ej] += theta
        flow[leaving] = 0.0
        basic.remove(leaving)
        basic.append((ei, ej))
    np.clip(flow, 0.0, None, out=flow)

    # Instantiate the symbolic M just large enough for the finite cells.
    big = 1.0
    slack_cells = (~forbidden) & (rp > 0.5)
    if slack_cells.any():
        big = max(big, float(np.max(-rf[slack_cells] / rp[slack_cells])) + 1.0)
    u = big * up + uf
    v = big * vp + vf
    return _SimplexResult(flow, u, v, float(flow[forbidden].sum()), pivots)


def _instance(d: Metric, P: FiniteDistribution, Q: FiniteDistribution):
    rows = P.support()
    cols = Q.support()
    supply = np.array([P[x] for x in rows])
    demand = np.array([Q[y] for y in cols])
    try:
        cost = np.array([[d(x, y) for y in cols] for x in rows], dtype=float).reshape(len(rows), len(cols))
    except KeyError as exc:
        raise ValueError(f"state {exc} not in the carrier of d") from None
    if (cost < 0).any() or np.isnan(cost).any():
        raise ValueError("costs must be nonnegative")
    return rows, cols, supply, demand, cost


def _solve(d, P, Q):
    rows, cols, supply, demand, cost = _instance(d, P, Q)
    if not rows:
        return rows, cols, cost, None
    # absorb float drift so both sides carry identical mass
    demand = demand * (supply.sum() / demand.sum())
    return rows, cols, cost, _transport_simplex(supply, demand, cost)


def _masses_differ(P: FiniteDistribution, Q: FiniteDistribution) -> bool:
    return abs(P.mass - Q.mass) > EPS


def solve_transport(d: Metric, P: FiniteDistribution, Q: FiniteDistribution,
                    top: float | None = None) -> tuple[float, TransportPlan | None]:
    """Minimal transport cost between P and Q under the cost d.

    Returns ``(cost, plan)``. Subdistributions of unequal mass have no
    coupling: the result is ``(top, None)``. If every plan must move mass
    through an infinite cell the cost is ``inf``.
    """
    top = _top_of(d, top)
    if _masses_differ(P, Q):
        return top, None
    rows, cols, cost, res = _solve(d, P, Q)
    if res is None:
        return 0.0, TransportPlan(rows, cols, np.zeros((len(rows), len(cols))))
    plan = TransportPlan(rows, cols, res.flow)
    if res.forbidden_mass > EPS:
        return INF, plan
    total = math.fsum(float(res.flow[i, j] * cost[i, j])
                      for i in range(len(rows)) for j in range(len(cols)) if res.flow[i, j] > 0)
    return max(total, 0.0), plan


def solve_dual(d: Metric, P: FiniteDistribution, Q: FiniteDistribution,
               top: float | None = None) -> tuple[float, DualPotential | None]:
    """Maximal value of sum f(x) (Q(x) - P(x)) over competitive price functions f.

    d must be a pseudometric for the c-transform to yield a competitive f.
    The potential lives on the union of the two supports and is shifted so
    that its minimum is 0.
    """
    if P.sub or Q.sub:
        raise ValueError("solve_dual needs proper distributions")
    rows, cols, cost, res = _solve(d, P, Q)
    if res is None:
        return 0.0, DualPotential((), ())
    if res.forbidden_mass > EPS:
        return INF, None
    states = list(rows) + [y for y in cols if y not in rows]
    g = []
    for x in states:
        best = INF
        for j, y in enumerate(cols):
            dxy = d(x, y)
            if not math.isinf(dxy):
                best = min(best, dxy - res.v[j])
        g.append(best)
    f = -np.array(g)
    f = f - f.min()
    value = math.fsum(float(fx) * (Q[x] - P[x]) for x, fx in zip(states, f))
    return max(value, 0.0), DualPotential(tuple(states), tuple(float(v) for v in f))


def kantorovich_subdistribution(d: Metric, P: FiniteDistribution, Q: FiniteDistribution,
                                top: float | None = None) -> float:
    """sup over nonexpansive f: X -> [0, top] of |sum f (P - Q)|, any masses.

    The range constraint 0 <= f <= top is encoded by an extra point with
    f = 0 fixed, reached for free and left at cost top; the supremum is then
    a transport problem on the asymmetric cost, solved in both directions.
    """
    top = _top_of(d, top)
    star = object()
    big = max(P.mass, Q.mass)

    def cost(x, y):
        if x is star:
            return 0.0 if y is star else top
        if y is star:
            return 0.0
        return d(x, y)

    def pad(R):
        return FiniteDistribution(R.carrier + (star,), R.weights + (max(big - R.mass, 0.0),), sub=True)

    Pp, Qp = pad(P), pad(Q)
    forward, _ = solve_transport(cost, Pp, Qp, top=top)
    backward, _ = solve_transport(cost, Qp, Pp, top=top)
    return max(forward, backward)


# ---------------------------------------------------------------------------
# brute-force couplings


def _grid_units(w: float, h: float) -> int:
    k = round(w / h)
    if abs(k * h - w) > EPS:
        raise ValueError(f"weight {w} is not a multiple of the grid step {h}")
    return int(k)


def _integer_tables(row_sums: list, col_sums: list) -> Iterator[list]:
    """All nonnegative integer matrices with the given row and column sums."""
    m, n = len(row_sums), len(col_sums)
    if m == 0:
        if not any(col_sums):
            yield []
        return

    def fill_row(k, remaining, cols_left, acc):
        if k == n - 1:
            if remaining <= cols_left[k]:
                yield acc + [remaining]
            return
        for x in range(min(remaining, cols_left[k]) + 1):
            yield from fill_row(k + 1, remaining - x, cols_left, acc + [x])

    def rec(i, cols_left):
        if i == m - 1:
            if sum(cols_left) == row_sums[i]:
                yield [list(cols_left)]
            return
        for row in fill_row(0, row_sums[i], cols_left, []):
            rest = [c - x for c, x in zip(cols_left, row)]
            for tail in rec(i + 1, rest):
                yield [row] + tail

    if n == 0:
        if not any(row_sums):
            yield [[] for _ in range(m)]
        return
    yield from rec(0, list(col_sums))


def enumerate_couplings_small(t1, t2, functor: str, h: float | None = None) -> Iterator:
    """Yield every coupling of t1 and t2 at brute-force scale.

    functor ``"powerset"``: frozensets T of pairs with both projections exact.
    functor ``"distribution"``: grid joint distributions (step h) over pairs.
    """
    if functor == "powerset":
        S1, S2 = frozenset(t1), frozenset(t2)
        pairs = [(x, y) for x in sorted(S1, key=repr) for y in sorted(S2, key=repr)]
        if len(pairs) > 12:
            raise ScaleError(f"{len(pairs)} pairs exceed the powerset coupling bound of 12")
        for mask in range(1 << len(pairs)):
            T = frozenset(p for k, p in enumerate(pairs) if mask >> k & 1)
            if {x for x, _ in T} == S1 and {y for _, y in T} == S2:
                yield T
    elif functor == "distribution":
        if h is None or h <= 0:
            raise ValueError("distribution couplings need a positive grid step h")
        rows, cols = t1.support(), t2.support()
        if len(rows) + len(cols) > 6:
            raise ScaleError("supports exceed the distribution coupling bound of 6")
        if _masses_differ(t1, t2):
            return
        rs = [_grid_units(t1[x], h) for x in rows]
        cs = [_grid_units(t2[y], h) for y in cols]
        if sum(rs) != sum(cs):
            return
        sub = t1.sub or t2.sub
        for table in _integer_tables(rs, cs):
            mapping = {(x, y): table[i][j] * h
                       for i, x in enumerate(rows) for j, y in enumerate(cols) if table[i][j]}
            if not mapping and not sub:
                continue
            yield FiniteDistribution.from_dict(mapping, sub=sub)
    else:
        raise ValueError(f"no coupling enumeration for functor {functor!r}")
