"""Extended reals in [0, top], pseudometric matrices and axiom checks.

Distances are plain Python floats with ``math.inf`` standing for the
infinite top element. Float addition already saturates (``x + inf == inf``),
so no wrapper type is needed; ``top`` travels with each matrix instead.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Hashable, Iterable, Sequence

import numpy as np

INF = math.inf
EPS = 1e-9


def parse_top(value) -> float:
    """Read a top value: ``1`` or ``inf`` (strings accepted)."""
    if isinstance(value, str):
        text = value.strip().lower()
        if text in ("inf", ".inf", "infinity", "+inf"):
            return INF
        try:
            value = float(text)
        except ValueError:
            raise ValueError(f"top must be 1 or inf, got {value!r}") from None
    value = float(value)
    if value == 1.0 or value == INF:
        return value
    raise ValueError(f"top must be 1 or inf, got {value!r}")


def check_value(x: float, top: float) -> float:
    """Return x if it lies in [0, top].

    Overshoot below EPS is float noise and is snapped to the bound; anything
    further out is an error rather than a silent clamp.
    """
    x = float(x)
    if math.isnan(x):
        raise ValueError("distance is NaN")
    if x < 0.0:
        if x < -EPS:
            raise ValueError(f"negative distance {x}")
        return 0.0
    if x > top:
        if x > top + EPS:
            raise ValueError(f"distance {x} exceeds top {top}")
        return top
    return x


def euclid(a: float, b: float) -> float:
    """Extended Euclidean distance on [0, inf]."""
    if a == b:
        return 0.0
    if math.isinf(a) or math.isinf(b):
        return INF
    return abs(a - b)


def _euclid_array(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    either = np.isinf(a) | np.isinf(b)
    out = np.abs(np.where(either, 0.0, a) - np.where(either, 0.0, b))
    one_inf = np.isinf(a) != np.isinf(b)
    out[one_inf] = INF
    return out


@dataclass(frozen=True, eq=False)
class PseudometricMatrix:
    """A distance table over a finite, ordered carrier.

    Construction checks shape and range only; the pseudometric axioms are
    reported by :func:`check_axioms` so that broken tables can be inspected.
    The instance is callable: ``d(x, y)`` looks up the entry by label.
    """

    carrier: tuple
    entries: np.ndarray
    top: float = 1.0

    def __post_init__(self):
        carrier = tuple(self.carrier)
        entries = np.array(self.entries, dtype=float)
        n = len(carrier)
        if entries.shape != (n, n):
            raise ValueError(f"entries must be {n}x{n}, got shape {entries.shape}")
        if len(set(carrier)) != n:
            raise ValueError("carrier has duplicate states")
        top = parse_top(self.top) if isinstance(self.top, str) else float(self.top)
        if not top > 0:
            raise ValueError("top must be positive")
        if np.isnan(entries).any():
            raise ValueError("entries contain NaN")
        if (entries < -EPS).any():
            raise ValueError("entries must be nonnegative")
        if (entries > top + EPS).any():
            raise ValueError(f"entries exceed top {top}")
        entries = np.clip(entries, 0.0, top)
        entries.setflags(write=False)
        object.__setattr__(self, "carrier", carrier)
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "top", top)
        object.__setattr__(self, "_index", {x: i for i, x in enumerate(carrier)})

    def index(self, x: Hashable) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise ValueError(f"state {x!r} not in carrier") from None

    def __call__(self, x: Hashable, y: Hashable) -> float:
        return float(self.entries[self.index(x), self.index(y)])

    def __len__(self) -> int:
        return len(self.carrier)

    def __eq__(self, other) -> bool:
        if not isinstance(other, PseudometricMatrix):
            return NotImplemented
        return (self.carrier == other.carrier and self.top == other.top
                and np.array_equal(self.entries, other.entries))

    __hash__ = None

    def __repr__(self) -> str:
        return f"PseudometricMatrix(carrier={self.carrier!r}, top={self.top!r}, entries={self.entries.tolist()!r})"

    @classmethod
    def zero(cls, carrier: Sequence, top: float = 1.0) -> "PseudometricMatrix":
        n = len(carrier)
        return cls(tuple(carrier), np.zeros((n, n)), top)

    @classmethod
    def discrete(cls, carrier: Sequence, top: float = 1.0) -> "PseudometricMatrix":
        n = len(carrier)
        return cls(tuple(carrier), top * (1.0 - np.eye(n)) if top != INF
                   else np.where(np.eye(n, dtype=bool), 0.0, INF), top)

    @classmethod
    def from_function(cls, carrier: Sequence, fn: Callable[[Hashable, Hashable], float],
                      top: float = 1.0) -> "PseudometricMatrix":
        carrier = tuple(carrier)
        entries = [[fn(x, y) for y in carrier] for x in carrier]
        return cls(carrier, np.array(entries, dtype=float), top)

    def scaled(self, c: float) -> "PseudometricMatrix":
        """The matrix c * d (for 0 < c <= 1 this stays within top)."""
        return PseudometricMatrix(self.carrier, c * self.entries, self.top)

    def leq(self, other: "PseudometricMatrix", tol: float = EPS) -> bool:
        _same_carrier(self, other)
        return bool((self.entries <= other.entries + tol).all())

    def is_pseudometric(self, tol: float = EPS) -> bool:
        return not check_axioms(self, tol)

    def as_dict(self) -> dict:
        return {x: {y: float(self.entries[i, j]) for j, y in enumerate(self.carrier)}
                for i, x in enumerate(self.carrier)}


@dataclass(frozen=True)
class AxiomViolation:
    axiom: str
    states: tuple
    slack: float


def check_axioms(d: PseudometricMatrix, tol: float = EPS) -> list[AxiomViolation]:
    """List every violated instance of reflexivity, symmetry and triangle.

    The slack is how far the offending entry exceeds what the axiom allows.
    """
    D = np.asarray(d.entries, dtype=float)
    carrier = d.carrier
    n = len(carrier)
    out = []
    for i in range(n):
        if D[i, i] > tol:
            out.append(AxiomViolation("reflexivity", (carrier[i],), float(D[i, i])))
    for i in range(n):
        for j in range(i + 1, n):
            gap = euclid(D[i, j], D[j, i])
            if gap > tol:
                out.append(AxiomViolation("symmetry", (carrier[i], carrier[j]), gap))
    if n:
        # via[i, j, k] = D[i, j] + D[j, k]; inf + x stays inf, never NaN here
        via = D[:, :, None] + D[None, :, :]
        direct = D[:, None, :]
        bad = direct > via + tol
        for i, j, k in zip(*np.nonzero(bad)):
            slack = D[i, k] - via[i, j, k]
            out.append(AxiomViolation("triangle", (carrier[i], carrier[j], carrier[k]), float(slack)))
    return out


def _same_carrier(d1: PseudometricMatrix, d2: PseudometricMatrix) -> None:
    if d1.carrier != d2.carrier:
        raise ValueError("pseudometrics have different carriers")


def sup_join(ds: Iterable[PseudometricMatrix]) -> PseudometricMatrix:
    """Pointwise supremum of pseudometrics over one carrier."""
    ds = list(ds)
    if not ds:
        raise ValueError("sup_join needs at least one pseudometric")
    first = ds[0]
    for d in ds[1:]:
        _same_carrier(first, d)
    top = max(d.top for d in ds)
    entries = np.max(np.stack([d.entries for d in ds]), axis=0)
    return PseudometricMatrix(first.carrier, entries, top)


def sup_norm_diff(d1: PseudometricMatrix, d2: PseudometricMatrix) -> float:
    """Largest euclid distance between corresponding entries."""
    _same_carrier(d1, d2)
    if not len(d1):
        return 0.0
    return float(_euclid_array(d1.entries, d2.entries).max())


def discrete_distance(top: float = 1.0) -> Callable[[Hashable, Hashable], float]:
    """The discrete metric on any set: 0 on equal points, top otherwise."""
    def dist(x, y):
        return 0.0 if x == y else top
    return dist
