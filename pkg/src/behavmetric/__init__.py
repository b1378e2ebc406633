"""Behavioural pseudometrics for finite coalgebras via functor liftings."""

from .metric import INF, EPS, PseudometricMatrix, check_axioms, euclid, sup_join, sup_norm_diff
from .transport import FiniteDistribution, solve_dual, solve_transport

__version__ = "0.1.0"
