"""Time the belief-pair exploration for random probabilistic automata.

Prints one row per (states, letters) setting with the mean time per pair
and the exploration depth used for the tolerance.
"""

import argparse
import time

import numpy as np

from behavmetric.systems import PA
from behavmetric.traces import pa_trace_depth, trace_metric_pa
from behavmetric.transport import FiniteDistribution


def random_pa(rng, n, k, c1, c2):
    states = tuple(f"q{i}" for i in range(n))
    alphabet = tuple("abcdefgh"[:k])
    outputs = {s: float(rng.random()) for s in states}
    trans = {s: {a: FiniteDistribution(states, tuple(rng.dirichlet(np.ones(n)))) for a in alphabet}
             for s in states}
    return PA(states, alphabet, outputs, trans, c1=c1, c2=c2)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--tol", type=float, default=1e-8)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    rng = np.random.default_rng(args.seed)
    print(f"depth for c1=c2=0.4: {pa_trace_depth(0.4, 0.4, args.tol)}")
    print("states letters  mean_s    max_s")
    for n in (2, 4, 6):
        for k in (1, 2):
            times = []
            for _ in range(args.reps):
                pa = random_pa(rng, n, k, 0.4, 0.4)
                t = time.perf_counter()
                trace_metric_pa(pa, "q0", "q1", tol=args.tol)
                times.append(time.perf_counter() - t)
            print(f"{n:6d} {k:7d}  {np.mean(times):.4f}  {np.max(times):.4f}")


if __name__ == "__main__":
    main()
