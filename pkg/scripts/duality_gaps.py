"""Largest observed gap between the grid Kantorovich value and the Wasserstein value per functor."""

import argparse

import numpy as np

from behavmetric.liftings import functor_ops
from behavmetric.verification import SHIPPED, _instance, brute_kantorovich

FUNCTORS = ("distribution", "powerset-max", "input-max", "input-avg", "product-max", "product-pnorm",
            "coproduct", "squaring")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--budget", type=int, default=200)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()
    for name in FUNCTORS:
        spec = SHIPPED[name]
        h = (1.0 if spec.top == float("inf") else spec.top) / 20
        rng = np.random.default_rng(args.seed)
        worst, where = 0.0, None
        for _ in range(args.budget):
            ops, ds, t1, t2 = _instance(spec, rng, h)
            gap = ops.wasserstein(ds, t1, t2) - brute_kantorovich(spec, ds, t1, t2, h)
            if gap > worst:
                worst, where = gap, (t1, t2)
        flag = "within 2h" if worst <= 2 * h + 1e-9 else "GAP"
        print(f"{name:14s} h={h:.3g} max W-K={worst:.4g}  {flag}  {where if flag == 'GAP' else ''}")


if __name__ == "__main__":
    main()
