"""Run every named property check and print a one-line summary for each."""

import argparse
import time

from behavmetric.verification import CHECKS, run_check


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--seed", type=int, default=42)
    ap.add_argument("--budget", type=int, default=200)
    ap.add_argument("--prefix", default="", help="only checks whose name starts with this")
    args = ap.parse_args()
    for name in sorted(CHECKS):
        if not name.startswith(args.prefix):
            continue
        t = time.perf_counter()
        report = run_check(name, seed=args.seed, budget=args.budget)
        status = "ok  " if report.passed else "FAIL"
        print(f"{status} {name:36s} {report.instances:6d} instances  {len(report.violations):4d} violations"
              f"  {time.perf_counter() - t:.2f}s")
        if report.violations:
            v = report.violations[0]
            print(f"     first: {v.relation} observed={v.observed} on {v.instance[:100]}")


if __name__ == "__main__":
    main()
