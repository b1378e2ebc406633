"""Recompute the distances of every builtin example and print them."""

import itertools

from behavmetric.fixpoint import bisim_metric
from behavmetric.systems import builtin_examples
from behavmetric.traces import nfa_distinguishing_word, trace_metric_nfa, trace_metric_pa


def main():
    for name, system in builtin_examples().items():
        print(f"== {name} ({system.kind})")
        if system.kind == "nfa":
            for x, y in itertools.combinations(system.states, 2):
                word = nfa_distinguishing_word(system, x, y)
                print(f"  td({x},{y}) = {trace_metric_nfa(system, x, y):.6g}  word={''.join(word) if word else '-'}")
            continue
        if system.kind == "pa":
            for x, y in itertools.combinations(system.states, 2):
                print(f"  td({x},{y}) = {trace_metric_pa(system, x, y):.10g}")
            continue
        res = bisim_metric(system)
        for x, y in itertools.combinations(system.states, 2):
            print(f"  d({x},{y}) = {res.metric(x, y):.10g}")
        print(f"  iterations={res.iterations} converged={res.converged}")


if __name__ == "__main__":
    main()
