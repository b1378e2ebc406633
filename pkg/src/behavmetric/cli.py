"""Command-line front end.

Every command prints one JSON document (or TSV with ``--format tsv``).
Exit codes: 0 success, 1 input error, 2 no convergence, 3 property violation.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from importlib import resources

import yaml

from . import __version__
from .fixpoint import FixpointConfig, bisim_metric
from .liftings import (CoproductElem, EvaluationSpec, InputFn, MachineElem, Pair, functor_ops,
                       grid_kantorovich)
from .metric import PseudometricMatrix, euclid, parse_top
from .systems import (_FIXTURES, _PARAMS, NFA, PA, SystemFormatError, SystemValidationError,
                      builtin_text, parse_system)
from .traces import nfa_distinguishing_word, pa_trace_depth, trace_metric_nfa, trace_metric_pa
from .transport import FiniteDistribution, ScaleError, solve_dual, solve_transport
from .verification import CHECKS, run_check

EXIT_OK, EXIT_INPUT, EXIT_NOCONV, EXIT_VIOLATION = 0, 1, 2, 3
PA_DEFAULT_TOL = 1e-8


class InputError(Exception):
    pass


# ---------------------------------------------------------------------------
# output


def num(x):
    """12 significant digits; infinity as the string "inf"."""
    if isinstance(x, bool) or x is None:
        return x
    if isinstance(x, int):
        return x
    if isinstance(x, float):
        if math.isinf(x):
            return "inf"
        return float(f"{x:.12g}")
    return x


def _clean(obj):
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float):
        return num(obj)
    return obj


def matrix_payload(d: PseudometricMatrix) -> dict:
    return {"states": [str(s) for s in d.carrier], "rows": d.entries.tolist()}


def _fmt(v) -> str:
    return str(num(v))


def render_tsv(doc: dict) -> str:
    lines = []
    for key, value in doc.items():
        if isinstance(value, dict) and set(value) == {"states", "rows"}:
            lines.append(key)
            lines.append("\t".join(["", *value["states"]]))
            for s, row in zip(value["states"], value["rows"]):
                lines.append("\t".join([s, *(_fmt(v) for v in row)]))
        elif isinstance(value, dict):
            for k, v in value.items():
                lines.append(f"{key}.{k}\t{json.dumps(_clean(v)) if isinstance(v, (dict, list)) else _fmt(v)}")
        elif isinstance(value, list):
            lines.append(f"{key}\t{json.dumps(_clean(value))}")
        else:
            lines.append(f"{key}\t{_fmt(value)}")
    return "\n".join(lines) + "\n"


def emit(doc: dict, fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "tsv":
        out.write(render_tsv(doc))
    else:
        out.write(json.dumps(_clean(doc), indent=2) + "\n")


# ---------------------------------------------------------------------------
# input helpers


def read_text(path: str) -> str:
    if path == "-":
        return sys.stdin.read()
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def parse_inline(text: str):
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise InputError(f"cannot parse {text!r}: {exc}") from None


def parse_sets(pairs) -> dict:
    out = {}
    for item in pairs or []:
        key, sep, value = item.partition("=")
        if not sep or not key:
            raise InputError(f"--set expects key=value, got {item!r}")
        out[key.strip()] = parse_inline(value)
    return out


def _check_top(declared: float, override) -> None:
    if override is None:
        return
    try:
        wanted = parse_top(override)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    if wanted != declared:
        raise InputError(f"--top {override} conflicts with top {num(declared)} declared in the file")


def load_system_arg(args):
    system = parse_system(read_text(args.file))
    _check_top(system.top, args.top)
    overrides = parse_sets(args.set)
    if overrides:
        bad = set(overrides) - _PARAMS[system.kind]
        if bad:
            raise InputError(f"unknown parameter(s) for kind {system.kind}: {sorted(bad)}")
        try:
            system = dataclasses.replace(system, **overrides)
        except (TypeError, SystemValidationError) as exc:
            raise InputError(str(exc)) from None
    return system


def metric_from_doc(doc, top: float) -> PseudometricMatrix:
    if not isinstance(doc, dict):
        raise InputError("a metric needs 'points' or 'elements' and 'distances'")
    if set(doc) == {"points"}:
        return PseudometricMatrix.from_function([float(p) for p in doc["points"]], euclid, top)
    if set(doc) == {"elements", "distances"}:
        return PseudometricMatrix(tuple(doc["elements"]), [[parse_top(v) if isinstance(v, str) else v
                                                            for v in row] for row in doc["distances"]], top)
    raise InputError(f"unexpected metric keys {sorted(doc)}")


# ---------------------------------------------------------------------------
# commands


def cmd_transport(args) -> tuple[dict, int]:
    doc = parse_inline(read_text(args.file))
    if not isinstance(doc, dict):
        raise InputError("a transport instance must be a mapping")
    known = {"top", "points", "elements", "distances", "supply", "demand", "sub", "description"}
    unknown = set(doc) - known
    if unknown:
        raise InputError(f"unknown key(s) in transport instance: {sorted(unknown)}")
    top = parse_top(doc.get("top", "inf"))
    _check_top(top, args.top)
    metric_keys = {k: doc[k] for k in ("points", "elements", "distances") if k in doc}
    d = metric_from_doc(metric_keys, top)
    sub = bool(doc.get("sub", False) or args.sub)
    P = FiniteDistribution.from_dict(doc["supply"], sub=sub)
    Q = FiniteDistribution.from_dict(doc["demand"], sub=sub)
    cost, plan = solve_transport(d, P, Q, top=top)
    result = {"command": "transport", "parameters": {"top": top, "sub": sub}, "cost": cost}
    if plan is None:
        result["plan"] = None
        result["message"] = "no coupling: distance = top"
        return result, EXIT_OK
    result["plan"] = [[str(x), str(y), w] for (x, y), w in plan.as_dict().items()]
    if not sub and not math.isinf(cost):
        value, potential = solve_dual(d, P, Q, top=top)
        result["dual_value"] = value
        result["potentials"] = {str(k): v for k, v in potential.as_dict().items()}
        result["duality_gap"] = abs(cost - value)
        result["competitive"] = potential.is_competitive(d)
    return result, EXIT_OK


def cmd_bisim(args) -> tuple[dict, int]:
    system = load_system_arg(args)
    if system.kind in ("nfa", "pa"):
        raise InputError(f"kind {system.kind} has no bisimulation lifting here; use the trace command")
    config = FixpointConfig(tolerance=args.tol, max_iterations=args.max_iter, record_trace=args.trace)
    res = bisim_metric(system, config)
    doc = {
        "command": "bisim",
        "parameters": {"kind": system.kind, "top": system.top, "tol": args.tol, "max_iter": args.max_iter,
                       **{k: getattr(system, k) for k in sorted(_PARAMS[system.kind])}},
        "matrix": matrix_payload(res.metric),
        "iterations": res.iterations,
        "converged": res.converged,
        "final_delta": res.final_delta,
    }
    if args.trace:
        doc["trace"] = list(res.trace)
    return doc, EXIT_OK if res.converged else EXIT_NOCONV


def cmd_trace(args) -> tuple[dict, int]:
    system = load_system_arg(args)
    for s in (args.source, args.target):
        if s not in system.states:
            raise InputError(f"unknown state {s!r}")
    doc = {"command": "trace", "parameters": {"kind": system.kind, "from": args.source, "to": args.target}}
    if isinstance(system, NFA):
        word = nfa_distinguishing_word(system, args.source, args.target)
        doc["parameters"]["c"] = system.c
        doc["distance"] = trace_metric_nfa(system, args.source, args.target)
        doc["word"] = "none" if word is None else [str(a) for a in word]
    elif isinstance(system, PA):
        tol = args.tol if args.tol_given else PA_DEFAULT_TOL
        k = pa_trace_depth(system.c1, system.c2, tol)
        doc["parameters"].update(c1=system.c1, c2=system.c2, tol=tol)
        doc["distance"] = trace_metric_pa(system, args.source, args.target, tol=tol)
        doc["depth"] = k
        doc["tail_bound"] = system.c1 * system.c2 ** (k + 1) / (1 - system.c2)
    else:
        raise InputError(f"trace needs an nfa or pa system, got {system.kind}")
    return doc, EXIT_OK


def _element(functor: str, raw, letters_hint=None):
    try:
        if functor == "distribution":
            return FiniteDistribution.from_dict(raw)
        if functor == "powerset":
            return frozenset(raw)
        if functor == "input":
            return InputFn.from_dict(raw)
        if functor in ("product", "squaring"):
            a, b = raw
            return Pair(a, b)
        if functor == "coproduct":
            side, value = (raw["side"], raw["value"]) if isinstance(raw, dict) else raw
            return CoproductElem(int(side), value)
        if functor == "machine":
            o, succ = raw
            return MachineElem(o, InputFn.from_dict(succ))
    except (TypeError, ValueError, KeyError) as exc:
        raise InputError(f"bad {functor} element {raw!r}: {exc}") from None
    raise InputError(f"unknown functor {functor!r}")


def cmd_lift(args) -> tuple[dict, int]:
    top = parse_top(args.top) if args.top is not None else 1.0
    fields = {"functor": args.functor, "top": top, "mode": args.mode}
    fields.update(parse_sets(args.set))
    try:
        spec = EvaluationSpec(**fields)
    except TypeError as exc:
        raise InputError(str(exc)) from None
    ops = functor_ops(spec)
    metrics = args.metric or []
    if len(metrics) != ops.arity:
        raise InputError(f"{spec.functor} needs {ops.arity} --metric argument(s)")
    ds = []
    for m in metrics:
        raw = parse_inline(read_text(m[1:]) if m.startswith("@") else m)
        ds.append(metric_from_doc(raw, top))
    t1 = _element(spec.functor, parse_inline(args.left))
    t2 = _element(spec.functor, parse_inline(args.right))
    doc = {"command": "lift",
           "parameters": {"functor": spec.functor, "mode": spec.mode, "top": top, "c1": spec.c1,
                          "c2": spec.c2, "p": spec.p},
           "wasserstein": ops.wasserstein(ds, t1, t2)}
    if args.grid is not None:
        doc["grid_kantorovich"] = grid_kantorovich(spec, ds, t1, t2, args.grid)
        doc["parameters"]["grid"] = args.grid
    return doc, EXIT_OK


def cmd_check(args) -> tuple[dict, int]:
    if args.list or not args.name:
        return {"command": "check", "checks": sorted(CHECKS)}, EXIT_OK
    if args.name not in CHECKS:
        raise InputError(f"unknown check {args.name!r}; use --list")
    report = run_check(args.name, seed=args.seed, budget=args.budget)
    doc = {"command": "check", "parameters": {"seed": args.seed, "budget": args.budget}, **report.to_dict()}
    return doc, EXIT_OK if report.passed else EXIT_VIOLATION


def _fixture_text(name: str) -> str:
    return resources.files("behavmetric").joinpath("fixtures").joinpath(f"{name}.yaml").read_text(encoding="utf-8")


def _extra_fixtures() -> list:
    root = resources.files("behavmetric").joinpath("fixtures")
    names = sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))
    return [n for n in names if n not in _FIXTURES]


def cmd_examples(args) -> tuple[dict, int]:
    if args.name is None:
        items = []
        for name in _FIXTURES:
            system = parse_system(builtin_text(name))
            items.append({"name": name, "kind": system.kind, "description": system.description})
        for name in _extra_fixtures():
            doc = parse_inline(_fixture_text(name))
            items.append({"name": name, "kind": "transport", "description": doc.get("description", "")})
        return {"command": "examples", "examples": items}, EXIT_OK
    if args.name in _FIXTURES:
        text = builtin_text(args.name)
    elif args.name in _extra_fixtures():
        text = _fixture_text(args.name)
    else:
        raise InputError(f"unknown example {args.name!r}")
    if args.format == "tsv" or args.raw:
        sys.stdout.write(text)
        return None, EXIT_OK
    return {"command": "examples", "name": args.name, "document": parse_inline(text)}, EXIT_OK


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, default=None, help="convergence tolerance (default 1e-9)")
    common.add_argument("--max-iter", type=int, default=10000)
    common.add_argument("--format", choices=("json", "tsv"), default="json")
    common.add_argument("--seed", type=int, default=42)
    common.add_argument("--budget", type=int, default=200)
    common.add_argument("--top", default=None, help="expected top (1 or inf); must match the file")
    common.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a parameter")

    p = argparse.ArgumentParser(prog="behavmetric", description="Behavioral distances for finite coalgebras.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("transport", parents=[common], help="optimal transport between two distributions")
    s.add_argument("file", help="instance file, or - for stdin")
    s.add_argument("--sub", action="store_true", help="treat supply and demand as subdistributions")
    s.set_defaults(func=cmd_transport)

    s = sub.add_parser("bisim", parents=[common], help="bisimilarity pseudometric of a system")
    s.add_argument("file")
    s.add_argument("--trace", action="store_true", help="record the sup-norm change per iteration")
    s.set_defaults(func=cmd_bisim)

    s = sub.add_parser("trace", parents=[common], help="trace distance of two states of an nfa or pa")
    s.add_argument("file")
    s.add_argument("--from", dest="source", required=True)
    s.add_argument("--to", dest="target", required=True)
    s.set_defaults(func=cmd_trace)

    s = sub.add_parser("lift", parents=[common], help="one lifted distance between inline elements")
    s.add_argument("--functor", required=True,
                   choices=("distribution", "powerset", "input", "product", "coproduct", "squaring", "machine"))
    s.add_argument("--mode", default=None)
    s.add_argument("--metric", action="append",
                   help="base metric as inline YAML or @file; repeat once per functor argument")
    s.add_argument("--left", required=True, help="first element, inline YAML")
    s.add_argument("--right", required=True, help="second element, inline YAML")
    s.add_argument("--grid", type=float, default=None, help="also report the grid Kantorovich value")
    s.set_defaults(func=cmd_lift)

    s = sub.add_parser("check", parents=[common], help="run a named property check")
    s.add_argument("name", nargs="?")
    s.add_argument("--list", action="store_true")
    s.set_defaults(func=cmd_check)

    s = sub.add_parser("examples", parents=[common], help="list or dump builtin fixtures")
    s.add_argument("name", nargs="?")
    s.add_argument("--raw", action="store_true", help="dump the YAML text unchanged")
    s.set_defaults(func=cmd_examples)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    args.tol_given = args.tol is not None
    if args.tol is None:
        args.tol = 1e-9
    try:
        doc, code = args.func(args)
    except (InputError, SystemFormatError, SystemValidationError, ScaleError, ValueError, KeyError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else str(exc)
        print(f"error: {msg}", file=sys.stderr)
        return EXIT_INPUT
    if doc is not None:
        emit(doc, args.format)
    return code


def entry() -> None:
    sys.exit(main())
