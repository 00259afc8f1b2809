# cli.py - Command-line front end
"""
Command-line front end: read a declaration document, run one command, print a report.

Contains:
- Report: command, inputs, verdict, result, witnesses, certifications, budget usage
- run: command tokens + Document + SessionConfig -> Report
- to_json / render: exact serialization (rationals as "p/q" strings) in json or text
- main: argparse entry point; exit codes 0 computed, 1 false / not found, 2 input error, 3 budget

Usage:
    ominal [--mode odag|dlo] [--format json|text] [--budget-* N] [-v] DOCUMENT COMMAND ARGS...
    ominal fixtures [NAME]

DOCUMENT is a path, "-" for stdin, or fixture:NAME.
"""

import argparse
import json
import logging
import shlex
import sys
from dataclasses import dataclass, field, fields, is_dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np
import pandas as pd

from ominal.cells import AffineFunc, Infinity, certify, decompose, dimension
from ominal.config import (
    BATTERY_FORMULAS,
    DEFAULT_OUTPUT_FORMAT,
    DISJOINT_CEILING,
    MODES,
    OUTPUT_FORMATS,
    REPORT_SCHEMA,
    Budget,
    load_session_config,
)
from ominal.document import Document, parse_document, read_formula_arg, read_type_arg
from ominal.exceptions import EXIT_FALSE, EXIT_INPUT, EXIT_OK, OminalError, ParseError, PreconditionError, exit_code_for
from ominal.families import (
    DefinableFamily,
    complete_dd_cells,
    contains_family,
    extend_dd_to_type,
    extend_to_definable_type,
    format_family,
    is_complete_for,
    is_downward_directed,
    is_finer,
    is_nonempty_all,
    refine_within_type,
)
from ominal.fixtures import FIXTURE_PREFIX, FIXTURES, fixture_text
from ominal.logic import Formula, Term, Verdict, atom_count, conj, eliminate, entails, evaluate, is_satisfiable, neg, ordered_free_vars
from ominal.sexpr import format_formula, format_rational, format_term
from ominal.topology import (
    ENDPOINTS,
    ProbeBattery,
    ProbeReport,
    closure,
    compactness_probe_suite,
    curve_limit,
    interior,
    is_basis,
    uniform_curves_complete,
)
from ominal.transversal import (
    DisjointBound,
    TameTransversal,
    dual_shatter_lower_bound,
    fft_partition,
    finite_transversal,
    fip_transversal,
    interval_transversal,
    lift_meets,
    max_pairwise_disjoint,
    n_consistent,
    pq_property,
    product_lift,
    venn_count,
    verify_fft,
)
from ominal.types import DefinableType, format_function, format_type

logger = logging.getLogger(__name__)

COMPUTED = "computed"
NOT_FOUND = "not-found"
ERROR = "error"


# ===================== REPORTS =====================


@dataclass
class Report:
    """Outcome of one command; verdict is True/False for properties, "computed" or "not-found" otherwise."""

    command: str
    inputs: dict
    verdict: object = COMPUTED
    result: object = None
    witnesses: list = field(default_factory=list)
    certifications: dict = field(default_factory=dict)
    budget: dict = field(default_factory=dict)
    error: dict | None = None

    @property
    def exit_code(self) -> int:
        if self.error is not None:
            return self.error["exit_code"]
        if self.verdict is False or self.verdict == NOT_FOUND:
            return EXIT_FALSE
        return EXIT_OK

    def as_dict(self) -> dict:
        out = {
            "schema": REPORT_SCHEMA,
            "command": self.command,
            "inputs": to_json(self.inputs),
            "verdict": to_json(self.verdict),
            "result": to_json(self.result),
            "witnesses": to_json(self.witnesses),
            "certifications": to_json(self.certifications),
            "budget": to_json(self.budget),
        }
        if self.error is not None:
            out["error"] = to_json(self.error)
        return out


def to_json(value):
    """JSON-ready value: exact rationals as "p/q" strings, formulas, types and families as S-expressions."""
    match value:
        case None | bool() | str():
            return value
        case int():
            return value
        case Fraction():
            return format_rational(value)
        case np.generic():
            return to_json(value.item())
        case Infinity():
            return str(value)
        case Formula():
            return format_formula(value)
        case Term():
            return format_term(value)
        case AffineFunc():
            return format_function(value)
        case DefinableType():
            return format_type(value)
        case DefinableFamily():
            return format_family(value)
        case Verdict(holds, witness, detail):
            return {"holds": holds, "witness": to_json(witness), "detail": detail}
        case pd.DataFrame():
            return [to_json(row) for row in value.to_dict(orient="records")]
        case dict():
            return {str(k): to_json(v) for k, v in value.items()}
        case list() | tuple():
            return [to_json(v) for v in value]
    if is_dataclass(value):
        return {f.name: to_json(getattr(value, f.name)) for f in fields(value)}
    return str(value)


def render(report: Report, output_format=DEFAULT_OUTPUT_FORMAT) -> str:
    data = report.as_dict()
    if output_format == "json":
        return json.dumps(data, indent=2)
    lines = []
    for key, value in data.items():
        if key == "result" and isinstance(report.result, ProbeReport):
            lines.append("result:")
            lines.append(report.result.table.to_string(index=False))
            continue
        if isinstance(value, (dict, list)):
            if not value:
                continue
            lines.append(f"{key}:")
            items = value.items() if isinstance(value, dict) else enumerate(value)
            lines.extend(f"  {k}: {json.dumps(v)}" for k, v in items)
        else:
            lines.append(f"{key}: {value}")
    return "\n".join(lines)


# ===================== ARGUMENTS =====================


class _CommandParser(argparse.ArgumentParser):
    """ArgumentParser that raises ParseError instead of exiting."""

    def error(self, message):
        raise ParseError(f"{self.prog}: {message}")


def _point(text: str) -> tuple[Fraction, ...]:
    try:
        return tuple(Fraction(c) for c in text.split(","))
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected comma-separated rationals, got {text!r}") from None


def _command_parser() -> _CommandParser:
    parser = _CommandParser(prog="ominal", add_help=False)
    sub = parser.add_subparsers(dest="command", required=True)

    for name in ("qe", "sat", "dim"):
        p = sub.add_parser(name)
        p.add_argument("formula")
        if name == "dim":
            p.add_argument("--vars", nargs="+")
    p = sub.add_parser("entails")
    p.add_argument("formula")
    p.add_argument("other")
    p = sub.add_parser("decompose")
    p.add_argument("formulas", nargs="+")
    p.add_argument("--vars", nargs="+")

    check = sub.add_parser("check").add_subparsers(dest="property", required=True)
    for name in ("dd", "nonempty"):
        check.add_parser(name).add_argument("family")
    for name in ("finer", "complete"):
        p = check.add_parser(name)
        p.add_argument("family")
        p.add_argument("other")

    p = sub.add_parser("complete-cells")
    p.add_argument("family")
    p.add_argument("--battery")
    p.add_argument("--battery-size", type=int, default=None)
    p = sub.add_parser("refine-in-type")
    p.add_argument("type")
    p.add_argument("family")
    sub.add_parser("extend-type").add_argument("family")

    p = sub.add_parser("consistent")
    p.add_argument("family")
    p.add_argument("n", type=int)
    p = sub.add_parser("pq")
    p.add_argument("family")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p = sub.add_parser("disjoint-max")
    p.add_argument("family")
    p.add_argument("--k-max", type=int, help="largest k tried; without it the limit doubles up to the ceiling")

    fft = sub.add_parser("fft").add_subparsers(dest="kind", required=True)
    fft.add_parser("interval").add_argument("family")
    fft.add_parser("fip").add_argument("family")
    p = fft.add_parser("partition")
    p.add_argument("family")
    p.add_argument("m", type=int)
    p.add_argument("n", type=int)
    p = sub.add_parser("verify-fft")
    p.add_argument("family")
    p.add_argument("types", nargs="+")

    p = sub.add_parser("lift")
    p.add_argument("l", type=int)
    p.add_argument("family")
    p.add_argument("--points", nargs="+", type=_point)
    p = sub.add_parser("venn")
    p.add_argument("family")
    p.add_argument("points", nargs="+", type=_point)
    p = sub.add_parser("shatter")
    p.add_argument("n", type=int)
    p.add_argument("family")
    p.add_argument("--trials", type=int, default=None)

    topo = sub.add_parser("topo").add_subparsers(dest="operation", required=True)
    topo.add_parser("basis").add_argument("topology")
    for name in ("closure", "interior"):
        p = topo.add_parser(name)
        p.add_argument("topology")
        p.add_argument("set")
    p = topo.add_parser("probe")
    p.add_argument("topology")
    p.add_argument("battery")
    p = sub.add_parser("curve-limit")
    p.add_argument("topology")
    p.add_argument("curve")
    p.add_argument("--endpoint", choices=ENDPOINTS)
    return parser


# ===================== COMMANDS =====================


def _formula(doc, text):
    return read_formula_arg(doc, text)


def _variables(f: Formula, given):
    return tuple(given) if given else ordered_free_vars(f)


def _qe(args, doc, budget):
    f = _formula(doc, args.formula)
    budget.require("qe_atoms", atom_count(f))
    return {"result": eliminate(f, doc.mode)}


def _sat(args, doc, budget):
    f = _formula(doc, args.formula)
    budget.require("qe_atoms", atom_count(f))
    found = is_satisfiable(f, doc.mode)
    return {"verdict": bool(found), "witnesses": [found.witness] if found else []}


def _entails(args, doc, budget):
    f, g = _formula(doc, args.formula), _formula(doc, args.other)
    budget.require("qe_atoms", atom_count(f) + atom_count(g))
    holds = entails(f, g, doc.mode)
    witnesses = [] if holds else [is_satisfiable(conj(f, neg(g)), doc.mode).witness]
    return {"verdict": holds, "witnesses": witnesses}


def _decompose(args, doc, budget):
    targets = [_formula(doc, text) for text in args.formulas]
    variables = tuple(args.vars) if args.vars else ordered_free_vars(conj(*targets))
    D = decompose(targets, variables=variables, mode=doc.mode)
    report = certify(D)
    cells = [
        {
            "schema": cell.schema(),
            "dimension": cell.dimension(),
            "sample": cell.sample,
            "formula": cell.formula(),
            "in": [i for i, X in enumerate(targets) if evaluate(X, cell.sample, variables, doc.mode)],
        }
        for cell in D.cells
    ]
    certifications = {name: getattr(report, name) for name in ("disjoint", "covering", "compatible", "projections")}
    return {"result": {"variables": variables, "cells": cells}, "certifications": certifications}


def _dim(args, doc, budget):
    f = _formula(doc, args.formula)
    return {"result": dimension(f, _variables(f, args.vars), doc.mode)}


def _family(doc, name) -> DefinableFamily:
    return doc.get(name, "family")


def _verdict(verdict: Verdict) -> dict:
    witnesses = [] if verdict.witness is None else [verdict.witness]
    return {"verdict": verdict.holds, "witnesses": witnesses, "result": verdict.detail or None}


def _check(args, doc, budget):
    F = _family(doc, args.family)
    if args.property == "dd":
        return _verdict(is_downward_directed(F, budget))
    if args.property == "nonempty":
        return _verdict(is_nonempty_all(F, budget))
    if args.property == "finer":
        return _verdict(is_finer(F, _family(doc, args.other), budget))
    other = _family(doc, args.other) if doc.kind_of(args.other) == "family" else _formula(doc, args.other)
    return _verdict(is_complete_for(F, other, budget))


def _complete_cells(args, doc, budget):
    F = _family(doc, args.family)
    battery = doc.get(args.battery, "battery") if args.battery else None
    out = complete_dd_cells(F, battery, budget, args.battery_size or BATTERY_FORMULAS)
    result = {"family": out.family, "schema": out.schema, "trace": out.trace}
    return {"result": result, "certifications": {name: True for name in out.certificate}}


def _refine_in_type(args, doc, budget):
    p = read_type_arg(doc, args.type)
    out = refine_within_type(p, _family(doc, args.family), budget)
    checks = ("downward-directed", "members-in-type", "complete-for-input")
    return {"result": out, "certifications": {name: True for name in checks}}


def _extend_type(args, doc, budget):
    F = _family(doc, args.family)
    dd = is_downward_directed(F, budget)
    p = extend_dd_to_type(F, budget) if dd else extend_to_definable_type(F, budget)
    if p is None:
        return {"verdict": NOT_FOUND, "result": None, "certifications": {"downward-directed": dd.holds}}
    return {
        "result": p,
        "certifications": {"downward-directed": dd.holds, "members-in-type": contains_family(p, F, budget)},
    }


def _consistent(args, doc, budget):
    return _verdict(n_consistent(_family(doc, args.family), args.n, budget))


def _pq(args, doc, budget):
    return _verdict(pq_property(_family(doc, args.family), args.m, args.n, budget))


def _disjoint_max(args, doc, budget):
    F = _family(doc, args.family)
    bound: DisjointBound = max_pairwise_disjoint(F, args.k_max, budget)
    # without --k-max the limit doubles until a query is refuted
    k_max = bound.k
    while args.k_max is None and not bound.exact and k_max < DISJOINT_CEILING:
        k_max = min(2 * k_max, DISJOINT_CEILING)
        logger.info("%s: at least %d disjoint members, searching up to %d", F.label, bound.k, k_max)
        bound = max_pairwise_disjoint(F, k_max, budget)
    return {"result": {"k": bound.k, "exact": bound.exact}, "witnesses": list(bound.witness)}


def _transversal_result(F, T: TameTransversal, budget) -> dict:
    checked = verify_fft(F, T, budget)
    result = {"types": list(T.types), "size": len(T), "conditions": list(T.conditions)}
    if T.coordinates is not None:
        result["coordinates"] = T.coordinates
    return {"result": result, "certifications": {"verify_fft": checked.holds}}


def _fft(args, doc, budget):
    F = _family(doc, args.family)
    if args.kind == "interval":
        T = interval_transversal(F, budget)
        return {"verdict": NOT_FOUND} if T is None else _transversal_result(F, T, budget)
    if args.kind == "fip":
        return _transversal_result(F, fip_transversal(F, budget), budget)
    partition = fft_partition(F, args.m, args.n, budget)
    if partition is None:
        return {"verdict": NOT_FOUND}
    out = _transversal_result(F, partition.transversal, budget)
    out["result"]["classes"] = list(partition.classes)
    return out


def _verify_fft(args, doc, budget):
    F = _family(doc, args.family)
    T = TameTransversal(tuple(read_type_arg(doc, text) for text in args.types))
    return _verdict(verify_fft(F, T, budget))


def _lift(args, doc, budget):
    F = _family(doc, args.family)
    lifted = product_lift(F, args.l)
    if not args.points:
        return {"result": lifted}
    meets = lift_meets(F, args.l, args.points, budget)
    points = finite_transversal(F, args.points, args.l, budget)
    return {
        "verdict": meets,
        "result": lifted,
        "witnesses": [] if points is None else [list(points)],
        "certifications": {"brute-force-agrees": meets == (points is not None)},
    }


def _venn(args, doc, budget):
    return {"result": venn_count(_family(doc, args.family), args.points, budget)}


def _shatter(args, doc, budget):
    kwargs = {} if args.trials is None else {"trials": args.trials}
    return {"result": dual_shatter_lower_bound(_family(doc, args.family), args.n, budget=budget, **kwargs)}


def _topo(args, doc, budget):
    tau = doc.get(args.topology, "topology")
    if args.operation == "basis":
        return _verdict(is_basis(tau, budget))
    if args.operation in ("closure", "interior"):
        A = _formula(doc, args.set)
        return {"result": closure(tau, A) if args.operation == "closure" else interior(tau, A)}
    battery = doc.get(args.battery, "battery")
    if not isinstance(battery, ProbeBattery):
        raise PreconditionError(f"{args.battery!r} is not a probe battery (dd-closed / types / closed / curves)")
    report = compactness_probe_suite(tau, battery, budget)
    return {"verdict": report.consistent, "result": report, "certifications": {"summary": report.summary}}


def _curve_limit(args, doc, budget):
    tau = doc.get(args.topology, "topology")
    gamma = doc.get(args.curve, "curve")
    if gamma.index_vars:
        return _verdict(uniform_curves_complete(tau, gamma, budget))
    endpoints = (args.endpoint,) if args.endpoint else ENDPOINTS
    return {"result": {end: curve_limit(tau, gamma, end, budget) for end in endpoints}}


COMMANDS = {
    "qe": _qe,
    "sat": _sat,
    "entails": _entails,
    "decompose": _decompose,
    "dim": _dim,
    "check": _check,
    "complete-cells": _complete_cells,
    "refine-in-type": _refine_in_type,
    "extend-type": _extend_type,
    "consistent": _consistent,
    "pq": _pq,
    "disjoint-max": _disjoint_max,
    "fft": _fft,
    "verify-fft": _verify_fft,
    "lift": _lift,
    "venn": _venn,
    "shatter": _shatter,
    "topo": _topo,
    "curve-limit": _curve_limit,
}


def _error_report(command: str, inputs: dict, exc: Exception, budget: Budget | None) -> Report:
    error = {"type": type(exc).__name__, "message": str(exc), "exit_code": exit_code_for(exc)}
    if isinstance(exc, ParseError):
        error.update(line=exc.line, column=exc.column)
    witness = getattr(exc, "witness", None)
    return Report(
        command,
        inputs,
        ERROR,
        witnesses=[] if witness is None else [witness],
        budget=budget.usage() if budget is not None else {},
        error=error,
    )


def run(command, doc: Document, config, budget: Budget | None = None) -> Report:
    """
    Run one command against a document.

    Args:
        command: token list or string, e.g. "check dd crosses"
        doc: parsed Document
        config: SessionConfig
        budget: Budget (a fresh one from config.budgets by default)

    Returns:
        Report: library errors are caught and reported with their exit code
    """
    tokens = shlex.split(command) if isinstance(command, str) else list(command)
    text = " ".join(tokens)
    budget = budget if budget is not None else Budget(config.budgets)
    try:
        args = _command_parser().parse_args(tokens)
    except ParseError as exc:
        return _error_report(text, {}, exc, budget)
    inputs = {k: v for k, v in vars(args).items() if v is not None}
    logger.info("running %s", text)
    try:
        out = COMMANDS[args.command](args, doc, budget)
    except OminalError as exc:
        logger.info("%s failed: %s", text, exc)
        return _error_report(text, inputs, exc, budget)
    return Report(text, inputs, budget=budget.usage(), **{"verdict": COMPUTED, **out})


# ===================== ENTRY POINT =====================


def load_document(source: str, mode) -> Document:
    """Document from a path, "-" (stdin) or fixture:NAME."""
    if source == "-":
        text = sys.stdin.read()
    elif source.startswith(FIXTURE_PREFIX):
        text = fixture_text(source[len(FIXTURE_PREFIX):])
    else:
        try:
            text = Path(source).read_text(encoding="utf-8")
        except OSError as exc:
            raise ParseError(f"cannot read {source}: {exc.strerror}") from None
    return parse_document(text, mode)


def _parse_args(argv=None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="ominal",
        description="Exact definable sets, types, transversals and compactness probes over the rationals.",
    )
    parser.add_argument("--mode", choices=MODES, help="structure: odag (default, or OMINAL_MODE) or dlo")
    parser.add_argument("--format", dest="output_format", choices=OUTPUT_FORMATS)
    parser.add_argument("--budget-atoms", type=int, help="largest formula handed to one QE call")
    parser.add_argument("--budget-depth", type=int, help="recursion bound of combinatorial searches")
    parser.add_argument("--budget-disjoint", type=int, help="largest k probed for disjoint subfamilies")
    parser.add_argument("--budget-candidates", type=int, help="candidate types tried by type searches")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    parser.add_argument("document", help='path, "-" for stdin, fixture:NAME, or "fixtures" to list them')
    parser.add_argument("command", nargs=argparse.REMAINDER)
    return parser.parse_args(argv)


def _configure_logging(verbose: int):
    level = logging.WARNING if verbose == 0 else logging.INFO if verbose == 1 else logging.DEBUG
    logging.basicConfig(level=level, stream=sys.stderr, format="%(levelname)s %(name)s: %(message)s")


def _fixtures(names) -> int:
    if not names:
        print("\n".join(FIXTURES))
        return EXIT_OK
    if names[0] not in FIXTURES:
        print(f"unknown fixture {names[0]!r}; available: {', '.join(FIXTURES)}", file=sys.stderr)
        return EXIT_INPUT
    print(fixture_text(names[0]), end="")
    return EXIT_OK


def main(argv=None) -> int:
    args = _parse_args(argv)
    _configure_logging(args.verbose)
    if args.document == "fixtures":
        return _fixtures(args.command)
    command = " ".join(args.command)
    try:
        config = load_session_config(
            args.mode,
            args.output_format,
            qe_atoms=args.budget_atoms,
            search_depth=args.budget_depth,
            disjoint_probe=args.budget_disjoint,
            candidates=args.budget_candidates,
        )
    except OminalError as exc:
        print(render(_error_report(command, {}, exc, None)))
        return exit_code_for(exc)
    try:
        doc = load_document(args.document, config.mode)
    except OminalError as exc:
        report = _error_report(command, {"document": args.document}, exc, None)
    else:
        report = run(args.command, doc, config)
    print(render(report, config.output_format))
    return report.exit_code
