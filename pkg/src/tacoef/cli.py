"""Command-line front end.

Every subcommand writes ``key: value`` records to stdout (readable with
:func:`tacoef.textio.read_report`), except ``print`` and ``compile`` which
write an automaton document.  Exit status: 0 on success, 1 on a negative
verdict, 2 on usage or input errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from typing import Iterable, Sequence

from . import lemmas
from .core import apply_run, initial_configuration
from .coverability import Covered, SearchBounds, ta_covers
from .errors import DocumentError, RuleNotEnabled, TAError
from .models import DEFAULT_TARGETS, MODEL_NAMES, builtin_model
from .pad import (
    bounded_validity,
    format_formula,
    general_divisibility_valid,
    lift_general_divisibility,
    lifted_bounds,
    parse_formula,
    parse_poly,
)
from .reduction import compile_formula, nonneg_to_general
from .sketch import instantiate
from .synthesis import Candidate, EvidenceReport, Mode, SynthesisQuery, synthesize
from .textio import format_report, parse_ta, print_ta

OK, NEGATIVE, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _fmt(mapping) -> str:
    return ",".join(f"{k}={v}" for k, v in mapping.items()) or "(empty)"


def _pairs(items: Iterable[str] | None) -> dict[str, int]:
    """``["a=1,b=2", "c=-1"]`` -> ``{"a": 1, "b": 2, "c": -1}``."""
    out: dict[str, int] = {}
    for item in items or ():
        for part in item.split(","):
            name, sep, value = part.strip().partition("=")
            if not sep or not name:
                raise UsageError(f"expected name=value, got {part!r}")
            try:
                out[name.strip()] = int(value)
            except ValueError:
                raise UsageError(f"not an integer: {value!r}") from None
    return out


def _emit(records) -> None:
    sys.stdout.write(format_report(records))


# -- model loading -----------------------------------------------------------


def _add_model_args(p: argparse.ArgumentParser, target: bool = False) -> None:
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--model", choices=MODEL_NAMES, help="built-in model")
    src.add_argument("--file", help="automaton document ('-' for stdin)")
    p.add_argument("--set", action="append", metavar="NAME=VALUE", help="assign indeterminates")
    if target:
        p.add_argument("--target", help="location to cover (default depends on the model)")


def _load(args):
    if args.model:
        return builtin_model(args.model)
    text = sys.stdin.read() if args.file == "-" else _read_file(args.file)
    return parse_ta(text)


def _read_file(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


def _target(args) -> str:
    if args.target:
        return args.target
    if args.model:
        return DEFAULT_TARGETS[args.model]
    raise UsageError("--target is required with --file")


def _automaton(args):
    """The loaded model instantiated with ``--set``."""
    return instantiate(_load(args), _pairs(args.set))


# -- subcommands -------------------------------------------------------------


def cmd_validate(args) -> int:
    try:
        sketch = _load(args)
    except DocumentError as exc:
        _emit([("status", "invalid")] + [("diagnostic", f"line {ln}: {msg}" if ln else msg) for ln, msg in exc.diagnostics])
        return NEGATIVE
    _emit([
        ("status", "valid"),
        ("locations", len(sketch.locations)),
        ("rules", len(sketch.rules)),
        ("indeterminates", " ".join(sketch.indeterminates()) or "(none)"),
        ("acyclic", str(sketch.is_acyclic()).lower()),
    ])
    return OK


def cmd_print(args) -> int:
    if args.set:
        sys.stdout.write(print_ta(_automaton(args)))
    else:
        sys.stdout.write(print_ta(_load(args)))
    return OK


def cmd_simulate(args) -> int:
    ta = _automaton(args)
    c0 = initial_configuration(ta, _pairs(args.start), _pairs(args.params))
    run = args.run.split() if args.run else []
    try:
        end = apply_run(ta, c0, run)
    except RuleNotEnabled as exc:
        _emit([("result", "blocked"), ("rule", exc.rule_id), ("index", exc.index)])
        return NEGATIVE
    records = [
        ("result", "ok"),
        ("steps", len(run)),
        ("kappa", _fmt(end.kappa)),
        ("shared", _fmt(end.g)),
    ]
    records += [("covers", loc) for loc in ta.locations if end.covers(loc)]
    _emit(records)
    return OK


def _bounds(args) -> SearchBounds:
    return SearchBounds(
        param_bound=args.param_bound,
        horizon=args.horizon,
        max_configs=args.max_configs,
        fixed=_pairs(args.params),
    )


def _cover_records(v) -> list:
    if isinstance(v, Covered):
        return [
            ("result", "covered"),
            ("params", _fmt(v.p)),
            ("start", _fmt({k: n for k, n in v.kappa0.items() if n})),
            ("run", " ".join(v.run) or "(empty)"),
            ("length", len(v.run)),
        ]
    records = [
        ("result", "not-covered"),
        ("param-bound", v.bounds.param_bound),
        ("exact", str(v.exact).lower()),
        ("valuations-checked", v.valuations_checked),
        ("start-points-checked", v.start_points),
    ]
    return records + [("diagnostic", d) for d in v.diagnostics]


def cmd_cover(args) -> int:
    ta = _automaton(args)
    verdict = ta_covers(ta, _target(args), _bounds(args), jobs=args.jobs)
    _emit(_cover_records(verdict))
    return OK if isinstance(verdict, Covered) else NEGATIVE


def cmd_compile(args) -> int:
    out = compile_formula(parse_formula(args.formula))
    sketch = out.sketch
    if args.general:
        sketch, _ = nonneg_to_general(sketch, out.target)
    sys.stdout.write(print_ta(sketch))
    return OK


def cmd_oracle(args) -> int:
    f = parse_formula(args.formula)
    valid = bounded_validity(f, args.bx, args.by)
    _emit([
        ("formula", format_formula(f)),
        ("bx", args.bx),
        ("by", args.by),
        ("valid-within-bounds", str(valid).lower()),
    ])
    return OK if valid else NEGATIVE


def cmd_lift(args) -> int:
    f, g = parse_poly(args.divisor), parse_poly(args.dividend)
    n, m = max(f.max_x, g.max_x), g.max_y
    lifted = lift_general_divisibility(f, g, n, m)
    records = [("lifted", format_formula(lifted))]
    if args.check is None:
        _emit(records)
        return OK
    direct = general_divisibility_valid(f, g, n, m, args.check, args.check)
    bx, by = lifted_bounds(f, g, n, m, args.check, args.check)
    via_lift = bounded_validity(lifted, bx, by)
    records += [
        ("bound", args.check),
        ("direct", str(direct).lower()),
        ("lifted-valid", str(via_lift).lower()),
        ("agree", str(direct == via_lift).lower()),
    ]
    _emit(records)
    return OK if direct == via_lift else NEGATIVE


def _grid_record(r: lemmas.GridResult) -> tuple[str, str]:
    status = "agree" if r.agree else f"disagree ({len(r.disagreements)})"
    return "check", f"{r.label} | points={r.points} true={r.true_points} {status}"


def cmd_lemma_check(args) -> int:
    suites = ("lemma1", "lemma2", "third", "escape", "monotonicity") if args.suite == "all" else (args.suite,)
    records = []
    ok = True
    for suite in suites:
        records.append(("suite", suite))
        results: list[lemmas.GridResult] = []
        if suite == "lemma1":
            results = [lemmas.check_atom(lemmas.parse_atom(a)) for a in lemmas.ATOM_CORPUS]
        elif suite == "lemma2":
            results = [lemmas.check_disjunct(lemmas.parse_disjunct(d)) for d in lemmas.DISJUNCT_CORPUS]
        elif suite == "third":
            results = [lemmas.example_third_phase(), lemmas.check_third_phase(lemmas.example_formula())]
        elif suite == "escape":
            results = [lemmas.check_escape(compile_formula(lemmas.example_formula()))]
        elif suite == "monotonicity":
            done, failures = lemmas.check_monotonicity(args.trials, args.seed)
            records.append(("check", f"monotonicity | trials={done} failures={len(failures)}"))
            ok = ok and not failures
        for r in results:
            records.append(_grid_record(r))
            ok = ok and r.agree
    records.append(("result", "pass" if ok else "fail"))
    _emit(records)
    return OK if ok else NEGATIVE


def cmd_synth(args) -> int:
    sketch = _load(args)
    target = _target(args)
    if args.general:
        sketch, target = nonneg_to_general(sketch, target)
    bounds = _bounds(args)
    q = SynthesisQuery(sketch, target, Mode(args.mode), args.assign_bound, bounds, args.jobs)
    verdict = synthesize(q)
    records = []
    for key, w in verdict.counterexamples.items():
        mu = ",".join(f"{k}={v}" for k, v in key) or "(empty)"
        records.append(("refuted", f"{mu} by params {_fmt(w.p)} start {_fmt({k: n for k, n in w.kappa0.items() if n})} run {' '.join(w.run) or '(empty)'}"))
    records += [("skipped", s) for s in verdict.skipped]
    if isinstance(verdict, Candidate):
        head = [("result", f"candidate {_fmt(verdict.mu)}")]
        evidence = EvidenceReport(verdict.mu, True, verdict.evidence).records()
        _emit(head + records + evidence)
        return OK
    _emit([("result", "exhausted"), ("assign-bound", verdict.bound)] + records)
    return NEGATIVE


# -- argument parsing ----------------------------------------------------------


def _add_search_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--param-bound", type=int, default=6, help="max value per parameter (default 6)")
    p.add_argument("--horizon", type=int, help="max run length (required for cyclic automata)")
    p.add_argument("--max-configs", type=int, default=200_000, help="state cap per search")
    p.add_argument("--params", action="append", metavar="NAME=VALUE", help="pin parameters instead of sweeping")
    p.add_argument("--jobs", type=int, default=1, help="worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tacoef", description="Threshold automata coefficient tools.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check an automaton document")
    _add_model_args(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("print", help="print the canonical document")
    _add_model_args(p)
    p.set_defaults(func=cmd_print)

    p = sub.add_parser("simulate", help="apply a run to an initial configuration")
    _add_model_args(p)
    p.add_argument("--params", action="append", required=True, metavar="NAME=VALUE")
    p.add_argument("--start", action="append", required=True, metavar="LOC=COUNT")
    p.add_argument("--run", default="", help="space-separated rule ids")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("cover", help="bounded coverability check")
    _add_model_args(p, target=True)
    _add_search_args(p)
    p.set_defaults(func=cmd_cover)

    p = sub.add_parser("compile", help="compile a formula into a sketch")
    p.add_argument("--formula", required=True)
    p.add_argument("--general", action="store_true", help="add the negative-coefficient entry gadget")
    p.set_defaults(func=cmd_compile)

    p = sub.add_parser("oracle", help="bounded validity of a formula")
    p.add_argument("--formula", required=True)
    p.add_argument("--bx", type=int, default=3)
    p.add_argument("--by", type=int, default=3)
    p.set_defaults(func=cmd_oracle)

    p = sub.add_parser("lift", help="rewrite f | g into the fragment")
    p.add_argument("--divisor", required=True, help="polynomial over x<i>")
    p.add_argument("--dividend", required=True, help="polynomial over x<i>, y<i>")
    p.add_argument("--check", type=int, metavar="B", help="compare lifted and direct validity on [0, B]")
    p.set_defaults(func=cmd_lift)

    p = sub.add_parser("lemma-check", help="grid equivalence suites for the gadgets")
    p.add_argument("--suite", choices=("lemma1", "lemma2", "third", "escape", "monotonicity", "all"), default="all")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_lemma_check)

    p = sub.add_parser("synth", help="search for coefficients that avoid the target")
    _add_model_args(p, target=True)
    p.add_argument("--mode", choices=[m.value for m in Mode], default=Mode.NONNEGATIVE.value)
    p.add_argument("--assign-bound", type=int, default=2)
    p.add_argument("--general", action="store_true", help="apply the negative-coefficient entry gadget first")
    _add_search_args(p)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, TAError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":
    sys.exit(main())
