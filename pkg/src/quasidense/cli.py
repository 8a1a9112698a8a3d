"""Command-line front end.

Exit status: 0 satisfiable or check passed, 1 unsatisfiable or check failed,
2 unknown, 64 usage error, 65 malformed formula or model file.
"""

from __future__ import annotations

import argparse
import json
import sys
from typing import Sequence

from .filtration import build_filtrated
from .formula import ParseError, TargetFormula, parse
from .kripke import (
    AmbiguousShortestPath, KLSpec, ModelFormatError, PointedModel, UnreachableWorld,
    model_from_json, model_to_dot, model_to_json,
)
from .oracle import Found, SearchBound, enumerate_models, MAX_ORACLE_WORLDS
from .solver import Sat, SolverConfig, Unsat, decide, verify_certificate
from .tableau import TableauConfig

EXIT_OK, EXIT_FAIL, EXIT_UNKNOWN, EXIT_USAGE, EXIT_DATA = 0, 1, 2, 64, 65


class UsageError(Exception):
    pass


class DataError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _kl(text: str) -> KLSpec:
    try:
        return KLSpec.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--kl", type=_kl, default=KLSpec.of((1, 2)),
                        help="density pairs as k:l[,k:l...] with k < l (default 1:2)")
    common.add_argument("--format", choices=("text", "json", "dot"), default="text")

    formula = argparse.ArgumentParser(add_help=False)
    formula.add_argument("formula", nargs="?", help="formula text, e.g. '<>p & [][]~p'")
    formula.add_argument("-f", "--formula-file", metavar="PATH",
                         help="read the formula from a file instead")

    p = _Parser(prog="quasidense", description="Satisfiability for K with density axioms.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", parents=[common, formula], help="decide satisfiability")
    s.add_argument("--max-worlds", type=_positive, default=TableauConfig.max_worlds)
    s.add_argument("--max-steps", type=_positive, default=TableauConfig.max_steps)
    s.add_argument("--trace", action="store_true", help="log rule applications to stderr")
    s.add_argument("-o", "--output", metavar="PATH", help="also write the model JSON here")

    c = sub.add_parser("check-model", parents=[common], help="verify a model against a formula")
    c.add_argument("model", help="model JSON file")
    c.add_argument("formula", nargs="?")
    c.add_argument("-f", "--formula-file", metavar="PATH")

    f = sub.add_parser("filtrate", parents=[common], help="path-filtrate a model for a formula")
    f.add_argument("model", help="model JSON file")
    f.add_argument("formula", nargs="?")
    f.add_argument("-f", "--formula-file", metavar="PATH")

    o = sub.add_parser("oracle-search", parents=[common, formula],
                       help="exhaustive search for a small model")
    o.add_argument("--max-worlds", type=_positive, default=MAX_ORACLE_WORLDS)
    return p


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise DataError(f"cannot read {path}: {exc.strerror}") from exc


def _formula(args):
    if (args.formula is None) == (args.formula_file is None):
        raise UsageError("give the formula exactly once, inline or with --formula-file")
    text = args.formula if args.formula is not None else _read(args.formula_file)
    try:
        return parse(text)
    except ParseError as exc:
        raise DataError(f"formula: {exc}") from exc


def _model(path: str) -> PointedModel:
    try:
        return model_from_json(_read(path))
    except ModelFormatError as exc:
        raise DataError(f"{path}: {exc}") from exc


def _render(pm: PointedModel, fmt: str) -> str:
    return model_to_dot(pm) if fmt == "dot" else model_to_json(pm)


def _cmd_solve(args, out) -> int:
    phi = _formula(args)
    trace = (lambda line: print(line, file=sys.stderr)) if args.trace else None
    config = SolverConfig(TableauConfig(max_worlds=args.max_worlds,
                                        max_steps=args.max_steps, trace=trace))
    verdict = decide(phi, args.kl, config)
    if isinstance(verdict, Sat):
        if args.output:
            with open(args.output, "w", encoding="utf-8") as fh:
                fh.write(model_to_json(verdict.model))
        if args.format == "json":
            doc = {"verdict": "SAT", "model": json.loads(model_to_json(verdict.model)),
                   "report": verdict.report.as_dict()}
            out.write(json.dumps(doc, indent=2) + "\n")
        else:
            out.write("SAT\n" + _render(verdict.model, args.format))
            out.write("report: " + json.dumps(verdict.report.as_dict()) + "\n")
        return EXIT_OK
    if isinstance(verdict, Unsat):
        word, code, extra = "UNSAT", EXIT_FAIL, {}
    else:
        word, code, extra = "UNKNOWN", EXIT_UNKNOWN, {"reason": verdict.reason}
    if args.format == "json":
        out.write(json.dumps({"verdict": word, **extra}, indent=2) + "\n")
    else:
        out.write(word + "\n")
        if extra:
            out.write(f"reason: {extra['reason']}\n")
    return code


def _cmd_check(args, out) -> int:
    pm = _model(args.model)
    phi = _formula(args)
    report = verify_certificate(pm, phi, args.kl)
    if args.format == "json":
        out.write(json.dumps(report.as_dict(), indent=2) + "\n")
    else:
        out.write(("ok" if report.ok else "failed") + "\n")
        out.write(f"kl_frame_ok: {str(report.kl_frame_ok).lower()}\n")
        out.write(f"root_satisfies_phi: {str(report.root_satisfies_phi).lower()}\n")
        if report.kl_violation is not None:
            k, l, x, y = report.kl_violation
            out.write(f"kl_violation: {x} reaches {y} in {k} steps but not in {l}\n")
    return EXIT_OK if report.ok else EXIT_FAIL


def _cmd_filtrate(args, out) -> int:
    pm = _model(args.model)
    phi = _formula(args)
    try:
        fm = build_filtrated(pm, TargetFormula(phi), args.kl)
    except (AmbiguousShortestPath, UnreachableWorld) as exc:
        raise DataError(f"{args.model}: {exc}") from exc
    if args.format == "text":
        out.write(model_to_json(fm.pm))
        for c in fm.classes:
            out.write(f"{c.name}: {' '.join(c.members)}\n")
    else:
        out.write(_render(fm.pm, args.format))
    return EXIT_OK


def _cmd_oracle(args, out) -> int:
    phi = _formula(args)
    if args.max_worlds > MAX_ORACLE_WORLDS:
        raise UsageError(f"--max-worlds is limited to {MAX_ORACLE_WORLDS} for exhaustive search")
    res = enumerate_models(phi, args.kl, SearchBound(args.max_worlds))
    if isinstance(res, Found):
        if args.format == "json":
            out.write(json.dumps({"found": True, "worlds": res.worlds,
                                  "model": json.loads(model_to_json(res.model))}, indent=2) + "\n")
        else:
            out.write(f"FOUND {res.worlds}\n" + _render(res.model, args.format))
        return EXIT_OK
    if args.format == "json":
        out.write(json.dumps({"found": False, "bound": res.bound}, indent=2) + "\n")
    else:
        out.write(f"NONE up to {res.bound} worlds\n")
    return EXIT_FAIL


_COMMANDS = {"solve": _cmd_solve, "check-model": _cmd_check,
             "filtrate": _cmd_filtrate, "oracle-search": _cmd_oracle}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = out or sys.stdout
    parser = _build_parser()
    try:
        args, extra = parser.parse_known_args(argv)
        # a positional given after options (``check-model m.json --kl 1:2 '<>p'``)
        if extra and getattr(args, "formula", "") is None and len(extra) == 1 \
                and not extra[0].startswith("-"):
            args.formula, extra = extra[0], []
        if extra:
            parser.error(f"unrecognized arguments: {' '.join(extra)}")
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _COMMANDS[args.command](args, out)
    except UsageError as exc:
        print(f"quasidense: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DataError as exc:
        print(f"quasidense: {exc}", file=sys.stderr)
        return EXIT_DATA


def entry() -> None:
    sys.exit(main())
