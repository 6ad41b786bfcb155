"""Command line front end.

Exit codes: 0 every assessed plan Ethical, 1 some plan Unethical, 2 none
Unethical but some Indeterminate, 3 parse, validation, IO or usage error.
"""

from __future__ import annotations

import argparse
import sys
from decimal import Decimal, InvalidOperation
from typing import Sequence

from . import __version__
from .evaluator import DEFAULT_MAX_DEPTH, Evaluator
from .logic import canonical_serialize
from .report import EXIT_ERROR, Report, explain_text
from .rulebase import DEFAULT_EPSILON, DEFAULT_THETA, Scenario, ScenarioError, load_scenario
from .testgen import Principle, generate_all


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def _decimal(text: str) -> Decimal:
    try:
        return Decimal(text)
    except InvalidOperation:
        raise argparse.ArgumentTypeError(f"not a decimal: {text!r}") from None


def _depth(text: str) -> int:
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("depth must be >= 0")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("path", help="scenario file")
    common.add_argument("--theta", type=_decimal, help=f"survey threshold (default {DEFAULT_THETA})")
    common.add_argument("--epsilon", type=_decimal,
                        help=f"survey deadband (default {DEFAULT_EPSILON})")
    world = common.add_mutually_exclusive_group()
    world.add_argument("--open-world", dest="closed_world", action="store_false", default=None)
    world.add_argument("--closed-world", dest="closed_world", action="store_true")

    parser = _Parser(prog="deontic-va", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("validate", parents=[common], help="parse and validate a scenario")

    gen = sub.add_parser("gen", parents=[common], help="print generated test propositions")
    gen.add_argument("plan", nargs="?", help="plan id")
    gen.add_argument("--principle", choices=[p.value for p in Principle])
    gen.add_argument("--against", metavar="PLAN", help="counterparty plan for autonomy")
    gen.add_argument("--all", action="store_true", help="every proposition of every plan")

    for name, help_ in (("check", "evaluate every plan"), ("explain", "trace one plan")):
        p = sub.add_parser(name, parents=[common], help=help_)
        if name == "explain":
            p.add_argument("plan", help="plan id")
        p.add_argument("--max-depth", type=_depth, default=DEFAULT_MAX_DEPTH)
        if name == "check":
            p.add_argument("--format", choices=("text", "json"), default="text")
    return parser


def _load(args) -> Scenario:
    return load_scenario(args.path, theta=args.theta, epsilon=args.epsilon,
                         closed_world=args.closed_world)


def cmd_validate(args, out) -> int:
    s = _load(args)
    world = "closed" if s.closed_world else "open"
    out.write(f"{args.path}: valid scenario {s.name!r} ({world} world)\n")
    out.write(f"  {len(s.agents)} agent(s), {len(s.symbols)} symbol(s), {len(s.plans)} plan(s), "
              f"{len(s.facts.facts())} fact(s), {len(s.facts.utilities)} utility value(s), "
              f"{len(s.facts.overrides)} override(s)\n")
    for note in s.notes:
        out.write(f"  note: {note}\n")
    return 0


def cmd_gen(args, out, err) -> int:
    s = _load(args)
    if args.all:
        plans = s.plans
    elif args.plan is None:
        err.write("gen: give a plan id or --all\n")
        return EXIT_ERROR
    else:
        try:
            plans = (s.plan(args.plan),)
        except KeyError:
            err.write(f"gen: unknown plan {args.plan!r}\n")
            return EXIT_ERROR
    if args.against is not None:
        try:
            s.plan(args.against)
        except KeyError:
            err.write(f"gen: unknown plan {args.against!r}\n")
            return EXIT_ERROR
    for p in plans:
        for _, kind, formula in generate_all(s, p):
            if args.principle and kind.principle.value != args.principle:
                continue
            if args.against and kind.counterparty not in (None, args.against):
                continue
            if args.against and args.principle is None and kind.counterparty is None:
                continue
            out.write(f"{p.id}\t{kind}\t{canonical_serialize(formula)}\n")
    return 0


def _effective(value, default):
    return value if value is not None else default


def cmd_check(args, out) -> int:
    s = _load(args)
    verdicts = tuple(Evaluator(s, args.max_depth).check_all())
    report = Report(s, verdicts, _effective(args.theta, DEFAULT_THETA),
                    _effective(args.epsilon, DEFAULT_EPSILON), args.max_depth)
    out.write(report.to_json() if args.format == "json" else report.to_text())
    return report.exit_code


def cmd_explain(args, out, err) -> int:
    s = _load(args)
    try:
        plan = s.plan(args.plan)
    except KeyError:
        err.write(f"explain: unknown plan {args.plan!r}\n")
        return EXIT_ERROR
    verdict = Evaluator(s, args.max_depth).check_plan(plan)
    out.write(explain_text(verdict, s))
    return 0


def main(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    args = build_parser().parse_args(argv)
    try:
        if args.command == "validate":
            return cmd_validate(args, out)
        if args.command == "gen":
            return cmd_gen(args, out, err)
        if args.command == "check":
            return cmd_check(args, out)
        return cmd_explain(args, out, err)
    except ScenarioError as exc:
        err.write(f"{exc}\n")
        return EXIT_ERROR
    except OSError as exc:
        err.write(f"{args.path}: {exc.strerror or exc}\n")
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
