"""Shared helpers for the demo scripts."""

from pathlib import Path

from deontic_va import Evaluator, load_scenario
from deontic_va.testgen import generate_all

SCENARIOS = Path(__file__).resolve().parent.parent / "scenarios"


def load(name, **kwargs):
    return load_scenario(SCENARIOS / f"{name}.scn", **kwargs)


def show_propositions(s, plan_id=None):
    for p, kind, f in generate_all(s):
        if plan_id is None or p.id == plan_id:
            print(f"  {p.id:<5} {str(kind):<16} {f}")


def show_verdicts(s):
    for v in Evaluator(s).check_all():
        parts = ", ".join(f"{r.kind.principle.value}={r.value.name}" for r in v.results)
        print(f"  {v.plan_id:<5} {v.overall!s:<14} {parts}")
