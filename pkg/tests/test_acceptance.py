"""Exit criteria. Each test carries its criterion number; see conftest for the summary."""

import io
import os
import random
import subprocess
import sys
import time
from decimal import Decimal
from pathlib import Path

import pytest

from deontic_va.cli import main
from deontic_va.empirical import FactBase, Truth, aggregate_survey, parse_fact_key
from deontic_va.evaluator import EvalContext, Evaluator, Overall, check_autonomy, eval_formula
from deontic_va.logic import BelieveNec, BelievePoss, ForAll, Not, Or, Poss, parse_formula
from deontic_va.rulebase import load_scenario, parse_scenario
from deontic_va.testgen import Principle

from properties import (
    aggregation_holds,
    duality_holds,
    round_trip_holds,
    survey_records,
    testgen_equivariant,
    verdicts_monotone,
)
from strategies import random_formula, random_refinement, random_scenario

SCN = Path(__file__).resolve().parent.parent / "scenarios"
T, F, U = Truth.TRUE, Truth.FALSE, Truth.UNKNOWN


def criterion(number, title):
    return pytest.mark.acceptance(criterion=number, title=title)


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    return main([str(a) for a in argv], out, err), out.getvalue()


def verdicts(s):
    return {v.plan_id: v for v in Evaluator(s).check_all()}


@criterion(1, "theft: Unethical via generalization; closed world without the fact passes")
def test_theft():
    start = time.perf_counter()
    code, out = run("check", SCN / "theft.scn")
    elapsed = time.perf_counter() - start
    assert code == 1 and "verdict: Unethical" in out
    assert elapsed < 1.0, f"check took {elapsed:.3f}s"

    s = load_scenario(SCN / "theft.scn")
    v = verdicts(s)["P1"]
    assert v.overall is Overall.UNETHICAL
    assert v.result(Principle.GENERALIZATION).value is F

    stripped = s.with_facts(FactBase(closed_world=True))
    assert verdicts(stripped)["P1"].result(Principle.GENERALIZATION).value is T


@criterion(2, "ambulance: undermining fact makes generalization False, Unethical")
def test_ambulance():
    v = verdicts(load_scenario(SCN / "ambulance.scn"))["P4"]
    assert v.result(Principle.GENERALIZATION).value is F
    assert v.overall is Overall.UNETHICAL


MERGE = (SCN / "merge.scn").read_text()


@criterion(3, "merge: immediate fails utility, wait passes, for 100+ random utility pairs")
def test_merge_random_utilities():
    rng = random.Random(20240603)
    pairs = 0
    while pairs < 150:
        low, high = sorted(Decimal(rng.randint(0, 1000)) / 1000 for _ in range(2))
        if low == high:
            continue
        text = MERGE.replace("A3(a)) = 0.2", f"A3(a)) = {low}").replace("A4(a)) = 0.9",
                                                                       f"A4(a)) = {high}")
        s = parse_scenario(text)
        assert s.facts.utilities[(s.plan("P3").condition_set, s.plan("P3").action)] == low
        v = verdicts(s)
        assert v["P3"].result(Principle.UTILITY).value is F, (low, high)
        assert v["P3w"].result(Principle.UTILITY).value is T, (low, high)
        pairs += 1
    assert pairs >= 100


@criterion(4, "bus stop: autonomy True through the syntactic second disjunct")
def test_bus():
    s = load_scenario(SCN / "bus.scn")
    assert not s.facts.compatible
    r = check_autonomy(s, s.plan("P10"))
    (part,) = r.parts
    assert part.value is T and r.value is T
    first, second = part.proposition.children
    assert eval_formula(first, s.facts, EvalContext(s)) is U
    assert eval_formula(second, s.facts, EvalContext(s)) is T
    assert any(e.source == "syntactic" and e.value is F for e in part.trace)


@criterion(5, "pedestrian: brake Ethical, no-brake Unethical, only brake survives")
def test_pedestrian():
    s = load_scenario(SCN / "pedestrian.scn")
    v = verdicts(s)
    assert v["P13"].overall is Overall.ETHICAL
    assert v["P14"].overall is Overall.UNETHICAL
    part = next(p for p in v["P14"].result(Principle.AUTONOMY).parts
                if p.kind.counterparty == "P12")
    first, second = part.proposition.children
    assert eval_formula(first, s.facts, EvalContext(s)) is F
    assert eval_formula(second, s.facts, EvalContext(s)) is F
    code, out = run("check", SCN / "pedestrian.scn")
    assert "surviving plans: a: P13;" in out


GOLDEN = {
    ("theft", "P1", "generalization"):
        "dia[a] P (forall x. (C1(x) & C2(x) -> A1(x)) & C1(a) & C2(a) & A1(a))",
    ("ambulance", "P4", "generalization"):
        "dia[a] P (forall x. (C3(x) -> A2(x)) & C3(a) & A2(a))",
    ("merge", "P3", "utility"):
        "dia[a] (E(P3w) -> u(C4(a), C5(a), A3(a)) >= u(C4(a), C5(a), A4(a)))",
    ("bus", "P10", "autonomy[P9]"):
        "dia[a] P (A6(a,b) & A5(b)) | ~box[a] P (C8(b) & C9(b) & C6(b) & C7(b) & ~C8(b))",
    ("pedestrian", "P13", "autonomy[P15]"):
        "dia[a] P (A7(a) & A9(c)) | ~box[a] P (C10(a,b) & C11(a,c) & C13(c))",
    ("pedestrian", "P14", "autonomy[P12]"):
        "dia[a] P (~A7(a) & A8(b)) | ~box[a] P (C10(a,b) & C11(a,c) & C12(b))",
}


def _count(f, cls):
    n = isinstance(f, cls)
    for child in getattr(f, "children", ()):
        n += _count(child, cls)
    for attr in ("body", "antecedent", "consequent"):
        if hasattr(f, attr):
            n += _count(getattr(f, attr), cls)
    return n


@criterion(6, "golden gen output with verified proposition shapes")
@pytest.mark.parametrize("name,plan,kind", sorted(GOLDEN))
def test_golden(name, plan, kind):
    code, out = run("gen", SCN / f"{name}.scn", plan)
    assert code == 0
    lines = {k: text for _, k, text in (line.split("\t") for line in out.splitlines())}
    assert lines[kind] == GOLDEN[name, plan, kind]
    f = parse_formula(lines[kind])
    if kind == "generalization":
        assert (_count(f, BelievePoss), _count(f, Poss), _count(f, ForAll)) == (1, 1, 1)
    elif kind.startswith("autonomy"):
        assert isinstance(f, Or) and len(f.children) == 2
        assert isinstance(f.children[1], Not) and isinstance(f.children[1].body, BelieveNec)
    else:
        assert isinstance(f, BelievePoss) and _count(f, BelievePoss) == 1


CASES = 1000
CYCLE = """scenario cycle
world {world}
agent a, b
predicate C1/1
predicate C2/1
action X/1
action Y/1
plan PA: a: C1(a) => X(a)
plan QB: b: C2(b) => Y(b)
"""


def _suite_round_trip(rng):
    return all(round_trip_holds(random_formula(rng, 6)) for _ in range(CASES))


def _suite_duality(rng):
    return all(duality_holds(rng) for _ in range(CASES))


def _suite_monotonicity(rng):
    for _ in range(CASES):
        s = random_scenario(rng)
        if not verdicts_monotone(s, s.with_facts(random_refinement(rng, s))):
            return False
    return True


def _suite_equivariance(rng):
    for _ in range(CASES):
        s = random_scenario(rng)
        perm = rng.sample("abc", 3)
        if not testgen_equivariant(s, dict(zip("abc", perm))):
            return False
    return True


def _suite_survey(rng):
    key = parse_fact_key("undermines(P1,C2(a))")
    other = parse_fact_key("compatible(A1(a),A2(b))")
    fixed = [(80, 100, T), (50, 100, U), (0, 10, F)]
    for yes, total, expected in fixed:
        if aggregate_survey(survey_records(key, yes, total))[key] is not expected:
            return False
    return all(aggregation_holds(rng, key, other) for _ in range(CASES))


def _suite_cycle(rng):
    for _ in range(CASES):
        text = CYCLE.format(world=rng.choice(["open", "closed"]))
        value = rng.choice(["true", "false", "unknown"])
        text += f"fact compatible(X(a),Y(b)) = {value}\n"
        if rng.random() < 0.5:
            text += f"fact undermines(QB,C2(b)) = {rng.choice(['true', 'false'])}\n"
        s = parse_scenario(text)
        depth = rng.randint(0, 12)
        r = check_autonomy(s, s.plan(rng.choice(["PA", "QB"])), depth)
        if not any(e.source == "recursion-presumption" for e in r.trace):
            return False
    return True


SUITES = {
    "serialize/parse round-trip": _suite_round_trip,
    "dia/box duality": _suite_duality,
    "monotonicity under refinement": _suite_monotonicity,
    "testgen renaming equivariance": _suite_equivariance,
    "survey permutation and deadband": _suite_survey,
    "2-cycle termination with presumption": _suite_cycle,
}


@criterion(7, f"property suites, {CASES} cases each, under 10 s in total")
def test_property_suites(capsys):
    timings = {}
    for i, (name, suite) in enumerate(SUITES.items()):
        start = time.perf_counter()
        assert suite(random.Random(1000 + i)), name
        timings[name] = time.perf_counter() - start
    total = sum(timings.values())
    with capsys.disabled():
        for name, secs in timings.items():
            print(f"\n  {name:<40} {secs:6.2f}s", end="")
        print(f"\n  {'total':<40} {total:6.2f}s")
    assert total < 10.0, f"property suites took {total:.2f}s"


@criterion(8, "check --format json is byte-identical across runs")
@pytest.mark.parametrize("path", sorted(SCN.glob("*.scn")), ids=lambda p: p.stem)
def test_determinism(path):
    outputs = []
    for seed in ("1", "2"):
        env = dict(os.environ, PYTHONHASHSEED=seed)
        proc = subprocess.run([sys.executable, "-m", "deontic_va", "check", str(path),
                               "--format", "json"], capture_output=True, env=env)
        assert proc.returncode in (0, 1, 2), proc.stderr
        outputs.append(proc.stdout)
    assert outputs[0] == outputs[1]
