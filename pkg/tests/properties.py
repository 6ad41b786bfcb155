"""Property checks shared by the unit tests and the acceptance suite."""

from fractions import Fraction

from deontic_va.empirical import FactBase, SurveyRecord, Truth, aggregate_survey, normalize_override
from deontic_va.evaluator import EvalContext, Evaluator, Overall, eval_formula
from deontic_va.logic import (
    AgentConst,
    BelieveNec,
    BelievePoss,
    Not,
    canonical_serialize,
    parse_formula,
    rename_agents,
)
from deontic_va.rulebase import Scenario, rename_scenario_agents
from deontic_va.testgen import generate_all

from strategies import SYMBOLS, random_formula

AGENTS_ONLY = Scenario("agents", tuple(AgentConst(a) for a in "abc"), SYMBOLS, ())


def round_trip_holds(f) -> bool:
    return parse_formula(canonical_serialize(f)) == f


def duality_holds(rng, scenario=AGENTS_ONLY) -> bool:
    """box[a] X and ~dia[a] ~X agree, with overrides on random modal atoms."""
    body = random_formula(rng, 4)
    agent = AgentConst(rng.choice("abc"))
    box = BelieveNec(agent, body)
    dual = Not(BelievePoss(agent, Not(body)))
    overrides = {}
    if rng.random() < 0.5:
        target = rng.choice([box, BelievePoss(agent, Not(body))])
        agent_name, text, value = normalize_override(target, rng.random() < 0.5)
        overrides[agent_name, text] = value
    fb = FactBase(rng.random() < 0.5, overrides=overrides)
    return eval_formula(box, fb, EvalContext(scenario)) is \
        eval_formula(dual, fb, EvalContext(scenario))


def verdicts_monotone(before: Scenario, after: Scenario) -> bool:
    """A refinement never flips Ethical and Unethical into each other."""
    for v0, v1 in zip(Evaluator(before).check_all(), Evaluator(after).check_all()):
        if v0.overall is not Overall.INDETERMINATE and v1.overall is not v0.overall:
            return False
    return True


def testgen_equivariant(s: Scenario, mapping: dict[str, str]) -> bool:
    renamed = rename_scenario_agents(s, mapping)
    before = [(p.id, k, rename_agents(f, mapping)) for p, k, f in generate_all(s)]
    after = [(p.id, k, f) for p, k, f in generate_all(renamed)]
    return before == after


testgen_equivariant.__test__ = False


def survey_records(key, yes: int, total: int):
    return [SurveyRecord(f"r{i}", key, i < yes) for i in range(total)]


def aggregation_oracle(yes: int, total: int, theta, epsilon) -> Truth:
    """Cross-multiplied integer comparison, independent of the library's arithmetic."""
    th, eps = Fraction(str(theta)), Fraction(str(epsilon))
    if yes * th.denominator * eps.denominator >= total * (th.numerator * eps.denominator +
                                                          eps.numerator * th.denominator):
        return Truth.TRUE
    if yes * th.denominator * eps.denominator <= total * (th.numerator * eps.denominator -
                                                          eps.numerator * th.denominator):
        return Truth.FALSE
    return Truth.UNKNOWN


def aggregation_holds(rng, key, other_key) -> bool:
    """Matches the oracle and is invariant under shuffling respondents."""
    theta, epsilon = rng.choice([("0.5", "0.05"), ("0.3", "0.1"), ("0.7", "0"), ("0.25", "0.2")])
    total = rng.randint(1, 60)
    yes = rng.randint(0, total)
    records = survey_records(key, yes, total) + survey_records(other_key, total - yes, total)
    shuffled = records[:]
    rng.shuffle(shuffled)
    got = aggregate_survey(records, theta, epsilon)
    return got == aggregate_survey(shuffled, theta, epsilon) and \
        got[key] is aggregation_oracle(yes, total, theta, epsilon)
