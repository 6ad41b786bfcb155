from decimal import Decimal
from pathlib import Path

import pytest
from hypothesis import given, settings

from deontic_va.empirical import Truth, parse_fact_key
from deontic_va.logic import AgentConst
from deontic_va.rulebase import (
    GENERALITY_NOTE,
    ScenarioError,
    alternatives,
    load_scenario,
    parse_scenario,
    rename_scenario_agents,
)

from strategies import scenarios

SCN = Path(__file__).resolve().parent.parent / "scenarios"

HEADER = """scenario t
agent a, b
predicate C1/1
predicate C8/1
action A1/1
"""


def errors(text):
    with pytest.raises(ScenarioError) as exc:
        parse_scenario(text)
    return exc.value


class TestParse:
    def test_theft(self):
        s = load_scenario(SCN / "theft.scn")
        assert len(s.plans) == 1
        p = s.plans[0]
        assert str(p) == "P1: a: C1(a) & C2(a) => A1(a)"
        assert s.facts.lookup(parse_fact_key("undermines(P1,C2(a))")) == (Truth.TRUE, "fact")
        assert s.closed_world and GENERALITY_NOTE in s.notes

    def test_pedestrian(self):
        s = load_scenario(SCN / "pedestrian.scn")
        assert [p.id for p in s.plans] == ["P13", "P14", "P12", "P15"]
        assert [a.name for a in s.agents] == ["a", "b", "c"]
        assert s.plan("P14").action.negated

    def test_bus_open_world(self):
        s = load_scenario(SCN / "bus.scn")
        assert not s.closed_world
        assert str(s.plan("P9")) == "P9: b: C6(b) & C7(b) & ~C8(b) => A5(b)"

    def test_world_override(self):
        assert load_scenario(SCN / "bus.scn", closed_world=True).closed_world

    def test_merge_utilities(self):
        s = load_scenario(SCN / "merge.scn")
        assert sorted(s.facts.utilities.values()) == [Decimal("0.2"), Decimal("0.9")]

    def test_survey_aggregated(self):
        s = load_scenario(SCN / "theft_survey.scn")
        assert query_text(s, "undermines(P1,C2(a))") is Truth.TRUE
        assert query_text(s, "undermines(P1,C1(a))") is Truth.FALSE
        (src,) = s.surveys
        assert src.records == 200

    def test_survey_thresholds_overridable(self):
        # 80/100 falls below a 0.9 threshold's deadband, 10/100 stays False
        s = load_scenario(SCN / "theft_survey.scn", theta=Decimal("0.9"), epsilon=Decimal("0.05"))
        assert query_text(s, "undermines(P1,C2(a))") is Truth.FALSE

    def test_explicit_fact_beats_survey(self, tmp_path):
        text = (SCN / "theft_survey.scn").read_text() + "fact undermines(P1,C2(a)) = unknown\n"
        (tmp_path / "theft_survey.csv").write_text((SCN / "theft_survey.csv").read_text())
        s = parse_scenario(text, base_dir=tmp_path)
        assert query_text(s, "undermines(P1,C2(a))") is Truth.UNKNOWN

    def test_override(self):
        s = parse_scenario(HEADER + "plan Q: a: C1(a) => A1(a)\n"
                           "fact override(a, box[a] P (C1(a) & C8(b))) = false\n")
        ((key, value),) = s.facts.overrides.items()
        assert key == ("a", "dia[a] ~P (C1(a) & C8(b))") and value is True

    def test_comments_and_blank_lines(self):
        s = parse_scenario("# c\n\n" + HEADER + "plan Q: a: C1(a) => A1(a)  # trailing\n")
        assert s.plans[0].id == "Q"


def query_text(s, key):
    return s.facts.lookup(parse_fact_key(key))[0]


class TestErrors:
    def test_contradictory_conditions(self):
        e = errors(HEADER + "plan Q: b: C8(b) & ~C8(b) => A1(b)\n")
        assert "contradictory" in str(e)
        assert e.diagnostics[0].line == 6

    def test_undeclared_symbol_named_with_line(self):
        e = errors(HEADER + "plan Q: a: C9(a) => A1(a)\n")
        assert "C9" in str(e) and "line 6" in str(e)

    def test_arity(self):
        assert "arity" in str(errors(HEADER + "plan Q: a: C1(a,b) => A1(a)\n"))

    def test_duplicate_plan_id(self):
        e = errors(HEADER + "plan Q: a: C1(a) => A1(a)\nplan Q: b: C1(b) => A1(b)\n")
        assert "duplicate" in str(e) and e.diagnostics[0].line == 7

    def test_kind_mismatch(self):
        assert errors(HEADER + "plan Q: a: A1(a) => C1(a)\n").diagnostics

    def test_undeclared_agent(self):
        assert "z" in str(errors(HEADER + "plan Q: z: C1(z) => A1(z)\n"))

    def test_agent_must_perform_action(self):
        assert errors(HEADER + "plan Q: a: C1(a) => A1(b)\n").diagnostics

    def test_undermines_foreign_condition(self):
        assert errors(HEADER + "plan Q: a: C1(a) => A1(a)\nfact undermines(Q,C8(b)) = true\n").diagnostics

    def test_all_errors_reported(self):
        e = errors(HEADER + "plan Q: a: C9(a) => A1(a)\nplan R: a: C1(a,a) => A1(a)\n")
        assert [d.line for d in e.diagnostics] == [6, 7]

    def test_syntax_position(self):
        e = errors(HEADER + "plan Q: a: C1(a) =>\n")
        assert e.diagnostics[0].line == 6

    def test_missing_scenario(self):
        assert "scenario" in str(errors("agent a\n"))

    def test_utility_out_of_range(self):
        assert errors(HEADER + "plan Q: a: C1(a) => A1(a)\nfact u(C1(a), A1(a)) = 1.5\n").diagnostics


class TestAlternatives:
    def test_merge(self):
        s = load_scenario(SCN / "merge.scn")
        assert [q.id for q in alternatives(s, s.plan("P3"))] == ["P3w"]

    def test_theft_none(self):
        s = load_scenario(SCN / "theft.scn")
        assert alternatives(s, s.plans[0]) == []

    def test_pedestrian(self):
        s = load_scenario(SCN / "pedestrian.scn")
        assert [q.id for q in alternatives(s, s.plan("P13"))] == ["P14"]
        assert alternatives(s, s.plan("P12")) == []

    def test_order_of_conditions_irrelevant(self):
        s = parse_scenario(HEADER + "action A2/1\nplan Q: a: C1(a) & C8(b) => A1(a)\n"
                           "plan R: a: C8(b) & C1(a) => A2(a)\n")
        assert [q.id for q in alternatives(s, s.plan("Q"))] == ["R"]

    @settings(max_examples=200)
    @given(scenarios())
    def test_symmetric_irreflexive(self, s):
        for p in s.plans:
            alts = alternatives(s, p)
            assert p not in alts
            for q in alts:
                assert p in alternatives(s, q)


def test_parse_deterministic():
    text = (SCN / "pedestrian.scn").read_text()
    assert parse_scenario(text) == parse_scenario(text)


def test_rename_agents():
    s = load_scenario(SCN / "bus.scn")
    r = rename_scenario_agents(s, {"a": "x1", "b": "y1"})
    assert [a.name for a in r.agents] == ["x1", "y1"]
    assert r.plan("P10").agent == AgentConst("x1")
    assert str(r.plan("P9")) == "P9: y1: C6(y1) & C7(y1) & ~C8(y1) => A5(y1)"
