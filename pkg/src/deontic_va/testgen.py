"""Compile action plans into their generalization, utility and autonomy tests."""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Iterator, Sequence

from .logic import (
    AgentVar,
    Atom,
    Available,
    BelieveNec,
    BelievePoss,
    ForAll,
    Formula,
    GEQ,
    Implies,
    Lit,
    Literal,
    Not,
    Or,
    Poss,
    TRUE,
    UtilityExpr,
    conjoin,
)
from .rulebase import ActionPlan, Scenario, alternatives

__all__ = [
    "ARROW_NOTE",
    "Principle",
    "TestKind",
    "fresh_variable",
    "gen_autonomy",
    "gen_generalization",
    "gen_utility",
    "generate_all",
    "universal_adoption",
]


ARROW_NOTE = (
    "universal adoption renders the plan arrow as material implication "
    "C(x) -> A(x); its justificatory content is not evaluated"
)


class Principle(enum.Enum):
    GENERALIZATION = "generalization"
    UTILITY = "utility"
    AUTONOMY = "autonomy"


@dataclass(frozen=True)
class TestKind:
    principle: Principle
    counterparty: str | None = None

    __test__ = False  # not a pytest class

    def __str__(self):
        if self.counterparty is None:
            return self.principle.value
        return f"{self.principle.value}[{self.counterparty}]"


def _lits(literals: Sequence[Literal]) -> list[Formula]:
    return [Lit(l) for l in literals]


def fresh_variable(p: ActionPlan) -> str:
    """A variable name not clashing with any agent named in the plan."""
    taken = {t.name for l in (*p.conditions, p.action) for t in l.args} | {p.agent.name}
    for name in ("x", "y", "z"):
        if name not in taken:
            return name
    i = 1
    while f"x{i}" in taken:
        i += 1
    return f"x{i}"


def universal_adoption(p: ActionPlan) -> ForAll:
    """forall x. (C(x) -> A(x)) with the plan's agent abstracted to ``x``.

    The plan arrow is rendered as material implication.
    """
    var = fresh_variable(p)

    def abstract(lit: Literal) -> Literal:
        args = tuple(AgentVar(var) if t == p.agent else t for t in lit.args)
        return Literal(Atom(lit.predicate, args), lit.negated)

    conds = conjoin(_lits([abstract(c) for c in p.conditions]))
    return ForAll(var, Implies(conds, Lit(abstract(p.action))))


def gen_generalization(p: ActionPlan) -> Formula:
    """dia[a] P (forall x. (C(x) -> A(x)) & C(a) & A(a))"""
    body = conjoin([universal_adoption(p), *_lits(p.conditions), Lit(p.action)])
    return BelievePoss(p.agent, Poss(body))


def gen_utility(p: ActionPlan, cands: Sequence[ActionPlan]) -> Formula:
    """dia[a] of ``E(q) -> u(C, A) >= u(C, A_q)`` over every candidate ``q``.

    The second-order quantifier over actions is expanded over the declared
    candidates; with none the test is ``TRUE``.
    """
    if not cands:
        return TRUE
    mine = UtilityExpr(p.conditions, p.action)
    parts = [Implies(Available(q.id), GEQ(mine, UtilityExpr(p.conditions, q.action)))
             for q in cands]
    return BelievePoss(p.agent, conjoin(parts))


def gen_autonomy(p: ActionPlan, q: ActionPlan) -> Formula:
    """dia[a] P (A & A') | ~box[a] P (C & C')"""
    if p.agent == q.agent:
        raise ValueError(f"autonomy is tested between different agents; {p.id} and {q.id} "
                         f"both belong to {p.agent}")
    reasons = list(dict.fromkeys((*p.conditions, *q.conditions)))
    return Or((
        BelievePoss(p.agent, Poss(conjoin([Lit(p.action), Lit(q.action)]))),
        Not(BelieveNec(p.agent, Poss(conjoin(_lits(reasons))))),
    ))


def generate_all(s: Scenario, plan: ActionPlan | None = None
                 ) -> Iterator[tuple[ActionPlan, TestKind, Formula]]:
    """Every test proposition, in plan declaration order."""
    for p in s.plans if plan is None else (plan,):
        yield p, TestKind(Principle.GENERALIZATION), gen_generalization(p)
        yield p, TestKind(Principle.UTILITY), gen_utility(p, alternatives(s, p))
        for q in s.plans:
            if q.agent != p.agent:
                yield p, TestKind(Principle.AUTONOMY, q.id), gen_autonomy(p, q)
