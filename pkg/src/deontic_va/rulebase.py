"""Scenarios: agents, declared symbols, action plans and their fact base.

A scenario file is line oriented (full grammar in ``docs/grammar.md``)::

    scenario theft
    world closed
    agent a
    predicate C1/1 "Agent would like to possess an item on display in a shop"
    predicate C2/1 "Agent can get away with stealing the item"
    action A1/1 "Agent will steal the item"
    plan P1: a: C1(a) & C2(a) => A1(a)
    fact undermines(P1,C2(a)) = true
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Mapping

from .empirical import (
    CompatibleKey,
    CopossibleKey,
    FactBase,
    FactKey,
    SurveyError,
    Truth,
    UnderminesKey,
    aggregate_survey,
    normalize_override,
    parse_fact_key,
    read_survey_csv,
)
from .logic import (
    AgentConst,
    AgentVar,
    Atom,
    BelieveNec,
    BelievePoss,
    FormulaError,
    Literal,
    TokenStream,
    complementary,
    free_vars,
    parse_formula,
    parse_literal,
    tokenize,
)

__all__ = [
    "ActionPlan",
    "Diagnostic",
    "GENERALITY_NOTE",
    "Scenario",
    "ScenarioError",
    "SurveySource",
    "SymbolDecl",
    "alternatives",
    "load_scenario",
    "parse_scenario",
    "rename_scenario_agents",
]

DEFAULT_THETA = Decimal("0.5")
DEFAULT_EPSILON = Decimal("0.05")

GENERALITY_NOTE = (
    "not enforced: plan reasons should be the most general set of conditions "
    "the agent takes as justifying the action"
)


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self):
        return f"line {self.line}, column {self.column}: {self.message}"


class ScenarioError(ValueError):
    """Parse or validation failure; ``diagnostics`` lists every problem found."""

    def __init__(self, diagnostics: list[Diagnostic], source: str = "<scenario>"):
        self.diagnostics = sorted(diagnostics, key=lambda d: (d.line, d.column))
        self.source = source
        super().__init__("\n".join(f"{source}: {d}" for d in self.diagnostics))


@dataclass(frozen=True)
class SymbolDecl:
    name: str
    kind: str  # "predicate" or "action"
    arity: int
    doc: str = ""


@dataclass(frozen=True)
class ActionPlan:
    """``conditions => action`` adopted by ``agent``."""

    id: str
    agent: AgentConst
    conditions: tuple[Literal, ...]
    action: Literal

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))

    @property
    def condition_set(self) -> frozenset[Literal]:
        return frozenset(self.conditions)

    def __str__(self):
        conds = " & ".join(str(c) for c in self.conditions)
        return f"{self.id}: {self.agent}: {conds} => {self.action}"

    def renamed(self, mapping: Mapping[str, str]) -> "ActionPlan":
        return ActionPlan(self.id, AgentConst(mapping.get(self.agent.name, self.agent.name)),
                          tuple(_rename_literal(c, mapping) for c in self.conditions),
                          _rename_literal(self.action, mapping))


def _rename_literal(lit: Literal, mapping: Mapping[str, str]) -> Literal:
    args = tuple(AgentConst(mapping.get(t.name, t.name)) if isinstance(t, AgentConst) else t
                 for t in lit.args)
    return Literal(Atom(lit.predicate, args), lit.negated)


@dataclass(frozen=True)
class SurveySource:
    path: str
    theta: Decimal
    epsilon: Decimal
    records: int
    assignments: tuple[tuple[str, Truth], ...]


@dataclass(frozen=True)
class Scenario:
    name: str
    agents: tuple[AgentConst, ...]
    symbols: Mapping[str, SymbolDecl]
    plans: tuple[ActionPlan, ...]
    facts: FactBase = field(default_factory=FactBase)
    surveys: tuple[SurveySource, ...] = ()
    notes: tuple[str, ...] = ()

    def plan(self, plan_id: str) -> ActionPlan:
        for p in self.plans:
            if p.id == plan_id:
                return p
        raise KeyError(plan_id)

    def is_action(self, lit: Literal) -> bool:
        decl = self.symbols.get(lit.predicate)
        return decl is not None and decl.kind == "action"

    def with_facts(self, facts: FactBase) -> "Scenario":
        return replace(self, facts=facts)

    @property
    def closed_world(self) -> bool:
        return self.facts.closed_world


def alternatives(s: Scenario, p: ActionPlan) -> list[ActionPlan]:
    """Plans of the same agent with literal-set-equal conditions, excluding ``p``."""
    return [q for q in s.plans
            if q.id != p.id and q.agent == p.agent and q.condition_set == p.condition_set]


def rename_scenario_agents(s: Scenario, mapping: Mapping[str, str]) -> Scenario:
    """Consistently rename agent constants in plans and agent list.

    Facts keyed on literals are renamed too; overrides are dropped.
    """
    def lit(l: Literal) -> Literal:
        return _rename_literal(l, mapping)

    fb = s.facts
    facts = FactBase(
        fb.closed_world,
        {UnderminesKey(k.plan_id, lit(k.condition)): v for k, v in fb.undermines.items()},
        {CompatibleKey(frozenset(map(lit, k.actions))): v for k, v in fb.compatible.items()},
        {CopossibleKey(frozenset(frozenset(map(lit, side)) for side in k.sides)): v
         for k, v in fb.copossible.items()},
        {(frozenset(map(lit, c)), lit(a)): v for (c, a), v in fb.utilities.items()},
    )
    return replace(
        s,
        agents=tuple(AgentConst(mapping.get(a.name, a.name)) for a in s.agents),
        plans=tuple(p.renamed(mapping) for p in s.plans),
        facts=facts,
    )


# -- parsing -----------------------------------------------------------------

_TRUTH_WORDS = {"true": Truth.TRUE, "false": Truth.FALSE, "unknown": Truth.UNKNOWN}


class _Builder:
    def __init__(self, source: str, base_dir: Path | None):
        self.source = source
        self.base_dir = base_dir
        self.diags: list[Diagnostic] = []
        self.name: str | None = None
        self.world: bool | None = None
        self.agents: dict[str, int] = {}
        self.symbols: dict[str, SymbolDecl] = {}
        self.symbol_lines: dict[str, int] = {}
        # deferred statements: (line, tokens/objects)
        self.plan_stmts: list = []
        self.fact_stmts: list = []
        self.surveys: list = []

    def error(self, line: int, column: int, message: str) -> None:
        self.diags.append(Diagnostic(line, column, message))

    # pass 1: syntax ---------------------------------------------------------

    def statement(self, ts: TokenStream) -> None:
        head = ts.peek()
        if head.kind == "EOF":
            return
        if head.kind != "IDENT":
            raise ts.error(f"expected a directive, found {head.value!r}")
        ts.next()
        handler = getattr(self, f"_stmt_{head.value}", None)
        if handler is None:
            raise ts.error(f"unknown directive {head.value!r}", head)
        handler(ts, head)
        ts.expect_eof()

    def _stmt_scenario(self, ts, head):
        tok = ts.next()
        if tok.kind not in ("IDENT", "STRING") or not tok.value:
            raise ts.error("expected scenario name", tok)
        if self.name is not None:
            self.error(head.line, head.column, "duplicate scenario declaration")
        self.name = tok.value

    def _stmt_world(self, ts, head):
        tok = ts.next()
        if tok.value not in ("closed", "open"):
            raise ts.error("expected 'closed' or 'open'", tok)
        if self.world is not None:
            self.error(head.line, head.column, "duplicate world declaration")
        self.world = tok.value == "closed"

    def _stmt_agent(self, ts, head):
        while True:
            tok = ts.expect_ident("agent name")
            if tok.value in self.agents:
                self.error(tok.line, tok.column, f"duplicate agent {tok.value!r}")
            elif tok.value in self.symbols:
                self.error(tok.line, tok.column, f"agent {tok.value!r} clashes with a symbol")
            self.agents.setdefault(tok.value, tok.line)
            if not ts.accept(","):
                if ts.peek().kind == "EOF":
                    break

    def _declare(self, ts, head, kind):
        name = ts.expect_ident(f"{kind} name")
        ts.expect("/")
        arity = ts.next()
        if arity.kind != "NUMBER" or not arity.value.isdigit():
            raise ts.error("expected arity", arity)
        doc = ""
        if ts.peek().kind == "STRING":
            doc = ts.next().value
        if name.value in self.symbols:
            self.error(name.line, name.column, f"duplicate declaration of {name.value!r}")
            return
        if name.value in ("undermines", "compatible", "copossible", "override"):
            self.error(name.line, name.column, f"{name.value!r} is reserved")
            return
        self.symbols[name.value] = SymbolDecl(name.value, kind, int(arity.value), doc)
        self.symbol_lines[name.value] = name.line

    def _stmt_predicate(self, ts, head):
        self._declare(ts, head, "predicate")

    def _stmt_action(self, ts, head):
        self._declare(ts, head, "action")

    def _stmt_plan(self, ts, head):
        pid = ts.expect_ident("plan id")
        ts.expect(":")
        agent = ts.expect_ident("agent")
        ts.expect(":")
        conds = [(ts.peek(), parse_literal(ts))]
        while ts.accept("&"):
            conds.append((ts.peek(), parse_literal(ts)))
        ts.expect("=>")
        action = (ts.peek(), parse_literal(ts))
        self.plan_stmts.append((pid, agent, conds, action))

    def _stmt_fact(self, ts, head):
        start = ts.peek()
        if start.value == "u" and start.kind == "IDENT":
            ts.next()
            ts.expect("(")
            lits = [(ts.peek(), parse_literal(ts))]
            while ts.accept(","):
                lits.append((ts.peek(), parse_literal(ts)))
            ts.expect(")")
            if len(lits) < 2:
                raise ts.error("utility fact needs conditions and an action", start)
            ts.expect("=")
            tok = ts.next()
            try:
                value = Decimal(tok.value) if tok.kind == "NUMBER" else None
            except InvalidOperation:
                value = None
            if value is None:
                raise ts.error("expected a decimal utility value", tok)
            self.fact_stmts.append(("utility", start, lits, value))
            return
        if start.value == "override" and start.kind == "IDENT":
            ts.next()
            ts.expect("(")
            agent = ts.expect_ident("agent")
            ts.expect(",")
            ftok = ts.peek()
            formula = parse_formula(ts)
            ts.expect(")")
            ts.expect("=")
            tok = ts.next()
            if tok.value not in ("true", "false"):
                raise ts.error("override value must be true or false", tok)
            self.fact_stmts.append(("override", start, (agent, ftok, formula), tok.value == "true"))
            return
        key = parse_fact_key(ts)
        ts.expect("=")
        tok = ts.next()
        if tok.value not in _TRUTH_WORDS:
            raise ts.error("fact value must be true, false or unknown", tok)
        self.fact_stmts.append(("key", start, key, _TRUTH_WORDS[tok.value]))

    def _stmt_survey(self, ts, head):
        path = ts.next()
        if path.kind != "STRING":
            raise ts.error("expected quoted survey path", path)
        opts: dict[str, Decimal] = {}
        while ts.peek().value in ("theta", "epsilon") and ts.peek().kind == "IDENT":
            name = ts.next().value
            tok = ts.next()
            if tok.kind != "NUMBER":
                raise ts.error(f"expected number after {name}", tok)
            opts[name] = Decimal(tok.value)
        self.surveys.append((path, opts))

    # pass 2: validation -----------------------------------------------------

    def check_literal(self, tok, lit: Literal, kind: str, plan_agent: str | None = None) -> bool:
        decl = self.symbols.get(lit.predicate)
        if decl is None:
            self.error(tok.line, tok.column, f"undeclared symbol {lit.predicate!r}")
            return False
        ok = True
        if decl.kind != kind:
            self.error(tok.line, tok.column,
                       f"{lit.predicate!r} is declared as {decl.kind}, expected {kind}")
            ok = False
        if decl.arity != len(lit.args):
            self.error(tok.line, tok.column,
                       f"arity mismatch: {lit.predicate!r} expects {decl.arity} argument(s), "
                       f"got {len(lit.args)}")
            ok = False
        for t in lit.args:
            if isinstance(t, AgentVar) or t.name not in self.agents:
                self.error(tok.line, tok.column, f"undeclared agent {t.name!r} in {lit}")
                ok = False
        return ok

    def build_plans(self) -> tuple[ActionPlan, ...]:
        plans: list[ActionPlan] = []
        ids: set[str] = set()
        for pid, agent, conds, (atok, action) in self.plan_stmts:
            ok = True
            if pid.value in ids:
                self.error(pid.line, pid.column, f"duplicate plan id {pid.value!r}")
                ok = False
            ids.add(pid.value)
            if agent.value not in self.agents:
                self.error(agent.line, agent.column, f"undeclared agent {agent.value!r}")
                ok = False
            lits: list[Literal] = []
            for tok, lit in conds:
                ok &= self.check_literal(tok, lit, "predicate")
                if lit in lits:
                    self.error(tok.line, tok.column, f"duplicate condition {lit}")
                    ok = False
                elif any(complementary(lit, other) for other in lits):
                    self.error(tok.line, tok.column,
                               f"contradictory conditions in plan {pid.value}: {lit} and {lit.negate()}")
                    ok = False
                lits.append(lit)
            ok &= self.check_literal(atok, action, "action")
            if AgentConst(agent.value) not in action.args and agent.value in self.agents:
                self.error(atok.line, atok.column,
                           f"plan agent {agent.value!r} must appear in action {action}")
                ok = False
            if ok:
                plans.append(ActionPlan(pid.value, AgentConst(agent.value), tuple(lits), action))
        return tuple(plans)

    def build_facts(self, plans: tuple[ActionPlan, ...], theta, epsilon) -> tuple[FactBase, list[SurveySource]]:
        by_id = {p.id: p for p in plans}
        declared_ids = {pid.value for pid, *_ in self.plan_stmts}
        explicit: dict[FactKey, Truth] = {}
        utilities: dict = {}
        overrides: dict[tuple[str, str], bool] = {}

        def check_key(tok, key: FactKey) -> bool:
            if isinstance(key, UnderminesKey):
                if key.plan_id not in declared_ids:
                    self.error(tok.line, tok.column, f"unknown plan {key.plan_id!r} in {key.text}")
                    return False
                ok = self.check_literal(tok, key.condition, "predicate")
                plan = by_id.get(key.plan_id)
                if ok and plan is not None and key.condition not in plan.conditions:
                    self.error(tok.line, tok.column,
                               f"{key.condition} is not a condition of plan {key.plan_id}")
                    ok = False
                return ok
            if isinstance(key, CompatibleKey):
                return all([self.check_literal(tok, l, "action") for l in sorted(key.actions, key=str)])
            return all([self.check_literal(tok, l, "predicate")
                        for side in key.sides for l in sorted(side, key=str)])

        for kind, tok, payload, value in self.fact_stmts:
            if kind == "key":
                if check_key(tok, payload):
                    if payload in explicit and explicit[payload] != value:
                        self.error(tok.line, tok.column, f"conflicting values for {payload.text}")
                    explicit[payload] = value
            elif kind == "utility":
                ok = all([self.check_literal(t, l, "predicate") for t, l in payload[:-1]])
                atok, action = payload[-1]
                ok &= self.check_literal(atok, action, "action")
                if not Decimal(0) <= value <= Decimal(1):
                    self.error(tok.line, tok.column, f"utility {value} outside [0,1]")
                    ok = False
                if ok:
                    ukey = (frozenset(l for _, l in payload[:-1]), action)
                    if ukey in utilities and utilities[ukey] != value:
                        self.error(tok.line, tok.column, "conflicting utility values")
                    utilities[ukey] = value
            else:
                agent, ftok, formula = payload
                if not isinstance(formula, (BelievePoss, BelieveNec)):
                    self.error(ftok.line, ftok.column, "override must be a dia[...] or box[...] formula")
                    continue
                if formula.agent != AgentConst(agent.value):
                    self.error(agent.line, agent.column,
                               f"override agent {agent.value!r} differs from the believing agent {formula.agent}")
                    continue
                if free_vars(formula):
                    self.error(ftok.line, ftok.column, "override formula must be closed")
                    continue
                a, text, v = normalize_override(formula, value)
                if overrides.get((a, text), v) != v:
                    self.error(tok.line, tok.column, "conflicting overrides")
                overrides[(a, text)] = v

        sources: list[SurveySource] = []
        survey_facts: dict[FactKey, Truth] = {}
        for path_tok, opts in self.surveys:
            th = theta if theta is not None else opts.get("theta", DEFAULT_THETA)
            eps = epsilon if epsilon is not None else opts.get("epsilon", DEFAULT_EPSILON)
            path = Path(path_tok.value)
            if not path.is_absolute() and self.base_dir is not None:
                path = self.base_dir / path
            try:
                records = read_survey_csv(path)
                assigned = aggregate_survey(records, th, eps)
            except OSError as exc:
                self.error(path_tok.line, path_tok.column, f"cannot read survey {path_tok.value!r}: {exc.strerror}")
                continue
            except SurveyError as exc:
                self.error(path_tok.line, path_tok.column, f"survey {path_tok.value!r}: {exc}")
                continue
            except ValueError as exc:
                self.error(path_tok.line, path_tok.column, str(exc))
                continue
            valid = {k: v for k, v in assigned.items() if check_key(path_tok, k)}
            survey_facts.update(valid)
            sources.append(SurveySource(path_tok.value, Decimal(str(th)), Decimal(str(eps)), len(records),
                                        tuple((k.text, v) for k, v in valid.items())))
        # explicit fact lines take precedence over survey aggregates
        merged = {**survey_facts, **explicit}
        closed = True if self.world is None else self.world
        try:
            fb = FactBase(closed, utilities=utilities, overrides=overrides).with_facts(merged)
        except ValueError as exc:
            self.error(1, 1, str(exc))
            fb = FactBase(closed)
        return fb, sources


def parse_scenario(text: str, *, base_dir: str | Path | None = None, source: str = "<scenario>",
                   theta=None, epsilon=None, closed_world: bool | None = None) -> Scenario:
    """Parse and validate scenario text.

    ``theta``/``epsilon`` override the survey directives' thresholds and
    ``closed_world`` overrides the ``world`` directive. Raises
    :class:`ScenarioError` listing every diagnostic.
    """
    b = _Builder(source, Path(base_dir) if base_dir is not None else None)
    for lineno, line in enumerate(text.splitlines(), start=1):
        try:
            ts = TokenStream(tokenize(line, comments=True, line=lineno))
            b.statement(ts)
        except FormulaError as exc:
            b.error(exc.line, exc.column, exc.message)
    if b.name is None:
        b.error(1, 1, "missing 'scenario' declaration")
    plans = b.build_plans()
    facts, surveys = b.build_facts(plans, theta, epsilon)
    if closed_world is not None:
        facts = facts.with_world(closed_world)
    if b.diags:
        raise ScenarioError(b.diags, source)
    return Scenario(
        name=b.name,
        agents=tuple(AgentConst(a) for a in b.agents),
        symbols=dict(b.symbols),
        plans=plans,
        facts=facts,
        surveys=tuple(surveys),
        notes=(GENERALITY_NOTE,),
    )


def load_scenario(path: str | Path, **kwargs) -> Scenario:
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    return parse_scenario(text, base_dir=path.parent, source=str(path), **kwargs)
