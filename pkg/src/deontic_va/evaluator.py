"""Three-valued evaluation of test propositions and per-plan verdicts.

Modal operators are transparent apart from overrides: ``dia[a] S`` and
``box[a] S`` take the empirical value of ``S`` unless an override names
them. Possibility atoms ``P (...)`` are grounded in the fact base:

* the body of a generalization test: False if universal adoption undermines
  one of the plan's conditions (per-condition ``undermines`` facts);
* a conjunction containing a complementary pair: False (``syntactic``);
* two action literals: the ``compatible`` fact for the pair;
* condition literals only: the ``copossible`` fact keyed by their union.

Whether another agent's plan counts in an autonomy check depends on that
plan's own ethicality, which is evaluated recursively. A plan already under
assessment further up the recursion is not counted against its counterparty,
and once the depth budget runs out counterparties are presumed ethical; both
presumptions are recorded in the trace.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Iterable, NamedTuple

from .empirical import (
    CompatibleKey,
    FactBase,
    Truth,
    UnderminesKey,
    kleene_and,
    kleene_implies,
    kleene_not,
    kleene_or,
    normalize_override,
    utility_of,
)
from .logic import (
    And,
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
    Top,
    canonical_serialize,
    conjoin,
    has_complementary_pair,
    substitute,
)
from .rulebase import ActionPlan, Scenario, alternatives
from .testgen import Principle, TestKind, gen_autonomy, gen_generalization, gen_utility

__all__ = [
    "DEFAULT_MAX_DEPTH",
    "EvalContext",
    "Evaluator",
    "Overall",
    "PrincipleResult",
    "TraceEntry",
    "Verdict",
    "check_autonomy",
    "check_generalization",
    "check_plan",
    "check_utility",
    "eval_formula",
]

DEFAULT_MAX_DEPTH = 8

SOURCES = ("fact", "override", "default", "syntactic", "recursion-presumption", "derived")


class TraceEntry(NamedTuple):
    # a tuple rather than a dataclass: traces are deduplicated constantly
    # during recursion and tuple hashing is much cheaper
    depth: int
    text: str
    source: str
    value: Truth

    def __str__(self):
        return f"{self.depth}  {self.text}  {self.source}  {self.value}"


@dataclass
class EvalContext:
    """Per-evaluation state; never shared between evaluations."""

    scenario: Scenario | None = None
    depth: int = 0
    trace: list[TraceEntry] = field(default_factory=list)
    available: Callable[[str], Truth] | None = None
    gen_index: dict[Formula, ActionPlan] | None = None

    def __post_init__(self):
        if self.gen_index is None:
            plans = self.scenario.plans if self.scenario is not None else ()
            self.gen_index = {gen_generalization(p).body: p for p in plans}

    def record(self, text: str, source: str, value: Truth) -> Truth:
        self.trace.append(TraceEntry(self.depth, text, source, value))
        return value


def _literals(f: Formula) -> list[Literal] | None:
    if isinstance(f, Lit):
        return [f.literal]
    if isinstance(f, And) and all(isinstance(c, Lit) for c in f.children):
        return [c.literal for c in f.children]
    return None


def _is_action(lit: Literal, fb: FactBase, ctx: EvalContext) -> bool:
    if ctx.scenario is not None:
        return ctx.scenario.is_action(lit)
    return any(lit in k.actions for k in fb.compatible)


def _ground_possibility(f: Poss, fb: FactBase, ctx: EvalContext) -> Truth:
    text = canonical_serialize(f)
    plan = ctx.gen_index.get(f)
    if plan is not None:
        values = []
        for cond in plan.conditions:
            key = UnderminesKey(plan.id, cond)
            value, source = fb.lookup(key)
            ctx.record(key.text, source, value)
            values.append(value)
        value = kleene_not(kleene_or(*values))
        return ctx.record(text, "fact" if any(k in fb.undermines for k in
                                              (UnderminesKey(plan.id, c) for c in plan.conditions))
                          else "default", value)
    lits = _literals(f.body)
    if lits is None:
        return ctx.record(text, "default", Truth.UNKNOWN)
    if has_complementary_pair(lits):
        return ctx.record(text, "syntactic", Truth.FALSE)
    distinct = list(dict.fromkeys(lits))
    kinds = {_is_action(l, fb, ctx) for l in distinct}
    if kinds == {True}:
        if len(distinct) != 2:
            return ctx.record(text, "default", Truth.UNKNOWN)
        value, source = fb.lookup(CompatibleKey(frozenset(distinct)))
        return ctx.record(text, source, value)
    if kinds == {False}:
        value, source = fb.copossible_union(distinct)
        return ctx.record(text, source, value)
    return ctx.record(text, "default", Truth.UNKNOWN)


def eval_formula(f: Formula, fb: FactBase, ctx: EvalContext | None = None) -> Truth:
    """Strong Kleene evaluation of a closed formula against ``fb``."""
    ctx = ctx if ctx is not None else EvalContext()
    if isinstance(f, Top):
        return Truth.TRUE
    if isinstance(f, Lit):
        return ctx.record(canonical_serialize(f), "default", Truth.UNKNOWN)
    if isinstance(f, Not):
        return kleene_not(eval_formula(f.body, fb, ctx))
    if isinstance(f, And):
        return kleene_and(*[eval_formula(c, fb, ctx) for c in f.children])
    if isinstance(f, Or):
        return kleene_or(*[eval_formula(c, fb, ctx) for c in f.children])
    if isinstance(f, Implies):
        a = eval_formula(f.antecedent, fb, ctx)
        return kleene_implies(a, eval_formula(f.consequent, fb, ctx))
    if isinstance(f, ForAll):
        agents = ctx.scenario.agents if ctx.scenario is not None else ()
        return kleene_and(*[eval_formula(substitute(f.body, f.var, a), fb, ctx) for a in agents])
    if isinstance(f, Poss):
        return _ground_possibility(f, fb, ctx)
    if isinstance(f, (BelievePoss, BelieveNec)):
        agent, text, same = normalize_override(f, True)
        forced = fb.override(agent, text)
        if forced is not None:
            value = Truth.of(forced == same)
            return ctx.record(canonical_serialize(f), "override", value)
        return eval_formula(f.body, fb, ctx)
    if isinstance(f, GEQ):
        left = utility_of(fb, f.left.conditions, f.left.action)
        right = utility_of(fb, f.right.conditions, f.right.action)
        if left is None or right is None:
            return ctx.record(canonical_serialize(f), "default", Truth.UNKNOWN)
        return ctx.record(canonical_serialize(f), "fact", Truth.of(left >= right))
    if isinstance(f, Available):
        if ctx.available is None:
            return ctx.record(canonical_serialize(f), "default", Truth.UNKNOWN)
        return ctx.available(f.plan_id)
    raise TypeError(f"not a formula: {f!r}")


def _dedupe(entries: Iterable[TraceEntry]) -> tuple[TraceEntry, ...]:
    """Drop repeated entries, keeping first occurrences in order.

    Shared sub-results would otherwise be spliced into the trace once per
    path that reaches them.
    """
    return tuple(dict.fromkeys(entries))


# -- verdicts ----------------------------------------------------------------


class Overall(enum.Enum):
    ETHICAL = "Ethical"
    UNETHICAL = "Unethical"
    INDETERMINATE = "Indeterminate"

    @classmethod
    def of(cls, value: Truth) -> "Overall":
        return {Truth.TRUE: cls.ETHICAL, Truth.FALSE: cls.UNETHICAL}.get(value, cls.INDETERMINATE)

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class PrincipleResult:
    """Outcome of one principle for one plan.

    For autonomy, ``parts`` holds one result per counterparty plan with
    ``gate`` set to that plan's ethicality; the aggregate value is the
    conjunction of ``gate -> part.value``.
    """

    kind: TestKind
    proposition: Formula
    value: Truth
    trace: tuple[TraceEntry, ...] = ()
    parts: tuple["PrincipleResult", ...] = ()
    gate: Truth | None = None


@dataclass(frozen=True)
class Verdict:
    plan_id: str
    results: tuple[PrincipleResult, ...]
    overall: Overall

    def result(self, principle: Principle) -> PrincipleResult:
        return next(r for r in self.results if r.kind.principle is principle)


class Evaluator:
    """Evaluates the plans of one scenario.

    ``max_depth`` bounds how many times the ethicality of counterparty plans
    is re-examined recursively. Sub-results are memoized per instance on the
    set of plans under assessment, so cost grows with the number of such sets
    and is exponential in the number of plans in the worst case.
    """

    def __init__(self, scenario: Scenario, max_depth: int = DEFAULT_MAX_DEPTH):
        if max_depth < 0:
            raise ValueError("max_depth must be >= 0")
        self.scenario = scenario
        self.max_depth = max_depth
        self._gen_index = {gen_generalization(p).body: p for p in scenario.plans}
        self._by_id = {p.id: p for p in scenario.plans}
        # sub-results depend only on (plan, budget, plans under assessment, level)
        self._memo: dict[tuple, object] = {}

    @property
    def facts(self) -> FactBase:
        return self.scenario.facts

    def _context(self, level: int, available=None) -> EvalContext:
        return EvalContext(self.scenario, level, [], available, self._gen_index)

    # public API

    def check_generalization(self, p: ActionPlan) -> PrincipleResult:
        return self._generalization(p, 0)

    def check_autonomy(self, p: ActionPlan, depth: int | None = None) -> PrincipleResult:
        budget = self.max_depth if depth is None else depth
        if budget < 0:
            raise ValueError("depth budget must be >= 0")
        return self._autonomy(p, budget, (p.id,), 0)

    def check_utility(self, p: ActionPlan) -> PrincipleResult:
        return self._utility(p, self.max_depth, (p.id,), 0)

    def check_plan(self, p: ActionPlan) -> Verdict:
        stack = (p.id,)
        autonomy = self._autonomy(p, self.max_depth, stack, 0)
        gen = self._generalization(p, 0)
        util = self._utility(p, self.max_depth, stack, 0)
        results = (gen, util, autonomy)
        return Verdict(p.id, results, Overall.of(kleene_and(*(r.value for r in results))))

    def check_all(self) -> list[Verdict]:
        return [self.check_plan(p) for p in self.scenario.plans]

    # recursion

    def _cached(self, key: tuple, compute: Callable[[], PrincipleResult]) -> PrincipleResult:
        if key not in self._memo:
            self._memo[key] = compute()
        return self._memo[key]

    def _generalization(self, p: ActionPlan, level: int) -> PrincipleResult:
        return self._cached(("gen", p.id, level), lambda: self._generalization_at(p, level))

    def _effective_budget(self, budget: int, assessed: frozenset[str]) -> int:
        # each step that spends budget also puts a new plan under assessment,
        # so a budget beyond the number of unassessed plans is never exhausted
        return min(budget, len(self._by_id) - len(assessed))

    def _autonomy(self, p: ActionPlan, budget: int, stack: tuple[str, ...],
                  level: int) -> PrincipleResult:
        assessed = frozenset(stack)
        budget = self._effective_budget(budget, assessed)
        key = ("aut", p.id, budget, assessed, level)
        return self._cached(key, lambda: self._autonomy_uncached(p, budget, stack, level))

    def _utility(self, p: ActionPlan, budget: int, stack: tuple[str, ...],
                 level: int) -> PrincipleResult:
        assessed = frozenset(stack)
        budget = self._effective_budget(budget, assessed)
        key = ("util", p.id, budget, assessed, level)
        return self._cached(key, lambda: self._utility_uncached(p, budget, stack, level))

    def _static(self, key: tuple, make: Callable[[], Formula], level: int):
        """Evaluate a proposition whose value does not depend on recursion state.

        Evaluated once at level 0; later uses only re-stamp the trace depth.
        """
        if key not in self._memo:
            prop = make()
            ctx = self._context(0)
            self._memo[key] = (prop, eval_formula(prop, self.facts, ctx), tuple(ctx.trace))
        if (key, level) not in self._memo:
            prop, value, trace = self._memo[key]
            trace = tuple(e._replace(depth=e.depth + level) for e in trace)
            self._memo[key, level] = (prop, value, trace)
        return self._memo[key, level]

    def _generalization_at(self, p: ActionPlan, level: int) -> PrincipleResult:
        prop, value, trace = self._static(("gen-test", p.id), lambda: gen_generalization(p), level)
        return PrincipleResult(TestKind(Principle.GENERALIZATION), prop, value, trace)

    def _autonomy_uncached(self, p: ActionPlan, budget: int, stack: tuple[str, ...],
                           level: int) -> PrincipleResult:
        parts = []
        for q in self.scenario.plans:
            if q.agent == p.agent:
                continue
            ctx = self._context(level)
            if q.id in stack:
                # q is itself under assessment; its conflict with p cannot impeach p
                gate = ctx.record(f"ethical({q.id})", "recursion-presumption", Truth.FALSE)
            elif budget == 0:
                gate = ctx.record(f"ethical({q.id})", "recursion-presumption", Truth.TRUE)
            else:
                gate, sub = self._ethical(q, budget - 1, stack + (q.id,), level + 1)
                ctx.trace.extend(sub)
                ctx.record(f"ethical({q.id})", "derived", gate)
            prop, value, trace = self._autonomy_test(p, q, level)
            ctx.trace.extend(trace)
            parts.append(PrincipleResult(TestKind(Principle.AUTONOMY, q.id), prop, value,
                                         _dedupe(ctx.trace), gate=gate))
        value = kleene_and(*(kleene_implies(r.gate, r.value) for r in parts))
        prop = conjoin([r.proposition for r in parts])
        trace = _dedupe(e for r in parts for e in r.trace)
        return PrincipleResult(TestKind(Principle.AUTONOMY), prop, value, trace, tuple(parts))

    def _autonomy_test(self, p: ActionPlan, q: ActionPlan, level: int):
        return self._static(("pair", p.id, q.id), lambda: gen_autonomy(p, q), level)

    def _utility_uncached(self, p: ActionPlan, budget: int, stack: tuple[str, ...],
                          level: int) -> PrincipleResult:
        prop = gen_utility(p, alternatives(self.scenario, p))
        ctx = self._context(level)

        def available(plan_id: str) -> Truth:
            q = self._by_id[plan_id]
            gen = self._generalization(q, level + 1)
            aut = self._autonomy(q, budget, stack + (q.id,), level + 1)
            ctx.trace.extend(gen.trace)
            ctx.trace.extend(aut.trace)
            return ctx.record(f"E({plan_id})", "derived", kleene_and(gen.value, aut.value))

        ctx.available = available
        value = eval_formula(prop, self.facts, ctx)
        return PrincipleResult(TestKind(Principle.UTILITY), prop, value, _dedupe(ctx.trace))

    def _ethical(self, q: ActionPlan, budget: int, stack: tuple[str, ...],
                 level: int) -> tuple[Truth, list[TraceEntry]]:
        gen = self._generalization(q, level)
        util = self._utility(q, budget, stack, level)
        aut = self._autonomy(q, budget, stack, level)
        trace = list(_dedupe([*gen.trace, *util.trace, *aut.trace]))
        return kleene_and(gen.value, util.value, aut.value), trace


def check_generalization(s: Scenario, p: ActionPlan) -> PrincipleResult:
    return Evaluator(s).check_generalization(p)


def check_autonomy(s: Scenario, p: ActionPlan, d: int = DEFAULT_MAX_DEPTH) -> PrincipleResult:
    return Evaluator(s, d).check_autonomy(p, d)


def check_utility(s: Scenario, p: ActionPlan, max_depth: int = DEFAULT_MAX_DEPTH) -> PrincipleResult:
    return Evaluator(s, max_depth).check_utility(p)


def check_plan(s: Scenario, p: ActionPlan, max_depth: int = DEFAULT_MAX_DEPTH) -> Verdict:
    return Evaluator(s, max_depth).check_plan(p)
