"""Empirical knowledge: three-valued truth, fact bases and survey aggregation.

Fact keys share the canonical literal syntax of :mod:`deontic_va.logic`::

    undermines(P1,C2(a))                  universal adoption of P1 defeats C2(a)
    compatible(A5(b),A6(a,b))             the two actions can co-occur
    copossible(C6(b)&C7(b),C8(b)&C9(b))   the two condition sets can co-occur

Compatible and copossible keys are unordered; their canonical text sorts the
members so that any spelling maps onto one key.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from pathlib import Path
from types import MappingProxyType
from typing import Iterable, Mapping

from .logic import (
    BelieveNec,
    BelievePoss,
    Formula,
    FormulaError,
    Literal,
    Not,
    TokenStream,
    canonical_serialize,
    parse_literal,
    tokenize,
)

__all__ = [
    "CompatibleKey",
    "CopossibleKey",
    "FactBase",
    "FactKey",
    "SurveyError",
    "SurveyRecord",
    "Truth",
    "UnderminesKey",
    "aggregate_survey",
    "kleene_and",
    "kleene_implies",
    "kleene_not",
    "kleene_or",
    "normalize_override",
    "parse_fact_key",
    "query",
    "read_survey_csv",
    "utility_of",
]


class Truth(enum.IntEnum):
    """Strong Kleene truth values ordered False < Unknown < True."""

    FALSE = 0
    UNKNOWN = 1
    TRUE = 2

    @classmethod
    def of(cls, value: bool) -> "Truth":
        return cls.TRUE if value else cls.FALSE

    def __str__(self):
        return self.name.capitalize()

    def __invert__(self) -> "Truth":
        return kleene_not(self)

    def __and__(self, other):
        return kleene_and(self, other)

    def __or__(self, other):
        return kleene_or(self, other)


def kleene_not(v: Truth) -> Truth:
    return Truth(2 - v)


def kleene_and(*values: Truth) -> Truth:
    return Truth(min(values, default=Truth.TRUE))


def kleene_or(*values: Truth) -> Truth:
    return Truth(max(values, default=Truth.FALSE))


def kleene_implies(a: Truth, b: Truth) -> Truth:
    return kleene_or(kleene_not(a), b)


# -- fact keys ---------------------------------------------------------------


def _sorted_lits(lits: Iterable[Literal]) -> list[Literal]:
    return sorted(lits, key=str)


def _set_text(lits: frozenset[Literal]) -> str:
    return "&".join(str(l) for l in _sorted_lits(lits))


@dataclass(frozen=True)
class UnderminesKey:
    plan_id: str
    condition: Literal

    @property
    def text(self) -> str:
        return f"undermines({self.plan_id},{self.condition})"


@dataclass(frozen=True)
class CompatibleKey:
    actions: frozenset[Literal]

    def __post_init__(self):
        object.__setattr__(self, "actions", frozenset(self.actions))
        if len(self.actions) != 2:
            raise ValueError("compatible key needs two distinct action literals")

    @classmethod
    def of(cls, a: Literal, b: Literal) -> "CompatibleKey":
        return cls(frozenset((a, b)))

    @property
    def text(self) -> str:
        a, b = _sorted_lits(self.actions)
        return f"compatible({a},{b})"


@dataclass(frozen=True)
class CopossibleKey:
    sides: frozenset[frozenset[Literal]]

    def __post_init__(self):
        sides = frozenset(frozenset(s) for s in self.sides)
        object.__setattr__(self, "sides", sides)
        if not sides or any(not s for s in sides) or len(sides) > 2:
            raise ValueError("copossible key needs two nonempty condition sets")

    @classmethod
    def of(cls, c1: Iterable[Literal], c2: Iterable[Literal]) -> "CopossibleKey":
        return cls(frozenset((frozenset(c1), frozenset(c2))))

    @property
    def union(self) -> frozenset[Literal]:
        return frozenset().union(*self.sides)

    @property
    def text(self) -> str:
        texts = sorted(_set_text(s) for s in self.sides)
        if len(texts) == 1:
            texts *= 2
        return f"copossible({texts[0]},{texts[1]})"


FactKey = UnderminesKey | CompatibleKey | CopossibleKey


def _parse_lit_set(ts: TokenStream) -> frozenset[Literal]:
    lits = [parse_literal(ts)]
    while ts.accept("&"):
        lits.append(parse_literal(ts))
    return frozenset(lits)


def parse_fact_key(text: str | TokenStream) -> FactKey:
    """Parse an ``undermines``/``compatible``/``copossible`` key."""
    ts = text if isinstance(text, TokenStream) else TokenStream(tokenize(text))
    head = ts.peek()
    if head.kind != "IDENT" or head.value not in ("undermines", "compatible", "copossible"):
        raise ts.error(f"unrecognized fact key {head.value!r}")
    ts.next()
    ts.expect("(")
    if head.value == "undermines":
        plan = ts.expect_ident("plan id").value
        ts.expect(",")
        key: FactKey = UnderminesKey(plan, parse_literal(ts))
    elif head.value == "compatible":
        a = parse_literal(ts)
        ts.expect(",")
        b = parse_literal(ts)
        if a == b:
            raise ts.error("compatible key needs two distinct action literals", head)
        key = CompatibleKey.of(a, b)
    else:
        c1 = _parse_lit_set(ts)
        ts.expect(",")
        key = CopossibleKey.of(c1, _parse_lit_set(ts))
    ts.expect(")")
    if not isinstance(text, TokenStream):
        ts.expect_eof()
    return key


# -- overrides ---------------------------------------------------------------


def _strip_double_negation(f: Formula) -> Formula:
    while isinstance(f, Not) and isinstance(f.body, Not):
        f = f.body.body
    return f


def normalize_override(formula: Formula, value: bool) -> tuple[str, str, bool]:
    """Map a modal override onto its ``dia`` form: ``(agent, text, value)``.

    ``box[a] X = v`` is stored as ``dia[a] ~X = not v``, with double negations
    cancelled, so that lookups respect the duality of the two operators.
    """
    if isinstance(formula, BelievePoss):
        body = _strip_double_negation(formula.body)
        return formula.agent.name, canonical_serialize(BelievePoss(formula.agent, body)), value
    if isinstance(formula, BelieveNec):
        body = _strip_double_negation(Not(formula.body))
        return formula.agent.name, canonical_serialize(BelievePoss(formula.agent, body)), not value
    raise ValueError("overrides apply only to dia[...] or box[...] formulas")


# -- fact base ---------------------------------------------------------------

UtilityKey = tuple[frozenset[Literal], Literal]


@dataclass(frozen=True)
class FactBase:
    """Immutable store of empirical facts.

    Lookups follow a fixed precedence: explicit fact, then the closed-world
    default (False for ``undermines``, True for ``compatible``/``copossible``),
    then Unknown under the open world. Modal overrides are consulted by the
    evaluator before any of these.
    """

    closed_world: bool = True
    undermines: Mapping[UnderminesKey, Truth] = field(default_factory=dict)
    compatible: Mapping[CompatibleKey, Truth] = field(default_factory=dict)
    copossible: Mapping[CopossibleKey, Truth] = field(default_factory=dict)
    utilities: Mapping[UtilityKey, Decimal] = field(default_factory=dict)
    overrides: Mapping[tuple[str, str], bool] = field(default_factory=dict)

    def __post_init__(self):
        for name in ("undermines", "compatible", "copossible", "utilities", "overrides"):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))
        for (conds, action), value in self.utilities.items():
            if not Decimal(0) <= value <= Decimal(1):
                raise ValueError(f"utility of {action} under {_set_text(conds)} outside [0,1]: {value}")
        by_union: dict[frozenset[Literal], tuple[CopossibleKey, Truth]] = {}
        for key, value in self.copossible.items():
            prior = by_union.setdefault(key.union, (key, value))
            if prior[1] != value:
                raise ValueError(f"conflicting copossible facts {prior[0].text} and {key.text}")
        object.__setattr__(self, "_copossible_by_union",
                           {u: v for u, (_, v) in by_union.items()})

    def with_facts(self, facts: Mapping[FactKey, Truth]) -> "FactBase":
        """Return a new fact base with ``facts`` added (replacing equal keys)."""
        und, comp, cop = dict(self.undermines), dict(self.compatible), dict(self.copossible)
        for key, value in facts.items():
            {UnderminesKey: und, CompatibleKey: comp, CopossibleKey: cop}[type(key)][key] = Truth(value)
        return FactBase(self.closed_world, und, comp, cop, self.utilities, self.overrides)

    def with_world(self, closed_world: bool) -> "FactBase":
        return FactBase(closed_world, self.undermines, self.compatible, self.copossible,
                        self.utilities, self.overrides)

    def facts(self) -> dict[FactKey, Truth]:
        return {**self.undermines, **self.compatible, **self.copossible}

    def lookup(self, key: FactKey) -> tuple[Truth, str]:
        """Return ``(value, source)`` where source is ``fact`` or ``default``."""
        if isinstance(key, UnderminesKey):
            table, default = self.undermines, Truth.FALSE
        elif isinstance(key, CompatibleKey):
            table, default = self.compatible, Truth.TRUE
        elif isinstance(key, CopossibleKey):
            value = self._copossible_by_union.get(key.union)
            if value is not None:
                return value, "fact"
            return (Truth.TRUE if self.closed_world else Truth.UNKNOWN), "default"
        else:
            raise TypeError(f"not a fact key: {key!r}")
        if key in table:
            return table[key], "fact"
        return (default if self.closed_world else Truth.UNKNOWN), "default"

    def copossible_union(self, literals: Iterable[Literal]) -> tuple[Truth, str]:
        """Look up a copossible fact by the union of its two sides."""
        value = self._copossible_by_union.get(frozenset(literals))
        if value is not None:
            return value, "fact"
        return (Truth.TRUE if self.closed_world else Truth.UNKNOWN), "default"

    def override(self, agent: str, dia_text: str) -> bool | None:
        return self.overrides.get((agent, dia_text))


def query(fb: FactBase, key: FactKey | str) -> Truth:
    if isinstance(key, str):
        key = parse_fact_key(key)
    return fb.lookup(key)[0]


def utility_of(fb: FactBase, conds: Iterable[Literal], action: Literal) -> Decimal | None:
    return fb.utilities.get((frozenset(conds), action))


# -- surveys -----------------------------------------------------------------


class SurveyError(ValueError):
    def __init__(self, message: str, row: int | None = None):
        super().__init__(f"row {row}: {message}" if row is not None else message)
        self.row = row


@dataclass(frozen=True)
class SurveyRecord:
    respondent_id: str
    query_key: FactKey
    answer: bool


_ANSWERS = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}
_HEADER = ["respondent_id", "query_key", "answer"]


def read_survey_csv(source: str | Path | io.TextIOBase) -> list[SurveyRecord]:
    """Read survey answers, failing on the first malformed row.

    Row numbers count the header as row 1.
    """
    if isinstance(source, (str, Path)):
        with open(source, encoding="utf-8", newline="") as fh:
            return read_survey_csv(fh)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip() for h in header] != _HEADER:
        raise SurveyError(f"header must be {','.join(_HEADER)}", 1)
    records = []
    for row_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise SurveyError(f"expected 3 fields, got {len(row)}", row_no)
        respondent, key_text, answer = (cell.strip() for cell in row)
        if not respondent:
            raise SurveyError("empty respondent_id", row_no)
        try:
            key = parse_fact_key(key_text)
        except (FormulaError, ValueError) as exc:
            raise SurveyError(f"bad query_key {key_text!r}: {exc}", row_no) from None
        if answer.lower() not in _ANSWERS:
            raise SurveyError(f"bad answer {answer!r}", row_no)
        records.append(SurveyRecord(respondent, key, _ANSWERS[answer.lower()]))
    return records


def _exact(x) -> Fraction:
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def aggregate_survey(records: Iterable[SurveyRecord], theta=Decimal("0.5"),
                     epsilon=Decimal("0.05")) -> dict[FactKey, Truth]:
    """Turn binary answers into three-valued facts with a deadband.

    Per key, with ``f`` the fraction of true answers: ``f >= theta + epsilon``
    gives True, ``f <= theta - epsilon`` gives False, anything in between
    Unknown. Arithmetic is exact.
    """
    th, eps = _exact(theta), _exact(epsilon)
    if not 0 < th < 1:
        raise ValueError(f"theta must lie in (0, 1), got {theta}")
    if not 0 <= eps < min(th, 1 - th):
        raise ValueError(f"epsilon must lie in [0, min(theta, 1-theta)), got {epsilon}")
    counts: dict[FactKey, list[int]] = {}
    for rec in records:
        if not isinstance(rec.query_key, (UnderminesKey, CompatibleKey, CopossibleKey)):
            raise ValueError(f"unrecognized query key {rec.query_key!r}")
        c = counts.setdefault(rec.query_key, [0, 0])
        c[0] += rec.answer
        c[1] += 1
    out: dict[FactKey, Truth] = {}
    for key in sorted(counts, key=lambda k: k.text):
        yes, total = counts[key]
        f = Fraction(yes, total)
        if f >= th + eps:
            out[key] = Truth.TRUE
        elif f <= th - eps:
            out[key] = Truth.FALSE
        else:
            out[key] = Truth.UNKNOWN
    return out
