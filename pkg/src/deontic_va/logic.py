"""Quantified modal formulas over agents: AST, substitution, canonical text.

The canonical grammar (see ``docs/grammar.md``) is the single spelling used
for fact-override keys, generated test propositions and reports::

    dia[a] P (forall x. (C1(x) & C2(x) -> A1(x)) & C1(a) & C2(a) & A1(a))

Prefix operators (``~``, ``P``, ``dia[t]``, ``box[t]``, ``forall v.``) bind
tighter than ``&``, which binds tighter than ``|``, which binds tighter than
``->`` (right associative).
"""

from __future__ import annotations

import re
from functools import lru_cache
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "AgentConst",
    "AgentVar",
    "And",
    "ArityError",
    "Atom",
    "Available",
    "BelieveNec",
    "BelievePoss",
    "ForAll",
    "Formula",
    "FormulaError",
    "FormulaSyntaxError",
    "GEQ",
    "Implies",
    "KEYWORDS",
    "Lit",
    "Literal",
    "Not",
    "Or",
    "Poss",
    "TRUE",
    "Term",
    "Top",
    "TokenStream",
    "UtilityExpr",
    "canonical_serialize",
    "complementary",
    "conjoin",
    "free_vars",
    "has_complementary_pair",
    "is_identifier",
    "parse_formula",
    "parse_literal",
    "rename_agents",
    "substitute",
    "tokenize",
]

KEYWORDS = frozenset({"P", "E", "u", "dia", "box", "forall", "TRUE"})

_IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")


def is_identifier(name: str) -> bool:
    return bool(_IDENT_RE.match(name)) and name not in KEYWORDS


class FormulaError(ValueError):
    """Base error for formula text, carrying a 1-based position."""

    def __init__(self, message: str, line: int = 1, column: int = 1):
        super().__init__(f"line {line}, column {column}: {message}")
        self.message = message
        self.line = line
        self.column = column


class FormulaSyntaxError(FormulaError):
    pass


class ArityError(FormulaError):
    pass


# -- terms, atoms, literals -------------------------------------------------


@dataclass(frozen=True)
class AgentConst:
    name: str

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ValueError(f"invalid agent name {self.name!r}")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class AgentVar:
    name: str

    def __post_init__(self):
        if not is_identifier(self.name):
            raise ValueError(f"invalid variable name {self.name!r}")

    def __str__(self):
        return self.name


Term = AgentConst | AgentVar


@dataclass(frozen=True)
class Atom:
    predicate: str
    args: tuple[Term, ...] = ()

    def __post_init__(self):
        if not is_identifier(self.predicate):
            raise ValueError(f"invalid predicate name {self.predicate!r}")
        object.__setattr__(self, "args", tuple(self.args))

    def __str__(self):
        return f"{self.predicate}({','.join(str(t) for t in self.args)})"


@dataclass(frozen=True)
class Literal:
    atom: Atom
    negated: bool = False

    def __str__(self):
        return ("~" if self.negated else "") + str(self.atom)

    def negate(self) -> "Literal":
        return Literal(self.atom, not self.negated)

    @property
    def predicate(self) -> str:
        return self.atom.predicate

    @property
    def args(self) -> tuple[Term, ...]:
        return self.atom.args


def complementary(l1: Literal, l2: Literal) -> bool:
    return l1.atom == l2.atom and l1.negated != l2.negated


def has_complementary_pair(literals: Iterable[Literal]) -> tuple[Literal, Literal] | None:
    """Return the first (positive, negative) pair found, or None."""
    seen: dict[Atom, Literal] = {}
    for lit in literals:
        other = seen.get(lit.atom)
        if other is not None and other.negated != lit.negated:
            return (other, lit) if not other.negated else (lit, other)
        seen.setdefault(lit.atom, lit)
    return None


# -- formulas ----------------------------------------------------------------


class Formula:
    """Base class of the formula AST. All nodes are frozen dataclasses."""

    __slots__ = ()

    def __str__(self):
        return canonical_serialize(self)


@dataclass(frozen=True)
class Top(Formula):
    """The trivially true formula (empty conjunction)."""


TRUE = Top()


@dataclass(frozen=True)
class Lit(Formula):
    literal: Literal


@dataclass(frozen=True)
class Not(Formula):
    body: Formula


@dataclass(frozen=True)
class And(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("And needs at least two children")


@dataclass(frozen=True)
class Or(Formula):
    children: tuple[Formula, ...]

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if len(self.children) < 2:
            raise ValueError("Or needs at least two children")


@dataclass(frozen=True)
class Implies(Formula):
    antecedent: Formula
    consequent: Formula


@dataclass(frozen=True)
class Poss(Formula):
    """P(S): it is possible for S to be true."""

    body: Formula


@dataclass(frozen=True)
class BelievePoss(Formula):
    """dia[a] S: agent a can rationally believe S."""

    agent: Term
    body: Formula


@dataclass(frozen=True)
class BelieveNec(Formula):
    """box[a] S: rationality requires agent a to accept S."""

    agent: Term
    body: Formula


@dataclass(frozen=True)
class ForAll(Formula):
    var: str
    body: Formula

    def __post_init__(self):
        if not is_identifier(self.var):
            raise ValueError(f"invalid variable name {self.var!r}")


@dataclass(frozen=True)
class UtilityExpr:
    conditions: tuple[Literal, ...]
    action: Literal

    def __post_init__(self):
        object.__setattr__(self, "conditions", tuple(self.conditions))
        if not self.conditions:
            raise ValueError("utility expression needs at least one condition")

    def __str__(self):
        return "u(" + ", ".join(str(l) for l in (*self.conditions, self.action)) + ")"


@dataclass(frozen=True)
class GEQ(Formula):
    left: UtilityExpr
    right: UtilityExpr


@dataclass(frozen=True)
class Available(Formula):
    """E(plan): the plan is available, generalizable and respects autonomy."""

    plan_id: str

    def __post_init__(self):
        if not is_identifier(self.plan_id):
            raise ValueError(f"invalid plan id {self.plan_id!r}")


def conjoin(parts: Sequence[Formula]) -> Formula:
    """And over ``parts`` collapsing the 0- and 1-element cases."""
    parts = tuple(parts)
    if not parts:
        return TRUE
    if len(parts) == 1:
        return parts[0]
    return And(parts)


# -- traversal ---------------------------------------------------------------


def _map_terms_literal(lit: Literal, fn) -> Literal:
    return Literal(Atom(lit.atom.predicate, tuple(fn(t) for t in lit.atom.args)), lit.negated)


def _map_terms(f: Formula, fn, bound: frozenset[str]) -> Formula:
    """Rebuild ``f`` applying ``fn(term, bound)`` to every term occurrence."""
    lit_fn = lambda l: _map_terms_literal(l, lambda t: fn(t, bound))  # noqa: E731
    if isinstance(f, Lit):
        return Lit(lit_fn(f.literal))
    if isinstance(f, (Top, Available)):
        return f
    if isinstance(f, Not):
        return Not(_map_terms(f.body, fn, bound))
    if isinstance(f, Poss):
        return Poss(_map_terms(f.body, fn, bound))
    if isinstance(f, And):
        return And(tuple(_map_terms(c, fn, bound) for c in f.children))
    if isinstance(f, Or):
        return Or(tuple(_map_terms(c, fn, bound) for c in f.children))
    if isinstance(f, Implies):
        return Implies(_map_terms(f.antecedent, fn, bound), _map_terms(f.consequent, fn, bound))
    if isinstance(f, BelievePoss):
        return BelievePoss(fn(f.agent, bound), _map_terms(f.body, fn, bound))
    if isinstance(f, BelieveNec):
        return BelieveNec(fn(f.agent, bound), _map_terms(f.body, fn, bound))
    if isinstance(f, ForAll):
        return ForAll(f.var, _map_terms(f.body, fn, bound | {f.var}))
    if isinstance(f, GEQ):
        def u(e: UtilityExpr) -> UtilityExpr:
            return UtilityExpr(tuple(lit_fn(c) for c in e.conditions), lit_fn(e.action))
        return GEQ(u(f.left), u(f.right))
    raise TypeError(f"not a formula: {f!r}")


def substitute(f: Formula, var: str, t: Term) -> Formula:
    """Replace every free occurrence of variable ``var`` by ``t``."""

    def fn(term, bound):
        if isinstance(term, AgentVar) and term.name == var and var not in bound:
            return t
        return term

    return _map_terms(f, fn, frozenset())


def rename_agents(f: Formula, mapping: Mapping[str, str]) -> Formula:
    """Rename agent constants (not variables) according to ``mapping``."""

    def fn(term, bound):
        if isinstance(term, AgentConst) and term.name in mapping:
            return AgentConst(mapping[term.name])
        return term

    return _map_terms(f, fn, frozenset())


def _iter_terms(f: Formula, bound: frozenset[str]) -> Iterator[tuple[Term, frozenset[str]]]:
    out: list[tuple[Term, frozenset[str]]] = []

    def fn(term, b):
        out.append((term, b))
        return term

    _map_terms(f, fn, bound)
    return iter(out)


def free_vars(f: Formula) -> set[str]:
    return {t.name for t, bound in _iter_terms(f, frozenset())
            if isinstance(t, AgentVar) and t.name not in bound}


# -- serialization -----------------------------------------------------------

_PREC_IMPLIES, _PREC_OR, _PREC_AND, _PREC_UNARY = 1, 2, 3, 4


def _prec(f: Formula) -> int:
    if isinstance(f, Implies):
        return _PREC_IMPLIES
    if isinstance(f, Or):
        return _PREC_OR
    if isinstance(f, And):
        return _PREC_AND
    return _PREC_UNARY


def _term_text(t: Term, bound: frozenset[str]) -> str:
    if isinstance(t, AgentVar) and t.name not in bound:
        return "?" + t.name
    return t.name


def _literal_text(lit: Literal, bound: frozenset[str]) -> str:
    args = ",".join(_term_text(t, bound) for t in lit.atom.args)
    return f"{'~' if lit.negated else ''}{lit.atom.predicate}({args})"


def _utility_text(e: UtilityExpr, bound: frozenset[str]) -> str:
    return "u(" + ", ".join(_literal_text(l, bound) for l in (*e.conditions, e.action)) + ")"


def _ser(f: Formula, bound: frozenset[str]) -> str:
    def wrap(child: Formula, min_prec: int, b: frozenset[str] = bound) -> str:
        text = _ser(child, b)
        return f"({text})" if _prec(child) < min_prec else text

    if isinstance(f, Lit):
        return _literal_text(f.literal, bound)
    if isinstance(f, Top):
        return "TRUE"
    if isinstance(f, Available):
        return f"E({f.plan_id})"
    if isinstance(f, GEQ):
        return f"{_utility_text(f.left, bound)} >= {_utility_text(f.right, bound)}"
    if isinstance(f, Not):
        # ~C(a) is a negative literal; negation of a positive literal is ~(C(a))
        if isinstance(f.body, Lit):
            return f"~({_ser(f.body, bound)})"
        return "~" + wrap(f.body, _PREC_UNARY)
    if isinstance(f, Poss):
        return "P " + wrap(f.body, _PREC_UNARY)
    if isinstance(f, BelievePoss):
        return f"dia[{_term_text(f.agent, bound)}] " + wrap(f.body, _PREC_UNARY)
    if isinstance(f, BelieveNec):
        return f"box[{_term_text(f.agent, bound)}] " + wrap(f.body, _PREC_UNARY)
    if isinstance(f, ForAll):
        inner = bound | {f.var}
        return f"forall {f.var}. " + wrap(f.body, _PREC_UNARY, inner)
    if isinstance(f, And):
        return " & ".join(wrap(c, _PREC_UNARY) for c in f.children)
    if isinstance(f, Or):
        return " | ".join(wrap(c, _PREC_AND) for c in f.children)
    if isinstance(f, Implies):
        return f"{wrap(f.antecedent, _PREC_OR)} -> {wrap(f.consequent, _PREC_OR)}"
    raise TypeError(f"not a formula: {f!r}")


@lru_cache(maxsize=65536)
def canonical_serialize(f: Formula) -> str:
    return _ser(f, frozenset())


# -- lexing ------------------------------------------------------------------


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT, VAR, NUMBER, STRING, OP, EOF
    value: str
    line: int
    column: int


_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<number>\d+(?:\.\d+)?)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>->|>=|=>|[()\[\],.~&|=:/{}])
    """,
    re.VERBOSE,
)


def tokenize(text: str, *, comments: bool = False, line: int = 1) -> list[Token]:
    """Split ``text`` into tokens; ``#`` comments are only accepted on request."""
    tokens: list[Token] = []
    pos, line_start = 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        col = pos - line_start + 1
        if m is None or (m.lastgroup == "comment" and not comments):
            raise FormulaSyntaxError(f"unexpected character {text[pos]!r}", line, col)
        kind = m.lastgroup
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind == "string":
            raw = m.group()[1:-1]
            tokens.append(Token("STRING", re.sub(r"\\(.)", r"\1", raw), line, col))
        elif kind == "number":
            tokens.append(Token("NUMBER", m.group(), line, col))
        elif kind == "var":
            tokens.append(Token("VAR", m.group()[1:], line, col))
        elif kind == "ident":
            tokens.append(Token("IDENT", m.group(), line, col))
        elif kind == "op":
            tokens.append(Token("OP", m.group(), line, col))
        pos = m.end()
    tokens.append(Token("EOF", "", line, pos - line_start + 1))
    return tokens


class TokenStream:
    """Cursor over a token list, shared by the formula and scenario parsers."""

    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.pos + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        self.pos = min(self.pos + 1, len(self.tokens) - 1)
        return tok

    def at(self, value: str, kind: str | None = None) -> bool:
        tok = self.peek()
        return tok.value == value and (kind is None or tok.kind == kind) and tok.kind != "STRING"

    def accept(self, value: str) -> Token | None:
        if self.at(value):
            return self.next()
        return None

    def expect(self, value: str) -> Token:
        tok = self.peek()
        if not self.at(value):
            raise self.error(f"expected {value!r}, found {_describe(tok)}")
        return self.next()

    def expect_ident(self, what: str = "identifier") -> Token:
        tok = self.peek()
        if tok.kind != "IDENT" or tok.value in KEYWORDS:
            raise self.error(f"expected {what}, found {_describe(tok)}")
        return self.next()

    def expect_eof(self) -> None:
        tok = self.peek()
        if tok.kind != "EOF":
            raise self.error(f"unexpected {_describe(tok)}")

    def error(self, message: str, tok: Token | None = None) -> FormulaSyntaxError:
        tok = tok or self.peek()
        return FormulaSyntaxError(message, tok.line, tok.column)


def _describe(tok: Token) -> str:
    if tok.kind == "EOF":
        return "end of input"
    if tok.kind == "STRING":
        return f"string {tok.value!r}"
    return repr(tok.value)


# -- parsing -----------------------------------------------------------------


class _Parser:
    def __init__(self, ts: TokenStream, arities: Mapping[str, int] | None):
        self.ts = ts
        self.declared = arities
        self.seen: dict[str, int] = {}
        self.bound: list[str] = []

    def check_arity(self, tok: Token, arity: int) -> None:
        name = tok.value
        if self.declared is not None:
            if name not in self.declared:
                raise ArityError(f"undeclared symbol {name!r}", tok.line, tok.column)
            expected = self.declared[name]
        else:
            expected = self.seen.setdefault(name, arity)
        if expected != arity:
            raise ArityError(
                f"symbol {name!r} expects {expected} argument(s), got {arity}",
                tok.line, tok.column)

    def term(self) -> Term:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "VAR":
            ts.next()
            return AgentVar(tok.value)
        tok = ts.expect_ident("agent term")
        if tok.value in self.bound:
            return AgentVar(tok.value)
        return AgentConst(tok.value)

    def atom(self) -> Atom:
        ts = self.ts
        name = ts.expect_ident("predicate")
        ts.expect("(")
        args: list[Term] = []
        if not ts.at(")"):
            args.append(self.term())
            while ts.accept(","):
                args.append(self.term())
        ts.expect(")")
        self.check_arity(name, len(args))
        return Atom(name.value, tuple(args))

    def literal(self) -> Literal:
        negated = bool(self.ts.accept("~"))
        return Literal(self.atom(), negated)

    def utility(self) -> UtilityExpr:
        ts = self.ts
        ts.expect("u")
        ts.expect("(")
        lits = [self.literal()]
        while ts.accept(","):
            lits.append(self.literal())
        ts.expect(")")
        if len(lits) < 2:
            raise ts.error("utility needs at least one condition and an action")
        return UtilityExpr(tuple(lits[:-1]), lits[-1])

    def formula(self) -> Formula:
        left = self.disjunction()
        if self.ts.accept("->"):
            return Implies(left, self.formula())
        return left

    def disjunction(self) -> Formula:
        parts = [self.conjunction()]
        while self.ts.accept("|"):
            parts.append(self.conjunction())
        return parts[0] if len(parts) == 1 else Or(tuple(parts))

    def conjunction(self) -> Formula:
        parts = [self.unary()]
        while self.ts.accept("&"):
            parts.append(self.unary())
        return parts[0] if len(parts) == 1 else And(tuple(parts))

    def unary(self) -> Formula:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "OP" and tok.value == "~":
            ts.next()
            nxt = ts.peek()
            if nxt.kind == "IDENT" and nxt.value not in KEYWORDS:
                return Lit(Literal(self.atom(), True))
            return Not(self.unary())
        if tok.kind == "IDENT":
            if tok.value == "P":
                ts.next()
                return Poss(self.unary())
            if tok.value in ("dia", "box"):
                ts.next()
                ts.expect("[")
                agent = self.term()
                ts.expect("]")
                body = self.unary()
                return BelievePoss(agent, body) if tok.value == "dia" else BelieveNec(agent, body)
            if tok.value == "forall":
                ts.next()
                var = ts.expect_ident("variable").value
                ts.expect(".")
                self.bound.append(var)
                try:
                    body = self.unary()
                finally:
                    self.bound.pop()
                return ForAll(var, body)
        return self.primary()

    def primary(self) -> Formula:
        ts = self.ts
        tok = ts.peek()
        if tok.kind == "OP" and tok.value == "(":
            ts.next()
            f = self.formula()
            ts.expect(")")
            return f
        if tok.kind == "IDENT":
            if tok.value == "TRUE":
                ts.next()
                return TRUE
            if tok.value == "E":
                ts.next()
                ts.expect("(")
                plan = ts.expect_ident("plan id").value
                ts.expect(")")
                return Available(plan)
            if tok.value == "u":
                left = self.utility()
                ts.expect(">=")
                return GEQ(left, self.utility())
            if tok.value not in KEYWORDS:
                return Lit(Literal(self.atom(), False))
        raise ts.error(f"expected a formula, found {_describe(tok)}")


def parse_formula(text: str | TokenStream, arities: Mapping[str, int] | None = None) -> Formula:
    """Parse canonical formula text.

    With ``arities`` every predicate must be declared there with a matching
    arity; without it, a predicate must be used consistently within the text.
    A ``TokenStream`` is consumed up to the end of the formula and left
    positioned after it.
    """
    if isinstance(text, TokenStream):
        return _Parser(text, arities).formula()
    ts = TokenStream(tokenize(text))
    f = _Parser(ts, arities).formula()
    ts.expect_eof()
    return f


def parse_literal(ts: TokenStream, arities: Mapping[str, int] | None = None) -> Literal:
    return _Parser(ts, arities).literal()
