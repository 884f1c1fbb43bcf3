"""Lexer and recursive descent parser for formulas and constraint expressions.

Grammar, loosest to tightest binding:

    formula  := or ('->' formula)?          implication desugars to !a | b
    or       := and ('|' and)*
    and      := ur ('&' ur)*
    ur       := unary (('U' | 'R') ur)?     right associative
    unary    := ('!' | 'X' | 'F' | 'G') unary | primary
    primary  := 'true' | 'false' | action | named-constraint
              | comparison | '(' formula ')'
    comparison := arith relop arith         relop in < <= = >= >

F p expands to true U p and G p to !(true U !p) at parse time; the AST has no
F, G or -> nodes. Arithmetic expressions support + - * / unary minus, sin,
cos, exp, der(x) for derivatives and x' for post-jump values (jump constraint
contexts only). Identifier resolution (variable vs action vs named
constraint) comes from a Declarations context.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from ..errors import ParseError
from ..hybrid.constraints import FlowConstraint, JumpConstraint, Relation
from ..hybrid.expr import (
    Add,
    Call,
    Const,
    Div,
    DotVar,
    Expr,
    Mul,
    Neg,
    PrimedVar,
    Sub,
    Var,
)
from .syntax import (
    ActionAtom,
    And,
    Bot,
    FlowAtom,
    Formula,
    Next,
    Not,
    Or,
    Release,
    Top,
    Until,
)

RESERVED = frozenset(
    {"true", "false", "X", "U", "R", "F", "G", "der", "sin", "cos", "exp"}
)

_RELOPS = {"<": Relation.LT, "<=": Relation.LE, "=": Relation.EQ,
           ">=": Relation.GE, ">": Relation.GT}


@dataclass(frozen=True)
class Token:
    kind: str  # IDENT | NUMBER | OP | EOF
    value: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    toks: list[Token] = []
    line, col = 1, 1
    i, n = 0, len(text)
    two_char = ("->", "<=", ">=")
    singles = "()+-*/{};,<>=!&|'"
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_col = col
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Token("IDENT", text[i:j], line, start_col))
            col += j - i
            i = j
            continue
        if ch.isdigit() or (ch == "." and i + 1 < n and text[i + 1].isdigit()):
            j = i
            while j < n and (text[j].isdigit() or text[j] == "."):
                j += 1
            if j < n and text[j] in "eE":
                k = j + 1
                if k < n and text[k] in "+-":
                    k += 1
                if k < n and text[k].isdigit():
                    j = k
                    while j < n and text[j].isdigit():
                        j += 1
            lit = text[i:j]
            try:
                float(lit)
            except ValueError:
                raise ParseError(f"bad number literal '{lit}'", line, start_col) from None
            toks.append(Token("NUMBER", lit, line, start_col))
            col += j - i
            i = j
            continue
        if text[i : i + 2] in two_char:
            toks.append(Token("OP", text[i : i + 2], line, start_col))
            i += 2
            col += 2
            continue
        if ch in singles:
            toks.append(Token("OP", ch, line, start_col))
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", line, start_col)
    toks.append(Token("EOF", "", line, col))
    return toks


@dataclass(frozen=True)
class Declarations:
    """Name context for parsing: state variables, actions, named constraints."""

    variables: tuple[str, ...] = ()
    actions: tuple[str, ...] = ()
    constraints: tuple[tuple[str, FlowConstraint], ...] = ()

    def __post_init__(self):
        seen: set[str] = set()
        for name in (*self.variables, *self.actions, *(n for n, _ in self.constraints)):
            if name in RESERVED:
                raise ParseError(f"name '{name}' is reserved")
            if name in seen:
                raise ParseError(f"name '{name}' declared in more than one namespace")
            seen.add(name)

    @property
    def constraint_map(self) -> dict[str, FlowConstraint]:
        return dict(self.constraints)

    def intern(self, c: FlowConstraint) -> FlowConstraint:
        """Swap an inline comparison for its declared twin when one exists,
        so declared complements travel with structurally equal constraints."""
        for _, declared in self.constraints:
            if declared == c:
                return declared
        return c


class _Parser:
    def __init__(self, tokens: Sequence[Token], decls: Declarations):
        self.toks = tokens
        self.pos = 0
        self.decls = decls

    # -- token plumbing ----------------------------------------------------

    def peek(self) -> Token:
        return self.toks[self.pos]

    def advance(self) -> Token:
        t = self.toks[self.pos]
        if t.kind != "EOF":
            self.pos += 1
        return t

    def at_op(self, *values: str) -> bool:
        t = self.peek()
        return t.kind == "OP" and t.value in values

    def expect_op(self, value: str) -> Token:
        t = self.peek()
        if not (t.kind == "OP" and t.value == value):
            raise ParseError(f"expected '{value}', found '{t.value or 'end of input'}'",
                             t.line, t.column)
        return self.advance()

    def error(self, msg: str) -> ParseError:
        t = self.peek()
        return ParseError(msg, t.line, t.column)

    # -- formulas ----------------------------------------------------------

    def formula(self) -> Formula:
        left = self.f_or()
        if self.at_op("->"):
            self.advance()
            right = self.formula()
            return Or(Not(left), right)
        return left

    def f_or(self) -> Formula:
        f = self.f_and()
        while self.at_op("|"):
            self.advance()
            f = Or(f, self.f_and())
        return f

    def f_and(self) -> Formula:
        f = self.f_ur()
        while self.at_op("&"):
            self.advance()
            f = And(f, self.f_ur())
        return f

    def f_ur(self) -> Formula:
        left = self.f_unary()
        t = self.peek()
        if t.kind == "IDENT" and t.value in ("U", "R"):
            self.advance()
            right = self.f_ur()
            return Until(left, right) if t.value == "U" else Release(left, right)
        return left

    def f_unary(self) -> Formula:
        t = self.peek()
        if self.at_op("!"):
            self.advance()
            return Not(self.f_unary())
        if t.kind == "IDENT" and t.value in ("X", "F", "G"):
            self.advance()
            inner = self.f_unary()
            if t.value == "X":
                return Next(inner)
            if t.value == "F":
                return Until(Top(), inner)
            return Not(Until(Top(), Not(inner)))
        return self.f_primary()

    def f_primary(self) -> Formula:
        t = self.peek()
        if t.kind == "IDENT":
            v = t.value
            if v == "true":
                self.advance()
                return Top()
            if v == "false":
                self.advance()
                return Bot()
            if v in self.decls.actions:
                self.advance()
                return ActionAtom(v)
            cmap = self.decls.constraint_map
            if v in cmap:
                self.advance()
                return FlowAtom(cmap[v])
            if v in self.decls.variables or v in ("der", "sin", "cos", "exp"):
                return FlowAtom(self.comparison())
            raise self.error(f"unknown identifier '{v}'")
        if t.kind == "NUMBER" or self.at_op("-"):
            return FlowAtom(self.comparison())
        if self.at_op("("):
            # Could open a parenthesized formula or a parenthesized
            # arithmetic expression; try the comparison reading first.
            save = self.pos
            try:
                return FlowAtom(self.comparison())
            except ParseError:
                self.pos = save
            self.advance()
            f = self.formula()
            self.expect_op(")")
            return f
        raise self.error(f"expected a formula, found '{t.value or 'end of input'}'")

    # -- comparisons and arithmetic ---------------------------------------

    def comparison(self, allow_dot: bool = True, allow_primed: bool = False):
        lhs = self.arith(allow_dot, allow_primed)
        t = self.peek()
        if not (t.kind == "OP" and t.value in _RELOPS):
            raise self.error("expected comparison operator")
        self.advance()
        rhs = self.arith(allow_dot, allow_primed)
        if allow_primed:
            return JumpConstraint(lhs, _RELOPS[t.value], rhs)
        return self.decls.intern(FlowConstraint(lhs, _RELOPS[t.value], rhs))

    def arith(self, allow_dot: bool, allow_primed: bool) -> Expr:
        e = self.a_term(allow_dot, allow_primed)
        while self.at_op("+", "-"):
            op = self.advance().value
            r = self.a_term(allow_dot, allow_primed)
            e = Add(e, r) if op == "+" else Sub(e, r)
        return e

    def a_term(self, allow_dot: bool, allow_primed: bool) -> Expr:
        e = self.a_factor(allow_dot, allow_primed)
        while self.at_op("*", "/"):
            op = self.advance().value
            r = self.a_factor(allow_dot, allow_primed)
            e = Mul(e, r) if op == "*" else Div(e, r)
        return e

    def a_factor(self, allow_dot: bool, allow_primed: bool) -> Expr:
        t = self.peek()
        if self.at_op("-"):
            self.advance()
            inner = self.a_factor(allow_dot, allow_primed)
            if isinstance(inner, Const):
                return Const(-inner.value)
            return Neg(inner)
        if self.at_op("("):
            self.advance()
            e = self.arith(allow_dot, allow_primed)
            self.expect_op(")")
            return e
        if t.kind == "NUMBER":
            self.advance()
            return Const(float(t.value))
        if t.kind == "IDENT":
            v = t.value
            if v in ("sin", "cos", "exp"):
                self.advance()
                self.expect_op("(")
                e = self.arith(allow_dot, allow_primed)
                self.expect_op(")")
                return Call(v, e)
            if v == "der":
                self.advance()
                self.expect_op("(")
                name_tok = self.peek()
                if name_tok.kind != "IDENT" or name_tok.value not in self.decls.variables:
                    raise self.error("der() takes a declared state variable")
                self.advance()
                self.expect_op(")")
                if not allow_dot:
                    raise ParseError("derivative not allowed here",
                                     t.line, t.column)
                return DotVar(name_tok.value)
            if v in self.decls.variables:
                self.advance()
                if self.at_op("'"):
                    if not allow_primed:
                        raise self.error("primed variable not allowed here")
                    self.advance()
                    return PrimedVar(v)
                return Var(v)
            raise self.error(f"unknown identifier '{v}'")
        raise self.error(f"expected an expression, found '{t.value or 'end of input'}'")


def parse_formula(text: str, decls: Declarations | None = None) -> Formula:
    """Parse a formula; raises ParseError with line:column on bad input."""
    decls = decls or Declarations()
    p = _Parser(tokenize(text), decls)
    f = p.formula()
    t = p.peek()
    if t.kind != "EOF":
        raise ParseError(f"unexpected trailing input '{t.value}'", t.line, t.column)
    return f


def parse_flow_constraint(text: str, decls: Declarations) -> FlowConstraint:
    p = _Parser(tokenize(text), decls)
    c = p.comparison(allow_dot=True, allow_primed=False)
    t = p.peek()
    if t.kind != "EOF":
        raise ParseError(f"unexpected trailing input '{t.value}'", t.line, t.column)
    return c


def parse_jump_constraint(text: str, decls: Declarations) -> JumpConstraint:
    p = _Parser(tokenize(text), decls)
    c = p.comparison(allow_dot=False, allow_primed=True)
    t = p.peek()
    if t.kind != "EOF":
        raise ParseError(f"unexpected trailing input '{t.value}'", t.line, t.column)
    return c
