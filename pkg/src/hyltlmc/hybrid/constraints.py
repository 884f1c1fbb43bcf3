"""Flow and jump constraints: comparisons between expression trees.

A flow constraint compares expressions over state and dotted variables and is
checked against every sample of a trajectory. A jump constraint compares
expressions over state and primed variables and relates the values right
before a discrete action to the values right after it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from ..errors import ComplementError, ModelError
from .expr import Expr, Sub, affine_form, evaluate, to_str, variables
from .valuation import Valuation


class Relation(enum.Enum):
    LT = "<"
    LE = "<="
    EQ = "="
    GE = ">="
    GT = ">"

    def __str__(self) -> str:
        return self.value


_FLIP = {
    Relation.LT: Relation.GE,
    Relation.LE: Relation.GT,
    Relation.GE: Relation.LT,
    Relation.GT: Relation.LE,
}


def holds(lhs: float, rel: Relation, rhs: float, tol: float = 0.0):
    """Compare two values (scalars or arrays) with symmetric slack tol.

    Equality means |lhs - rhs| <= tol; inequalities get tol of slack toward
    satisfaction. tol = 0 is exact comparison on the represented numbers.
    """
    if rel is Relation.EQ:
        return np.abs(lhs - rhs) <= tol if isinstance(lhs - rhs, np.ndarray) else abs(lhs - rhs) <= tol
    if rel is Relation.LE:
        return lhs <= rhs + tol
    if rel is Relation.LT:
        return lhs < rhs + tol
    if rel is Relation.GE:
        return lhs >= rhs - tol
    return lhs > rhs - tol


@dataclass(frozen=True)
class FlowConstraint:
    """Comparison over state and dotted variables, e.g. der(x) = -0.2 * x.

    The optional complement is a constraint equivalent to the pointwise
    negation; it is consulted when negation normal form needs to rewrite a
    negated atom. It does not participate in equality or hashing.
    """

    lhs: Expr
    rel: Relation
    rhs: Expr
    complement: "FlowConstraint | None" = field(default=None, compare=False)

    def __post_init__(self):
        for e in (self.lhs, self.rhs):
            _, _, primed = variables(e)
            if primed:
                raise ModelError(f"primed variable in flow constraint: {to_str(e)}")

    @property
    def mentions_dot(self) -> bool:
        return bool(variables(self.lhs)[1] or variables(self.rhs)[1])

    @property
    def state_vars(self) -> frozenset[str]:
        return variables(self.lhs)[0] | variables(self.rhs)[0]

    @property
    def dot_vars(self) -> frozenset[str]:
        return variables(self.lhs)[1] | variables(self.rhs)[1]

    def holds_at(self, state, dot=None, tol: float = 0.0):
        a = evaluate(self.lhs, state=state, dot=dot)
        b = evaluate(self.rhs, state=state, dot=dot)
        return holds(a, self.rel, b, tol)

    def __str__(self) -> str:
        return f"{to_str(self.lhs)} {self.rel} {to_str(self.rhs)}"


@dataclass(frozen=True)
class JumpConstraint:
    """Comparison over state and primed variables, e.g. x' = x."""

    lhs: Expr
    rel: Relation
    rhs: Expr

    def __post_init__(self):
        for e in (self.lhs, self.rhs):
            _, dotted, _ = variables(e)
            if dotted:
                raise ModelError(f"dotted variable in jump constraint: {to_str(e)}")

    @property
    def primed_vars(self) -> frozenset[str]:
        return variables(self.lhs)[2] | variables(self.rhs)[2]

    def __str__(self) -> str:
        return f"{to_str(self.lhs)} {self.rel} {to_str(self.rhs)}"


def complement_of(c: FlowConstraint, strict: bool = False) -> FlowConstraint:
    """Pointwise complement of a flow constraint.

    A declared complement wins. Otherwise the relation is flipped, which is
    only possible for inequalities; equalities have no single-comparison
    complement. In strict mode an undeclared complement is always an error.
    """
    if c.complement is not None:
        return c.complement
    if strict:
        raise ComplementError(f"missing complement declaration for negated flow constraint '{c}'")
    if c.rel is Relation.EQ:
        raise ComplementError(
            f"negated equality '{c}' has no derivable complement; declare one in the model"
        )
    return FlowConstraint(c.lhs, _FLIP[c.rel], c.rhs)


def satisfies_jump(v: Valuation, v_next: Valuation, jc: JumpConstraint) -> bool:
    """Check one jump constraint with substitution semantics, exactly.

    v supplies the unprimed variables, v_next the primed ones.
    """
    a = evaluate(jc.lhs, state=v, primed=v_next)
    b = evaluate(jc.rhs, state=v, primed=v_next)
    return bool(holds(a, jc.rel, b, 0.0))


def bounding_box(constraints, names) -> dict[str, tuple[float, float]]:
    """Per-variable interval bounds implied by a set of state constraints.

    Only rows that are affine in a single plain variable tighten the box;
    anything else is skipped, so the box over-approximates the described
    region. Strict bounds are closed, again widening. A constant row that
    is false empties every interval.
    """
    lo = {x: float("-inf") for x in names}
    hi = {x: float("inf") for x in names}
    for c in constraints:
        form = affine_form(Sub(c.lhs, c.rhs))
        if form is None:
            continue
        coeffs, k = form
        coeffs = {key: a for key, a in coeffs.items() if a != 0.0}
        if not coeffs:
            if not holds(k, c.rel, 0.0):
                for x in names:
                    lo[x], hi[x] = float("inf"), float("-inf")
            continue
        if len(coeffs) != 1:
            continue
        (kind, x), a = next(iter(coeffs.items()))
        if kind != "v" or x not in lo:
            continue
        bound = -k / a
        rel = c.rel
        if a < 0:
            rel = {Relation.LT: Relation.GT, Relation.LE: Relation.GE,
                   Relation.GE: Relation.LE, Relation.GT: Relation.LT,
                   Relation.EQ: Relation.EQ}[rel]
        if rel in (Relation.LE, Relation.LT):
            hi[x] = min(hi[x], bound)
        elif rel in (Relation.GE, Relation.GT):
            lo[x] = max(lo[x], bound)
        else:
            lo[x] = max(lo[x], bound)
            hi[x] = min(hi[x], bound)
    return {x: (lo[x], hi[x]) for x in names}
