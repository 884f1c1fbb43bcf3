"""Closure sets and maximally consistent sets.

The closure of a formula f over an action alphabet is the smallest set that
contains f, every action atom of the alphabet and the constant true, and is
closed under subformulas and single negation (double negations collapse, and
the negation of true is false). Every member therefore has a complementary
partner, and the closure splits into pairs (g, neg(g)).

A maximally consistent set picks exactly one member of every pair such that
true is in, conjunctions and disjunctions agree with their arguments, and at
most one action atom is positive. Sets are represented as bit vectors over
closure ordinals: the pair with index k owns bits 2k (positive form) and
2k + 1 (negated form).
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import product
from typing import Iterable, Iterator

from ..hybrid.constraints import FlowConstraint
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
    canonical,
    neg,
    size,
    to_str,
)


def _positive_rep(f: Formula) -> Formula:
    """The positive half of f's complementary pair."""
    match f:
        case Not(g):
            return g
        case Bot():
            return Top()
        case _:
            return f


class ClosureSet:
    """Closure of a formula, with a fixed ordinal for every member."""

    def __init__(self, formula: Formula, actions: Iterable[str]):
        self.formula = canonical(formula)
        self.actions = tuple(actions)

        members: set[Formula] = set()

        def add(g: Formula) -> None:
            # Recurse on the positive half of the pair so that subformulas
            # under a negation are still collected.
            p = _positive_rep(g)
            if p in members:
                return
            members.add(p)
            members.add(neg(p))
            match p:
                case Next(x):
                    add(x)
                case And(a, b) | Or(a, b) | Until(a, b) | Release(a, b):
                    add(a)
                    add(b)
                case _:
                    pass

        add(Top())
        for a in self.actions:
            add(ActionAtom(a))
        add(self.formula)

        positives = sorted(
            {_positive_rep(g) for g in members},
            key=lambda g: (size(g), to_str(g)),
        )
        ordered: list[Formula] = []
        for p in positives:
            ordered.append(p)
            ordered.append(neg(p))
        self.members: tuple[Formula, ...] = tuple(ordered)
        self.index: dict[Formula, int] = {g: i for i, g in enumerate(ordered)}
        self.n_pairs = len(positives)

        self.action_ordinals: dict[str, int] = {
            g.action: i for g, i in self.index.items() if isinstance(g, ActionAtom)
        }
        self.flow_ordinals: dict[FlowConstraint, int] = {
            g.constraint: i for g, i in self.index.items() if isinstance(g, FlowAtom)
        }
        # Positive temporal/boolean nodes with the ordinals of their parts,
        # the raw material of consistency filtering and edge generation.
        self.and_nodes: list[tuple[int, int, int]] = []
        self.or_nodes: list[tuple[int, int, int]] = []
        self.next_nodes: list[tuple[int, int]] = []
        self.until_nodes: list[tuple[int, int, int]] = []
        self.release_nodes: list[tuple[int, int, int]] = []
        for g in positives:
            i = self.index[g]
            match g:
                case And(a, b):
                    self.and_nodes.append((i, self.index[a], self.index[b]))
                case Or(a, b):
                    self.or_nodes.append((i, self.index[a], self.index[b]))
                case Next(a):
                    self.next_nodes.append((i, self.index[a]))
                case Until(a, b):
                    self.until_nodes.append((i, self.index[a], self.index[b]))
                case Release(a, b):
                    self.release_nodes.append((i, self.index[a], self.index[b]))
                case _:
                    pass

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, f: Formula) -> bool:
        return f in self.index or canonical(f) in self.index

    def __iter__(self) -> Iterator[Formula]:
        return iter(self.members)


@dataclass(frozen=True)
class MCS:
    """One maximally consistent subset of a closure, as a bit vector."""

    closure: ClosureSet
    bits: int

    def __contains__(self, f: Formula) -> bool:
        i = self.closure.index.get(f)
        if i is None:
            i = self.closure.index.get(canonical(f))
        return i is not None and bool(self.bits >> i & 1)

    def formulas(self) -> tuple[Formula, ...]:
        return tuple(
            g for i, g in enumerate(self.closure.members) if self.bits >> i & 1
        )

    def positive_actions(self) -> tuple[str, ...]:
        return tuple(
            a for a, i in self.closure.action_ordinals.items() if self.bits >> i & 1
        )

    def positive_flow_constraints(self) -> tuple[FlowConstraint, ...]:
        return tuple(
            c for c, i in self.closure.flow_ordinals.items() if self.bits >> i & 1
        )

    def __hash__(self) -> int:
        return hash((id(self.closure), self.bits))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, MCS)
            and self.closure is other.closure
            and self.bits == other.bits
        )

    def __repr__(self) -> str:
        return "{" + ", ".join(to_str(g) for g in self.formulas()) + "}"


def closure(formula: Formula, actions: Iterable[str]) -> ClosureSet:
    return ClosureSet(formula, actions)


def _bit_key(bits: int, width: int) -> tuple[int, ...]:
    return tuple(bits >> i & 1 for i in range(width))


def maximally_consistent_sets(cl: ClosureSet) -> tuple[MCS, ...]:
    """Enumerate all maximally consistent sets, lexicographic on bit vectors.

    Works by choosing one side of every complementary pair and filtering by
    the local consistency conditions; cost O(2^pairs * |cl|), fine at the
    closure sizes the logic produces.
    """
    top_ord = cl.index[Top()]
    action_mask = 0
    for i in cl.action_ordinals.values():
        action_mask |= 1 << i

    out: list[MCS] = []
    for choice in product((0, 1), repeat=cl.n_pairs):
        bits = 0
        for k, c in enumerate(choice):
            bits |= 1 << (2 * k + c)
        if not bits >> top_ord & 1:
            continue
        ok = True
        for i, l, r in cl.and_nodes:
            if (bits >> i & 1) != ((bits >> l & 1) and (bits >> r & 1)):
                ok = False
                break
        if not ok:
            continue
        for i, l, r in cl.or_nodes:
            if (bits >> i & 1) != ((bits >> l & 1) or (bits >> r & 1)):
                ok = False
                break
        if not ok:
            continue
        pos_actions = bits & action_mask
        if pos_actions and pos_actions & (pos_actions - 1):
            continue
        out.append(MCS(cl, bits))

    width = len(cl.members)
    out.sort(key=lambda m: _bit_key(m.bits, width))
    return tuple(out)
