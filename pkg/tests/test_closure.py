"""Closure sets and maximally consistent sets against brute-force oracles."""

from __future__ import annotations

import random
from itertools import combinations

from hyltlmc.formula import closure, maximally_consistent_sets, parse_formula
from hyltlmc.formula.closure import ClosureSet
from hyltlmc.formula.parser import Declarations
from hyltlmc.formula.syntax import (
    ActionAtom,
    And,
    Bot,
    FlowAtom,
    Not,
    Or,
    Top,
    neg,
)
from hyltlmc.hybrid import FlowConstraint, Relation
from hyltlmc.hybrid.expr import Const, Var

from conftest import BOOL_ATOMS, random_formula

DECLS = Declarations(variables=("x",), actions=("on", "off"))
C = FlowConstraint(Var("x"), Relation.GE, Const(21.0))


def brute_force_mcs(cl: ClosureSet) -> set[frozenset]:
    """Filter the full powerset of the closure by the textbook conditions."""
    members = list(cl.members)
    out = set()
    for r in range(len(members) + 1):
        for combo in combinations(members, r):
            m = frozenset(combo)
            if Top() not in m:
                continue
            if any(((f in m) == (neg(f) in m)) for f in members):
                continue
            ok = True
            for f in members:
                match f:
                    case And(a, b):
                        ok = ok and ((f in m) == (a in m and b in m))
                    case Or(a, b):
                        ok = ok and ((f in m) == (a in m or b in m))
                    case _:
                        pass
            if not ok:
                continue
            pos = [f for f in m if isinstance(f, ActionAtom)]
            if len(pos) > 1:
                continue
            out.add(m)
    return out


class TestClosure:
    def test_single_flow_atom(self):
        """cl of one constraint atom: both constants, atom, one action, negations."""
        cl = closure(FlowAtom(C), ("on",))
        assert set(cl.members) == {
            Top(),
            Bot(),
            FlowAtom(C),
            Not(FlowAtom(C)),
            ActionAtom("on"),
            Not(ActionAtom("on")),
        }
        assert len(cl) == 6

    def test_top_only(self):
        cl = closure(Top(), ("on",))
        assert set(cl.members) == {
            Top(),
            Bot(),
            ActionAtom("on"),
            Not(ActionAtom("on")),
        }
        assert len(cl) == 4

    def test_flagship_formula_cardinality(self):
        """cl of true U (x>=21 & X on) over {on, off} has exactly 14 members."""
        f = parse_formula("true U (x >= 21 & X on)", DECLS)
        cl = closure(f, ("on", "off"))
        for text in ("true U (x >= 21 & X on)", "X on", "on", "off", "x >= 21"):
            g = parse_formula(text, DECLS)
            assert g in cl
            assert neg(g) in cl
        assert len(cl) == 14

    def test_closure_is_negation_closed_and_even(self):
        rng = random.Random(7)
        for _ in range(50):
            f = random_formula(rng, BOOL_ATOMS + (FlowAtom(C),), 5)
            cl = closure(f, ("on", "off"))
            assert len(cl) % 2 == 0
            for g in cl:
                assert neg(g) in cl


class TestMcs:
    def test_single_flow_atom_enumeration(self):
        """The four expected sets, in bit-vector order."""
        cl = closure(FlowAtom(C), ("on",))
        ms = maximally_consistent_sets(cl)
        got = [frozenset(m.formulas()) for m in ms]
        a = ActionAtom("on")
        expected = {
            frozenset({Top(), FlowAtom(C), a}),
            frozenset({Top(), FlowAtom(C), Not(a)}),
            frozenset({Top(), Not(FlowAtom(C)), a}),
            frozenset({Top(), Not(FlowAtom(C)), Not(a)}),
        }
        assert set(got) == expected
        assert len(got) == 4

    def test_top_two_sets(self):
        cl = closure(Top(), ("on",))
        ms = maximally_consistent_sets(cl)
        assert len(ms) == 2

    def test_action_exclusivity(self):
        """No MCS carries two positive action atoms."""
        f = parse_formula("on | off", DECLS)
        cl = closure(f, ("on", "off"))
        for m in maximally_consistent_sets(cl):
            assert len(m.positive_actions()) <= 1

    def test_flagship_count(self):
        f = parse_formula("true U (x >= 21 & X on)", DECLS)
        ms = maximally_consistent_sets(closure(f, ("on", "off")))
        assert len(ms) == 24

    def test_matches_brute_force_on_samples(self):
        """Bit-vector enumeration equals the powerset filter."""
        rng = random.Random(11)
        checked = 0
        for _ in range(40):
            f = random_formula(rng, BOOL_ATOMS + (FlowAtom(C),), 4)
            cl = closure(f, ("on", "off"))
            if len(cl) > 12:
                continue
            fast = {frozenset(m.formulas()) for m in maximally_consistent_sets(cl)}
            assert fast == brute_force_mcs(cl)
            checked += 1
        assert checked >= 20

    def test_membership_xor(self):
        f = parse_formula("true U (x >= 21 & X on)", DECLS)
        cl = closure(f, ("on", "off"))
        for m in maximally_consistent_sets(cl):
            for g in cl:
                assert (g in m) != (neg(g) in m)

    def test_deterministic_order(self):
        f = parse_formula("on U off", DECLS)
        cl1 = closure(f, ("on", "off"))
        cl2 = closure(f, ("on", "off"))
        a = [m.bits for m in maximally_consistent_sets(cl1)]
        b = [m.bits for m in maximally_consistent_sets(cl2)]
        assert a == b
