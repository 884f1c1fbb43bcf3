"""Valuations, trajectories, constraints and automaton structure."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyltlmc.errors import ComplementError, ModelError, TraceError
from hyltlmc.hybrid import (
    FlowConstraint,
    HybridAutomaton,
    JumpConstraint,
    Relation,
    SampledTrajectory,
    Transition,
    Valuation,
    complement_of,
    compose,
    discrete_step,
    satisfies_flow,
    satisfies_jump,
)
from hyltlmc.hybrid.expr import (
    Add,
    Call,
    Const,
    Div,
    DotVar,
    Mul,
    Neg,
    PrimedVar,
    Sub,
    Var,
    affine_form,
    evaluate,
    to_str,
)
from hyltlmc.formula.parser import Declarations, parse_flow_constraint

from conftest import heater_model


class TestExpr:
    def test_evaluate_namespaces(self):
        e = Add(Var("x"), Mul(Const(2.0), DotVar("x")))
        assert evaluate(e, state={"x": 3.0}, dot={"x": 0.5}) == 4.0
        with pytest.raises(ModelError):
            evaluate(e, state={"x": 3.0})

    def test_evaluate_functions(self):
        assert evaluate(Call("exp", Const(0.0))) == 1.0
        assert abs(evaluate(Call("sin", Const(math.pi))) ) < 1e-12

    def test_affine_extraction(self):
        e = Sub(Const(30.0), Mul(Const(0.2), Var("x")))
        coeffs, const = affine_form(e)
        assert coeffs == {("v", "x"): -0.2}
        assert const == 30.0

    def test_affine_rejects_nonlinear(self):
        assert affine_form(Mul(Var("x"), Var("y"))) is None
        assert affine_form(Call("sin", Var("x"))) is None
        assert affine_form(Div(Const(1.0), Var("x"))) is None

    def test_affine_folds_constant_calls(self):
        coeffs, const = affine_form(Mul(Call("exp", Const(0.0)), Var("x")))
        assert coeffs == {("v", "x"): 1.0}
        assert const == 0.0

    def test_print_parse_roundtrip(self):
        d = Declarations(variables=("x", "y"))
        for text in (
            "der(x) = -0.2 * x",
            "x + 1 >= 2",
            "(x + y) * 2 <= x / 4",
            "x - (y - 1) > 0",
            "-x < 3",
        ):
            c = parse_flow_constraint(text, d)
            again = parse_flow_constraint(str(c), d)
            assert again == c


class TestValuation:
    def test_mapping_interface(self):
        v = Valuation({"x": 1.0, "y": 2.0})
        assert v["x"] == 1.0
        assert set(v) == {"x", "y"}
        assert len(v) == 2

    def test_restrict(self):
        v = Valuation({"x": 1.0, "y": 2.0})
        assert v.restrict(["x"]) == Valuation({"x": 1.0})
        assert v.restrict(["z"]) == Valuation({})

    def test_union_compatible(self):
        a = Valuation({"x": 1.0, "y": 2.0})
        b = Valuation({"y": 2.0, "z": 3.0})
        assert a.union(b) == Valuation({"x": 1.0, "y": 2.0, "z": 3.0})

    def test_union_conflict(self):
        with pytest.raises(ModelError):
            Valuation({"x": 1.0}).union(Valuation({"x": 2.0}))

    @given(
        st.dictionaries(st.sampled_from("abcd"), st.floats(-5, 5), max_size=4),
        st.dictionaries(st.sampled_from("cdef"), st.floats(-5, 5), max_size=4),
    )
    def test_union_restriction_laws(self, d1, d2):
        """Union restricted to one side gives that side back, when compatible."""
        a, b = Valuation(d1), Valuation(d2)
        compatible = all(d1[k] == d2[k] for k in d1.keys() & d2.keys())
        if not compatible:
            with pytest.raises(ModelError):
                a.union(b)
            return
        u = a.union(b)
        assert u.restrict(a.names).restrict(a.names) == u.restrict(a.names)
        assert u.restrict(a.names) == a
        assert u.restrict(b.names) == b
        assert a.union(b) == b.union(a)


def decay_trajectory(h=0.01, duration=1.0, x0=20.0, exact_derivs=True):
    """Samples of x(t) = x0 * exp(-0.2 t) with the field's derivatives."""
    return SampledTrajectory.from_function(
        ("x",),
        lambda t: (x0 * math.exp(-0.2 * t),),
        duration,
        h,
        (lambda t: (-0.2 * x0 * math.exp(-0.2 * t),)) if exact_derivs else None,
    )


class TestTrajectory:
    def test_basic_accessors(self):
        tr = decay_trajectory()
        assert tr.n_samples == 101
        assert tr.duration == pytest.approx(1.0)
        assert tr.fstate["x"] == pytest.approx(20.0)
        assert tr.lstate["x"] == pytest.approx(20.0 * math.exp(-0.2), abs=1e-12)

    def test_flow_equality_with_field_derivatives(self):
        """der(x) = -0.2 x holds exactly when derivatives come from the field."""
        tr = decay_trajectory()
        d = Declarations(variables=("x",))
        c = parse_flow_constraint("der(x) = -0.2 * x", d)
        assert satisfies_flow(tr, c)

    def test_flow_equality_with_finite_differences(self):
        """Central differences carry O(h^2) error: fails at 1e-9, passes at 1e-4."""
        tr = decay_trajectory(exact_derivs=False)
        d = Declarations(variables=("x",))
        c = parse_flow_constraint("der(x) = -0.2 * x", d)
        assert not satisfies_flow(tr, c, tol=1e-9)
        assert satisfies_flow(tr, c, tol=1e-4)

    def test_state_constraint_over_all_samples(self):
        tr = decay_trajectory()
        d = Declarations(variables=("x",))
        assert not satisfies_flow(tr, parse_flow_constraint("x >= 19.9", d))
        assert satisfies_flow(tr, parse_flow_constraint("x >= 16.3", d))
        assert tr.lstate["x"] == pytest.approx(16.3746, abs=1e-3)

    def test_derivative_skipped_at_endpoints(self):
        """A derivative constraint violated only at the endpoints still holds."""
        values = np.array([[0.0], [1.0], [2.0], [3.0]])
        derivs = np.array([[99.0], [1.0], [1.0], [99.0]])
        tr = SampledTrajectory(("x",), values, 1.0, derivs)
        d = Declarations(variables=("x",))
        c = parse_flow_constraint("der(x) = 1", d)
        assert satisfies_flow(tr, c, tol=1e-9)

    def test_point_trajectory(self):
        tr = SampledTrajectory(("x",), np.array([[5.0]]), 0.5)
        assert tr.duration == 0.0
        d = Declarations(variables=("x",))
        assert satisfies_flow(tr, parse_flow_constraint("x = 5", d))
        assert satisfies_flow(tr, parse_flow_constraint("der(x) = 123", d))

    def test_shape_validation(self):
        with pytest.raises(TraceError):
            SampledTrajectory(("x",), np.zeros((0, 1)), 0.1)
        with pytest.raises(TraceError):
            SampledTrajectory(("x", "y"), np.zeros((3, 1)), 0.1)


class TestJump:
    def test_substitution_semantics(self):
        jc = JumpConstraint(PrimedVar("x"), Relation.EQ, Var("x"))
        assert satisfies_jump(Valuation({"x": 18.0}), Valuation({"x": 18.0}), jc)
        assert not satisfies_jump(Valuation({"x": 18.0}), Valuation({"x": 18.5}), jc)

    def test_exact_comparison(self):
        jc = JumpConstraint(Var("x"), Relation.LE, Const(19.0))
        assert satisfies_jump(Valuation({"x": 19.0}), Valuation({"x": 19.0}), jc)
        assert not satisfies_jump(
            Valuation({"x": 19.0 + 1e-12}), Valuation({"x": 0.0}), jc
        )


class TestComplement:
    def test_flip(self):
        c = FlowConstraint(Var("x"), Relation.GE, Const(21.0))
        assert complement_of(c) == FlowConstraint(Var("x"), Relation.LT, Const(21.0))
        c2 = FlowConstraint(Var("x"), Relation.LT, Const(19.0))
        assert complement_of(c2).rel is Relation.GE

    def test_equality_has_no_flip(self):
        c = FlowConstraint(Var("x"), Relation.EQ, Const(0.0))
        with pytest.raises(ComplementError):
            complement_of(c)

    def test_declared_wins(self):
        comp = FlowConstraint(Var("x"), Relation.LE, Const(20.0))
        c = FlowConstraint(Var("x"), Relation.GE, Const(21.0), complement=comp)
        assert complement_of(c) is comp
        with pytest.raises(ComplementError):
            complement_of(FlowConstraint(Var("x"), Relation.GE, Const(21.0)), strict=True)


class TestAutomaton:
    def test_validation_rejects_undeclared(self):
        with pytest.raises(ModelError):
            HybridAutomaton(
                variables=("x",),
                actions=("a",),
                locations=("l",),
                transitions=(),
                dyn={"l": (FlowConstraint(Var("y"), Relation.GE, Const(0.0)),)},
                init=("l",),
            )

    def test_discrete_step_fires_when_guard_holds(self, heater):
        out = discrete_step(heater, ("idle", Valuation({"x": 18.0})), "on")
        assert out == (("heat", Valuation({"x": 18.0})),)

    def test_discrete_step_blocked_by_guard(self, heater):
        assert discrete_step(heater, ("idle", Valuation({"x": 20.0})), "on") == ()

    def test_discrete_step_from_heat(self, heater):
        out = discrete_step(heater, ("heat", Valuation({"x": 22.0})), "off")
        assert out == (("idle", Valuation({"x": 22.0})),)

    def test_discrete_step_rejects_inadmissible_target(self, heater):
        # x = 16.5 violates idle's invariant x >= 17 after the jump.
        out = discrete_step(heater, ("heat", Valuation({"x": 16.5})), "off")
        assert out == ()


class TestCompose:
    def make_observer(self):
        """One-location observer over a fresh variable, watching 'on' only."""
        return HybridAutomaton(
            variables=("z",),
            actions=("on",),
            locations=("obs",),
            transitions=(
                Transition(
                    "obs", "on", "obs", (JumpConstraint(PrimedVar("z"), Relation.EQ, Add(Var("z"), Const(1.0))),)
                ),
            ),
            dyn={"obs": (FlowConstraint(DotVar("z"), Relation.EQ, Const(0.0)),)},
            init=("obs",),
            acceptance=(frozenset({"obs"}),),
        )

    def test_location_count_is_product(self, heater):
        prod = compose(heater, self.make_observer())
        assert len(prod.locations) == 2 * 1
        assert set(prod.variables) == {"x", "z"}
        assert prod.init == (("idle", "obs"),)

    def test_shared_action_syncs_and_private_freezes(self, heater):
        prod = compose(heater, self.make_observer())
        on_edges = [t for t in prod.transitions if t.action == "on"]
        assert len(on_edges) == 1
        t = on_edges[0]
        assert t.source == ("idle", "obs") and t.target == ("heat", "obs")
        # owner constraints from both sides are present
        assert any("z'" in str(j) for j in t.jumps)
        assert any(str(j) == "x' = x" for j in t.jumps)

    def test_unshared_action_stutters_nonowner(self, heater):
        prod = compose(heater, self.make_observer())
        off_edges = [t for t in prod.transitions if t.action == "off"]
        assert len(off_edges) == 1
        t = off_edges[0]
        assert t.source == ("heat", "obs") and t.target == ("idle", "obs")
        # observer does not own 'off': its private variable z freezes
        assert any(str(j) == "z' = z" for j in t.jumps)

    def test_dyn_union_and_acceptance_lift(self, heater):
        prod = compose(heater, self.make_observer())
        dyn = prod.dyn[("idle", "obs")]
        assert len(dyn) == 3  # heater's two plus observer's der(z) = 0
        assert prod.acceptance == (frozenset(prod.locations),)

    def test_compose_associative_up_to_renesting(self, heater):
        obs = self.make_observer()
        third = HybridAutomaton(
            variables=("w",),
            actions=("off",),
            locations=("w0",),
            transitions=(Transition("w0", "off", "w0"),),
            dyn={"w0": (FlowConstraint(DotVar("w"), Relation.EQ, Const(0.0)),)},
            init=("w0",),
        )
        left = compose(compose(heater, obs), third)
        right = compose(heater, compose(obs, third))

        def flat(loc):
            if isinstance(loc, tuple):
                return tuple(x for part in loc for x in flat(part))
            return (loc,)

        assert {flat(l) for l in left.locations} == {flat(l) for l in right.locations}
        lt = {(flat(t.source), t.action, flat(t.target)) for t in left.transitions}
        rt = {(flat(t.source), t.action, flat(t.target)) for t in right.transitions}
        assert lt == rt
