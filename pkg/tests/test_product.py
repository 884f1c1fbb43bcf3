"""The decision pipeline: observer, counter product, latch, verdicts."""

import itertools
import random
import warnings

import numpy as np
import pytest

from hyltlmc.errors import (
    ComplementError,
    ComplementStrengtheningWarning,
    ModelError,
    VariableRenamedWarning,
)
from hyltlmc.formula.parser import Declarations, parse_formula
from hyltlmc.hybrid.automaton import compose
from hyltlmc.hybrid.discrete import accepts_lasso_word
from hyltlmc.monitor import evaluate_trace, evaluate_word, random_trace
from hyltlmc.product import (
    build_negated_observer,
    check,
    degeneralize,
    instrument,
    normalize_acceptance,
)
from hyltlmc.tableau import build_formula_automaton

from conftest import BOOL_ATOMS, heater_model, random_formula

DECLS = Declarations(variables=("x",), actions=("on", "off"))


def phi(s: str):
    return parse_formula(s, DECLS)


ALL_WORDS = [
    (u, v)
    for p in range(3)
    for c in (1, 2)
    for u in itertools.product(("on", "off"), repeat=p)
    for v in itertools.product(("on", "off"), repeat=c)
]


class TestNegatedObserver:
    def test_accepts_exactly_the_violations(self):
        f = phi("F on")
        obs = build_negated_observer(f, ("on", "off"))
        for u, v in ALL_WORDS:
            assert accepts_lasso_word(obs, u, v) == (not evaluate_word(u, v, f))

    def test_unknown_action_is_rejected(self):
        decls = Declarations(variables=("x",), actions=("on", "off", "warm"))
        f = parse_formula("F warm", decls)
        with pytest.raises(ModelError, match="alphabet"):
            build_negated_observer(f, ("on", "off"))

    def test_pruning_only_trims(self):
        # Negating this formula rewrites its flow atom, which warns.
        f = phi("F(x >= 21 & X on)")
        with pytest.warns(ComplementStrengtheningWarning):
            full = build_negated_observer(f, ("on", "off"), prune=False)
            trimmed = build_negated_observer(f, ("on", "off"), prune=True)
        assert set(trimmed.locations) <= set(full.locations)
        assert len(trimmed.locations) < len(full.locations)


class TestDegeneralize:
    def test_single_or_empty_family_is_untouched(self):
        h = build_formula_automaton(phi("F on"), ("on", "off"))
        assert len(h.acceptance) == 1
        assert degeneralize(h) is h

    def test_counter_product_shape(self):
        h = build_formula_automaton(phi("F on & F off"), ("on", "off"))
        k = len(h.acceptance)
        assert k == 2
        g = degeneralize(h)
        assert len(g.acceptance) == 1
        assert len(g.locations) == k * len(h.locations)
        assert all(l[1] == 0 for l in g.init)

    def test_language_is_preserved(self):
        rng = random.Random(99)
        done = 0
        while done < 6:
            f = random_formula(rng, BOOL_ATOMS, rng.randint(4, 10))
            h = build_formula_automaton(f, ("on", "off"))
            if len(h.acceptance) < 2:
                continue
            done += 1
            g = degeneralize(h)
            for u, v in ALL_WORDS:
                assert accepts_lasso_word(g, u, v) == evaluate_word(u, v, f), (f, u, v)


class TestNormalize:
    def test_empty_family_becomes_all_locations(self):
        h = heater_model()
        assert h.acceptance == ()
        n = normalize_acceptance(h)
        assert n.acceptance == (frozenset(h.locations),)

    def test_nonempty_family_is_untouched(self):
        h = build_formula_automaton(phi("F on"), ("on", "off"))
        assert normalize_acceptance(h) is h


class TestInstrument:
    def automaton(self):
        h = heater_model()
        return normalize_acceptance(h)

    def two_variable(self):
        h = heater_model()
        return type(h)(
            variables=("x", "a"),
            actions=h.actions,
            locations=h.locations,
            transitions=h.transitions,
            dyn={l: h.dyn[l] for l in h.locations},
            init=h.init,
            init_region=h.init_region,
            acceptance=(frozenset(h.locations),),
        )

    def test_aux_variables_and_rows(self):
        inst, targets, f, y, w = instrument(self.automaton())
        assert (f, y, w) == ("f", ("y",), ("x",))
        assert inst.variables == ("x", "f", "y")
        for l in inst.locations:
            texts = [str(c) for c in inst.dyn[l]]
            assert "der(f) = 0" in texts
            assert "der(y) = 0" in texts
        for l in inst.init:
            texts = [str(c) for c in inst.init_region[l]]
            assert "f = 0" in texts and "y = 0" in texts

    def test_exit_twins_and_codes(self):
        h = self.automaton()
        inst, targets, f, y, w = instrument(h)
        assert [t.code for t in targets] == [1, 2]
        assert {t.location for t in targets} == set(h.locations)
        assert len(inst.transitions) == 2 * len(h.transitions)
        twins = [t for t in inst.transitions if any("f'" in str(j) for j in t.jumps)]
        assert len(twins) == len(h.transitions)
        for t in twins:
            texts = [str(j) for j in t.jumps]
            assert "f = 0" in texts
            assert f"y' = {w[0]}" in texts

    def test_default_witness_is_lexicographically_first(self):
        inst, _, f, y, w = instrument(self.two_variable())
        assert w == ("a",)
        assert y == ("y",)
        twins = [t for t in inst.transitions if any("f'" in str(j) for j in t.jumps)]
        assert twins
        for t in twins:
            assert "y' = a" in [str(j) for j in t.jumps]

    def test_witness_all_snapshots_every_variable(self):
        inst, _, f, y, w = instrument(self.two_variable(), witness="all")
        assert w == ("x", "a")
        assert y == ("y_x", "y_a")
        assert inst.variables == ("x", "a", "f", "y_x", "y_a")
        for l in inst.locations:
            texts = [str(c) for c in inst.dyn[l]]
            assert "der(y_x) = 0" in texts and "der(y_a) = 0" in texts
        twins = [t for t in inst.transitions if any("f'" in str(j) for j in t.jumps)]
        assert twins
        for t in twins:
            texts = [str(j) for j in t.jumps]
            assert "y_x' = x" in texts and "y_a' = a" in texts

    def test_witness_all_names_a_variable_when_one_is_declared(self):
        h = self.two_variable()
        shadowed = type(h)(
            variables=("x", "all"),
            actions=h.actions,
            locations=h.locations,
            transitions=h.transitions,
            dyn={l: h.dyn[l] for l in h.locations},
            init=h.init,
            init_region=h.init_region,
            acceptance=(frozenset(h.locations),),
        )
        inst, _, f, y, w = instrument(shadowed, witness="all")
        assert w == ("all",)
        assert y == ("y",)

    def test_generalized_family_is_rejected(self):
        h = build_formula_automaton(phi("F on & F off"), ("on", "off"))
        with pytest.raises(ModelError, match="degeneralized"):
            instrument(h)

    def test_unknown_witness_is_rejected(self):
        with pytest.raises(ModelError, match="witness"):
            instrument(self.automaton(), witness="z")

    def test_aux_name_collision_is_renamed(self):
        h = heater_model()
        renamed = type(h)(
            variables=("x", "f"),
            actions=h.actions,
            locations=h.locations,
            transitions=h.transitions,
            dyn={l: h.dyn[l] for l in h.locations},
            init=h.init,
            init_region=h.init_region,
            acceptance=(frozenset(h.locations),),
        )
        with pytest.warns(VariableRenamedWarning):
            inst, _, f, y, _ = instrument(renamed)
        assert f == "f_" and y == ("y",)
        assert "f_" in inst.variables


class TestCheck:
    """End to end verdicts on the heater."""

    def test_switch_on_stays_cold_verified(self):
        v = check(heater_model(), phi("!F(x >= 21 & X on)"))
        assert v.verified
        assert v.complete
        assert v.hits == []

    def test_relaxed_guard_goes_inconclusive_with_hot_hits(self):
        v = check(heater_model(on_guard_max=25.0), phi("!F(x >= 21 & X on)"))
        assert not v.verified
        assert v.hits
        for hit in v.hits:
            lo, hi = hit["box"]["x"]
            assert hi >= 21.0

    def test_trivial_property_verifies_on_an_empty_observer(self):
        v = check(heater_model(), phi("true"))
        assert v.verified

    def test_alternation_forces_recurring_on(self):
        v = check(heater_model(), phi("G F on"))
        assert v.verified

    def test_unreachable_target_cannot_be_confirmed(self):
        # x never exceeds 23, so F(x >= 24) is false on every trace; the
        # checker cannot falsify, it only fails to verify. Negating the
        # flow atom also crosses the complement rewrite, which warns.
        with pytest.warns(ComplementStrengtheningWarning):
            v = check(heater_model(), phi("F(x >= 24)"))
        assert not v.verified

    def test_strict_mode_refuses_undeclared_complements(self):
        with pytest.raises(ComplementError):
            check(heater_model(), phi("F(x >= 24)"), strict=True)

    def test_verdict_renders_as_one_line(self):
        v = check(heater_model(), phi("true"))
        text = str(v)
        assert text.startswith("Verified: ") and "\n" not in text


class TestCheckAgreesWithTheMonitor:
    """A Verified verdict must hold on every independently sampled trace."""

    def test_verified_formulas_hold_on_random_traces(self):
        h = heater_model()
        rng = random.Random(5)
        traces = []
        gen = np.random.default_rng(17)
        for _ in range(5):
            traces.append(random_trace(h, gen)[0])
        verified = 0
        for _ in range(20):
            f = random_formula(rng, BOOL_ATOMS, rng.randint(2, 7))
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                v = check(h, f, horizon=30.0)
            if not v.verified:
                continue
            verified += 1
            for t in traces:
                assert evaluate_trace(t, f), (f, t.word())
        assert verified >= 3
