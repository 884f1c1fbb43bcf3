"""The decision pipeline: does a system satisfy a formula?

The question is reduced to a reachability query in four steps:

1. The negated formula is compiled into an observer automaton whose
   accepting runs are exactly the traces violating the property.
2. Observer and system are composed; accepting product runs are system
   traces that violate the property.
3. Generalized acceptance is reduced to a single final set (counter
   product), and an empty family becomes the trivial one, since an
   automaton with no acceptance sets accepts every run.
4. The product is instrumented with a latch f and snapshots: every exit
   edge of a final location gets a twin that, once, records a code in f
   and each witness variable in its snapshot. An accepting run must
   revisit a final location with a state close to an earlier visit, so
   if no state with f set and every witness back within eps of its
   snapshot is reachable, no accepting run exists and the property is
   Verified.

Interval box reachability over-approximates, so a query hit only means
the property could not be confirmed: verdicts are Verified or
Inconclusive, never Falsified.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import ModelError, VariableRenamedWarning
from .formula.nnf import to_nnf
from .formula.syntax import Formula, Not, action_atoms, to_str
from .hybrid.automaton import GBHA, HybridAutomaton, Loc, Transition, compose
from .hybrid.constraints import FlowConstraint, JumpConstraint, Relation
from .hybrid.expr import Const, DotVar, PrimedVar, Var
from .reach.boxes import clip_rows, is_empty, linear_rows
from .reach.engine import ReachResult, reachable
from .reach.kernels import backend_name
from .tableau import build_formula_automaton, prune_unreachable


def build_negated_observer(
    formula: Formula, actions, prune: bool = True, strict: bool = False
) -> HybridAutomaton:
    """Observer automaton accepting exactly the traces violating formula."""
    missing = set(action_atoms(formula)) - set(actions)
    if missing:
        raise ModelError(
            f"formula uses actions outside the system alphabet: {sorted(missing)}"
        )
    negated = to_nnf(Not(formula), strict=strict)
    observer = build_formula_automaton(negated, actions)
    return prune_unreachable(observer) if prune else observer


def degeneralize(h: GBHA) -> HybridAutomaton:
    """Counter product reducing a generalized family to one final set.

    Locations become (location, index); the index advances past set i
    when leaving one of its members, and the single final set is family
    set 0 at index 0. Families of size 0 or 1 are returned unchanged.
    """
    k = len(h.acceptance)
    if k <= 1:
        return h
    locations = tuple((l, i) for i in range(k) for l in h.locations)
    transitions = []
    for t in h.transitions:
        for i in range(k):
            j = (i + 1) % k if t.source in h.acceptance[i] else i
            transitions.append(
                Transition((t.source, i), t.action, (t.target, j), t.jumps)
            )
    dyn = {(l, i): h.dyn[l] for l, i in locations}
    init = tuple((l, 0) for l in h.init)
    init_region = {(l, 0): r for l, r in h.init_region.items()}
    acceptance = (frozenset((l, 0) for l in h.acceptance[0]),)
    notes = {
        (l, i): f"{note} [{i}]"
        for l, note in h.location_notes.items()
        for i in range(k)
    }
    return HybridAutomaton(
        h.variables,
        h.actions,
        locations,
        transitions,
        dyn,
        init,
        init_region,
        acceptance,
        notes,
    )


def normalize_acceptance(h: HybridAutomaton) -> HybridAutomaton:
    """An empty acceptance family accepts everything; make that explicit."""
    if h.acceptance:
        return h
    return HybridAutomaton(
        h.variables,
        h.actions,
        h.locations,
        h.transitions,
        h.dyn,
        h.init,
        h.init_region,
        (frozenset(h.locations),),
        h.location_notes,
    )


@dataclass(frozen=True)
class QueryTarget:
    """One final location's recurrence query: f = code, witness near y."""

    location: Loc
    code: int


def _fresh_name(want: str, taken) -> str:
    name = want
    while name in taken:
        name = name + "_"
    if name != want:
        warnings.warn(
            f"auxiliary variable '{want}' collides with a model variable; "
            f"using '{name}'",
            VariableRenamedWarning,
            stacklevel=3,
        )
    return name


def instrument(
    h: HybridAutomaton, witness: str | None = None
) -> tuple[
    HybridAutomaton, tuple[QueryTarget, ...], str, tuple[str, ...], tuple[str, ...]
]:
    """Add the latch f and snapshot variables for the recurrence query.

    Every exit edge of a final location gains a twin, enabled only while
    f = 0, that sets f to the location's code and copies each witness
    variable into its snapshot. All auxiliaries start at 0 and never
    flow. witness picks the tracked variable; None takes the
    lexicographically first one, and "all" (when no variable carries
    that name) tracks the full continuous state with one snapshot per
    variable. Returns the instrumented automaton, the query targets, the
    latch name, the snapshot names and the witness names, the last two
    aligned index by index.

    Needs at most one acceptance set; an empty family means no final
    locations, hence no targets and no accepting runs at all.
    """
    if len(h.acceptance) > 1:
        raise ModelError("instrument needs a degeneralized automaton")
    if not h.variables:
        raise ModelError("cannot pick a witness variable: automaton has none")
    if witness is None:
        witness_vars = (min(h.variables),)
    elif witness == "all" and "all" not in h.variables:
        witness_vars = tuple(h.variables)
    elif witness not in h.variables:
        raise ModelError(f"witness variable {witness!r} is not declared")
    else:
        witness_vars = (witness,)

    taken = set(h.variables)
    f_name = _fresh_name("f", taken)
    taken.add(f_name)
    snapshots = []
    for w in witness_vars:
        name = _fresh_name("y" if len(witness_vars) == 1 else f"y_{w}", taken)
        taken.add(name)
        snapshots.append(name)
    y_names = tuple(snapshots)
    variables = h.variables + (f_name,) + y_names

    zero = Const(0.0)
    aux_dyn = tuple(
        FlowConstraint(DotVar(n), Relation.EQ, zero) for n in (f_name, *y_names)
    )
    dyn = {l: h.dyn[l] + aux_dyn for l in h.locations}

    aux_init = tuple(
        FlowConstraint(Var(n), Relation.EQ, zero) for n in (f_name, *y_names)
    )
    init_region = {l: h.init_region.get(l, ()) + aux_init for l in h.init}
    for l, r in h.init_region.items():
        if l not in init_region:
            init_region[l] = r

    finals = h.acceptance[0] if h.acceptance else frozenset()
    order = [l for l in h.locations if l in finals]
    codes = {l: i + 1 for i, l in enumerate(order)}
    targets = tuple(QueryTarget(l, codes[l]) for l in order)

    transitions = list(h.transitions)
    for t in h.transitions:
        code = codes.get(t.source)
        if code is None:
            continue
        snap = t.jumps + (
            JumpConstraint(Var(f_name), Relation.EQ, zero),
            JumpConstraint(PrimedVar(f_name), Relation.EQ, Const(float(code))),
            *(
                JumpConstraint(PrimedVar(y), Relation.EQ, Var(w))
                for y, w in zip(y_names, witness_vars)
            ),
        )
        transitions.append(Transition(t.source, t.action, t.target, snap))

    out = HybridAutomaton(
        variables,
        h.actions,
        h.locations,
        transitions,
        dyn,
        h.init,
        init_region,
        h.acceptance,
        h.location_notes,
    )
    return out, targets, f_name, y_names, witness_vars


@dataclass
class Verdict:
    """Outcome of a check run; Verified only when the proof is airtight."""

    status: str
    reason: str
    formula: str
    hits: list[dict] = field(default_factory=list)
    complete: bool = True
    stats: dict = field(default_factory=dict)

    @property
    def verified(self) -> bool:
        return self.status == "Verified"

    def __str__(self) -> str:
        return f"{self.status}: {self.reason}"


def check(
    system: HybridAutomaton,
    formula: Formula,
    horizon: float = 100.0,
    step: float = 0.01,
    eps: float = 1e-6,
    widen_after: int = 16,
    max_visits: int = 4000,
    prune: bool = True,
    strict: bool = False,
    witness: str | None = None,
) -> Verdict:
    """Decide system |= formula via the instrumented reachability query."""
    observer = build_negated_observer(formula, system.actions, prune, strict)
    product = compose(system, observer)
    product = normalize_acceptance(degeneralize(product))
    inst, targets, f_name, y_names, w_names = instrument(product, witness)

    reach = reachable(
        inst,
        horizon=horizon,
        step=step,
        widen_after=widen_after,
        max_visits=max_visits,
    )
    names = inst.variables
    fi = names.index(f_name)
    pairs = [(names.index(y), names.index(w)) for y, w in zip(y_names, w_names)]

    hits: list[dict] = []
    unbounded = False
    for target in targets:
        C = np.zeros((2, len(names)))
        C[0, fi], C[1, fi] = 1.0, -1.0
        d = np.array([-float(target.code), float(target.code)])
        for lo, hi in reach.boxes.get(target.location, ()):
            c_lo, c_hi = clip_rows(lo, hi, C, d)
            if is_empty(c_lo, c_hi):
                continue
            # A hit needs every snapshot within eps of its variable. A
            # pair that definitely misses rules the box out even when
            # another pair is unbounded.
            missed = False
            unknown = False
            for yi, wi in pairs:
                corners = (c_lo[wi], c_hi[wi], c_lo[yi], c_hi[yi])
                if not all(np.isfinite(v) for v in corners):
                    unknown = True
                    continue
                gap_lo = c_lo[yi] - c_hi[wi]
                gap_hi = c_hi[yi] - c_lo[wi]
                if not (gap_lo <= eps and gap_hi >= -eps):
                    missed = True
                    break
            if missed:
                continue
            if unknown:
                unbounded = True
                continue
            hits.append(
                {
                    "location": target.location,
                    "code": target.code,
                    "box": {
                        x: (float(c_lo[i]), float(c_hi[i]))
                        for i, x in enumerate(names)
                    },
                }
            )

    stats = {
        "backend": backend_name(),
        "product_locations": len(inst.locations),
        "product_transitions": len(inst.transitions),
        "query_targets": len(targets),
        "boxes": sum(len(v) for v in reach.boxes.values()),
        "visits": dict(reach.visits),
        "reach_complete": reach.complete,
        "aux": {"f": f_name, "y": y_names, "witness": w_names},
    }
    text = to_str(formula)

    if hits:
        return Verdict(
            "Inconclusive",
            f"recurrence query reachable at {len(hits)} final location box(es)",
            text,
            hits,
            reach.complete,
            stats,
        )
    if not reach.complete:
        return Verdict(
            "Inconclusive",
            "reachability exploration incomplete within the budget",
            text,
            [],
            False,
            stats,
        )
    if unbounded:
        return Verdict(
            "Inconclusive",
            "witness variable unbounded at a latched final location",
            text,
            [],
            True,
            stats,
        )
    return Verdict(
        "Verified",
        "no reachable state closes the recurrence at any final location",
        text,
        [],
        True,
        stats,
    )
