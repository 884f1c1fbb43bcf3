"""Hybrid automata with optional generalized Buchi acceptance.

A location's dynamics is a set of flow constraints over state and dotted
variables; every trajectory spent in the location must satisfy all of them
at every sample. Transitions carry jump constraints over state and primed
variables relating the pre- and post-jump valuations. An automaton with an
empty acceptance family is a plain automaton: every generated run accepts.

Locations are hashable keys, strings for hand-written models and nested
tuples for products.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from ..errors import ModelError
from .constraints import FlowConstraint, JumpConstraint, Relation, satisfies_jump
from .expr import PrimedVar, Var, evaluate, variables as expr_variables
from .lasso import HybridLassoTrace
from .trajectory import DEFAULT_FLOW_TOL, satisfies_all_flows
from .valuation import Valuation

Loc = object  # str for source models, tuples for products


@dataclass(frozen=True)
class Transition:
    source: Loc
    action: str
    target: Loc
    jumps: tuple[JumpConstraint, ...] = ()


class HybridAutomaton:
    """Automaton over named continuous variables and a discrete action set."""

    def __init__(
        self,
        variables: Sequence[str],
        actions: Sequence[str],
        locations: Sequence[Loc],
        transitions: Iterable[Transition],
        dyn: Mapping[Loc, Sequence[FlowConstraint]],
        init: Sequence[Loc],
        init_region: Mapping[Loc, Sequence[FlowConstraint]] | None = None,
        acceptance: Sequence[Iterable[Loc]] = (),
        location_notes: Mapping[Loc, str] | None = None,
    ):
        self.variables = tuple(variables)
        self.actions = tuple(actions)
        self.locations = tuple(locations)
        self.transitions = tuple(transitions)
        self.dyn = {l: tuple(dyn.get(l, ())) for l in self.locations}
        self.init = tuple(init)
        self.init_region = {
            l: tuple(cs) for l, cs in (init_region or {}).items()
        }
        self.acceptance = tuple(frozenset(s) for s in acceptance)
        self.location_notes = dict(location_notes or {})
        self._validate()

    def _validate(self) -> None:
        locset = set(self.locations)
        if len(locset) != len(self.locations):
            raise ModelError("duplicate location")
        varset = set(self.variables)
        if len(varset) != len(self.variables):
            raise ModelError("duplicate variable")
        if len(set(self.actions)) != len(self.actions):
            raise ModelError("duplicate action")
        for l in self.init:
            if l not in locset:
                raise ModelError(f"initial location {l!r} not declared")
        for l, cs in self.dyn.items():
            for c in cs:
                bad = (c.state_vars | c.dot_vars) - varset
                if bad:
                    raise ModelError(
                        f"flow constraint '{c}' of {l!r} uses undeclared {sorted(bad)}"
                    )
        for l, cs in self.init_region.items():
            if l not in locset:
                raise ModelError(f"init region for unknown location {l!r}")
            for c in cs:
                if c.mentions_dot:
                    raise ModelError(
                        f"init region constraint '{c}' must not use derivatives"
                    )
                if c.state_vars - varset:
                    raise ModelError(
                        f"init region constraint '{c}' uses undeclared variables"
                    )
        for t in self.transitions:
            if t.source not in locset or t.target not in locset:
                raise ModelError(f"transition endpoints undeclared: {t}")
            if t.action not in self.actions:
                raise ModelError(f"transition action '{t.action}' not declared")
            for jc in t.jumps:
                plain, _, primed = (set() for _ in range(3))
                for e in (jc.lhs, jc.rhs):
                    p, _, pr = expr_variables(e)
                    plain |= p
                    primed |= pr
                if (plain | primed) - varset:
                    raise ModelError(
                        f"jump constraint '{jc}' uses undeclared variables"
                    )
        for s in self.acceptance:
            if s - locset:
                raise ModelError("acceptance set contains undeclared locations")

    # -- structure helpers -------------------------------------------------

    def transitions_from(self, loc: Loc, action: str | None = None):
        for t in self.transitions:
            if t.source == loc and (action is None or t.action == action):
                yield t

    def invariant(self, loc: Loc) -> tuple[FlowConstraint, ...]:
        """The derivative-free part of the location's dynamics."""
        return tuple(c for c in self.dyn[loc] if not c.mentions_dot)

    def admissible(self, loc: Loc, v: Valuation, tol: float = 0.0) -> bool:
        return all(bool(c.holds_at(v, tol=tol)) for c in self.invariant(loc))

    def __repr__(self) -> str:
        return (
            f"HybridAutomaton(|Loc|={len(self.locations)}, "
            f"|Edg|={len(self.transitions)}, |A|={len(self.actions)}, "
            f"|F|={len(self.acceptance)})"
        )

    def __eq__(self, other) -> bool:
        """Structural equality; location notes are presentation only."""
        if not isinstance(other, HybridAutomaton):
            return NotImplemented
        return (
            self.variables == other.variables
            and self.actions == other.actions
            and self.locations == other.locations
            and self.transitions == other.transitions
            and self.dyn == other.dyn
            and self.init == other.init
            and self.init_region == other.init_region
            and self.acceptance == other.acceptance
        )

    __hash__ = None


GBHA = HybridAutomaton


def _freeze_jumps(names: Iterable[str]) -> tuple[JumpConstraint, ...]:
    return tuple(
        JumpConstraint(PrimedVar(x), Relation.EQ, Var(x)) for x in sorted(names)
    )


def _dedup(seq):
    return tuple(dict.fromkeys(seq))


def compose(h1: HybridAutomaton, h2: HybridAutomaton) -> HybridAutomaton:
    """Parallel composition: sync on shared actions, stutter otherwise.

    A component not owning an action stays in place and freezes its private
    variables; shared variables are related by whichever jump constraints the
    owning components impose. Acceptance families are lifted through the two
    projections, first automaton's sets first.
    """
    variables = _dedup(h1.variables + h2.variables)
    actions = _dedup(h1.actions + h2.actions)
    locations = tuple((l1, l2) for l1 in h1.locations for l2 in h2.locations)

    private1 = set(h1.variables) - set(h2.variables)
    private2 = set(h2.variables) - set(h1.variables)

    def moves(h: HybridAutomaton, private: set, action: str):
        if action in h.actions:
            return [
                (t.source, t.target, t.jumps) for t in h.transitions if t.action == action
            ]
        frozen = _freeze_jumps(private)
        return [(l, l, frozen) for l in h.locations]

    transitions = []
    for a in actions:
        for s1, t1, j1 in moves(h1, private1, a):
            for s2, t2, j2 in moves(h2, private2, a):
                transitions.append(
                    Transition((s1, s2), a, (t1, t2), _dedup(j1 + j2))
                )

    dyn = {
        (l1, l2): _dedup(h1.dyn[l1] + h2.dyn[l2])
        for l1 in h1.locations
        for l2 in h2.locations
    }
    init = tuple((l1, l2) for l1 in h1.init for l2 in h2.init)

    init_region = {}
    for l1, l2 in locations:
        r1 = h1.init_region.get(l1)
        r2 = h2.init_region.get(l2)
        if r1 is not None or r2 is not None:
            init_region[(l1, l2)] = _dedup(tuple(r1 or ()) + tuple(r2 or ()))

    acceptance = [
        frozenset((l1, l2) for l1, l2 in locations if l1 in s) for s in h1.acceptance
    ] + [
        frozenset((l1, l2) for l1, l2 in locations if l2 in s) for s in h2.acceptance
    ]

    notes = {}
    for l1, l2 in locations:
        parts = [h1.location_notes.get(l1), h2.location_notes.get(l2)]
        parts = [p for p in parts if p]
        if parts:
            notes[(l1, l2)] = "; ".join(parts)

    return HybridAutomaton(
        variables,
        actions,
        locations,
        transitions,
        dyn,
        init,
        init_region,
        acceptance,
        notes,
    )


def _solve_jump(
    v: Valuation, jumps: Sequence[JumpConstraint], names: Sequence[str]
) -> Valuation | None:
    """Construct the canonical successor valuation of a jump.

    Equations of the shape x' = e(state) define the new value of x; variables
    without a defining equation keep their value. Remaining constraints
    (guards, interval memberships) are checked afterwards by the caller, so
    an unsolvable system simply fails those checks. Returns None when a
    defining equation is itself unevaluable.
    """
    new = {x: v[x] for x in names}
    for jc in jumps:
        if jc.rel is not Relation.EQ:
            continue
        target = None
        expr = None
        if isinstance(jc.lhs, PrimedVar) and not expr_variables(jc.rhs)[2]:
            target, expr = jc.lhs.name, jc.rhs
        elif isinstance(jc.rhs, PrimedVar) and not expr_variables(jc.lhs)[2]:
            target, expr = jc.rhs.name, jc.lhs
        if target is not None:
            try:
                new[target] = float(evaluate(expr, state=v))
            except (ModelError, ZeroDivisionError):
                return None
    return Valuation(new)


def discrete_step(
    h: HybridAutomaton,
    state: tuple[Loc, Valuation],
    action: str,
    tol: float = 0.0,
) -> tuple[tuple[Loc, Valuation], ...]:
    """Concrete successors of (location, valuation) under one action.

    Successors are built by solving the defining reset equations and holding
    unconstrained variables, then filtered by the full jump constraint set
    and admissibility in the target location. Only this canonical
    identity-completed family is enumerated; constraints leaving a variable
    genuinely free describe more successors than any finite set could.
    """
    loc, v = state
    if loc not in h.dyn:
        raise ModelError(f"unknown location {loc!r}")
    if not h.admissible(loc, v, tol):
        return ()
    out = []
    for t in h.transitions_from(loc, action):
        v2 = _solve_jump(v, t.jumps, h.variables)
        if v2 is None:
            continue
        if not all(satisfies_jump(v, v2, jc) for jc in t.jumps):
            continue
        if not h.admissible(t.target, v2, tol):
            continue
        if (t.target, v2) not in out:
            out.append((t.target, v2))
    return tuple(out)


def _link_ok(
    h: HybridAutomaton,
    src: Loc,
    action: str,
    dst: Loc,
    v_end: Valuation,
    v_next: Valuation,
) -> bool:
    for t in h.transitions:
        if t.source == src and t.action == action and t.target == dst:
            if all(satisfies_jump(v_end, v_next, jc) for jc in t.jumps):
                return True
    return False


def is_generated(
    trace: HybridLassoTrace,
    h: HybridAutomaton,
    witness: tuple[Sequence[Loc], Sequence[Loc]],
    tol: float = DEFAULT_FLOW_TOL,
) -> bool:
    """Check that a lasso trace is a run of the automaton along a witness.

    The witness assigns one location per segment, prefix and cycle
    separately. The first location must be initial (and meet the init region
    when one is declared), every trajectory must satisfy its location's
    dynamics, and every consecutive pair, including the cycle wrap, must be
    linked by a transition whose jump constraints the endpoint valuations
    satisfy.
    """
    wp, wc = tuple(witness[0]), tuple(witness[1])
    if len(wp) != trace.p or len(wc) != trace.c:
        return False
    locs = wp + wc
    for l in locs:
        if l not in h.dyn:
            return False

    first = locs[0]
    if first not in h.init:
        return False
    region = h.init_region.get(first)
    if region is not None:
        fstate = trace.segment(1)[0].fstate
        if not all(bool(c.holds_at(fstate, tol=tol)) for c in region):
            return False

    n = trace.p + trace.c
    for i in range(1, n + 1):
        traj = trace.trajectory(i)
        if not satisfies_all_flows(traj, h.dyn[locs[i - 1]], tol):
            return False

    for i in range(1, n + 1):
        j = i + 1 if i < n else trace.p + 1  # wrap to cycle start
        src, dst = locs[i - 1], locs[j - 1]
        v_end = trace.trajectory(i).lstate
        v_next = trace.trajectory(j).fstate
        if not _link_ok(h, src, trace.action_after(i), dst, v_end, v_next):
            return False
    return True


def accepts(
    trace: HybridLassoTrace,
    h: HybridAutomaton,
    witness: tuple[Sequence[Loc], Sequence[Loc]],
    tol: float = DEFAULT_FLOW_TOL,
) -> bool:
    """Generated along the witness, and the cycle meets every acceptance set."""
    if not is_generated(trace, h, witness, tol):
        return False
    cycle_locs = set(witness[1])
    return all(s & cycle_locs for s in h.acceptance)


def find_accepting_witness(
    trace: HybridLassoTrace,
    h: HybridAutomaton,
    tol: float = DEFAULT_FLOW_TOL,
) -> tuple[tuple[Loc, ...], tuple[Loc, ...]] | None:
    """Search every location assignment for one that accepts the trace.

    Returns a witness (prefix locations, cycle locations) with
    accepts(trace, h, witness) true, or None when no assignment works, in
    which case the automaton rejects the trace outright.

    Runs a layered search: candidate locations per segment are those whose
    dynamics the trajectory satisfies, consecutive candidates must be
    linked by a transition whose jumps the endpoint valuations meet, and
    the cycle part additionally tracks which acceptance sets the candidate
    cycle has touched so far, closing only on a wrap link back to its
    entry location with every set covered.
    """
    p, c = trace.p, trace.c
    n = p + c
    cands: list[list[Loc]] = []
    for i in range(1, n + 1):
        traj = trace.trajectory(i)
        cands.append(
            [l for l in h.locations if satisfies_all_flows(traj, h.dyn[l], tol)]
        )
        if not cands[-1]:
            return None

    first_ok = []
    fstate = trace.trajectory(1).fstate
    for l in cands[0]:
        if l not in h.init:
            continue
        region = h.init_region.get(l)
        if region is not None and not all(
            bool(cst.holds_at(fstate, tol=tol)) for cst in region
        ):
            continue
        first_ok.append(l)
    if not first_ok:
        return None

    def links(i: int, sources, targets) -> dict:
        """Allowed (source, target) location pairs around the i-th action."""
        a = trace.action_after(i)
        v_end = trace.trajectory(i).lstate
        v_next = trace.trajectory(i + 1).fstate if i < n else trace.trajectory(p + 1).fstate
        out: dict[Loc, list[Loc]] = {}
        src_set, tgt_set = set(sources), set(targets)
        for t in h.transitions:
            if t.action != a or t.source not in src_set or t.target not in tgt_set:
                continue
            if all(satisfies_jump(v_end, v_next, jc) for jc in t.jumps):
                out.setdefault(t.source, []).append(t.target)
        return out

    # Prefix: layered reachability with parents.
    layer: dict[Loc, Loc | None] = {l: None for l in first_ok}
    prefix_parents: list[dict] = [dict(layer)]
    for i in range(1, p + 1):
        lk = links(i, layer.keys(), cands[i])
        nxt: dict[Loc, Loc] = {}
        for src, tgts in lk.items():
            for tgt in tgts:
                nxt.setdefault(tgt, src)
        if not nxt:
            return None
        layer = nxt
        prefix_parents.append(dict(layer))

    full_mask = (1 << len(h.acceptance)) - 1
    loc_mask = {
        l: sum(1 << j for j, F in enumerate(h.acceptance) if l in F)
        for l in h.locations
    }

    cycle_links = [
        links(p + 1 + j, cands[p + j], cands[(p + (j + 1) % c)])
        for j in range(c)
    ]

    for entry in layer.keys():
        # States (layer j, loc, mask); parents for reconstruction.
        states: dict[tuple[Loc, int], tuple[Loc, int] | None] = {
            (entry, loc_mask[entry]): None
        }
        trail: list[dict] = [dict(states)]
        for j in range(c - 1):
            lk = cycle_links[j]
            nxt: dict[tuple[Loc, int], tuple[Loc, int]] = {}
            for (loc, mask) in states:
                for tgt in lk.get(loc, ()):
                    key = (tgt, mask | loc_mask[tgt])
                    if key not in nxt:
                        nxt[key] = (loc, mask)
            states = nxt
            trail.append(dict(states))
            if not states:
                break
        if not states:
            continue
        closing = cycle_links[c - 1]
        done = None
        for (loc, mask) in states:
            if mask == full_mask and entry in closing.get(loc, ()):
                done = (loc, mask)
                break
        if done is None:
            continue

        wc_rev = []
        key = done
        for j in range(c - 1, -1, -1):
            wc_rev.append(key[0])
            key = trail[j][key]
        wc = tuple(reversed(wc_rev))

        wp_rev = []
        cur = entry
        for i in range(p, 0, -1):
            cur = prefix_parents[i][cur]
            wp_rev.append(cur)
        # the walk above starts from the entry's parent in layer p
        wp = tuple(reversed(wp_rev))
        return (wp, wc)
    return None
