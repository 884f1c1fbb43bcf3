"""Direct evaluation of formulas on lasso traces, plus trace generation.

This route never builds closures, consistent sets or reachability: it is
the satisfaction relation itself, computed positionwise, and serves as an
independent oracle for the compiled automaton route.

On a lasso with p prefix and c cycle segments, every atom's value at
positions i >= p + 2 repeats with period c (action atoms look one step
back, which is why period starts one past the cycle entry). Positions
1 .. p + 2c with the successor of the last position wrapping back to
p + c + 1 therefore quotient the infinite trace faithfully. Until and
release are the least and greatest fixpoints of their one-step unfoldings
on this quotient. Each subformula's value is one bit per position, packed
in an int, so the fixpoint sweeps are a handful of integer operations.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .errors import TraceError
from .formula.syntax import (
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
from .hybrid.automaton import HybridAutomaton, Loc, _solve_jump
from .hybrid.constraints import FlowConstraint, Relation, bounding_box, satisfies_jump
from .hybrid.expr import DotVar, Expr, evaluate, variables as expr_variables
from .hybrid.lasso import HybridLassoTrace
from .hybrid.trajectory import DEFAULT_FLOW_TOL, SampledTrajectory, satisfies_flow
from .hybrid.valuation import Valuation


def _succ_values(val: int, n: int, wrap_bit: int) -> int:
    """Value at each position's successor; position n reads wrap_bit + 1."""
    return (val >> 1) | ((val >> wrap_bit & 1) << (n - 1))


def _eval_positions(formula: Formula, n: int, wrap_bit: int, atom_mask) -> int:
    full = (1 << n) - 1
    memo: dict[Formula, int] = {}

    def go(f: Formula) -> int:
        v = memo.get(f)
        if v is not None:
            return v
        match f:
            case Not(x):
                v = ~go(x) & full
            case And(a, b):
                v = go(a) & go(b)
            case Or(a, b):
                v = go(a) | go(b)
            case Next(x):
                v = _succ_values(go(x), n, wrap_bit)
            case Until(a, b):
                va, vb = go(a), go(b)
                v = vb
                while True:
                    nv = vb | va & _succ_values(v, n, wrap_bit)
                    if nv == v:
                        break
                    v = nv
            case Release(a, b):
                va, vb = go(a), go(b)
                v = full
                while True:
                    nv = vb & (va | _succ_values(v, n, wrap_bit))
                    if nv == v:
                        break
                    v = nv
            case _:
                v = atom_mask(f) & full
        memo[f] = v
        return v

    return go(formula)


def evaluate_trace(
    trace: HybridLassoTrace, formula: Formula, tol: float = DEFAULT_FLOW_TOL
) -> bool:
    """Does the trace satisfy the formula at position 1?"""
    p, c = trace.p, trace.c
    n = p + 2 * c
    flow_cache: dict[tuple[int, FlowConstraint], bool] = {}

    def atom_mask(f: Formula) -> int:
        match f:
            case Top():
                return -1
            case Bot():
                return 0
            case ActionAtom(a):
                m = 0
                for i in range(2, n + 1):
                    if trace.action_before(i) == a:
                        m |= 1 << (i - 1)
                return m
            case FlowAtom(con):
                m = 0
                for i in range(1, n + 1):
                    s = i if i <= p + c else i - c
                    key = (s, con)
                    ok = flow_cache.get(key)
                    if ok is None:
                        ok = satisfies_flow(trace.trajectory(s), con, tol)
                        flow_cache[key] = ok
                    if ok:
                        m |= 1 << (i - 1)
                return m
        raise TypeError(f"not a formula atom: {f!r}")

    return bool(_eval_positions(formula, n, p + c, atom_mask) & 1)


def evaluate_word(
    prefix: Sequence[str], cycle: Sequence[str], formula: Formula
) -> bool:
    """Formula value on an action lasso word; flow atoms have no meaning here."""
    if not cycle:
        raise TraceError("lasso word needs a nonempty cycle")
    p, c = len(prefix), len(cycle)
    n = p + 2 * c
    w = tuple(prefix) + tuple(cycle) + tuple(cycle)

    def atom_mask(f: Formula) -> int:
        match f:
            case Top():
                return -1
            case Bot():
                return 0
            case ActionAtom(a):
                m = 0
                for i in range(2, n + 1):
                    if w[i - 2] == a:
                        m |= 1 << (i - 1)
                return m
            case FlowAtom(con):
                raise TraceError(
                    f"formula constrains the continuous state ('{con}') "
                    "but a word carries no trajectories"
                )
        raise TypeError(f"not a formula atom: {f!r}")

    return bool(_eval_positions(formula, n, p + c, atom_mask) & 1)


# -- random valid traces ---------------------------------------------------


def _vector_field(h: HybridAutomaton, loc: Loc) -> dict[str, Expr]:
    """der(x) = e rows of the location, one per variable."""
    out: dict[str, Expr] = {}
    for cst in h.dyn[loc]:
        if cst.rel is not Relation.EQ:
            continue
        for dot_side, expr_side in ((cst.lhs, cst.rhs), (cst.rhs, cst.lhs)):
            if isinstance(dot_side, DotVar) and not expr_variables(expr_side)[1]:
                out[dot_side.name] = expr_side
                break
    missing = set(h.variables) - set(out)
    if missing:
        raise TraceError(
            f"dynamics of {loc!r} do not define der() for {sorted(missing)}"
        )
    return out


def _rk4(field: dict[str, Expr], names, vec: np.ndarray, dt: float) -> np.ndarray:
    def f(v: np.ndarray) -> np.ndarray:
        state = dict(zip(names, v))
        return np.array([float(evaluate(field[x], state=state)) for x in names])

    k1 = f(vec)
    k2 = f(vec + 0.5 * dt * k1)
    k3 = f(vec + 0.5 * dt * k2)
    k4 = f(vec + dt * k3)
    return vec + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)


def _derivs(field: dict[str, Expr], names, values: np.ndarray) -> np.ndarray:
    out = np.empty_like(values)
    for k, row in enumerate(values):
        state = dict(zip(names, row))
        out[k] = [float(evaluate(field[x], state=state)) for x in names]
    return out


def random_trace(
    h: HybridAutomaton,
    rng: np.random.Generator,
    step: float = 0.05,
    max_jumps: int = 80,
    recurrence_tol: float = 0.05,
    dwell_max: float = 4.0,
):
    """A random valid lasso trace of the automaton, with its witness.

    Simulates each location's vector field with fourth order Runge-Kutta
    from a random initial state, dwelling a random time before taking a
    random enabled transition (or jumping early when the invariant is
    about to break). Derivative samples come from the field itself, so
    derivative equations hold exactly at every sample. The lasso closes
    once a post-jump state nearly recurs; the final pre-jump sample is
    then snapped so the closing jump reproduces the recurrence target
    exactly. Returns (trace, (prefix locations, cycle locations)).

    Needs dynamics that define der() for every variable and a bounded
    initial region; raises TraceError otherwise, or when no cycle closes
    within max_jumps.
    """
    names = h.variables
    if not h.init:
        raise TraceError("automaton has no initial location")
    loc = h.init[int(rng.integers(len(h.init)))]
    box = bounding_box(h.init_region.get(loc, ()), names)
    vec = np.empty(len(names))
    for k, x in enumerate(names):
        lo, hi = box[x]
        if not (np.isfinite(lo) and np.isfinite(hi) and lo <= hi):
            raise TraceError(f"initial region gives no bounded interval for {x}")
        vec[k] = rng.uniform(lo, hi)

    fields = {l: _vector_field(h, l) for l in h.locations}
    segments: list[tuple[Loc, np.ndarray, str]] = []
    history: list[tuple[Loc, np.ndarray, int]] = []
    history.append((loc, vec.copy(), 1))

    def admissible(l: Loc, v: np.ndarray) -> bool:
        return h.admissible(l, dict(zip(names, v)))

    def enabled(l: Loc, v: np.ndarray):
        out = []
        val = Valuation(dict(zip(names, v)))
        for t in h.transitions_from(l):
            v2 = _solve_jump(val, t.jumps, names)
            if v2 is None:
                continue
            if not all(satisfies_jump(val, v2, jc) for jc in t.jumps):
                continue
            if not h.admissible(t.target, v2):
                continue
            out.append((t, np.array([v2[x] for x in names])))
        return out

    for _ in range(max_jumps):
        field = fields[loc]
        dwell = rng.uniform(3 * step, dwell_max)
        values = [vec.copy()]
        while True:
            elapsed = (len(values) - 1) * step
            options = enabled(loc, values[-1]) if elapsed >= dwell else []
            nxt = _rk4(field, names, values[-1], step)
            if not admissible(loc, nxt) and not options:
                options = enabled(loc, values[-1])
                if not options:
                    raise TraceError(f"simulation stuck in {loc!r}")
            if options:
                t, v2 = options[int(rng.integers(len(options)))]
                break
            values.append(nxt)

        v_end = values[-1]
        closed = None
        for (hloc, hvec, hseg) in history:
            if hloc != t.target:
                continue
            if np.max(np.abs(hvec - v2)) > recurrence_tol:
                continue
            # Snap the pre-jump sample so the closing jump lands exactly
            # on the recurrence target.
            snapped = hvec.copy()
            val_end = Valuation(dict(zip(names, snapped)))
            val_tgt = Valuation(dict(zip(names, hvec)))
            if not all(satisfies_jump(val_end, val_tgt, jc) for jc in t.jumps):
                continue
            if not admissible(loc, snapped):
                continue
            closed = (hseg, snapped)
            break

        if closed is not None:
            hseg, snapped = closed
            values[-1] = snapped
            segments.append((loc, np.stack(values), t.action))
            trajs = [
                (
                    SampledTrajectory(
                        names, vals, step, _derivs(fields[l], names, vals)
                    ),
                    a,
                )
                for l, vals, a in segments
            ]
            trace = HybridLassoTrace(trajs[: hseg - 1], trajs[hseg - 1 :])
            wp = tuple(l for l, _, _ in segments[: hseg - 1])
            wc = tuple(l for l, _, _ in segments[hseg - 1 :])
            return trace, (wp, wc)

        segments.append((loc, np.stack(values), t.action))
        loc = t.target
        vec = v2
        history.append((loc, vec.copy(), len(segments) + 1))

    raise TraceError(f"no cycle closed within {max_jumps} jumps")
