"""Axis-aligned interval boxes and linear constraint rows over them.

A box is a pair of float arrays (lo, hi); axis i covers [lo[i], hi[i]].
Infinite endpoints are allowed. All operations stay sound under
over-approximation: anything not provably excluded is kept.

Constraint sets are normalized to rows a . x + k <= 0. Strict
inequalities are closed and equalities become two rows; every relaxation
only enlarges the described region.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from ..hybrid.constraints import FlowConstraint, Relation
from ..hybrid.expr import Sub, affine_form


def full_box(n: int) -> tuple[np.ndarray, np.ndarray]:
    return np.full(n, -np.inf), np.full(n, np.inf)


def is_empty(lo: np.ndarray, hi: np.ndarray) -> bool:
    return bool(np.any(lo > hi))


def contains(
    out_lo: np.ndarray, out_hi: np.ndarray, in_lo: np.ndarray, in_hi: np.ndarray
) -> bool:
    return bool(np.all(out_lo <= in_lo) and np.all(in_hi <= out_hi))


def hull(
    a_lo: np.ndarray, a_hi: np.ndarray, b_lo: np.ndarray, b_hi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    return np.minimum(a_lo, b_lo), np.maximum(a_hi, b_hi)


def intersect(
    a_lo: np.ndarray, a_hi: np.ndarray, b_lo: np.ndarray, b_hi: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    return np.maximum(a_lo, b_lo), np.minimum(a_hi, b_hi)


def linear_rows(
    constraints: Iterable[FlowConstraint], names: Sequence[str]
) -> tuple[np.ndarray, np.ndarray]:
    """Normalize derivative-free constraints to rows C . x + d <= 0.

    Rows that are not affine in the plain variables are skipped, which
    over-approximates. Returns (C, d) with C of shape (m, n) and d of
    shape (m,).
    """
    idx = {x: i for i, x in enumerate(names)}
    rows: list[np.ndarray] = []
    consts: list[float] = []

    def push(sign: float, coeffs, k: float) -> None:
        row = np.zeros(len(names))
        for (kind, name), a in coeffs.items():
            row[idx[name]] = sign * a
        rows.append(row)
        consts.append(sign * k)

    for c in constraints:
        form = affine_form(Sub(c.lhs, c.rhs))
        if form is None:
            continue
        coeffs, k = form
        if any(kind != "v" for kind, _ in coeffs):
            continue
        match c.rel:
            case Relation.LE | Relation.LT:
                push(1.0, coeffs, k)
            case Relation.GE | Relation.GT:
                push(-1.0, coeffs, k)
            case Relation.EQ:
                push(1.0, coeffs, k)
                push(-1.0, coeffs, k)
    if not rows:
        return np.zeros((0, len(names))), np.zeros(0)
    return np.stack(rows), np.array(consts)


def row_range(
    row: np.ndarray, k: float, lo: np.ndarray, hi: np.ndarray
) -> tuple[float, float]:
    """Exact range of row . x + k over the box; 0 coefficients contribute 0."""
    r_lo = r_hi = float(k)
    for a, l, u in zip(row, lo, hi):
        if a > 0.0:
            r_lo += a * l
            r_hi += a * u
        elif a < 0.0:
            r_lo += a * u
            r_hi += a * l
    if np.isnan(r_lo):
        r_lo = -np.inf
    if np.isnan(r_hi):
        r_hi = np.inf
    return r_lo, r_hi


def clip_rows(
    lo: np.ndarray, hi: np.ndarray, C: np.ndarray, d: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Intersect a box with rows C . x + d <= 0.

    Single-variable rows tighten their axis exactly. Rows over several
    variables cannot tighten an axis-aligned box; they only empty it when
    interval evaluation proves them infeasible. Tightening by one row can
    sharpen another, so passes repeat until a fixpoint.
    """
    lo = lo.copy()
    hi = hi.copy()
    for _ in range(len(d) + 1):
        changed = False
        for row, k in zip(C, d):
            nz = np.nonzero(row)[0]
            if len(nz) == 0:
                if k > 0.0:
                    return np.full_like(lo, np.inf), np.full_like(hi, -np.inf)
                continue
            if len(nz) == 1:
                i = nz[0]
                a = row[i]
                bound = -k / a
                if a > 0.0:
                    if bound < hi[i]:
                        hi[i] = bound
                        changed = True
                else:
                    if bound > lo[i]:
                        lo[i] = bound
                        changed = True
                if lo[i] > hi[i]:
                    return lo, hi
                continue
            r_lo, _ = row_range(row, k, lo, hi)
            if r_lo > 0.0:
                return np.full_like(lo, np.inf), np.full_like(hi, -np.inf)
        if not changed:
            break
    return lo, hi
