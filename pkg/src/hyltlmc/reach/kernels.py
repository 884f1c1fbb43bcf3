"""Flow tube kernels: the hot loop of box reachability.

One call advances a box through up to n_steps Euler-Taylor steps of
der(x) = A x + b, clipping to per-axis invariant bounds, and returns the
hull of everything visited (the tube), the final box, and a status flag.
Each step encloses the whole [0, h] slice with a validated a priori box,
so the tube covers intra-step states, not just step endpoints.

Two interchangeable implementations: a compiled one (numba, if present)
and a pure Python/numpy one. HYLTL_MC_BACKEND picks explicitly ("numba",
"numpy"); the default "auto" compiles when numba imports. fastmath stays
off so infinity and ordering semantics are exact.

Status codes: 0 ran to a provable fixpoint or left the invariant, 1 hit
the step budget first, 2 could not validate an enclosure (both nonzero
codes mean the tube may miss states and the caller must degrade the
overall verdict).
"""

from __future__ import annotations

import os

import numpy as np

FLOW_DONE = 0
FLOW_BUDGET = 1
FLOW_NO_ENCLOSURE = 2

_ENCLOSURE_TRIES = 8


def _flow_tube_py(lo, hi, A, b, h, n_steps, inv_lo, inv_hi):
    n = lo.shape[0]
    cur_lo = lo.copy()
    cur_hi = hi.copy()
    tube_lo = lo.copy()
    tube_hi = hi.copy()
    f_lo = np.empty(n)
    f_hi = np.empty(n)
    g_lo = np.empty(n)
    g_hi = np.empty(n)
    e_lo = np.empty(n)
    e_hi = np.empty(n)
    new_lo = np.empty(n)
    new_hi = np.empty(n)
    status = FLOW_BUDGET

    for _step in range(n_steps):
        # Derivative range over the current box; zero coefficients must
        # not touch infinite endpoints (0 * inf is nan).
        for i in range(n):
            s_lo = b[i]
            s_hi = b[i]
            for j in range(n):
                a = A[i, j]
                if a > 0.0:
                    s_lo += a * cur_lo[j]
                    s_hi += a * cur_hi[j]
                elif a < 0.0:
                    s_lo += a * cur_hi[j]
                    s_hi += a * cur_lo[j]
            f_lo[i] = s_lo
            f_hi[i] = s_hi

        # A priori enclosure of every state in [0, h]: must absorb one
        # Picard iterate of itself.
        pad = h
        for i in range(n):
            e_lo[i] = min(cur_lo[i], cur_lo[i] + h * f_lo[i])
            e_hi[i] = max(cur_hi[i], cur_hi[i] + h * f_hi[i])
        ok = False
        for _try in range(_ENCLOSURE_TRIES):
            for i in range(n):
                s_lo = b[i]
                s_hi = b[i]
                for j in range(n):
                    a = A[i, j]
                    if a > 0.0:
                        s_lo += a * e_lo[j]
                        s_hi += a * e_hi[j]
                    elif a < 0.0:
                        s_lo += a * e_hi[j]
                        s_hi += a * e_lo[j]
                g_lo[i] = s_lo
                g_hi[i] = s_hi
            ok = True
            for i in range(n):
                new_lo[i] = cur_lo[i] + h * min(g_lo[i], 0.0)
                new_hi[i] = cur_hi[i] + h * max(g_hi[i], 0.0)
                if new_lo[i] < e_lo[i] or new_hi[i] > e_hi[i]:
                    ok = False
            if ok:
                break
            for i in range(n):
                if new_lo[i] - pad < e_lo[i]:
                    e_lo[i] = new_lo[i] - pad
                if new_hi[i] + pad > e_hi[i]:
                    e_hi[i] = new_hi[i] + pad
            pad = pad * 2.0
        if not ok:
            status = FLOW_NO_ENCLOSURE
            break

        # Step image with second order remainder: the second derivative
        # along the flow is A (A x + b), bounded over the enclosure.
        half = 0.5 * h * h
        for i in range(n):
            s_lo = 0.0
            s_hi = 0.0
            for j in range(n):
                a = A[i, j]
                if a > 0.0:
                    s_lo += a * g_lo[j]
                    s_hi += a * g_hi[j]
                elif a < 0.0:
                    s_lo += a * g_hi[j]
                    s_hi += a * g_lo[j]
            new_lo[i] = cur_lo[i] + h * f_lo[i] + half * s_lo
            new_hi[i] = cur_hi[i] + h * f_hi[i] + half * s_hi

        # The invariant truncates both the slice and the step image.
        empty = False
        for i in range(n):
            el = max(e_lo[i], inv_lo[i])
            eh = min(e_hi[i], inv_hi[i])
            if el <= eh:
                if el < tube_lo[i]:
                    tube_lo[i] = el
                if eh > tube_hi[i]:
                    tube_hi[i] = eh
            if new_lo[i] < inv_lo[i]:
                new_lo[i] = inv_lo[i]
            if new_hi[i] > inv_hi[i]:
                new_hi[i] = inv_hi[i]
            if new_lo[i] > new_hi[i]:
                empty = True
        if empty:
            status = FLOW_DONE
            break

        # A step image inside the previous box can never escape it.
        inside = True
        for i in range(n):
            if new_lo[i] < cur_lo[i] or new_hi[i] > cur_hi[i]:
                inside = False
        for i in range(n):
            cur_lo[i] = new_lo[i]
            cur_hi[i] = new_hi[i]
        if inside:
            status = FLOW_DONE
            break

    return tube_lo, tube_hi, cur_lo, cur_hi, status


def _numba_compiled():
    try:
        import numba
    except ImportError:
        return None
    return numba.njit(cache=True, fastmath=False)(_flow_tube_py)


def backend_name() -> str:
    """Resolved kernel backend: "numba" or "numpy"."""
    choice = os.environ.get("HYLTL_MC_BACKEND", "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(
            f"HYLTL_MC_BACKEND must be auto, numba or numpy, not {choice!r}"
        )
    if choice == "numpy":
        return "numpy"
    if choice == "numba":
        if _numba_compiled() is None:
            raise RuntimeError("HYLTL_MC_BACKEND=numba but numba is not importable")
        return "numba"
    return "numba" if _numba_compiled() is not None else "numpy"


_COMPILED = None


def flow_tube(lo, hi, A, b, h, n_steps, inv_lo, inv_hi):
    """Dispatch to the selected backend; see the module docstring."""
    global _COMPILED
    if backend_name() == "numba":
        if _COMPILED is None:
            _COMPILED = _numba_compiled()
        fn = _COMPILED
    else:
        fn = _flow_tube_py
    return fn(
        np.ascontiguousarray(lo, dtype=np.float64),
        np.ascontiguousarray(hi, dtype=np.float64),
        np.ascontiguousarray(A, dtype=np.float64),
        np.ascontiguousarray(b, dtype=np.float64),
        float(h),
        int(n_steps),
        np.ascontiguousarray(inv_lo, dtype=np.float64),
        np.ascontiguousarray(inv_hi, dtype=np.float64),
    )
