"""Timing comparison of the flow tube kernel backends.

Runs the same workloads through the compiled kernel and the interpreted
fallback, checks that the outputs agree bit for bit, and prints wall
times with the speedup. The first compiled call includes JIT work, so a
warm-up call precedes every measurement.

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat K]
"""

from __future__ import annotations

import argparse
import os
import statistics
import time

import numpy as np

from hyltlmc.reach.kernels import flow_tube


def workloads(steps: int):
    yield (
        "heater idle (1d contraction)",
        dict(
            lo=np.array([19.0]),
            hi=np.array([21.0]),
            A=np.array([[-0.2]]),
            b=np.array([0.0]),
            h=0.01,
            n_steps=steps,
            inv_lo=np.array([17.0]),
            inv_hi=np.array([np.inf]),
        ),
    )
    yield (
        "rotation (2d, no invariant)",
        dict(
            lo=np.array([0.9, -0.1]),
            hi=np.array([1.1, 0.1]),
            A=np.array([[0.0, 1.0], [-1.0, 0.0]]),
            b=np.array([0.0, 0.0]),
            h=0.005,
            n_steps=steps,
            inv_lo=np.full(2, -np.inf),
            inv_hi=np.full(2, np.inf),
        ),
    )
    rng = np.random.default_rng(11)
    A = -np.eye(6) + 0.1 * rng.standard_normal((6, 6))
    yield (
        "dense 6d contraction",
        dict(
            lo=np.full(6, -1.0),
            hi=np.full(6, 1.0),
            A=A,
            b=rng.standard_normal(6) * 0.1,
            h=0.01,
            n_steps=steps,
            inv_lo=np.full(6, -100.0),
            inv_hi=np.full(6, 100.0),
        ),
    )


def run_backend(name: str, kw: dict, repeat: int) -> tuple[float, tuple]:
    os.environ["HYLTL_MC_BACKEND"] = name
    result = flow_tube(**kw)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        flow_tube(**kw)
        times.append(time.perf_counter() - t0)
    return statistics.median(times), result


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    saved = os.environ.get("HYLTL_MC_BACKEND")

    print(f"{'workload':<30} {'numpy':>10} {'numba':>10} {'speedup':>8}  agree")
    try:
        for name, kw in workloads(args.steps):
            t_py, r_py = run_backend("numpy", kw, args.repeat)
            t_nb, r_nb = run_backend("numba", kw, args.repeat)
            agree = all(
                np.array_equal(a, b, equal_nan=True)
                for a, b in zip(r_py[:4], r_nb[:4])
            ) and r_py[4] == r_nb[4]
            print(
                f"{name:<30} {t_py * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
                f"{t_py / t_nb:>7.1f}x  {'yes' if agree else 'NO'}"
            )
            if not agree:
                return 1
    finally:
        if saved is None:
            os.environ.pop("HYLTL_MC_BACKEND", None)
        else:
            os.environ["HYLTL_MC_BACKEND"] = saved
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
