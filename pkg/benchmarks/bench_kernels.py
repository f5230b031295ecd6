"""Compiled versus pure-Python risk kernels.

    python3 benchmarks/bench_kernels.py [--repeats N]

Times raw risk evaluations, the kernel line search, and one full constrained
minimisation per backend, and checks that both backends return the same
numbers.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from artifact import backend
from artifact.losses import llw, logistic_regression, rrka, zhang
from artifact.optimize import argmax_constraints, minimize_risk

LOSSES = {
    "LLW-hinge": llw("hinge", 3),
    "LLW-exp": llw("exponential", 3),
    "RRKA-squared": rrka("squared", 3),
    "Zhang-exp-log": zhang("neg-linear", "exponential", 3, F="log"),
    "LR": logistic_regression(3),
}


def _best_of(fn, repeats: int) -> float:
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def bench(name, loss, mod, repeats, n_eval=20_000):
    p = np.array([0.5, 0.3, 0.2])
    kern = loss.kernel(p, kernels=mod)
    rng = np.random.default_rng(0)
    pts = [loss.score_set.sample(rng) for _ in range(n_eval)]

    def evals():
        for s in pts:
            kern(s)

    s0 = loss.score_set.center()
    d = np.zeros(3)
    d[0], d[1] = 1.0, -1.0
    if loss.score_set.kind == "simplex":
        lo, hi = -1 / 3, 1 / 3
    else:
        lo, hi = -50.0, 50.0

    def searches():
        for _ in range(500):
            kern.line_search(s0, d, lo, hi, 1.0, 1e-10)

    t_eval = _best_of(evals, repeats) / n_eval * 1e6
    t_ls = _best_of(searches, repeats) / 500 * 1e6
    return t_eval, t_ls, kern(pts[0])


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    mods = [("python", backend.python_kernels)]
    if backend.compiled_kernels is not None:
        mods.append(("compiled", backend.compiled_kernels))
    else:
        print("compiled kernels not built; timing the fallback only")
    print(f"{'loss':16s} {'backend':9s} {'eval us':>9s} {'search us':>10s}")
    for name, loss in LOSSES.items():
        vals = []
        for label, mod in mods:
            te, tl, v = bench(name, loss, mod, args.repeats)
            vals.append(v)
            print(f"{name:16s} {label:9s} {te:9.2f} {tl:10.1f}")
        if len(vals) == 2 and abs(vals[0] - vals[1]) > 1e-12 * max(1.0, abs(vals[0])):
            print(f"  mismatch: {vals}")
    p = np.array([0.4, 0.35, 0.25])
    t = time.perf_counter()
    r = minimize_risk(llw("hinge", 3), p, argmax_constraints(1, 3))
    print(f"\nconstrained LLW-hinge minimum {r.value:.6f} in {time.perf_counter() - t:.3f} s "
          f"(active backend: {backend.NAME})")


if __name__ == "__main__":
    main()
