from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import minimize as scipy_minimize

from artifact import backend
from artifact.losses import LossSpec, ScoreSet, llw, logistic_regression, phi_spec, pointwise_risk
from artifact.optimize import (
    InfeasibleError,
    LinearConstraint,
    OptimizerSettings,
    argmax_constraints,
    minimize_1d,
    minimize_over_scores,
    minimize_risk,
    simplex_grid,
    tie_constraint,
)

import oracles


def test_minimize_1d_examples():
    r = minimize_1d(lambda t: (t - 2) ** 2)
    assert r.minimizer[0] == pytest.approx(2, abs=1e-6) and r.value == pytest.approx(0, abs=1e-12)
    assert r.converged
    r = minimize_1d(math.exp)
    assert not r.converged and r.minimizer[0] == -50.0
    r = minimize_1d(lambda t: 1.5 * math.exp(t) + 0.5 * math.exp(-t))
    assert r.minimizer[0] == pytest.approx(0.5 * math.log(1 / 3), abs=1e-6)
    assert r.value == pytest.approx(2 * math.sqrt(0.75), abs=1e-12)
    # fine-grid cross-check
    t = np.linspace(-2, 2, 400_001)
    assert r.value == pytest.approx(np.min(1.5 * np.exp(t) + 0.5 * np.exp(-t)), abs=1e-9)


def test_minimize_1d_unbounded():
    r = minimize_1d(lambda t: t)
    assert r.unbounded and not r.converged


@settings(max_examples=50, deadline=None)
@given(a=st.floats(0.01, 100), b=st.floats(-40, 40), c=st.floats(-100, 100))
def test_minimize_1d_quadratics(a, b, c):
    r = minimize_1d(lambda t: a * (t - b) ** 2 + c)
    assert abs(r.value - c) <= 1e-8 * max(1.0, abs(c))


def test_minimize_over_scores_examples():
    r = minimize_over_scores(lambda s: float(s @ s), ScoreSet("sum-to-zero", 3))
    assert np.allclose(r.minimizer, 0, atol=1e-6) and r.value == pytest.approx(0, abs=1e-10)
    r = minimize_risk(logistic_regression(2), [0.6, 0.4])
    assert np.allclose(r.minimizer, [0.6, 0.4], atol=1e-6)


def test_llw_hinge_tie_against_dense_grid():
    p = [0.2, 0.3, 0.5]
    cons = argmax_constraints(0, 3) + argmax_constraints(1, 3)
    r = minimize_risk(llw("hinge", 3), p, cons)
    S = oracles.s0_grid(3, 3.0, 0.01)
    tie = np.abs(S[:, 0] - S[:, 1]) < 1e-9
    tie &= S[:, 0] >= S[:, 2] - 1e-9
    grid_min = oracles.risk("LLW", "hinge", S[tie], p).min()
    assert r.value == pytest.approx(grid_min, abs=1e-3)
    assert r.value == pytest.approx(2.0, abs=1e-9)


def test_infeasible_and_unbounded():
    bad = (LinearConstraint((1.0, 0.0, 0.0), 1.0, "ge"), LinearConstraint((-1.0, 0.0, 0.0), 0.0, "ge"))
    with pytest.raises(InfeasibleError):
        minimize_over_scores(lambda s: 0.0, ScoreSet("simplex", 3), bad)
    r = minimize_risk(llw("identity", 3), [0.5, 0.3, 0.2])
    assert r.unbounded


def _polish(fun, x0, radius):
    def pen(x):
        return fun(x) + 1e6 * np.sum(np.maximum(np.abs(x) - radius, 0.0))
    return scipy_minimize(pen, x0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12,
                                                                   "maxiter": 20000}).fun


CASES = [(fam, phi, K) for fam in ("WW", "CS", "LLW", "RRKA", "ZZH") for phi in ("hinge", "squared") for K in (2, 3)]


@pytest.mark.parametrize("family,phi,K", CASES)
def test_grid_oracle_agreement(family, phi, K):
    """Optimizer vs a dense grid over the same box, then a Nelder-Mead polish
    of the grid winner as the lower reference."""
    R = 3.0
    L = LossSpec(family, K, phi=phi_spec(phi))
    st_ = OptimizerSettings(box_radius=R)
    p = np.array([0.7, 0.3]) if K == 2 else np.array([0.5, 0.3, 0.2])
    s0 = L.score_set.kind == "sum-to-zero"
    if s0:
        S = oracles.s0_grid(K, R, 0.01 if K == 3 else 0.001)
    else:
        S = oracles.full_grid(K, R, 0.05 if K == 3 else 0.005)
    vals = oracles.risk(family, phi, S, p)
    i = int(np.argmin(vals))
    if s0:
        def f(x):
            s = np.append(x, -np.sum(x))
            return float(oracles.risk(family, phi, s[None, :], p)[0]) + 1e6 * max(abs(s[-1]) - R, 0.0)
        ref = _polish(f, S[i, :-1], R)
    else:
        ref = _polish(lambda x: float(oracles.risk(family, phi, x[None, :], p)[0]), S[i], R)
    got = minimize_risk(L, p, settings=st_)
    assert got.value <= vals[i] + 1e-3
    assert got.value >= min(ref, vals[i]) - 1e-3
    assert got.value <= ref + 1e-6
    assert L.score_set.contains(got.minimizer)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), j=st.integers(0, 2))
def test_minimizer_stays_feasible(seed, j):
    rng = np.random.default_rng(seed)
    p = rng.dirichlet(np.ones(3))
    for L in (llw("squared", 3), logistic_regression(3), LossSpec("Liu", 3)):
        r = minimize_risk(L, p, argmax_constraints(j, 3))
        assert L.score_set.violation(r.minimizer) is None
        assert r.minimizer[j] >= r.minimizer.max() - 1e-9


def test_tie_constraint_respected():
    r = minimize_risk(llw("exponential", 3), [0.6, 0.3, 0.1], (tie_constraint(0, 2, 3),))
    assert abs(r.minimizer[0] - r.minimizer[2]) <= 1e-9


def test_simplex_grid():
    g = simplex_grid(2, 4)
    assert sorted(map(tuple, g.tolist())) == [(0, 1), (0.25, 0.75), (0.5, 0.5), (0.75, 0.25), (1, 0)]
    assert len(simplex_grid(3, 2)) == 6
    assert len(simplex_grid(4, 10)) == math.comb(13, 3)
    assert np.allclose(simplex_grid(3, 20).sum(axis=1), 1)
    with pytest.raises(Exception):
        simplex_grid(3, 1000)


@pytest.mark.skipif(backend.compiled_kernels is None, reason="compiled kernels not built")
@settings(max_examples=80, deadline=None)
@given(seed=st.integers(0, 2**31), which=st.integers(0, 5))
def test_compiled_and_python_kernels_agree(seed, which):
    from artifact.losses import rrka, zhang
    L = [llw("hinge", 3), llw("kink", 3, 0.5), rrka("logistic", 3), logistic_regression(3),
         zhang("neg-linear", "exponential", 3, F="log"), LossSpec("CS", 3, phi=phi_spec("squared"))][which]
    rng = np.random.default_rng(seed)
    w = rng.uniform(0, 1, 3)
    s = L.score_set.sample(rng)
    a = L.kernel(w, kernels=backend.compiled_kernels)(s)
    b = L.kernel(w, kernels=backend.python_kernels)(s)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)
    d = rng.normal(size=3)
    if L.score_set.kind != "full":
        d -= d.mean()
    if L.score_set.kind == "simplex":
        return
    ra = L.kernel(w, kernels=backend.compiled_kernels).line_search(s, d, -2.0, 2.0, 0.5, 1e-10)
    rb = L.kernel(w, kernels=backend.python_kernels).line_search(s, d, -2.0, 2.0, 0.5, 1e-10)
    assert ra[1] == pytest.approx(rb[1], rel=1e-9, abs=1e-9)


def test_pointwise_risk_matches_minimize_value():
    L = llw("squared", 3)
    p = [0.5, 0.3, 0.2]
    r = minimize_risk(L, p)
    assert pointwise_risk(L, r.minimizer, p) == pytest.approx(r.value, abs=1e-12)
