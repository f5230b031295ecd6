"""Turning surrogate excess-risk bounds into 0-1 excess-risk bounds.

Three routes are offered: a loss that upper-bounds the 0-1 loss, a
calibration function's generalized inverse, and the fast-rate threshold
under the Mammen-Tsybakov noise condition.  ``zhang_constant`` estimates the
strong-concavity constant of the binary conditional risk V(p).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .calibration import (
    CalibrationCurve,
    InverseResult,
    NotCalibratedError,
    generalized_inverse,
    interpolate,
)
from .losses import (
    DomainError,
    LossSpec,
    TransformationFunctionSpec,
    eval_loss,
    eval_phi,
    max_selector,
)
from .optimize import DEFAULT_SETTINGS, OptimizerSettings, minimize_1d

NOT_CALIBRATED_MSG = "loss not calibrated on grid"


@dataclass(frozen=True)
class RiskBoundInput:
    """Surrogate-side quantities feeding a conversion.

    ``surrogate_excess`` is the estimation term plus the approximation term;
    ``c`` and ``alpha`` are the noise-condition parameters.
    """

    surrogate_excess: float
    c: float | None = None
    alpha: float | None = None
    inf_surrogate_risk: float | None = None

    def __post_init__(self):
        x = self.surrogate_excess
        if not (isinstance(x, (int, float)) and math.isfinite(x) and x >= 0):
            raise DomainError("surrogate_excess must be a finite number >= 0")
        if self.alpha is not None and not 0.0 <= self.alpha <= 1.0:
            raise DomainError("alpha must lie in [0, 1]")
        if self.c is not None and not self.c > 0:
            raise DomainError("c must be positive")


class DominationError(DomainError):
    """The loss falls below the 0-1 loss somewhere."""

    def __init__(self, s, y: int, value: float):
        super().__init__(f"loss {value:.6g} < 1 at s={np.round(s, 6).tolist()}, y={y} although y is not the sole argmax")
        self.witness = (np.asarray(s, dtype=float), int(y))
        self.value = float(value)


def _domination_probes(loss: LossSpec, samples: int, seed: int):
    rng = np.random.default_rng(seed)
    ss = loss.score_set
    K = loss.K
    for _ in range(samples):
        yield ss.sample(rng)
    # ties between two classes and the centre are where domination is tight
    for i in range(K):
        for j in range(i + 1, K):
            for _ in range(max(1, samples // (K * K))):
                s = ss.sample(rng)
                s[i] = s[j] = s.max()
                if ss.kind in ("sum-to-zero", "boxed-sum-to-zero"):
                    s = s - s.mean()
                elif ss.kind == "simplex":
                    s = s / s.sum()
                if ss.contains(s):
                    yield s
    yield ss.center()


def check_domination(loss: LossSpec, samples: int = 500, seed: int = 0, tol: float = 1e-9):
    """Spot-check L(s, y) >= 1 whenever y is not the unique argmax of s.

    Returns the number of (s, y) pairs checked; raises DominationError with
    the first counterexample.
    """
    n = 0
    for s in _domination_probes(loss, samples, seed):
        top = max_selector(s)
        for y in range(loss.K):
            n += 1
            if top == frozenset([y]):
                continue
            v = eval_loss(loss, s, y)
            if v < 1.0 - tol:
                raise DominationError(s, y, v)
    return n


def convert_dominating(bound: RiskBoundInput, loss: LossSpec | None = None,
                       samples: int = 500, seed: int = 0) -> float:
    """True risk bound for a loss dominating the 0-1 loss: excess + inf risk."""
    if bound.inf_surrogate_risk is None:
        raise DomainError("inf_surrogate_risk is required for the dominating-loss route")
    if loss is not None:
        check_domination(loss, samples, seed)
    return float(bound.surrogate_excess + bound.inf_surrogate_risk)


def _require_calibrated(curve: CalibrationCurve):
    if not curve.calibrated or np.any(~np.isfinite(curve.delta)):
        raise NotCalibratedError(NOT_CALIBRATED_MSG)


def convert_calibrated(curve: CalibrationCurve, bound: RiskBoundInput) -> InverseResult:
    """Excess 0-1 risk bound via the generalized inverse of the curve."""
    _require_calibrated(curve)
    return generalized_inverse(curve, bound.surrogate_excess)


def mtnc_threshold(curve: CalibrationCurve, eps: float, c: float, alpha: float) -> float:
    """c * eps^alpha * delta(eps^(1 - alpha) / (2c))."""
    if eps <= 0:
        return 0.0
    return c * eps ** alpha * interpolate(curve, eps ** (1.0 - alpha) / (2.0 * c))


def convert_mtnc(curve: CalibrationCurve, bound: RiskBoundInput, tol: float = 1e-9) -> InverseResult:
    """Smallest eps in (0, 1] whose noise-condition threshold reaches the
    surrogate excess, found by bisection on the non-decreasing threshold."""
    if bound.c is None or bound.alpha is None:
        raise DomainError("the noise-condition route needs c and alpha")
    _require_calibrated(curve)
    if not curve.is_convex():
        raise DomainError("curve must be convex for the noise-condition conversion")
    c, a, x = float(bound.c), float(bound.alpha), float(bound.surrogate_excess)
    if x == 0:
        return InverseResult(0.0)
    top = curve.max_eps
    # largest eps whose curve argument stays on the grid
    if a < 1.0:
        hi = min(1.0, (2.0 * c * top) ** (1.0 / (1.0 - a)))
    else:
        if 1.0 / (2.0 * c) > top + 1e-12:
            return InverseResult(1.0, True)
        hi = 1.0
    thr = lambda e: mtnc_threshold(curve, e, c, a)  # noqa: E731
    if thr(hi) < x:
        return InverseResult(hi, True)
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if thr(mid) >= x:
            hi = mid
        else:
            lo = mid
    return InverseResult(hi)


def half_argument_curve(curve: CalibrationCurve, eps_grid=None) -> CalibrationCurve:
    """The curve eps -> delta(eps / 2), on ``eps_grid`` (default: the original grid)."""
    grid = curve.eps if eps_grid is None else np.asarray(eps_grid, dtype=float)
    return CalibrationCurve(grid, np.array([interpolate(curve, e / 2.0) for e in grid]),
                            method=curve.method, label=f"{curve.label} at eps/2")


def parametric_bound(curve: CalibrationCurve, estimation: float, approximation: float,
                     class_approximation: float) -> float:
    """delta^{-1}(T + A) - A_H, the class-restricted arithmetic helper."""
    return float(convert_calibrated(curve, RiskBoundInput(estimation + approximation))) - class_approximation


# ---------------------------------------------------------------------------
# strong concavity of the binary conditional risk


@dataclass
class ZhangConstant:
    V: Callable[[float], float]
    c: float | None
    c_prime: float
    p_grid: np.ndarray
    V_grid: np.ndarray
    notes: list = field(default_factory=list)

    def __iter__(self):
        return iter((self.V, self.c))


def binary_conditional_risk(phi: TransformationFunctionSpec, settings: OptimizerSettings = DEFAULT_SETTINGS):
    """p -> OptResult of inf_t p phi(-t) + (1 - p) phi(t)."""
    def V(p: float):
        r = minimize_1d(lambda t: p * eval_phi(phi, -t) + (1 - p) * eval_phi(phi, t), settings)
        return r
    return V


def zhang_constant(phi: TransformationFunctionSpec, grid_step: float = 0.01,
                   settings: OptimizerSettings = DEFAULT_SETTINGS) -> ZhangConstant:
    """Estimate c with 1/2 V(p) + 1/2 V(p') <= V((p + p')/2) - c^2 (p - p')^2.

    c' is minus the largest central second difference of V over the
    interior grid and the reported constant is sqrt(c') / 2.  A value of
    None means the estimate found no uniform curvature (or the optimiser
    failed; see ``notes``).
    """
    if not 0 < grid_step < 0.5:
        raise DomainError("grid_step must lie in (0, 0.5)")
    notes = []
    if not phi.convex:
        raise DomainError(f"{phi.kind} is not convex")
    for t in (0.1, 0.5, 1.0, 2.0):
        if not eval_phi(phi, t) > eval_phi(phi, -t):
            raise DomainError(f"{phi.kind} fails phi(t) > phi(-t) at t={t}")
    n = int(round(1.0 / grid_step))
    p = np.linspace(0.0, 1.0, n + 1)
    solve = binary_conditional_risk(phi, settings)
    vals = np.empty_like(p)
    bad = []
    for i, pi in enumerate(p):
        r = solve(float(pi))
        if r.unbounded:
            raise DomainError(f"V({pi:g}) is unbounded below")
        vals[i] = r.value
        if not r.converged:
            (notes if i in (0, n) else bad).append(float(pi))
    if notes:
        notes = [f"infimum not attained at p in {notes}; boundary values taken at the box edge"]

    def V(q: float) -> float:
        return float(solve(float(q)).value)

    if bad:
        notes.append(f"optimiser did not converge at interior p in {bad}")
        return ZhangConstant(V, None, math.nan, p, vals, notes)
    second = (vals[2:] - 2 * vals[1:-1] + vals[:-2]) / grid_step ** 2
    c_prime = float(-second.max())
    notes.append("curvature estimated on the interior grid only; the condition itself is global")
    c = math.sqrt(c_prime) / 2 if c_prime > 1e-9 else None
    return ZhangConstant(V, c, c_prime, p, vals, notes)
