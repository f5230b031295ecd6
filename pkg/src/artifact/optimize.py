"""Minimisation primitives: 1-D convex search, constrained minimisation over
score sets at small K, and simplex grids.

Constrained problems are solved by multi-start coordinate descent on the
affine hull of the feasible polytope.  The search directions are the
differences of averaged indicator vectors ``1_A/|A| - 1_B/|B|`` projected onto
the equality constraints; these are the elementary moves of the sum and tie
constraints, so piecewise-linear separable risks do not stall at kinks.  Each
direction gets an exact feasible interval and a bracketing golden-section line
search.  When the objective is a :class:`RiskKernel`, line searches run in the
kernel (compiled when available).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache
from math import comb
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

from . import _pykernels
from .losses import DomainError, LossSpec, ScoreSet

INF = math.inf


class InfeasibleError(DomainError):
    """The constraint system has no feasible point."""


@dataclass(frozen=True)
class OptimizerSettings:
    tol: float = 1e-8
    max_iters: int = 10_000
    restarts: int = 16
    box_radius: float = 50.0
    seed: int = 0

    def __post_init__(self):
        if not self.tol > 0:
            raise DomainError("tol must be positive")
        if self.restarts < 1:
            raise DomainError("restarts must be at least 1")
        if not self.box_radius > 0:
            raise DomainError("box_radius must be positive")
        if self.max_iters < 1:
            raise DomainError("max_iters must be at least 1")


DEFAULT_SETTINGS = OptimizerSettings()


@dataclass
class OptResult:
    minimizer: np.ndarray
    value: float
    residual: float
    converged: bool
    boundary: bool = False
    unbounded: bool = False
    evaluations: int = 0


# ---------------------------------------------------------------------------
# one dimension


def minimize_1d(objective: Callable[[float], float], settings: OptimizerSettings = DEFAULT_SETTINGS,
                lo: float | None = None, hi: float | None = None) -> OptResult:
    """Minimise a convex scalar function on ``[lo, hi]`` (default the box).

    Brackets from 0 (or the interval midpoint when 0 is outside) by
    golden-ratio expansion, then golden-section search to ``settings.tol``.
    A minimiser on the box with the objective still decreasing is reported
    with ``converged=False``; a roughly linear decrease past the box sets
    ``unbounded``.
    """
    R = settings.box_radius
    lo = -R if lo is None else float(lo)
    hi = R if hi is None else float(hi)
    if lo > hi:
        raise DomainError("empty search interval")
    x0 = 0.0 if lo <= 0.0 <= hi else 0.5 * (lo + hi)

    def f(x):
        v = objective(x)
        return INF if v != v else float(v)

    g = lambda t: f(x0 + t)  # noqa: E731
    t, ft, n = _pykernels.line_search(g, g(0.0), lo - x0, hi - x0, 1.0, settings.tol,
                                      max_evals=max(200, settings.max_iters // 10))
    x = x0 + t
    span = max(settings.tol, 1e-12)
    boundary = (x - lo <= span and lo == -R) or (hi - x <= span and hi == R)
    unbounded = False
    converged = True
    if boundary:
        inner = f(x + (span if x - lo <= span else -span) * 10)
        converged = not inner > ft
        far = 4.0 * x
        f_far = f(far)
        unbounded = ft < -1e12 or (f_far < ft and (ft - f_far) / abs(far - x) > 1e-6)
    neighbours = [f(max(lo, x - settings.tol)), f(min(hi, x + settings.tol))]
    residual = max(0.0, max(v - ft for v in neighbours if v < INF)) if any(v < INF for v in neighbours) else 0.0
    return OptResult(np.array([x]), ft, residual, converged and not unbounded, boundary, unbounded, n + 3)


# ---------------------------------------------------------------------------
# linear constraints


@dataclass(frozen=True)
class LinearConstraint:
    """``coeffs . s == rhs`` (kind "eq") or ``coeffs . s >= rhs`` (kind "ge")."""

    coeffs: tuple
    rhs: float = 0.0
    kind: str = "ge"

    def __post_init__(self):
        if self.kind not in ("eq", "ge"):
            raise DomainError("constraint kind must be 'eq' or 'ge'")
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))
        object.__setattr__(self, "rhs", float(self.rhs))


def _unit(K: int, i: int, j: int | None = None) -> list:
    c = [0.0] * K
    c[i] += 1.0
    if j is not None:
        c[j] -= 1.0
    return c


def argmax_constraints(j: int, K: int) -> tuple:
    """Constraints for membership of M(S, j): s_j >= s_k for every k."""
    return tuple(LinearConstraint(tuple(_unit(K, j, k)), 0.0, "ge") for k in range(K) if k != j)


def argmax_set_constraints(classes: Sequence[int], K: int) -> tuple:
    """Membership of the intersection of M(S, j) over the given classes."""
    classes = sorted(set(int(c) for c in classes))
    head = classes[0]
    cons = [LinearConstraint(tuple(_unit(K, head, c)), 0.0, "eq") for c in classes[1:]]
    cons += [LinearConstraint(tuple(_unit(K, head, k)), 0.0, "ge") for k in range(K) if k not in classes]
    return tuple(cons)


def tie_constraint(i: int, j: int, K: int) -> LinearConstraint:
    return LinearConstraint(tuple(_unit(K, i, j)), 0.0, "eq")


def fixed_constraint(k: int, value: float, K: int) -> LinearConstraint:
    return LinearConstraint(tuple(_unit(K, k)), value, "eq")


def order_constraint(i: int, j: int, gap: float, K: int) -> LinearConstraint:
    """s_i - s_j >= gap."""
    return LinearConstraint(tuple(_unit(K, i, j)), gap, "ge")


# ---------------------------------------------------------------------------
# feasible polytopes


@dataclass
class _Polytope:
    K: int
    A: np.ndarray
    b: np.ndarray
    G: np.ndarray
    h: np.ndarray
    box_rows: np.ndarray  # mask of G rows that come from the clipping box
    pinv: np.ndarray
    directions: np.ndarray
    null: np.ndarray
    center: np.ndarray
    clipped: bool = False
    cone: bool = False  # constraints other than the box are homogeneous

    def interval(self, s: np.ndarray, d: np.ndarray) -> tuple[float, float]:
        Gd = self.G @ d
        slack = np.maximum(self.G @ s - self.h, 0.0)
        lo, hi = -INF, INF
        pos = Gd > 1e-14
        if pos.any():
            lo = float(np.max(-slack[pos] / Gd[pos]))
        neg = Gd < -1e-14
        if neg.any():
            hi = float(np.min(slack[neg] / -Gd[neg]))
        return min(lo, 0.0), max(hi, 0.0)

    def project_equalities(self, s: np.ndarray) -> np.ndarray:
        if self.A.shape[0] == 0:
            return s
        return s - self.pinv @ (self.A @ s - self.b)

    def feasible(self, s: np.ndarray, tol: float = 1e-9, ignore_box: bool = False) -> bool:
        if self.A.shape[0] and np.max(np.abs(self.A @ s - self.b)) > tol:
            return False
        rows = ~self.box_rows if ignore_box else slice(None)
        if self.G.shape[0] and np.min((self.G @ s - self.h)[rows], initial=INF) < -tol:
            return False
        return True

    def random_direction(self, rng: np.random.Generator) -> np.ndarray:
        z = self.null @ rng.standard_normal(self.null.shape[1])
        n = np.linalg.norm(z)
        return z / n if n > 0 else z

    def random_point(self, rng: np.random.Generator, steps: int = 4) -> np.ndarray:
        """Hit-and-run walk from the centre; stays exactly feasible."""
        x = self.center.copy()
        if self.null.shape[1] == 0:
            return x
        for _ in range(steps):
            d = self.random_direction(rng)
            lo, hi = self.interval(x, d)
            if hi > lo:
                x = x + rng.uniform(lo, hi) * d
        return x


def _subset_directions(K: int) -> list[np.ndarray]:
    max_size = K if K <= 4 else 2
    subsets = [frozenset(c) for r in range(1, max_size + 1) for c in itertools.combinations(range(K), r)]
    out = []
    for A in subsets:
        v = np.zeros(K)
        v[list(A)] = 1.0 / len(A)
        out.append(v)
    for A, B in itertools.combinations(subsets, 2):
        if A & B:
            continue
        v = np.zeros(K)
        v[list(A)] = 1.0 / len(A)
        v[list(B)] -= 1.0 / len(B)
        out.append(v)
    return out


@lru_cache(maxsize=4096)
def _polytope(kind: str, K: int, lower: float, R: float, constraints: tuple) -> _Polytope:
    eq_rows, eq_rhs, ge_rows, ge_rhs, box = [], [], [], [], []
    ones = [1.0] * K
    if kind in ("sum-to-zero", "boxed-sum-to-zero"):
        eq_rows.append(ones)
        eq_rhs.append(0.0)
    if kind == "simplex":
        eq_rows.append(ones)
        eq_rhs.append(1.0)
    for k in range(K):
        e = _unit(K, k)
        if kind == "simplex" or kind == "nonnegative":
            ge_rows.append(e)
            ge_rhs.append(0.0)
            box.append(False)
        if kind == "boxed-sum-to-zero":
            ge_rows.append(e)
            ge_rhs.append(lower)
            box.append(False)
    clipped = kind in ("full", "sum-to-zero", "nonnegative")
    for c in constraints:
        if len(c.coeffs) != K:
            raise DomainError("constraint dimension differs from K")
        if c.kind == "eq":
            eq_rows.append(list(c.coeffs))
            eq_rhs.append(c.rhs)
        else:
            ge_rows.append(list(c.coeffs))
            ge_rhs.append(c.rhs)
            box.append(False)
    if clipped:
        for k in range(K):
            ge_rows.append(_unit(K, k))
            ge_rhs.append(-R)
            box.append(True)
            ge_rows.append([-x for x in _unit(K, k)])
            ge_rhs.append(-R)
            box.append(True)
    A = np.array(eq_rows, dtype=float).reshape(-1, K)
    b = np.array(eq_rhs, dtype=float)
    G = np.array(ge_rows, dtype=float).reshape(-1, K)
    h = np.array(ge_rhs, dtype=float)
    box_rows = np.array(box, dtype=bool)
    null = null_space(A) if A.shape[0] else np.eye(K)
    pinv = np.linalg.pinv(A) if A.shape[0] else np.zeros((K, 0))

    dirs: list[np.ndarray] = []
    if null.shape[1]:
        P = null @ null.T
        for v in _subset_directions(K):
            d = P @ v
            n = np.linalg.norm(d)
            if n < 1e-10:
                continue
            d /= n
            if all(abs(float(d @ e)) < 1.0 - 1e-9 for e in dirs):
                dirs.append(d)
    directions = np.array(dirs).reshape(-1, K)

    homogeneous = all(c.rhs == 0.0 for c in constraints) and kind in ("full", "sum-to-zero", "nonnegative")
    poly = _Polytope(K, A, b, G, h, box_rows, pinv, directions, null, np.zeros(K), clipped, homogeneous)
    poly.center = _find_center(poly, ScoreSet(kind, K, lower).center())
    return poly


def _find_center(poly: _Polytope, natural: np.ndarray) -> np.ndarray:
    if poly.feasible(natural, tol=1e-12):
        return natural
    K = poly.K
    norms = np.linalg.norm(poly.G, axis=1) if poly.G.shape[0] else np.zeros(0)
    # maximise r subject to G x - r |g| >= h, A x = b, r <= 1
    c = np.zeros(K + 1)
    c[-1] = -1.0
    A_ub = np.hstack([-poly.G, norms[:, None]]) if poly.G.shape[0] else None
    b_ub = -poly.h if poly.G.shape[0] else None
    A_eq = np.hstack([poly.A, np.zeros((poly.A.shape[0], 1))]) if poly.A.shape[0] else None
    b_eq = poly.b if poly.A.shape[0] else None
    bounds = [(None, None)] * K + [(None, 1.0)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=bounds, method="highs")
    if res.status != 0 or res.x[-1] < -1e-9:
        raise InfeasibleError("constraint system is infeasible")
    x = poly.project_equalities(res.x[:K])
    return x


def feasible_polytope(score_set: ScoreSet, constraints: Sequence[LinearConstraint] = (),
                      box_radius: float = 50.0) -> _Polytope:
    return _polytope(score_set.kind, score_set.K, float(score_set.lower_bound), float(box_radius),
                     tuple(constraints))


# ---------------------------------------------------------------------------
# coordinate descent


def _snap_ties(s: np.ndarray, gap: float = 1e-7) -> np.ndarray:
    order = np.argsort(s)
    out = s.copy()
    start = 0
    K = len(s)
    for i in range(1, K + 1):
        if i == K or s[order[i]] - s[order[i - 1]] > gap:
            if i - start > 1:
                idx = order[start:i]
                out[idx] = s[idx].mean()
            start = i
    return out


def _descend(objective, fast: bool, poly: _Polytope, s: np.ndarray, settings: OptimizerSettings,
             rng: np.random.Generator):
    f = float(objective(s))
    if f != f:
        f = INF
    evals = 1
    dirs = poly.directions
    nd = len(dirs)
    if nd == 0:
        return s, f, 0.0, True, evals
    extra = 2 if poly.null.shape[1] >= 2 else 0
    steps = np.full(nd + extra, 0.5)
    xtol = settings.tol * 1e-2
    sweep_tol = settings.tol * 1e-3
    max_sweeps = max(4, settings.max_iters // (nd + extra))
    last_gain = INF
    converged = False
    for _ in range(max_sweeps):
        f_start = f
        batch = list(dirs)
        for _ in range(extra):
            batch.append(poly.random_direction(rng))
        for idx, d in enumerate(batch):
            lo, hi = poly.interval(s, d)
            if hi - lo <= 1e-15:
                continue
            step = steps[idx]
            if fast:
                t, ft, n = objective.line_search(s, d, lo, hi, step, xtol)
            else:
                base = s
                t, ft, n = _pykernels.line_search(lambda u: _safe(objective(base + u * d)), f, lo, hi, step, xtol)
            evals += n + 1
            if ft < f:
                s = s + t * d
                f = ft
                steps[idx] = min(max(2.0 * abs(t), 1e-6), 10.0)
            else:
                steps[idx] = max(0.5 * steps[idx], 1e-6)
        s = poly.project_equalities(s)
        f_new = _safe(objective(s))
        evals += 1
        if f_new <= f or not f_new - f > 1e-12 * max(1.0, abs(f)):
            f = min(f, f_new) if f_new == f_new else f
        last_gain = f_start - f
        if last_gain <= sweep_tol:
            converged = True
            break
    return s, f, max(last_gain, 0.0), converged, evals


def _safe(v) -> float:
    v = float(v)
    return INF if v != v else v


def minimize_over_scores(objective, score_set: ScoreSet, constraints: Sequence[LinearConstraint] = (),
                         settings: OptimizerSettings = DEFAULT_SETTINGS, start=None) -> OptResult:
    """Minimise a convex function over ``score_set`` under linear constraints.

    Runs coordinate descent from the score-set centre (or ``start``) and from
    hit-and-run random feasible points.  Restarts stop early once three runs
    agree within ``10 * tol``.  The residual is the last sweep's improvement.
    """
    K = score_set.K
    if K > 6:
        raise DomainError("minimize_over_scores supports K <= 6")
    poly = feasible_polytope(score_set, constraints, settings.box_radius)
    fast = hasattr(objective, "line_search")
    starts = []
    if start is not None:
        s0 = np.asarray(start, dtype=float)
        if poly.feasible(s0, tol=1e-9):
            starts.append(s0.copy())
    starts.append(poly.center.copy())

    best = None
    agree = 0
    total_evals = 0
    for run in range(settings.restarts + len(starts) - 1):
        rng = np.random.default_rng([settings.seed, run])
        x = starts[run] if run < len(starts) else poly.random_point(rng)
        s, f, gain, conv, ev = _descend(objective, fast, poly, x, settings, rng)
        total_evals += ev
        if best is None or f < best[1] - 10 * settings.tol:
            agree = 0 if best is not None else 1
            best = (s, f, gain, conv)
        else:
            if abs(f - best[1]) <= 10 * settings.tol:
                agree += 1
            if f < best[1]:
                best = (s, f, gain, conv)
        if agree >= 3:
            break

    s, f, gain, conv = best
    snapped = _snap_ties(s)
    if not np.array_equal(snapped, s) and poly.feasible(snapped, tol=1e-12):
        f_snap = _safe(objective(snapped))
        if f_snap <= f + 1e-12 * max(1.0, abs(f)):
            s, f = snapped, min(f, f_snap)
    boundary = False
    unbounded = f < -1e12
    if poly.clipped and np.max(np.abs(s)) >= settings.box_radius * (1.0 - 1e-9):
        boundary = True
        if poly.cone:
            far = 4.0 * s
            if poly.feasible(far, tol=1e-9, ignore_box=True):
                f_far = _safe(objective(far))
                dist = 3.0 * np.linalg.norm(s)
                if f_far < f and (f - f_far) / dist > 1e-6:
                    unbounded = True
    return OptResult(s, float(f), float(gain), bool(conv and not unbounded), boundary, bool(unbounded), total_evals)


def minimize_risk(loss: LossSpec, weights, constraints: Sequence[LinearConstraint] = (),
                  settings: OptimizerSettings = DEFAULT_SETTINGS, adjustment="none", start=None) -> OptResult:
    """Minimise the (pseudo-)risk of ``loss`` at the given weights."""
    kern = loss.kernel(weights, adjustment=adjustment)
    return minimize_over_scores(kern, loss.score_set, constraints, settings, start=start)


# ---------------------------------------------------------------------------
# simplex grids

_GRID_LIMITS = {2: 200, 3: 60, 4: 20}


def simplex_grid(K: int, resolution: int, strict: bool = True) -> np.ndarray:
    """All distributions with entries in multiples of 1/resolution.

    Rows are ordered lexicographically by the cut positions, so the first
    coordinate increases.  ``strict`` enforces the desk-scale limits.
    """
    if K < 2 or resolution < 1:
        raise DomainError("need K >= 2 and resolution >= 1")
    if strict:
        limit = _GRID_LIMITS.get(K, 10 if K <= 6 else 0)
        if resolution > limit:
            raise DomainError(f"resolution {resolution} exceeds the limit {limit} for K={K}")
    m = resolution
    rows = []
    for bars in itertools.combinations(range(m + K - 1), K - 1):
        prev = -1
        parts = []
        for bar in bars:
            parts.append(bar - prev - 1)
            prev = bar
        parts.append(m + K - 1 - prev - 1)
        rows.append(parts)
    grid = np.array(rows, dtype=float) / m
    assert len(grid) == comb(m + K - 1, K - 1)
    return grid


def interior(grid: np.ndarray) -> np.ndarray:
    return grid[np.all(grid > 0, axis=1)]
