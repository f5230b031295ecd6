"""Numerical audits of the reduction conditions at desk scale.

Every check evaluates a signed margin per sample (negative means the
condition fails there) and keeps the worst one as a replayable witness.
A passing verdict only means the condition held on the samples.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.optimize import minimize as _scipy_minimize

from .calibration import KINK_DISTRIBUTIONS, _class_minima, delta_binary_of_loss
from .losses import (
    DomainError,
    LossSpec,
    ScoreSet,
    TransformationFunctionSpec,
    j_eps,
    psi_callable,
    suboptimal_classes,
)
from .optimize import (
    DEFAULT_SETTINGS,
    OptimizerSettings,
    argmax_set_constraints,
    minimize_1d,
    minimize_over_scores,
    minimize_risk,
    order_constraint,
    simplex_grid,
)

HOLDS = "holds-on-samples"
VIOLATED = "violated"
INCONCLUSIVE = "inconclusive"

CONDITION_IDS = ("C1", "C2", "C3", "C4", "C5-symmetry", "C6-pairing-sum-to-zero", "C7-free-lunch", "ZhangInf",
                 "A2-lower-bounded", "A5-swapping", "A6-averaging", "order-preservation", "conjecture-1-probe")

DEFAULT_EPS_GRID = (0.1, 0.25, 0.5, 0.75, 0.9)
DEFAULT_TOL = 1e-4
DEFAULT_RESOLUTION = {2: 20, 3: 20, 4: 10}


@dataclass
class ConditionReport:
    condition_id: str
    verdict: str
    margin: float
    witness: dict | None
    samples: int
    tolerance: float
    grids: dict = field(default_factory=dict)
    seed: int | None = None
    loss: str = ""
    notes: str = ""

    @property
    def holds(self) -> bool:
        return self.verdict == HOLDS

    def to_dict(self) -> dict:
        return {"condition_id": self.condition_id, "verdict": self.verdict, "margin": _num(self.margin),
                "witness": _jsonable(self.witness), "samples": self.samples, "tolerance": self.tolerance,
                "grids": _jsonable(self.grids), "seed": self.seed, "loss": self.loss, "notes": self.notes}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def _num(x):
    x = float(x)
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(obj):
    if obj is None or isinstance(obj, (str, bool, int)):
        return obj
    if isinstance(obj, float):
        return _num(obj)
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    if isinstance(obj, np.ndarray):
        return [_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(x) for x in obj]
    return repr(obj)


class _Tracker:
    """Accumulates per-sample margins and keeps the worst witness."""

    def __init__(self, condition_id: str, tolerance: float):
        self.cid = condition_id
        self.tol = tolerance
        self.worst = math.inf
        self.witness = None
        self.samples = 0
        self.failures = 0

    def add(self, margin: float, witness: dict, ok: bool = True):
        self.samples += 1
        if not ok:
            self.failures += 1
        if margin < self.worst or self.witness is None:
            self.worst = float(margin)
            self.witness = witness

    def report(self, loss: str, grids: dict, seed=None, notes: str = "") -> ConditionReport:
        if self.samples == 0:
            return ConditionReport(self.cid, INCONCLUSIVE, math.nan, None, 0, self.tol, grids, seed, loss,
                                   notes or "no applicable samples")
        if self.worst < -self.tol:
            verdict = VIOLATED
        elif self.failures:
            verdict = INCONCLUSIVE
            notes = notes or f"{self.failures} samples did not converge"
        else:
            verdict = HOLDS
        return ConditionReport(self.cid, verdict, self.worst, self.witness, self.samples, self.tol, grids, seed,
                               loss, notes)


def _describe(loss) -> str:
    return loss.describe() if hasattr(loss, "describe") else getattr(loss, "name", "custom")


# ---------------------------------------------------------------------------
# symmetry and score-set closure


@dataclass(frozen=True)
class CustomLoss:
    """A hand-written loss ``fn(s, y)`` for auditing symmetry."""

    K: int
    score_set: ScoreSet
    fn: Callable
    name: str = "custom"

    def risk(self, s, p) -> float:
        return float(sum(p[y] * self.fn(np.asarray(s, dtype=float), y) for y in range(self.K) if p[y] != 0))

    def describe(self) -> str:
        return self.name


def _symmetry_margin(loss, s, p, perm) -> float:
    s, p, perm = np.asarray(s, float), np.asarray(p, float), list(perm)
    return -abs(loss.risk(s, p) - loss.risk(s[perm], p[perm]))


def check_symmetry(loss, samples: int = 1000, seed: int = 0, tolerance: float = 1e-10) -> ConditionReport:
    """Risk invariance under joint permutation of scores and probabilities."""
    rng = np.random.default_rng(seed)
    tr = _Tracker("C5-symmetry", tolerance)
    K = loss.K
    for _ in range(samples):
        s = loss.score_set.sample(rng)
        p = rng.dirichlet(np.ones(K))
        perm = rng.permutation(K)
        if not loss.score_set.contains(s[perm]):
            tr.add(-math.inf, {"s": s, "p": p, "perm": perm, "reason": "permuted scores leave the score set"})
            continue
        tr.add(_symmetry_margin(loss, s, p, perm), {"s": s, "p": p, "perm": perm})
    return tr.report(_describe(loss), {"samples": samples}, seed)


_CLOSED_SETS = {"full", "sum-to-zero", "simplex", "nonnegative"}


def check_swapping_averaging(score_set: ScoreSet, samples: int = 1000, seed: int = 0) -> tuple:
    """Swapping (exchange two coordinates) and averaging (replace two
    coordinates by their mean) keep scores in the set."""
    grids = {"samples": samples}
    if score_set.kind in _CLOSED_SETS:
        note = f"{score_set.kind} is closed under both operations"
        return (ConditionReport("A5-swapping", HOLDS, 0.0, None, 0, 0.0, grids, seed, score_set.kind, note),
                ConditionReport("A6-averaging", HOLDS, 0.0, None, 0, 0.0, grids, seed, score_set.kind, note))
    rng = np.random.default_rng(seed)
    swap, avg = _Tracker("A5-swapping", 1e-9), _Tracker("A6-averaging", 1e-9)
    K = score_set.K
    for _ in range(samples):
        s = score_set.sample(rng)
        i, j = rng.choice(K, 2, replace=False)
        t = s.copy()
        t[i], t[j] = s[j], s[i]
        ok = score_set.contains(t) and (s[j] < s.max() - 1e-9 or t[i] >= t.max() - 1e-9)
        swap.add(0.0 if ok else -1.0, {"s": s, "i": int(i), "j": int(j)})
        u = s.copy()
        u[i] = u[j] = 0.5 * (s[i] + s[j])
        avg.add(0.0 if score_set.contains(u) else -1.0, {"s": s, "i": int(i), "j": int(j)})
    return swap.report(score_set.kind, grids, seed), avg.report(score_set.kind, grids, seed)


# ---------------------------------------------------------------------------
# C1: infimum over suboptimal scores sits at the leading pair


def _c1_margin(loss: LossSpec, eps: float, p, settings: OptimizerSettings):
    p = np.asarray(p, float)
    J = suboptimal_classes(p, eps)
    if not J:
        return None
    je = j_eps(p, eps)
    j0 = int(np.flatnonzero(p >= p.max() - 1e-12)[0])
    m = _class_minima(loss, tuple(map(float, p)), settings)
    inf_T = min(m.per_class[j] for j in J)
    r = minimize_risk(loss, p, argmax_set_constraints([je, j0], loss.K), settings)
    return inf_T - r.value, {"eps": eps, "p": p, "j_eps": je, "j0": j0, "inf_T": inf_T, "inf_pair": r.value}, \
        (m.converged and r.converged and not m.unbounded)


def check_condition_1(loss: LossSpec, eps_grid: Sequence[float] = DEFAULT_EPS_GRID, resolution: int | None = None,
                      settings: OptimizerSettings = DEFAULT_SETTINGS, tolerance: float = DEFAULT_TOL,
                      extra_p: Sequence = ()) -> ConditionReport:
    """Infimum over eps-suboptimal scores equals the infimum over scores
    tying the most likely class with the most likely suboptimal one."""
    K = loss.K
    if K > 4:
        raise DomainError("the C1 audit supports K <= 4")
    res = resolution or DEFAULT_RESOLUTION[K]
    ps = list(simplex_grid(K, res)) + [np.asarray(q, float) for q in extra_p]
    if loss.family == "LLW" and loss.phi is not None and loss.phi.kind == "kink" and K == 3:
        ps += [np.array(q) for q in KINK_DISTRIBUTIONS]
    tr = _Tracker("C1", tolerance)
    for eps in eps_grid:
        for p in ps:
            out = _c1_margin(loss, eps, p, settings)
            if out is not None:
                tr.add(*out)
    return tr.report(loss.describe(), {"eps": list(eps_grid), "resolution": res, "extra_p": [list(q) for q in extra_p]})


# ---------------------------------------------------------------------------
# C2: pairing, and its sum-to-zero variant


def _fiber_min(kern, s: np.ndarray, i: int, j: int, score_set: ScoreSet, box: float, xtol: float) -> float:
    """Minimum of the kernel over scores agreeing with s off {i, j}."""
    kind = score_set.kind
    lower = {"sum-to-zero": -box, "full": -box, "boxed-sum-to-zero": score_set.lower_bound,
             "simplex": 0.0, "nonnegative": 0.0}[kind]
    K = len(s)
    dirs = []
    d = np.zeros(K)
    d[i], d[j] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    dirs.append(d)
    if kind in ("full", "nonnegative"):
        for v in ((1.0, 0.0), (0.0, 1.0), (1 / math.sqrt(2), 1 / math.sqrt(2))):
            d = np.zeros(K)
            d[i], d[j] = v
            dirs.append(d)
    x = s.copy()
    f = kern(x)
    for _ in range(200):
        f_start = f
        for d in dirs:
            lo, hi = -math.inf, math.inf
            for k in (i, j):
                if d[k] > 0:
                    lo = max(lo, (lower - x[k]) / d[k])
                    hi = min(hi, (box - x[k]) / d[k])
                elif d[k] < 0:
                    hi = min(hi, (lower - x[k]) / d[k])
                    lo = max(lo, (box - x[k]) / d[k])
            lo, hi = min(lo, 0.0), max(hi, 0.0)
            if hi - lo <= 1e-15:
                continue
            t, ft, _ = kern.line_search(x, d, lo, hi, 0.5, xtol)
            if ft < f:
                x = x + t * d
                f = ft
        if f_start - f <= 1e-13:
            break
    return f


def _pairing_left(loss: LossSpec, i: int, j: int, p, settings: OptimizerSettings):
    """inf over M(S,i) & M(S,j) of [R(s,p) - min over the (i,j)-fiber of R]."""
    kern = loss.kernel(np.asarray(p, float), adjustment="none")
    xtol = settings.tol * 1e-2

    def gap(s):
        return kern(s) - _fiber_min(kern, np.asarray(s, float), i, j, loss.score_set, settings.box_radius, xtol)

    outer = OptimizerSettings(settings.tol, settings.max_iters, min(settings.restarts, 4), settings.box_radius,
                              settings.seed)
    r = minimize_over_scores(gap, loss.score_set, argmax_set_constraints([i, j], loss.K), outer)
    return r.value, r.minimizer, r.converged


def binary_two_inf(loss: LossSpec, p1: float, p2: float, adjustment=None,
                   settings: OptimizerSettings = DEFAULT_SETTINGS):
    """inf_s R'(s, (pbar, pbar)) - inf_s R'(s, (p1, p2)) for the two-class loss."""
    L2 = loss.with_K(2)
    pb = 0.5 * (p1 + p2)
    a = minimize_risk(L2, [pb, pb], settings=settings, adjustment=adjustment)
    b = minimize_risk(L2, [p1, p2], settings=settings, adjustment=adjustment)
    return a.value - b.value, (a.converged and b.converged and not (a.unbounded or b.unbounded))


def _c2_margin(loss: LossSpec, adjustment, i: int, j: int, p, settings):
    left, s, conv = _pairing_left(loss, i, j, p, settings)
    right, conv2 = binary_two_inf(loss, p[i], p[j], adjustment, settings)
    return left - right, {"i": i, "j": j, "p": np.asarray(p, float), "left": left, "right": right, "s": s}, \
        conv and conv2


def _pair_indices(K: int):
    return list(itertools.combinations(range(K), 2))


def check_condition_2(loss: LossSpec, adjustment=None, resolution: int | None = None,
                      settings: OptimizerSettings = DEFAULT_SETTINGS, tolerance: float = DEFAULT_TOL) -> ConditionReport:
    """Pairing: the tied-pair surrogate gap dominates the binary pseudo-risk gap."""
    K = loss.K
    if K > 4:
        raise DomainError("the C2 audit supports K <= 4")
    res = resolution or DEFAULT_RESOLUTION[K]
    tr = _Tracker("C2", tolerance)
    for p in simplex_grid(K, res):
        for i, j in _pair_indices(K):
            tr.add(*_c2_margin(loss, adjustment, i, j, p, settings))
    return tr.report(loss.describe(), {"resolution": res})


# ---------------------------------------------------------------------------
# C3 and C4: binary pseudo-risk gap against a function of p1 - p2


def pair_grid(step: float = 0.05, strict: bool = True) -> list[tuple[float, float]]:
    """Pairs p1 >= p2 >= 0 with p1 + p2 <= 1 on a lattice (p1 > p2 if strict)."""
    m = int(round(1 / step))
    out = []
    for a in range(m + 1):
        for b in range(a + 1):
            if a + b <= m and (a > b or not strict):
                out.append((a / m, b / m))
    return out


def _c34_margin(loss: LossSpec, adjustment, zeta: Callable[[float], float], p1: float, p2: float, settings):
    lhs, conv = binary_two_inf(loss, p1, p2, adjustment, settings)
    z = float(zeta(p1 - p2))
    return lhs - z, {"p1": p1, "p2": p2, "lhs": lhs, "zeta": z}, conv


def check_condition_3_4(loss: LossSpec, adjustment=None, zeta: Callable[[float], float] | None = None,
                        pairs: Sequence | None = None, settings: OptimizerSettings = DEFAULT_SETTINGS,
                        tolerance: float = DEFAULT_TOL) -> ConditionReport:
    """Binary pseudo-risk gap against zeta(p1 - p2).

    Without ``zeta`` the loss's own binary calibration function is used,
    which is the stronger C4.
    """
    cid = "C3" if zeta is not None else "C4"
    if zeta is None:
        table: dict[float, float] = {}

        def zeta(g, _t=table):
            g = round(float(g), 12)
            if g not in _t:
                _t[g] = float(delta_binary_of_loss(loss, g, settings)) if g > 0 else 0.0
            return _t[g]

    pairs = pairs if pairs is not None else pair_grid()
    tr = _Tracker(cid, tolerance)
    for p1, p2 in pairs:
        tr.add(*_c34_margin(loss, adjustment, zeta, p1, p2, settings))
    return tr.report(loss.describe(), {"pairs": len(pairs)})


# ---------------------------------------------------------------------------
# C6 and C7 (sum-to-zero scores)


def _offset_inner(kern, theta: float, box: float, xtol: float) -> float:
    """min over u of the two-class pseudo-risk at (theta + u, theta - u)."""
    s = np.array([theta, theta])
    d = np.array([1.0, -1.0]) / math.sqrt(2)
    lim = box * math.sqrt(2)
    _, f, _ = kern.line_search(s, d, -lim, lim, 0.5, xtol)
    return min(f, kern(s))


def theta_form(loss: LossSpec, p1: float, p2: float, settings: OptimizerSettings = DEFAULT_SETTINGS,
               theta_max: float = 10.0, adjustment=None):
    """inf over theta >= 0 of [R'((theta,theta), pbar) - inf_u R'((theta+u, theta-u), (p1,p2))].

    Evaluated off the sum-to-zero plane, as the reduction requires.
    Returns (value, theta).
    """
    L2 = loss.with_K(2)
    pb = 0.5 * (p1 + p2)
    k_bar = L2.kernel([pb, pb], adjustment=adjustment)
    k_p = L2.kernel([p1, p2], adjustment=adjustment)
    xtol = settings.tol * 1e-2

    def h(theta):
        if theta < 0:
            return math.inf
        return k_bar(np.array([theta, theta])) - _offset_inner(k_p, theta, settings.box_radius, xtol)

    grid = np.linspace(0.0, theta_max, 201)
    vals = [h(t) for t in grid]
    k = int(np.argmin(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    r = minimize_1d(h, settings, lo=lo, hi=hi)
    if r.value < vals[k]:
        return r.value, float(r.minimizer[0])
    return vals[k], float(grid[k])


def _c6_margin(loss: LossSpec, i: int, j: int, p, settings):
    left, s, conv = _pairing_left(loss, i, j, p, settings)
    right, theta = theta_form(loss, p[i], p[j], settings)
    return left - right, {"i": i, "j": j, "p": np.asarray(p, float), "left": left, "theta_form": right,
                          "theta": theta, "s": s}, conv


def _c7_margin(loss: LossSpec, p1: float, p2: float, settings):
    th, theta = theta_form(loss, p1, p2, settings)
    two, conv = binary_two_inf(loss, p1, p2, None, settings)
    return -abs(th - two), {"p1": p1, "p2": p2, "theta_form": th, "theta": theta, "two_inf": two}, conv


def check_condition_6_7(loss: LossSpec, resolution: int | None = None, pairs: Sequence | None = None,
                        settings: OptimizerSettings = DEFAULT_SETTINGS, tolerance: float = DEFAULT_TOL) -> tuple:
    """Sum-to-zero pairing (C6) and the free-lunch identity (C7)."""
    if loss.score_set.kind != "sum-to-zero":
        raise DomainError("C6 and C7 apply to sum-to-zero scores")
    K = loss.K
    res = resolution or DEFAULT_RESOLUTION.get(K, 10)
    c6 = _Tracker("C6-pairing-sum-to-zero", tolerance)
    if K >= 3:
        for p in simplex_grid(K, res):
            for i, j in _pair_indices(K):
                c6.add(*_c6_margin(loss, i, j, p, settings))
    c7 = _Tracker("C7-free-lunch", tolerance)
    pairs = pairs if pairs is not None else pair_grid(strict=False)
    for p1, p2 in pairs:
        c7.add(*_c7_margin(loss, p1, p2, settings))
    return (c6.report(loss.describe(), {"resolution": res}),
            c7.report(loss.describe(), {"pairs": len(pairs)}))


def probe_conjecture_1(loss: LossSpec, pairs: Sequence | None = None,
                       settings: OptimizerSettings = DEFAULT_SETTINGS) -> ConditionReport:
    """Measured free-lunch margin for a smooth phi; never asserted."""
    pairs = pairs if pairs is not None else pair_grid(strict=False)
    tr = _Tracker("conjecture-1-probe", DEFAULT_TOL)
    for p1, p2 in pairs:
        tr.add(*_c7_margin(loss, p1, p2, settings))
    rep = tr.report(loss.describe(), {"pairs": len(pairs)})
    rep.verdict = INCONCLUSIVE
    rep.notes = "open conjecture: the measured margin is reported, not a verdict"
    return rep


# ---------------------------------------------------------------------------
# the psi-budget condition for decoupled Zhang losses


def _psi_values(loss: LossSpec, t: np.ndarray) -> np.ndarray:
    if loss.family == "LR":
        with np.errstate(divide="ignore"):
            return np.where(t > 0, -np.log(np.where(t > 0, t, 1.0)), math.inf)
    kind, a = loss.psi_kind, loss.psi_a
    if kind == "neg-linear":
        return -t
    if kind == "neg-log":
        return np.where(t > 0, -np.log(np.where(t > 0, t, 1.0)), math.inf)
    if kind == "neg-power":
        return np.where(t >= 0, -np.power(np.maximum(t, 0.0), a) / a, math.inf)
    psi = psi_callable(loss)
    return np.array([psi(x) for x in np.ravel(t)]).reshape(np.shape(t))


def _psi_floor(loss: LossSpec, budget: float, lower: float) -> float:
    """Smallest tau in the score domain with psi(tau) <= budget (psi non-increasing)."""
    if math.isinf(budget):
        return lower
    kind = "neg-log" if loss.family == "LR" else loss.psi_kind
    if kind == "neg-linear":
        return max(-budget, lower)
    if kind == "neg-log":
        return max(math.exp(-budget), lower)
    if kind == "neg-power":
        a = loss.psi_a
        return lower if budget >= 0 else max((-a * budget) ** (1 / a), lower)
    psi = psi_callable(loss)
    lo, hi = lower if math.isfinite(lower) else -1e3, 1e3
    if psi(lo) <= budget:
        return lo
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        lo, hi = (lo, mid) if psi(mid) <= budget else (mid, hi)
    return hi


def _psi_floor_vec(loss: LossSpec, budget, lower: float) -> np.ndarray:
    budget = np.asarray(budget, float)
    kind = "neg-log" if loss.family == "LR" else loss.psi_kind
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        if kind == "neg-linear":
            out = -budget
        elif kind == "neg-log":
            out = np.exp(-budget)
        elif kind == "neg-power":
            a = loss.psi_a
            out = np.where(budget >= 0, lower, np.power(np.maximum(-a * budget, 0.0), 1 / a))
        else:
            return np.vectorize(lambda b: _psi_floor(loss, b, lower))(budget)
    out = np.where(np.isinf(budget) & (budget > 0), lower, out)
    return np.maximum(out, lower)


class _ZhangPair:
    """The two-class pseudo-risk R'(s, (w1, w2)) = w1 psi(s1) + w2 psi(s2) + l(s)."""

    def __init__(self, loss: LossSpec):
        if loss.family == "LR":
            self.phi = None
        elif loss.family == "Zhang" and loss.F_kind in ("identity",):
            self.phi = loss.phi
        else:
            raise DomainError("the psi-budget condition needs a Zhang loss with F = identity, or LR")
        self.loss = loss
        self.kind = loss.score_set.kind

    def adjustment(self, s1, s2):
        if self.phi is None:
            return 0.0 * s1
        return self.phi.values(s1) + self.phi.values(s2)

    def value(self, s1, s2, w1, w2):
        s1, s2 = np.asarray(s1, float), np.asarray(s2, float)
        with np.errstate(invalid="ignore"):
            out = self.adjustment(s1, s2)
            if w1:
                out = out + w1 * _psi_values(self.loss, s1)
            if w2:
                out = out + w2 * _psi_values(self.loss, s2)
        return out


def _zhang_inf_margin(loss: LossSpec, p1: float, p2: float, settings: OptimizerSettings):
    """LHS - RHS of the psi-budget identity at (p1, p2); RHS >= LHS always."""
    Z = _ZhangPair(loss)
    pb = 0.5 * (p1 + p2)
    R = settings.box_radius
    if Z.kind == "simplex":
        # s1 = s2 forces (1/2, 1/2); scan s' = (u, 1 - u)
        u = np.concatenate([np.linspace(0, 1, 4001), [p1 / (p1 + p2) if p1 + p2 > 0 else 0.5]])
        rp = Z.value(u, 1 - u, p1, p2)
        g_half = float(Z.value(0.5, 0.5, pb, pb))
        lhs = g_half - np.nanmin(rp)
        budget_ok = 2 * _psi_values(loss, np.array([0.5]))[0] <= _psi_values(loss, u) + _psi_values(loss, 1 - u) + 1e-12
        vals = np.where(budget_ok, g_half - rp, -math.inf)
        k = int(np.nanargmax(vals))
        rhs = float(vals[k])
        return lhs - rhs, {"p1": p1, "p2": p2, "lhs": lhs, "rhs": rhs, "s_prime": [float(u[k]), float(1 - u[k])]}, True

    lower = 0.0 if Z.kind == "nonnegative" else -R

    def g(tau):
        return float(Z.value(tau, tau, pb, pb))

    r = minimize_1d(g, settings, lo=lower, hi=R)
    t_star, g_star = float(r.minimizer[0]), r.value

    # unconstrained two-class infimum is separable: sum over k of p_k psi(s_k) + phi(s_k)
    def coord(w):
        rr = minimize_1d(lambda x: _half(Z, x, w), settings, lo=lower, hi=R)
        return float(rr.minimizer[0]), rr.value

    a1, v1 = coord(p1)
    a2, v2 = coord(p2)
    inf_p = v1 + v2
    lhs = g_star - inf_p

    def h(s1, s2):
        s1, s2 = np.asarray(s1, float), np.asarray(s2, float)
        with np.errstate(invalid="ignore", over="ignore"):
            budget = 0.5 * (_psi_values(loss, s1) + _psi_values(loss, s2))
            floor = _psi_floor_vec(loss, budget, lower)
            tau = np.maximum(floor, t_star)
            return Z.value(tau, tau, pb, pb) - Z.value(s1, s2, p1, p2)

    if Z.kind == "nonnegative":
        axis = np.unique(np.concatenate([np.linspace(0, 8, 81), np.geomspace(1e-8, 8, 60), [a1, a2]]))
    else:
        axis = np.unique(np.concatenate([np.linspace(-8, 8, 81), [a1, a2]]))
    S1, S2 = np.meshgrid(axis, axis, indexing="ij")
    H = h(S1.ravel(), S2.ravel())
    H = np.where(np.isfinite(H), H, -math.inf)
    k = int(np.argmax(H))
    starts = [(S1.ravel()[k], S2.ravel()[k]), (a1, a2)]
    best, best_s = float(H[k]), starts[0]
    bounds = [(lower, R), (lower, R)]
    for x0 in starts:
        res = _scipy_minimize(lambda x: -float(h(x[0], x[1])) if np.all(np.isfinite(x)) else math.inf,
                              np.array(x0, float), method="Nelder-Mead", bounds=bounds,
                              options={"xatol": 1e-10, "fatol": 1e-13, "maxiter": 4000})
        val = -float(res.fun)
        if val > best:
            best, best_s = val, tuple(map(float, res.x))
    rhs = best
    return lhs - rhs, {"p1": p1, "p2": p2, "lhs": lhs, "rhs": rhs, "s_prime": list(best_s)}, not r.unbounded


def _half(Z: _ZhangPair, x: float, w: float) -> float:
    psi = float(_psi_values(Z.loss, np.array([x]))[0]) if w else 0.0
    return w * psi + (Z.phi(x) if Z.phi is not None else 0.0)


def check_zhang_inf(loss: LossSpec, pairs: Sequence | None = None, settings: OptimizerSettings = DEFAULT_SETTINGS,
                    tolerance: float = DEFAULT_TOL) -> ConditionReport:
    """Sup-inf identity with the psi-budget restricted inner set."""
    pairs = pairs if pairs is not None else pair_grid(strict=False)
    tr = _Tracker("ZhangInf", tolerance)
    for p1, p2 in pairs:
        tr.add(*_zhang_inf_margin(loss, p1, p2, settings))
    return tr.report(loss.describe(), {"pairs": len(pairs)})


# ---------------------------------------------------------------------------
# order preservation and lower-boundedness

ORDER_GAP = 1e-3


def _order_margin(loss: LossSpec, p, settings):
    p = np.asarray(p, float)
    K = loss.K
    r = minimize_risk(loss, p, settings=settings)
    s = r.minimizer
    pairs = [(i, j) for i in range(K) for j in range(K) if p[i] > p[j] + 1e-9]
    worst = min((s[i] - s[j] for i, j in pairs), default=math.inf)
    info = {"p": p, "s": s, "value": r.value}
    if worst > 1e-6:
        return 0.0, info, r.converged
    # the computed minimiser ties or inverts an ordered pair; look for an
    # ordered minimiser before declaring a violation
    cons = [order_constraint(i, j, ORDER_GAP, K) for i, j in pairs]
    try:
        rc = minimize_risk(loss, p, cons, settings)
    except DomainError:
        return -math.inf, {**info, "ordered_value": math.inf}, True
    increase = rc.value - r.value
    info.update({"ordered_value": rc.value, "ordered_s": rc.minimizer, "increase": increase})
    if increase <= 1e-9:
        return 0.0, info, True
    if increase <= 1e-6:
        return 0.0, info, False
    return -increase, info, True


def check_order_preservation(loss: LossSpec, resolution: int | None = None,
                             settings: OptimizerSettings = DEFAULT_SETTINGS,
                             tolerance: float = 1e-6) -> ConditionReport:
    """Some risk minimiser ranks classes as p does, at interior grid points."""
    K = loss.K
    res = resolution or DEFAULT_RESOLUTION.get(K, 10)
    tr = _Tracker("order-preservation", tolerance)
    for p in simplex_grid(K, res):
        if np.all(p > 0):
            tr.add(*_order_margin(loss, p, settings))
    return tr.report(loss.describe(), {"resolution": res, "order_gap": ORDER_GAP})


def check_lower_bounded(loss: LossSpec, settings: OptimizerSettings = DEFAULT_SETTINGS) -> ConditionReport:
    """The surrogate risk is bounded below (probed at vertices and the uniform p)."""
    K = loss.K
    tr = _Tracker("A2-lower-bounded", 0.0)
    probes = [np.eye(K)[k] for k in range(K)] + [np.full(K, 1.0 / K)]
    for p in probes:
        r = minimize_risk(loss, p, settings=settings)
        tr.add(-math.inf if r.unbounded else 0.0, {"p": p, "value": r.value, "s": r.minimizer})
    return tr.report(loss.describe(), {"probes": len(probes)})


# ---------------------------------------------------------------------------
# replay


def replay(report: ConditionReport, loss, settings: OptimizerSettings = DEFAULT_SETTINGS, zeta=None,
           adjustment=None) -> float:
    """Recompute the margin at a report's witness."""
    w = report.witness
    if w is None:
        raise DomainError("report has no witness")
    cid = report.condition_id
    if cid == "C5-symmetry":
        return _symmetry_margin(loss, w["s"], w["p"], w["perm"])
    if cid == "C1":
        return _c1_margin(loss, w["eps"], w["p"], settings)[0]
    if cid == "C2":
        return _c2_margin(loss, adjustment, w["i"], w["j"], w["p"], settings)[0]
    if cid in ("C3", "C4"):
        if zeta is None and cid == "C3":
            raise DomainError("replaying C3 needs zeta")
        z = zeta or (lambda g: float(delta_binary_of_loss(loss, g, settings)) if g > 0 else 0.0)
        return _c34_margin(loss, adjustment, z, w["p1"], w["p2"], settings)[0]
    if cid == "C6-pairing-sum-to-zero":
        return _c6_margin(loss, w["i"], w["j"], w["p"], settings)[0]
    if cid in ("C7-free-lunch", "conjecture-1-probe"):
        return _c7_margin(loss, w["p1"], w["p2"], settings)[0]
    if cid == "ZhangInf":
        return _zhang_inf_margin(loss, w["p1"], w["p2"], settings)[0]
    if cid == "order-preservation":
        return _order_margin(loss, w["p"], settings)[0]
    raise DomainError(f"no replay for {cid}")


# ---------------------------------------------------------------------------
# audit driver

AUDITS = ("C1", "C2", "C4", "C5-symmetry", "C6-C7", "ZhangInf", "A2-lower-bounded", "A5-A6", "order-preservation")


def audit(loss: LossSpec, conditions: Sequence[str] | None = None, settings: OptimizerSettings = DEFAULT_SETTINGS,
          seed: int = 0) -> list[ConditionReport]:
    """Run the applicable checks; inapplicable ones are skipped."""
    conditions = list(conditions or AUDITS)
    out: list[ConditionReport] = []
    for c in conditions:
        if c not in AUDITS and c not in CONDITION_IDS:
            raise DomainError(f"unknown condition {c!r}")
        if c == "C1" and loss.K >= 3:
            out.append(check_condition_1(loss, settings=settings))
        elif c == "C2" and loss.K >= 3:
            out.append(check_condition_2(loss, settings=settings))
        elif c in ("C4", "C3"):
            out.append(check_condition_3_4(loss, settings=settings))
        elif c == "C5-symmetry":
            out.append(check_symmetry(loss, seed=seed))
        elif c in ("C6-C7", "C6-pairing-sum-to-zero", "C7-free-lunch") and loss.score_set.kind == "sum-to-zero":
            out.extend(check_condition_6_7(loss, settings=settings))
        elif c == "ZhangInf" and (loss.family == "LR" or (loss.family == "Zhang" and loss.F_kind == "identity")):
            out.append(check_zhang_inf(loss, settings=settings))
        elif c == "A2-lower-bounded":
            out.append(check_lower_bounded(loss, settings))
        elif c in ("A5-A6", "A5-swapping", "A6-averaging"):
            out.extend(check_swapping_averaging(loss.score_set, seed=seed))
        elif c == "order-preservation" and loss.K >= 3:
            out.append(check_order_preservation(loss, settings=settings))
    return out
