"""Calibration functions: binary closed forms and numerics, the maximum
calibration function by brute force at small K, curves and their inverse."""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Sequence

import numpy as np

from .losses import (
    DomainError,
    LossSpec,
    ScoreSet,
    TransformationFunctionSpec,
    binary_worst_case,
    check_distribution,
    suboptimal_classes,
)
from .optimize import (
    DEFAULT_SETTINGS,
    OptimizerSettings,
    argmax_constraints,
    minimize_1d,
    minimize_risk,
    simplex_grid,
)

INF = math.inf


class NotCalibratedError(DomainError):
    """No positive calibration function exists for this loss."""


class AssumptionViolation(DomainError):
    """The surrogate risk is unbounded below, so the infima are meaningless."""


class Value(float):
    """A float carrying optimiser diagnostics."""

    residual: float
    converged: bool
    witness: object

    def __new__(cls, value, residual=0.0, converged=True, witness=None):
        obj = super().__new__(cls, value)
        obj.residual = float(residual)
        obj.converged = bool(converged)
        obj.witness = witness
        return obj


# ---------------------------------------------------------------------------
# binary calibration


def _check_eps(eps: float, closed: bool = True):
    if closed and not 0.0 < eps < 1.0:
        raise DomainError("eps must lie in (0, 1)")
    if not closed and not 0.0 < eps <= 1.0:
        raise DomainError("eps must lie in (0, 1]")


def _logistic_closed(e: float) -> float:
    a = (1 - e) * math.log(1 - e) if e < 1 else 0.0
    return 0.5 * (a + (1 + e) * math.log(1 + e))


_CLOSED: dict[str, Callable[[float], float]] = {
    "zero-one": lambda e: e,
    "hinge": lambda e: e,
    "modulus": lambda e: e,
    "squared": lambda e: e * e,
    "truncated-square": lambda e: e * e,
    "exponential": lambda e: 1.0 - math.sqrt(1.0 - e * e),
    "logistic": _logistic_closed,
    "sigmoid": lambda e: e,
    "kink": lambda e: e,
}


def delta_binary_closed(phi: TransformationFunctionSpec, eps: float) -> float:
    """Tabulated binary calibration function.

    Raises :class:`NotCalibratedError` for identity, linear and the kink with
    tau = 0.
    """
    _check_eps(eps)
    if phi.kind in ("identity", "linear") or (phi.kind == "kink" and phi.tau == 0):
        raise NotCalibratedError(f"{phi.kind} has no binary calibration function")
    try:
        return _CLOSED[phi.kind](float(eps))
    except KeyError:
        raise DomainError(f"no tabulated calibration function for {phi.kind}") from None


def derivative_at_zero(phi: TransformationFunctionSpec, h: float = 1e-6) -> tuple[float, float]:
    """One-sided difference quotients of phi at 0."""
    f0 = phi(0.0)
    return (f0 - phi(-h)) / h, (phi(h) - f0) / h


def binary_calibrated(phi: TransformationFunctionSpec) -> bool:
    """Convex, lower-bounded phi is calibrated iff phi'(0) exists and is positive."""
    if not phi.convex:
        raise DomainError("criterion applies to convex phi")
    if not phi.lower_bounded:
        return False
    left, right = derivative_at_zero(phi)
    return abs(right - left) <= 1e-4 * max(1.0, abs(right)) and left > 0


def delta_binary_numeric(phi: TransformationFunctionSpec, eps: float,
                         settings: OptimizerSettings = DEFAULT_SETTINGS) -> Value:
    """Binary calibration function by numeric minimisation.

    Convex phi: ``phi(0) - inf_t [(1+eps) phi(t) + (1-eps) phi(-t)] / 2``; the
    wrong-sign infimum of a convex margin loss is attained at t = 0.
    Non-convex phi: the margin loss is minimised on a dense grid over the
    wrong-sign half-line and over the line, ties resolved against the
    likely class.
    """
    _check_eps(eps, closed=False)
    if not phi.convex:
        return _delta_binary_grid(phi, eps)
    e = float(eps)
    res = minimize_1d(lambda t: (1 + e) * phi(t) + (1 - e) * phi(-t), settings)
    if res.unbounded:
        raise NotCalibratedError(f"{phi.kind}: margin risk is unbounded below")
    value = phi(0.0) - 0.5 * res.value
    return Value(max(value, 0.0), res.residual, res.converged, witness=float(res.minimizer[0]))


def _delta_binary_grid(phi: TransformationFunctionSpec, eps: float, radius: float = 50.0,
                       n: int = 200_001) -> Value:
    # margin t = s_1 on S0, risk p1 phi(-t) + p2 phi(t); t <= 0 selects the unlikely class
    p1, p2 = binary_worst_case(eps)
    t = np.concatenate([np.linspace(-radius, radius, n), [0.0]])
    risk = p1 * phi.values(-t) + p2 * phi.values(t)
    wrong = risk[t <= 0].min()
    best = risk.min()
    return Value(max(wrong - best, 0.0), residual=0.0, converged=True)


def delta_binary_of_loss(loss: LossSpec, eps: float, settings: OptimizerSettings = DEFAULT_SETTINGS) -> Value:
    """Two-infimum form: best risk at the uniform pair minus best risk at p^eps."""
    _check_eps(eps, closed=False)
    L2 = loss.with_K(2)
    r0 = minimize_risk(L2, [0.5, 0.5], settings=settings)
    r1 = minimize_risk(L2, binary_worst_case(eps), settings=settings)
    if r1.unbounded or r0.unbounded:
        raise AssumptionViolation(f"{loss.describe()}: risk unbounded below")
    return Value(r0.value - r1.value, r0.residual + r1.residual, r0.converged and r1.converged)


def delta_binary(phi: TransformationFunctionSpec, eps: float) -> float:
    """Tabulated value when available, numeric otherwise (0 when not calibrated)."""
    try:
        return delta_binary_closed(phi, eps)
    except NotCalibratedError:
        return 0.0
    except DomainError:
        return float(delta_binary_numeric(phi, eps))


# ---------------------------------------------------------------------------
# maximum calibration function


@dataclass(frozen=True)
class _Minima:
    per_class: tuple  # minimum over M(S, j) for each j
    minimizers: tuple
    residual: float
    converged: bool
    unbounded: bool

    @property
    def overall(self) -> float:
        return min(self.per_class)


@lru_cache(maxsize=200_000)
def _class_minima(loss: LossSpec, p: tuple, settings: OptimizerSettings) -> _Minima:
    # the score set is the union of the M(S, j), so the overall infimum is the
    # smallest of the per-class infima
    vals, mins, res, conv, unb = [], [], 0.0, True, False
    for j in range(loss.K):
        r = minimize_risk(loss, np.array(p), argmax_constraints(j, loss.K), settings)
        vals.append(r.value)
        mins.append(tuple(r.minimizer))
        res = max(res, r.residual)
        conv = conv and r.converged
        unb = unb or r.unbounded
    return _Minima(tuple(vals), tuple(mins), res, conv, unb)


def clear_cache():
    _class_minima.cache_clear()


def delta_max_pointwise(loss: LossSpec, eps: float, p, settings: OptimizerSettings = DEFAULT_SETTINGS) -> Value:
    """``inf over eps-suboptimal scores - inf over all scores`` at one p.

    Returns +inf when no class is eps-suboptimal.  The witness is
    ``(j, minimizer)`` for the suboptimal class attaining the first infimum.
    """
    _check_eps(eps, closed=False)
    p = check_distribution(p, loss.K, tol=1e-9)
    J = suboptimal_classes(p, eps)
    if not J:
        return Value(INF, witness=None)
    m = _class_minima(loss, tuple(float(x) for x in p), settings)
    if m.unbounded:
        raise AssumptionViolation(f"{loss.describe()}: surrogate risk is unbounded below at p={list(p)}")
    j = min(J, key=lambda k: m.per_class[k])
    raw = m.per_class[j] - m.overall
    return Value(max(raw, 0.0), m.residual, m.converged, witness=(j, np.array(m.minimizers[j])))


KINK_DISTRIBUTIONS = ((8 / 20, 7 / 20, 5 / 20), (6 / 15, 7 / 15, 2 / 15))


def candidate_distributions(loss: LossSpec, eps: float, resolution: int) -> np.ndarray:
    """Grid points plus the embedded two-class worst cases (and the kink
    counterexample distributions for LLW with a kink)."""
    K = loss.K
    cands = [simplex_grid(K, resolution)]
    hi, lo = binary_worst_case(eps)
    extra = []
    for i, j in itertools.permutations(range(K), 2):
        q = np.zeros(K)
        q[i], q[j] = hi, lo
        extra.append(q)
    if loss.family == "LLW" and loss.phi is not None and loss.phi.kind == "kink" and K == 3:
        for base in KINK_DISTRIBUTIONS:
            extra.extend(np.array(base)[list(perm)] for perm in itertools.permutations(range(3)))
    if extra:
        cands.append(np.array(extra))
    return np.vstack(cands)


def delta_max_global(loss: LossSpec, eps: float, resolution: int,
                     settings: OptimizerSettings = DEFAULT_SETTINGS) -> Value:
    """Grid approximation of the maximum calibration function at eps.

    An upper bound on the true value; the witness is the minimising p.
    """
    return delta_max_global_curve(loss, [eps], resolution, settings)[0]


def delta_max_global_curve(loss: LossSpec, eps_grid: Sequence[float], resolution: int,
                           settings: OptimizerSettings = DEFAULT_SETTINGS) -> list[Value]:
    out = []
    for eps in eps_grid:
        best = Value(INF, witness=None)
        worst_res, conv = 0.0, True
        for p in candidate_distributions(loss, eps, resolution):
            v = delta_max_pointwise(loss, eps, p, settings)
            if math.isinf(v):
                continue
            worst_res = max(worst_res, v.residual)
            conv = conv and v.converged
            if v < best:
                best = Value(float(v), witness=p.copy())
        out.append(Value(float(best), worst_res, conv, best.witness))
    return out


# ---------------------------------------------------------------------------
# curves

METHODS = ("closed-form", "numeric-binary", "numeric-deltamax")


@dataclass
class CalibrationCurve:
    """Non-decreasing eps -> delta map on a finite grid in (0, 1]."""

    eps: np.ndarray
    delta: np.ndarray
    method: str = "closed-form"
    residuals: np.ndarray | None = None
    raw: np.ndarray | None = None  # values before the monotone envelope
    flagged: tuple = ()  # eps values whose evaluation failed or was not calibrated
    witnesses: list = field(default_factory=list)
    label: str = ""

    def __post_init__(self):
        self.eps = np.asarray(self.eps, dtype=float)
        self.delta = np.asarray(self.delta, dtype=float)
        if self.eps.ndim != 1 or self.eps.shape != self.delta.shape or len(self.eps) == 0:
            raise DomainError("curve needs matching non-empty eps and delta vectors")
        if np.any(np.diff(self.eps) <= 0):
            raise DomainError("eps grid must be strictly increasing")
        if self.eps[0] <= 0 or self.eps[-1] > 1:
            raise DomainError("eps grid must lie in (0, 1]")
        if self.residuals is None:
            self.residuals = np.zeros_like(self.eps)
        if self.raw is None:
            self.raw = self.delta.copy()

    @classmethod
    def from_values(cls, eps, delta, **kw) -> "CalibrationCurve":
        """Build a curve, applying the running-maximum envelope."""
        raw = np.asarray(delta, dtype=float)
        env = monotone_envelope(raw)
        return cls(np.asarray(eps, dtype=float), env, raw=raw, **kw)

    @property
    def calibrated(self) -> bool:
        return not self.flagged and bool(np.all(self.delta > 0))

    @property
    def max_eps(self) -> float:
        return float(self.eps[-1])

    def __call__(self, e: float) -> float:
        return interpolate(self, e)

    def is_convex(self, tol: float = 1e-9) -> bool:
        x = np.concatenate([[0.0], self.eps])
        y = np.concatenate([[0.0], self.delta])
        if not np.all(np.isfinite(y)):
            return False
        slopes = np.diff(y) / np.diff(x)
        return bool(np.all(np.diff(slopes) >= -tol))

    # -- serialisation --------------------------------------------------------
    def to_csv(self) -> str:
        buf = io.StringIO()
        width = max((len(w) for w in self.witnesses if w is not None), default=0)
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["eps", "delta", "residual"] + [f"witness_p{k}" for k in range(width)])
        for i, e in enumerate(self.eps):
            wit = self.witnesses[i] if i < len(self.witnesses) and self.witnesses[i] is not None else []
            w.writerow([repr(float(e)), repr(float(self.delta[i])), repr(float(self.residuals[i]))]
                       + [repr(float(x)) for x in wit] + [""] * (width - len(wit)))
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str, method: str = "closed-form") -> "CalibrationCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0][:2] != ["eps", "delta"]:
            raise DomainError("curve CSV must start with an eps,delta header")
        header = rows[0]
        eps, delta, res, wits = [], [], [], []
        for n, r in enumerate(rows[1:], start=2):
            if not r:
                continue
            try:
                eps.append(float(r[0]))
                delta.append(float(r[1]))
                res.append(float(r[2]) if len(header) > 2 and len(r) > 2 and r[2] != "" else 0.0)
                wit = [float(x) for x in r[3:] if x != ""]
            except (ValueError, IndexError):
                raise DomainError(f"curve CSV line {n}: expected numeric eps,delta") from None
            wits.append(wit or None)
        return cls(np.array(eps), np.array(delta), method, np.array(res), witnesses=wits)

    def to_json(self) -> str:
        return json.dumps({
            "method": self.method, "label": self.label,
            "eps": self.eps.tolist(), "delta": [_jnum(x) for x in self.delta],
            "raw": [_jnum(x) for x in self.raw], "residual": self.residuals.tolist(),
            "flagged": list(self.flagged), "calibrated": self.calibrated,
            "witness": [None if w is None else list(map(float, w)) for w in self.witnesses],
        }, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "CalibrationCurve":
        d = json.loads(text)
        return cls(np.array(d["eps"]), np.array([float(x) for x in d["delta"]]), d["method"],
                   np.array(d["residual"]), np.array([float(x) for x in d["raw"]]), tuple(d["flagged"]),
                   [None if w is None else list(w) for w in d["witness"]], d.get("label", ""))


def _jnum(x: float):
    return "inf" if math.isinf(x) else float(x)


def monotone_envelope(values) -> np.ndarray:
    """Running maximum from the left, ignoring NaN gaps."""
    out = np.array(values, dtype=float)
    run = -INF
    for i, v in enumerate(out):
        if np.isnan(v):
            continue
        run = max(run, v)
        out[i] = run
    return out


def calibration_curve(target, eps_grid: Sequence[float], method: str = "closed-form",
                      settings: OptimizerSettings = DEFAULT_SETTINGS, resolution: int | None = None) -> CalibrationCurve:
    """Evaluate a calibration function on a grid.

    ``target`` is a transformation function for the binary methods and a
    loss for ``numeric-deltamax``.  Points that fail or are not calibrated
    are flagged rather than aborting the curve.
    """
    if method not in METHODS:
        raise DomainError(f"unknown method {method!r}; expected one of {METHODS}")
    eps_grid = [float(e) for e in eps_grid]
    if any(b <= a for a, b in zip(eps_grid, eps_grid[1:])):
        raise DomainError("eps grid must be strictly increasing")
    values, residuals, witnesses, flagged = [], [], [], []

    if method == "numeric-deltamax":
        if not isinstance(target, LossSpec):
            raise DomainError("numeric-deltamax needs a LossSpec")
        res = resolution or {2: 200, 3: 40, 4: 10}.get(target.K, 10)
        for e, v in zip(eps_grid, delta_max_global_curve(target, eps_grid, res, settings)):
            values.append(float(v))
            residuals.append(v.residual)
            witnesses.append(None if v.witness is None else list(map(float, v.witness)))
            if float(v) <= 0 or not v.converged:
                flagged.append(e)
        label = target.describe()
    else:
        phi = target.phi if isinstance(target, LossSpec) else target
        if phi is None:
            raise DomainError("binary methods need a transformation function")
        not_calibrated = method == "numeric-binary" and phi.convex and not binary_calibrated(phi)
        for e in eps_grid:
            try:
                if method == "closed-form":
                    v, r = delta_binary_closed(phi, e), 0.0
                else:
                    val = delta_binary_numeric(phi, e, settings)
                    v, r = float(val), val.residual
            except NotCalibratedError:
                v, r = 0.0, 0.0
                flagged.append(e)
            except DomainError:
                v, r = math.nan, 0.0
                flagged.append(e)
            else:
                if v <= 0 or not_calibrated:
                    flagged.append(e)
            values.append(v)
            residuals.append(r)
            witnesses.append(None)
        label = phi.kind + (f"(tau={phi.tau:g})" if phi.kind == "kink" else "")
    return CalibrationCurve.from_values(eps_grid, values, method=method, residuals=np.array(residuals),
                                        flagged=tuple(flagged), witnesses=witnesses, label=label)


def curve_from_function(fn: Callable[[float], float], eps_grid: Iterable[float], label: str = "") -> CalibrationCurve:
    eps = [float(e) for e in eps_grid]
    return CalibrationCurve.from_values(eps, [fn(e) for e in eps], method="closed-form", label=label)


# ---------------------------------------------------------------------------
# inverse


@dataclass(frozen=True)
class InverseResult:
    value: float
    beyond_curve: bool = False

    def __float__(self):
        return float(self.value)


def interpolate(curve: CalibrationCurve, e: float) -> float:
    """Piecewise-linear curve value through (0, 0) and the grid points."""
    if e < 0:
        raise DomainError("eps must be nonnegative")
    if e > curve.max_eps + 1e-12:
        raise DomainError("eps beyond the curve")
    x = np.concatenate([[0.0], curve.eps])
    y = np.concatenate([[0.0], curve.delta])
    return float(np.interp(e, x, y))


def generalized_inverse(curve: CalibrationCurve, x: float) -> InverseResult:
    """``inf {eps : delta(eps) >= x}`` with linear interpolation between grid
    points (and from the origin).  Past the last grid value the curve's
    largest eps is returned with ``beyond_curve`` set."""
    if x < 0 or x != x:
        raise DomainError("x must be nonnegative")
    if x == 0:
        return InverseResult(0.0)
    d = curve.delta
    idx = np.flatnonzero(d >= x)
    if len(idx) == 0:
        return InverseResult(curve.max_eps, True)
    i = int(idx[0])
    e_hi, d_hi = float(curve.eps[i]), float(d[i])
    e_lo, d_lo = (0.0, 0.0) if i == 0 else (float(curve.eps[i - 1]), float(d[i - 1]))
    if math.isinf(d_hi) or d_hi <= d_lo or np.isnan(d_lo):
        return InverseResult(e_hi if math.isinf(d_hi) or np.isnan(d_lo) else e_lo)
    return InverseResult(e_lo + (x - d_lo) / (d_hi - d_lo) * (e_hi - e_lo))
