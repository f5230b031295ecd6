"""Transformation functions, multiclass surrogate losses, score sets and risks.

Classes are indexed from 0.  A loss is described by a frozen ``LossSpec``;
its risks are evaluated through a ``RiskKernel`` from :mod:`artifact.backend`
so that the optimisers can run the inner loops in compiled code.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from . import backend
from ._codes import (
    ADJ_F_SUM_PHI,
    ADJ_NONE,
    ADJ_SUM_PHI,
    F_CODE,
    F_KINDS,
    FAMILIES,
    FAMILY_CODE,
    PHI_CODE,
    PHI_KINDS,
    PSI_CODE,
    PSI_KINDS,
)
from ._pykernels import phi_value, psi_value

TIE_TOL = 1e-9
SUM_TOL = 1e-9
NONNEG_TOL = 1e-12
PROB_TOL = 1e-12


class DomainError(ValueError):
    """An input lies outside the domain of an operation."""


class SpecError(DomainError):
    """A loss or transformation description is malformed."""

    def __init__(self, field_name: str, message: str):
        super().__init__(f"{field_name}: {message}")
        self.field = field_name


# ---------------------------------------------------------------------------
# transformation functions

_NONCONVEX = {"zero-one", "sigmoid"}
_UNBOUNDED = {"identity", "linear"}
_NONDECREASING = {"zero-one", "identity", "linear", "hinge", "truncated-square",
                  "exponential", "logistic", "sigmoid", "kink", "power-plus"}


@dataclass(frozen=True)
class TransformationFunctionSpec:
    """A transformation function phi.

    ``tau`` is the second hinge location of ``kink``; ``a`` is the exponent of
    ``power``/``power-plus`` and the slope of ``affine-squared``, whose offset
    is ``b``.
    """

    kind: str
    tau: float = 0.0
    a: float = 2.0
    b: float = 1.0

    def __post_init__(self):
        if self.kind not in PHI_CODE:
            raise SpecError("phi.kind", f"unknown transformation {self.kind!r}; expected one of {PHI_KINDS}")
        if self.kind == "kink" and not self.tau >= 0:
            raise SpecError("phi.tau", "kink needs tau >= 0")
        if self.kind in ("power", "power-plus") and not self.a >= 1:
            raise SpecError("phi.a", "power transforms need exponent a >= 1 to stay convex")

    @property
    def code(self) -> int:
        return PHI_CODE[self.kind]

    @property
    def convex(self) -> bool:
        return self.kind not in _NONCONVEX

    @property
    def lower_bounded(self) -> bool:
        return self.kind not in _UNBOUNDED

    @property
    def nondecreasing(self) -> bool:
        return self.kind in _NONDECREASING

    def __call__(self, t: float) -> float:
        return phi_value(self.code, self.tau, self.a, self.b, float(t))

    def values(self, t) -> np.ndarray:
        """Vectorised evaluation on an array."""
        t = np.asarray(t, dtype=float)
        k = self.kind
        if k == "zero-one":
            return (t >= 0).astype(float)
        if k == "identity":
            return t.copy()
        if k == "linear":
            return 1.0 + t
        if k == "hinge":
            return np.maximum(1.0 + t, 0.0)
        if k == "modulus":
            return np.abs(1.0 + t)
        if k == "squared":
            return (1.0 + t) ** 2
        if k == "truncated-square":
            return np.maximum(1.0 + t, 0.0) ** 2
        if k == "exponential":
            return np.exp(t)
        if k == "logistic":
            return np.logaddexp(0.0, t)
        if k == "sigmoid":
            return 0.5 * (1.0 + np.tanh(0.5 * t))
        if k == "kink":
            return np.maximum(1.0 + t, 0.0) + np.maximum(t - self.tau, 0.0)
        if k == "power":
            return np.abs(t) ** self.a / self.a
        if k == "power-plus":
            return np.maximum(t, 0.0) ** self.a / self.a
        return (self.a * t + self.b) ** 2

    def to_dict(self) -> dict:
        return {"kind": self.kind, "tau": self.tau, "a": self.a, "b": self.b}


def eval_phi(phi: TransformationFunctionSpec, t: float) -> float:
    return phi(t)


def phi_spec(kind: str, tau: float = 0.0, **kw) -> TransformationFunctionSpec:
    return TransformationFunctionSpec(kind, tau=tau, **kw)


def effective_transform(phi: TransformationFunctionSpec):
    """Return ``(t_inf, sigma)`` where sigma clips phi below its minimum.

    ``t_inf`` is the largest minimiser of phi (``-inf`` if the infimum is only
    approached).  sigma is phi itself when phi is non-decreasing, otherwise
    phi held at its minimum value left of ``t_inf``, i.e.
    ``sigma(t) = phi(max(t, t_inf))``.  Named equivalents are returned where
    they exist so that sigma can still run in the compiled kernels.
    """
    if not phi.convex:
        raise DomainError(f"effective transform needs a convex phi, got {phi.kind}")
    if not phi.lower_bounded:
        raise DomainError(f"effective transform needs a lower-bounded phi, got {phi.kind}")
    k = phi.kind
    if k in ("exponential", "logistic"):
        t_inf = -math.inf
    elif k in ("power", "power-plus"):
        t_inf = 0.0
    elif k == "affine-squared":
        if phi.a == 0:
            raise DomainError("affine-squared with a = 0 is constant")
        t_inf = -phi.b / phi.a
    else:  # hinge, modulus, squared, truncated-square, kink
        t_inf = -1.0
    if phi.nondecreasing:
        return t_inf, phi
    if k == "squared":
        return t_inf, TransformationFunctionSpec("truncated-square")
    if k == "modulus":
        return t_inf, TransformationFunctionSpec("hinge")
    if k == "power":
        return t_inf, TransformationFunctionSpec("power-plus", a=phi.a)
    return t_inf, lambda t, _phi=phi, _t=t_inf: _phi(max(float(t), _t))


# ---------------------------------------------------------------------------
# score sets

SCORE_KINDS = ("full", "sum-to-zero", "simplex", "boxed-sum-to-zero", "nonnegative")


@dataclass(frozen=True)
class ScoreSet:
    """Domain of score vectors.

    ``nonnegative`` (the orthant) is used by Zhang variants whose psi is only
    defined for t >= 0.
    """

    kind: str
    K: int
    lower_bound: float = -1.0

    def __post_init__(self):
        if self.kind not in SCORE_KINDS:
            raise SpecError("score_set", f"unknown score set {self.kind!r}; expected one of {SCORE_KINDS}")
        if int(self.K) != self.K or self.K < 2:
            raise SpecError("K", "class count must be an integer >= 2")

    def with_K(self, K: int) -> "ScoreSet":
        return replace(self, K=K)

    @property
    def bounded(self) -> bool:
        return self.kind in ("simplex", "boxed-sum-to-zero")

    def center(self) -> np.ndarray:
        if self.kind == "simplex":
            return np.full(self.K, 1.0 / self.K)
        if self.kind == "nonnegative":
            return np.ones(self.K)
        return np.zeros(self.K)

    def violation(self, s) -> str | None:
        """Name of the first violated membership constraint, or None."""
        s = np.asarray(s, dtype=float)
        if s.shape != (self.K,):
            return f"score vector must have length {self.K}"
        if not np.all(np.isfinite(s)):
            return "scores must be finite"
        if self.kind in ("sum-to-zero", "boxed-sum-to-zero") and abs(s.sum()) > SUM_TOL:
            return f"sum-to-zero violated (sum = {s.sum():.3g})"
        if self.kind == "simplex":
            if s.min() < -NONNEG_TOL:
                return "simplex nonnegativity violated"
            if abs(s.sum() - 1.0) > SUM_TOL:
                return f"simplex sum-to-one violated (sum = {s.sum():.3g})"
        if self.kind == "boxed-sum-to-zero" and s.min() < self.lower_bound - NONNEG_TOL:
            return f"lower bound {self.lower_bound} violated"
        if self.kind == "nonnegative" and s.min() < -NONNEG_TOL:
            return "nonnegativity violated"
        return None

    def contains(self, s) -> bool:
        return self.violation(s) is None

    def check(self, s) -> np.ndarray:
        msg = self.violation(s)
        if msg is not None:
            raise DomainError(f"score vector not in {self.kind}: {msg}")
        return np.asarray(s, dtype=float)

    def sample(self, rng: np.random.Generator, scale: float = 3.0) -> np.ndarray:
        """A random member, for property tests and audits."""
        K = self.K
        if self.kind == "simplex":
            return rng.dirichlet(np.ones(K))
        if self.kind == "nonnegative":
            return rng.uniform(0.0, scale, K)
        if self.kind == "full":
            return rng.uniform(-scale, scale, K)
        if self.kind == "sum-to-zero":
            s = rng.uniform(-scale, scale, K)
            return s - s.mean()
        # boxed: shift a simplex point
        return self.lower_bound + (-self.lower_bound * K) * rng.dirichlet(np.ones(K))


# ---------------------------------------------------------------------------
# losses

DEFAULT_SCORE_SET = {
    "WW": "full",
    "CS": "full",
    "LLW": "sum-to-zero",
    "Zhang": "full",
    "RRKA": "full",
    "ZZH": "sum-to-zero",
    "Liu": "boxed-sum-to-zero",
    "BSKV": "full",
    "LR": "simplex",
}
ALLOWED_SCORE_SETS = {
    "WW": {"full"},
    "CS": {"full"},
    "LLW": {"sum-to-zero"},
    "Zhang": {"full", "nonnegative"},
    "RRKA": {"full"},
    "ZZH": {"sum-to-zero", "boxed-sum-to-zero"},
    "Liu": {"boxed-sum-to-zero"},
    "BSKV": {"full"},
    "LR": {"simplex"},
}
_NEEDS_PHI = {"WW", "CS", "LLW", "Zhang", "RRKA", "ZZH", "BSKV"}


@dataclass(frozen=True)
class LossSpec:
    """A multiclass surrogate loss.

    Families: ``WW`` sum of phi(s_k - s_y); ``CS`` max of the same; ``LLW``
    sum of phi(s_k) over k != y on sum-to-zero scores; ``Zhang``
    psi(s_y) + F(sum phi(s_k)); ``RRKA`` one-versus-all phi(-s_y) + sum over
    k != y of phi(s_k); ``ZZH`` phi(-s_y); ``Liu`` (offset - s_y)_+ on
    sum-to-zero scores bounded below by -1 (offset defaults to K - 2);
    ``BSKV`` F(sum over k != y of phi(s_k - s_y)); ``LR`` -ln s_y on the
    simplex.
    """

    family: str
    K: int
    phi: TransformationFunctionSpec | None = None
    psi_kind: str | None = None
    psi_a: float = 1.0
    F_kind: str = "none"
    score_set: ScoreSet | None = None
    offset: float | None = None

    def __post_init__(self):
        if self.family not in FAMILY_CODE:
            raise SpecError("family", f"unknown family {self.family!r}; expected one of {FAMILIES}")
        if int(self.K) != self.K or self.K < 2:
            raise SpecError("K", "class count must be an integer >= 2")
        if self.family in _NEEDS_PHI and self.phi is None:
            raise SpecError("phi.kind", f"{self.family} needs a transformation function")
        if self.F_kind not in F_CODE:
            raise SpecError("F_kind", f"unknown outer function {self.F_kind!r}; expected one of {F_KINDS}")
        if self.family == "Zhang":
            if self.psi_kind is None:
                raise SpecError("psi_kind", "Zhang needs psi_kind")
            if self.psi_kind not in PSI_CODE:
                raise SpecError("psi_kind", f"unknown psi {self.psi_kind!r}; expected one of {PSI_KINDS}")
            if self.psi_kind == "neg-power" and not self.psi_a > 0:
                raise SpecError("psi.a", "neg-power needs a > 0")
        if self.family == "BSKV" and self.F_kind == "none":
            raise SpecError("F_kind", "BSKV needs a strictly increasing F (identity or log)")
        if self.score_set is None:
            kind = DEFAULT_SCORE_SET[self.family]
            if self.family == "Zhang" and self.psi_kind in ("neg-log", "neg-power"):
                kind = "nonnegative"
            object.__setattr__(self, "score_set", ScoreSet(kind, self.K))
        elif not isinstance(self.score_set, ScoreSet):
            raise SpecError("score_set", "must be a ScoreSet")
        if self.score_set.K != self.K:
            raise SpecError("score_set", "score set dimension differs from K")
        if self.score_set.kind not in ALLOWED_SCORE_SETS[self.family]:
            raise SpecError("score_set", f"{self.family} is defined on {sorted(ALLOWED_SCORE_SETS[self.family])}, "
                                         f"not {self.score_set.kind}")

    # -- derived parameters ---------------------------------------------------
    @property
    def liu_offset(self) -> float:
        return float(self.K - 2) if self.offset is None else float(self.offset)

    @property
    def default_adjustment(self) -> int:
        if self.family == "Zhang" and self.F_kind != "none":
            return ADJ_F_SUM_PHI
        if self.family in ("LLW", "RRKA"):
            return ADJ_SUM_PHI
        return ADJ_NONE

    @property
    def convex(self) -> bool:
        if self.family == "LR" or self.family == "Liu":
            return True
        return self.phi is not None and self.phi.convex

    def with_K(self, K: int) -> "LossSpec":
        return replace(self, K=K, score_set=self.score_set.with_K(K))

    def describe(self) -> str:
        parts = [self.family]
        if self.phi is not None:
            parts.append(self.phi.kind + (f"(tau={self.phi.tau:g})" if self.phi.kind == "kink" else ""))
        if self.psi_kind:
            parts.append(f"psi={self.psi_kind}" + (f"(a={self.psi_a:g})" if self.psi_kind == "neg-power" else ""))
        if self.F_kind != "none":
            parts.append(f"F={self.F_kind}")
        parts.append(f"K={self.K}")
        return " ".join(parts)

    # -- kernels --------------------------------------------------------------
    def kernel(self, weights, adjustment=None, kernels=None):
        """Risk kernel for ``sum_k w_k L(s,k) + (1 - sum w) l(s)``.

        ``adjustment`` is None (the family default), ``"none"``, ``"LLW"`` or
        ``"Zhang"``.  Callable adjustments are handled by :func:`pseudo_risk`.
        """
        w = np.asarray(weights, dtype=float)
        if w.shape != (self.K,):
            raise DomainError(f"weight vector must have length {self.K}")
        if np.any(w < 0):
            raise DomainError("weights must be nonnegative")
        adj = _adjustment_code(self, adjustment)
        lcoef = 1.0 - float(w.sum())
        if abs(lcoef) <= 1e-15:
            lcoef = 0.0
        phi = self.phi or TransformationFunctionSpec("hinge")
        mod = kernels or backend.kernels
        return mod.RiskKernel(
            FAMILY_CODE[self.family], self.K, phi.code, phi.tau, phi.a, phi.b,
            PSI_CODE.get(self.psi_kind or "neg-linear", 0), float(self.psi_a),
            F_CODE[self.F_kind], self.liu_offset, w, adj, lcoef,
        )

    def eval(self, s, y: int) -> float:
        return eval_loss(self, s, y)

    def risk(self, s, p) -> float:
        return pointwise_risk(self, s, p)

    # -- serialisation --------------------------------------------------------
    def to_dict(self) -> dict:
        d = {"family": self.family, "K": self.K, "score_set": self.score_set.kind, "F_kind": self.F_kind}
        if self.phi is not None:
            d.update({"phi.kind": self.phi.kind, "phi.tau": self.phi.tau, "phi.a": self.phi.a, "phi.b": self.phi.b})
        if self.psi_kind is not None:
            d.update({"psi_kind": self.psi_kind, "psi.a": self.psi_a})
        if self.offset is not None:
            d["offset"] = self.offset
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict) -> "LossSpec":
        if not isinstance(d, dict):
            raise SpecError("<root>", "loss description must be a JSON object")
        known = {"family", "K", "score_set", "F_kind", "phi.kind", "phi.tau", "phi.a", "phi.b",
                 "psi_kind", "psi.a", "offset"}
        for key in d:
            if key not in known:
                raise SpecError(key, "unknown field")
        if "family" not in d:
            raise SpecError("family", "missing")
        if "K" not in d:
            raise SpecError("K", "missing")
        K = _field(d, "K", int)
        phi = None
        if "phi.kind" in d:
            phi = TransformationFunctionSpec(
                _field(d, "phi.kind", str),
                tau=_field(d, "phi.tau", float, 0.0),
                a=_field(d, "phi.a", float, 2.0),
                b=_field(d, "phi.b", float, 1.0),
            )
        score_set = None
        if "score_set" in d:
            score_set = ScoreSet(_field(d, "score_set", str), K)
        return cls(
            family=_field(d, "family", str),
            K=K,
            phi=phi,
            psi_kind=d.get("psi_kind"),
            psi_a=_field(d, "psi.a", float, 1.0),
            F_kind=_field(d, "F_kind", str, "none"),
            score_set=score_set,
            offset=_field(d, "offset", float, None),
        )

    @classmethod
    def from_json(cls, text: str) -> "LossSpec":
        try:
            d = json.loads(text)
        except json.JSONDecodeError as exc:
            raise SpecError("<root>", f"not valid JSON ({exc.msg})") from None
        return cls.from_dict(d)


def _field(d, key, typ, default=...):
    if key not in d:
        if default is ...:
            raise SpecError(key, "missing")
        return default
    v = d[key]
    if v is None and default is None:
        return None
    try:
        if typ is int:
            if isinstance(v, bool) or (isinstance(v, float) and not v.is_integer()):
                raise ValueError
            return int(v)
        if typ is float:
            if isinstance(v, bool):
                raise ValueError
            return float(v)
        if typ is str and not isinstance(v, str):
            raise ValueError
        return typ(v)
    except (TypeError, ValueError):
        raise SpecError(key, f"expected {typ.__name__}, got {v!r}") from None


def _adjustment_code(loss: LossSpec, adjustment) -> int:
    if adjustment is None or adjustment == "default":
        return loss.default_adjustment
    if adjustment == "none" or adjustment == 0:
        return ADJ_NONE
    if adjustment == "LLW":
        return ADJ_SUM_PHI
    if adjustment == "Zhang":
        if loss.F_kind == "none":
            raise DomainError("the Zhang adjustment needs an outer function F")
        return ADJ_F_SUM_PHI
    raise DomainError(f"unknown adjustment {adjustment!r}")


# convenience constructors

def llw(phi: str, K: int, tau: float = 0.0) -> LossSpec:
    return LossSpec("LLW", K, phi=TransformationFunctionSpec(phi, tau=tau))


def zzh(phi: str, K: int, tau: float = 0.0) -> LossSpec:
    return LossSpec("ZZH", K, phi=TransformationFunctionSpec(phi, tau=tau))


def rrka(phi: str, K: int) -> LossSpec:
    return LossSpec("RRKA", K, phi=TransformationFunctionSpec(phi))


def logistic_regression(K: int) -> LossSpec:
    return LossSpec("LR", K)


def zhang(psi: str, phi: TransformationFunctionSpec | str, K: int, F: str = "identity",
          psi_a: float = 1.0) -> LossSpec:
    if isinstance(phi, str):
        phi = TransformationFunctionSpec(phi)
    return LossSpec("Zhang", K, phi=phi, psi_kind=psi, psi_a=psi_a, F_kind=F)


# ---------------------------------------------------------------------------
# risks


def check_distribution(p, K: int | None = None, tol: float = PROB_TOL) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.ndim != 1 or (K is not None and p.shape[0] != K):
        raise DomainError(f"distribution must be a vector of length {K}")
    if np.any(p < 0):
        raise DomainError("distribution has a negative entry")
    if abs(p.sum() - 1.0) > tol:
        raise DomainError(f"distribution must sum to 1 (sum = {p.sum():.15g})")
    return p


def eval_loss(loss: LossSpec, s, y: int) -> float:
    s = loss.score_set.check(s)
    if not 0 <= y < loss.K:
        raise DomainError(f"class index {y} outside 0..{loss.K - 1}")
    w = np.zeros(loss.K)
    w[y] = 1.0
    return loss.kernel(w, adjustment="none")(s)


def pointwise_risk(loss: LossSpec, s, p) -> float:
    s = loss.score_set.check(s)
    p = check_distribution(p, loss.K, tol=1e-9)
    return loss.kernel(p, adjustment="none")(s)


def pseudo_risk(loss: LossSpec, adjustment, s, p, check_scores: bool = True) -> float:
    """``l(s) + sum_k p_k (L(s,k) - l(s))`` for a nonnegative weight vector.

    ``adjustment`` is a named adjustment (see :meth:`LossSpec.kernel`) or a
    callable ``l``.  ``check_scores=False`` evaluates the formula outside the
    score set, which the binary reductions need.
    """
    s = loss.score_set.check(s) if check_scores else np.asarray(s, dtype=float)
    p = np.asarray(p, dtype=float)
    if np.any(p < 0):
        raise DomainError("pseudo-risk weights must be nonnegative")
    if callable(adjustment):
        base = loss.kernel(p, adjustment="none")(s)
        return base + (1.0 - p.sum()) * float(adjustment(s))
    return loss.kernel(p, adjustment=adjustment)(s)


def adjustment_value(loss: LossSpec, adjustment, s) -> float:
    """The adjustment l(s) itself."""
    s = np.asarray(s, dtype=float)
    if callable(adjustment):
        return float(adjustment(s))
    zero = np.zeros(loss.K)
    return loss.kernel(zero, adjustment=adjustment)(s)


# ---------------------------------------------------------------------------
# maximum selector and index sets


def max_selector(s, tol: float = TIE_TOL) -> frozenset:
    s = np.asarray(s, dtype=float)
    top = s.max()
    return frozenset(int(k) for k in np.flatnonzero(s >= top - tol))


def worst_selection(s, p, tol: float = TIE_TOL) -> int:
    """The tied maximiser of s with the smallest probability (then smallest index)."""
    p = np.asarray(p, dtype=float)
    return min(max_selector(s, tol), key=lambda k: (p[k], k))


def suboptimal_classes(p, eps: float, tol: float = TIE_TOL) -> list[int]:
    """Classes whose probability is at least eps below the maximum."""
    p = np.asarray(p, dtype=float)
    top = p.max()
    return [int(j) for j in range(p.shape[0]) if top - p[j] >= eps - tol]


def j_eps(p, eps: float, tol: float = TIE_TOL) -> int | None:
    """Most likely eps-suboptimal class (smallest index on ties), or None."""
    p = np.asarray(p, dtype=float)
    cands = suboptimal_classes(p, eps, tol)
    if not cands:
        return None
    best = max(p[j] for j in cands)
    return min(j for j in cands if p[j] >= best - tol)


@dataclass(frozen=True)
class IndexSets:
    """The eps-suboptimality structure for one distribution."""

    p: np.ndarray = field(repr=False)
    eps: float
    j_eps: int | None
    suboptimal: tuple

    def in_M(self, s, j: int) -> bool:
        s = np.asarray(s, dtype=float)
        return bool(s[j] >= s.max() - TIE_TOL)

    def in_T(self, s) -> bool:
        return worst_selection(s, self.p) in self.suboptimal


def index_sets(score_set: ScoreSet, eps: float, p) -> IndexSets:
    if not 0.0 <= eps <= 1.0:
        raise DomainError("eps must lie in [0, 1]")
    p = check_distribution(p, score_set.K, tol=1e-9)
    return IndexSets(p, float(eps), j_eps(p, eps), tuple(suboptimal_classes(p, eps)))


def binary_worst_case(eps: float) -> np.ndarray:
    """The two-class distribution ((1+eps)/2, (1-eps)/2)."""
    return np.array([(1.0 + eps) / 2.0, (1.0 - eps) / 2.0])


def permutation_risks(loss: LossSpec, s, p, perm: Sequence[int]) -> tuple[float, float]:
    """Risk at (s, p) and at the jointly permuted (Ps, Pp)."""
    perm = list(perm)
    s = np.asarray(s, dtype=float)
    p = np.asarray(p, dtype=float)
    return pointwise_risk(loss, s, p), pointwise_risk(loss, s[perm], p[perm])


def psi_callable(loss: LossSpec) -> Callable[[float], float]:
    """The psi of a Zhang loss as a scalar function."""
    if loss.family != "Zhang":
        raise DomainError("psi is only defined for the Zhang family")
    phi = loss.phi
    code = PSI_CODE[loss.psi_kind]
    return lambda t: psi_value(code, loss.psi_a, phi.code, phi.tau, phi.a, phi.b, float(t))


def all_losses_iter(K: int, phis: Iterable[str] = ("hinge", "squared")):
    """Every built-in family at class count K, for sweeps and property tests."""
    for name in phis:
        phi = TransformationFunctionSpec(name)
        yield LossSpec("WW", K, phi=phi)
        yield LossSpec("CS", K, phi=phi)
        yield LossSpec("LLW", K, phi=phi)
        yield LossSpec("Zhang", K, phi=phi, psi_kind="neg-phi", F_kind="identity")
        yield LossSpec("RRKA", K, phi=phi)
        yield LossSpec("ZZH", K, phi=phi)
        yield LossSpec("BSKV", K, phi=phi, F_kind="identity")
    yield LossSpec("Liu", K)
    yield LossSpec("LR", K)
