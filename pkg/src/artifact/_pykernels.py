"""Pure-Python risk kernels.

Reference implementation of the hot loops: transformation functions, the
weighted surrogate risk of every loss family and a bracketing golden-section
line search.  ``_kernels.pyx`` mirrors this file line by line; the package
falls back to this module when the extension is not built.
"""

from __future__ import annotations

import math

from ._codes import ADJ_F_SUM_PHI, ADJ_NONE, ADJ_SUM_PHI

INF = math.inf
GOLDEN = 0.3819660112501051  # 2 - golden ratio
EXPAND = 1.618033988749895


def phi_value(kind: int, tau: float, a: float, b: float, t: float) -> float:
    if kind == 0:  # zero-one
        return 1.0 if t >= 0.0 else 0.0
    if kind == 1:  # identity
        return t
    if kind == 2:  # linear
        return 1.0 + t
    if kind == 3:  # hinge
        return 1.0 + t if t > -1.0 else 0.0
    if kind == 4:  # modulus
        return abs(1.0 + t)
    if kind == 5:  # squared
        return (1.0 + t) * (1.0 + t)
    if kind == 6:  # truncated-square
        return (1.0 + t) * (1.0 + t) if t > -1.0 else 0.0
    if kind == 7:  # exponential
        return math.exp(t) if t < 700.0 else INF
    if kind == 8:  # logistic
        if t > 0.0:
            return t + math.log1p(math.exp(-t))
        return math.log1p(math.exp(t))
    if kind == 9:  # sigmoid
        if t >= 0.0:
            return 1.0 / (1.0 + math.exp(-t))
        e = math.exp(t)
        return e / (1.0 + e)
    if kind == 10:  # kink
        v = 1.0 + t if t > -1.0 else 0.0
        return v + (t - tau if t > tau else 0.0)
    if kind == 11:  # power
        return abs(t) ** a / a
    if kind == 12:  # power-plus
        return t ** a / a if t > 0.0 else 0.0
    if kind == 13:  # affine-squared
        u = a * t + b
        return u * u
    raise ValueError(f"unknown transformation code {kind}")


def psi_value(kind: int, psi_a: float, phi_kind: int, tau: float, a: float, b: float, t: float) -> float:
    if kind == 0:  # -t
        return -t
    if kind == 1:  # -ln t
        return -math.log(t) if t > 0.0 else INF
    if kind == 2:  # -t^a / a
        return -(t ** psi_a) / psi_a if t >= 0.0 else INF
    if kind == 3:  # phi(-t)
        return phi_value(phi_kind, tau, a, b, -t)
    if kind == 4:  # -phi(t)
        return -phi_value(phi_kind, tau, a, b, t)
    raise ValueError(f"unknown psi code {kind}")


def outer_value(kind: int, x: float) -> float:
    if kind == 0:
        return 0.0
    if kind == 1:
        return x
    if kind == 2:
        if x > 0.0:
            return math.log(x)
        return -INF
    raise ValueError(f"unknown F code {kind}")


class RiskKernel:
    """Weighted risk ``sum_y w_y L(s, y) + lcoef * l(s)`` for one loss."""

    compiled = False

    def __init__(self, family, K, phi_kind, tau, a, b, psi_kind, psi_a, F_kind, offset,
                 weights, adj, lcoef):
        self.family = int(family)
        self.K = int(K)
        self.phi_kind = int(phi_kind)
        self.tau = float(tau)
        self.a = float(a)
        self.b = float(b)
        self.psi_kind = int(psi_kind)
        self.psi_a = float(psi_a)
        self.F_kind = int(F_kind)
        self.offset = float(offset)
        self.w = [float(x) for x in weights]
        if len(self.w) != self.K:
            raise ValueError("weights must have length K")
        self.W = sum(self.w)
        self.adj = int(adj)
        self.lcoef = float(lcoef)

    def _phi(self, t):
        return phi_value(self.phi_kind, self.tau, self.a, self.b, t)

    def _sum_phi_log(self, s):
        # F(sum phi(s_k)), with a stable log-sum-exp for F = log and exponential phi
        if self.F_kind == 2 and self.phi_kind == 7:
            m = max(s)
            return m + math.log(sum(math.exp(x - m) for x in s))
        return outer_value(self.F_kind, sum(self._phi(x) for x in s))

    def evaluate(self, s) -> float:
        K = self.K
        w = self.w
        fam = self.family
        phi = self._phi
        total = 0.0
        if fam == 0:  # WW
            for y in range(K):
                if w[y] != 0.0:
                    acc = 0.0
                    for k in range(K):
                        if k != y:
                            acc += phi(s[k] - s[y])
                    total += w[y] * acc
        elif fam == 1:  # CS
            for y in range(K):
                if w[y] != 0.0:
                    acc = -INF
                    for k in range(K):
                        if k != y:
                            v = phi(s[k] - s[y])
                            if v > acc:
                                acc = v
                    total += w[y] * acc
        elif fam == 2:  # LLW
            for k in range(K):
                c = self.W - w[k]
                if c != 0.0:
                    total += c * phi(s[k])
        elif fam == 3:  # Zhang
            for y in range(K):
                if w[y] != 0.0:
                    total += w[y] * psi_value(self.psi_kind, self.psi_a, self.phi_kind,
                                              self.tau, self.a, self.b, s[y])
            if self.W != 0.0 and self.F_kind != 0:
                total += self.W * self._sum_phi_log(s)
        elif fam == 4:  # RRKA, one-versus-all
            for k in range(K):
                if w[k] != 0.0:
                    total += w[k] * phi(-s[k])
                c = self.W - w[k]
                if c != 0.0:
                    total += c * phi(s[k])
        elif fam == 5:  # ZZH
            for y in range(K):
                if w[y] != 0.0:
                    total += w[y] * phi(-s[y])
        elif fam == 6:  # Liu
            for y in range(K):
                if w[y] != 0.0:
                    v = self.offset - s[y]
                    if v > 0.0:
                        total += w[y] * v
        elif fam == 7:  # BSKV
            for y in range(K):
                if w[y] != 0.0:
                    acc = 0.0
                    for k in range(K):
                        if k != y:
                            acc += phi(s[k] - s[y])
                    total += w[y] * outer_value(self.F_kind, acc)
        elif fam == 8:  # LR
            for y in range(K):
                if w[y] != 0.0:
                    if s[y] <= 0.0:
                        return INF
                    total -= w[y] * math.log(s[y])
        else:
            raise ValueError(f"unknown family code {fam}")
        if self.lcoef != 0.0 and self.adj != ADJ_NONE:
            if self.adj == ADJ_SUM_PHI:
                total += self.lcoef * sum(phi(x) for x in s)
            elif self.adj == ADJ_F_SUM_PHI:
                total += self.lcoef * self._sum_phi_log(s)
        if total != total:
            return INF
        return total

    def __call__(self, s) -> float:
        return self.evaluate([float(x) for x in s])

    def line_search(self, s, d, lo, hi, step, xtol):
        base = [float(x) for x in s]
        direction = [float(x) for x in d]
        K = self.K

        def g(t):
            return self.evaluate([base[k] + t * direction[k] for k in range(K)])

        return line_search(g, g(0.0), lo, hi, step, xtol)


def line_search(g, f0, lo, hi, step, xtol, max_evals=500):
    """Minimise a convex ``g`` over ``[lo, hi]`` with ``lo <= 0 <= hi``.

    Expands a bracket from 0 by golden-ratio steps, then shrinks it by golden
    section.  Returns ``(t, g(t), evaluations)``; ``t = 0`` unless strictly
    better.
    """
    n = 0
    best_t, best_f = 0.0, f0
    left, right = max(lo, -step), min(hi, step)
    for sign, bound in ((1.0, hi), (-1.0, lo)):
        if sign * bound <= 0.0:
            continue
        t1 = sign * min(step, sign * bound)
        f1 = g(t1)
        n += 1
        if not f1 < f0:
            continue
        a, b, fb = 0.0, t1, f1
        while True:
            if b == bound:
                # still decreasing at the bound: the minimiser lies in (a, bound]
                c = b
                break
            c = b + EXPAND * (b - a)
            if sign * c > sign * bound:
                c = bound
            fc = g(c)
            n += 1
            if fc >= fb or n >= max_evals:
                break
            a, b, fb = b, c, fc
        best_t, best_f = b, fb
        left, right = (a, c) if sign > 0 else (c, a)
        break
    x1 = left + GOLDEN * (right - left)
    x2 = right - GOLDEN * (right - left)
    f1 = g(x1)
    f2 = g(x2)
    n += 2
    while right - left > xtol and n < max_evals:
        if f1 < f2:
            right, x2, f2 = x2, x1, f1
            x1 = left + GOLDEN * (right - left)
            f1 = g(x1)
        else:
            left, x1, f1 = x1, x2, f2
            x2 = right - GOLDEN * (right - left)
            f2 = g(x2)
        n += 1
    if f1 < best_f:
        best_t, best_f = x1, f1
    if f2 < best_f:
        best_t, best_f = x2, f2
    return best_t, best_f, n
