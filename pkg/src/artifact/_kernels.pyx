# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled risk kernels; mirrors ``_pykernels.py``."""

from libc.math cimport exp, log, log1p, fabs, pow, INFINITY, isnan
from libc.stdlib cimport malloc, free

import numpy as np

cdef double GOLDEN = 0.3819660112501051
cdef double EXPAND = 1.618033988749895


cdef inline double _phi(int kind, double tau, double a, double b, double t) nogil:
    cdef double v, e, u
    if kind == 0:
        return 1.0 if t >= 0.0 else 0.0
    elif kind == 1:
        return t
    elif kind == 2:
        return 1.0 + t
    elif kind == 3:
        return 1.0 + t if t > -1.0 else 0.0
    elif kind == 4:
        return fabs(1.0 + t)
    elif kind == 5:
        return (1.0 + t) * (1.0 + t)
    elif kind == 6:
        return (1.0 + t) * (1.0 + t) if t > -1.0 else 0.0
    elif kind == 7:
        return exp(t) if t < 700.0 else INFINITY
    elif kind == 8:
        if t > 0.0:
            return t + log1p(exp(-t))
        return log1p(exp(t))
    elif kind == 9:
        if t >= 0.0:
            return 1.0 / (1.0 + exp(-t))
        e = exp(t)
        return e / (1.0 + e)
    elif kind == 10:
        v = 1.0 + t if t > -1.0 else 0.0
        return v + (t - tau if t > tau else 0.0)
    elif kind == 11:
        return pow(fabs(t), a) / a
    elif kind == 12:
        return pow(t, a) / a if t > 0.0 else 0.0
    elif kind == 13:
        u = a * t + b
        return u * u
    return INFINITY


cdef inline double _psi(int kind, double psi_a, int phi_kind, double tau, double a, double b,
                        double t) nogil:
    if kind == 0:
        return -t
    elif kind == 1:
        return -log(t) if t > 0.0 else INFINITY
    elif kind == 2:
        return -pow(t, psi_a) / psi_a if t >= 0.0 else INFINITY
    elif kind == 3:
        return _phi(phi_kind, tau, a, b, -t)
    elif kind == 4:
        return -_phi(phi_kind, tau, a, b, t)
    return INFINITY


cdef inline double _outer(int kind, double x) nogil:
    if kind == 0:
        return 0.0
    elif kind == 1:
        return x
    if x > 0.0:
        return log(x)
    return -INFINITY


def phi_value(int kind, double tau, double a, double b, double t):
    return _phi(kind, tau, a, b, t)


cdef class RiskKernel:
    """Weighted risk ``sum_y w_y L(s, y) + lcoef * l(s)`` for one loss."""

    cdef public int family, K, phi_kind, psi_kind, F_kind, adj
    cdef public double tau, a, b, psi_a, offset, W, lcoef
    cdef double[::1] w
    cdef double* buf

    compiled = True

    def __cinit__(self, *args, **kwargs):
        self.buf = NULL

    def __init__(self, family, K, phi_kind, tau, a, b, psi_kind, psi_a, F_kind, offset,
                 weights, adj, lcoef):
        self.family = family
        self.K = K
        self.phi_kind = phi_kind
        self.tau = tau
        self.a = a
        self.b = b
        self.psi_kind = psi_kind
        self.psi_a = psi_a
        self.F_kind = F_kind
        self.offset = offset
        self.w = np.ascontiguousarray(weights, dtype=np.float64)
        if self.w.shape[0] != K:
            raise ValueError("weights must have length K")
        self.W = 0.0
        for k in range(K):
            self.W += self.w[k]
        self.adj = adj
        self.lcoef = lcoef
        if self.buf != NULL:
            free(self.buf)
        self.buf = <double*> malloc(K * sizeof(double))

    def __dealloc__(self):
        if self.buf != NULL:
            free(self.buf)

    cdef double _sum_phi_log(self, double* s) nogil:
        cdef int k
        cdef double m, acc = 0.0
        if self.F_kind == 2 and self.phi_kind == 7:
            m = s[0]
            for k in range(1, self.K):
                if s[k] > m:
                    m = s[k]
            for k in range(self.K):
                acc += exp(s[k] - m)
            return m + log(acc)
        for k in range(self.K):
            acc += _phi(self.phi_kind, self.tau, self.a, self.b, s[k])
        return _outer(self.F_kind, acc)

    cdef double evaluate(self, double* s) nogil:
        cdef int K = self.K
        cdef int y, k
        cdef int fam = self.family
        cdef int pk = self.phi_kind
        cdef double tau = self.tau, a = self.a, b = self.b
        cdef double total = 0.0, acc, v, c
        if fam == 0:
            for y in range(K):
                if self.w[y] != 0.0:
                    acc = 0.0
                    for k in range(K):
                        if k != y:
                            acc += _phi(pk, tau, a, b, s[k] - s[y])
                    total += self.w[y] * acc
        elif fam == 1:
            for y in range(K):
                if self.w[y] != 0.0:
                    acc = -INFINITY
                    for k in range(K):
                        if k != y:
                            v = _phi(pk, tau, a, b, s[k] - s[y])
                            if v > acc:
                                acc = v
                    total += self.w[y] * acc
        elif fam == 2:
            for k in range(K):
                c = self.W - self.w[k]
                if c != 0.0:
                    total += c * _phi(pk, tau, a, b, s[k])
        elif fam == 3:
            for y in range(K):
                if self.w[y] != 0.0:
                    total += self.w[y] * _psi(self.psi_kind, self.psi_a, pk, tau, a, b, s[y])
            if self.W != 0.0 and self.F_kind != 0:
                total += self.W * self._sum_phi_log(s)
        elif fam == 4:
            for k in range(K):
                if self.w[k] != 0.0:
                    total += self.w[k] * _phi(pk, tau, a, b, -s[k])
                c = self.W - self.w[k]
                if c != 0.0:
                    total += c * _phi(pk, tau, a, b, s[k])
        elif fam == 5:
            for y in range(K):
                if self.w[y] != 0.0:
                    total += self.w[y] * _phi(pk, tau, a, b, -s[y])
        elif fam == 6:
            for y in range(K):
                if self.w[y] != 0.0:
                    v = self.offset - s[y]
                    if v > 0.0:
                        total += self.w[y] * v
        elif fam == 7:
            for y in range(K):
                if self.w[y] != 0.0:
                    acc = 0.0
                    for k in range(K):
                        if k != y:
                            acc += _phi(pk, tau, a, b, s[k] - s[y])
                    total += self.w[y] * _outer(self.F_kind, acc)
        elif fam == 8:
            for y in range(K):
                if self.w[y] != 0.0:
                    if s[y] <= 0.0:
                        return INFINITY
                    total -= self.w[y] * log(s[y])
        else:
            return INFINITY
        if self.lcoef != 0.0 and self.adj != 0:
            if self.adj == 1:
                acc = 0.0
                for k in range(K):
                    acc += _phi(pk, tau, a, b, s[k])
                total += self.lcoef * acc
            elif self.adj == 2:
                total += self.lcoef * self._sum_phi_log(s)
        if isnan(total):
            return INFINITY
        return total

    def __call__(self, s):
        cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
        if sv.shape[0] != self.K:
            raise ValueError("score vector must have length K")
        return self.evaluate(&sv[0])

    cdef double _along(self, double* base, double* d, double t) nogil:
        cdef int k
        for k in range(self.K):
            self.buf[k] = base[k] + t * d[k]
        return self.evaluate(self.buf)

    def line_search(self, s, d, double lo, double hi, double step, double xtol):
        cdef double[::1] sv = np.ascontiguousarray(s, dtype=np.float64)
        cdef double[::1] dv = np.ascontiguousarray(d, dtype=np.float64)
        cdef double* base = &sv[0]
        cdef double* dd = &dv[0]
        cdef int n = 0, max_evals = 500
        cdef double f0, best_t, best_f, left, right, sign, bound, t1, f1, a, b, fb, c, fc
        cdef double x1, x2, f2
        cdef int side
        cdef bint bracketed
        f0 = self._along(base, dd, 0.0)
        best_t = 0.0
        best_f = f0
        left = lo if lo > -step else -step
        right = hi if hi < step else step
        for side in range(2):
            if side == 0:
                sign = 1.0
                bound = hi
            else:
                sign = -1.0
                bound = lo
            if sign * bound <= 0.0:
                continue
            t1 = sign * (step if step < sign * bound else sign * bound)
            f1 = self._along(base, dd, t1)
            n += 1
            if not f1 < f0:
                continue
            a = 0.0
            b = t1
            fb = f1
            while True:
                if b == bound:
                    c = b
                    break
                c = b + EXPAND * (b - a)
                if sign * c > sign * bound:
                    c = bound
                fc = self._along(base, dd, c)
                n += 1
                if fc >= fb or n >= max_evals:
                    break
                a = b
                b = c
                fb = fc
            best_t = b
            best_f = fb
            if sign > 0:
                left = a
                right = c
            else:
                left = c
                right = a
            break
        x1 = left + GOLDEN * (right - left)
        x2 = right - GOLDEN * (right - left)
        f1 = self._along(base, dd, x1)
        f2 = self._along(base, dd, x2)
        n += 2
        while right - left > xtol and n < max_evals:
            if f1 < f2:
                right = x2
                x2 = x1
                f2 = f1
                x1 = left + GOLDEN * (right - left)
                f1 = self._along(base, dd, x1)
            else:
                left = x1
                x1 = x2
                f1 = f2
                x2 = right - GOLDEN * (right - left)
                f2 = self._along(base, dd, x2)
            n += 1
        if f1 < best_f:
            best_t = x1
            best_f = f1
        if f2 < best_f:
            best_t = x2
            best_f = f2
        return best_t, best_f, n
