"""Independent brute-force oracles.

Loss formulas are re-derived here with plain numpy on whole grids of score
vectors; nothing is shared with the package's kernels or optimizer.
"""

from __future__ import annotations

import numpy as np

PHI = {
    "hinge": lambda t: np.maximum(1 + t, 0.0),
    "squared": lambda t: (1 + t) ** 2,
    "exponential": np.exp,
    "logistic": lambda t: np.logaddexp(0.0, t),
    "modulus": lambda t: np.abs(1 + t),
    "truncated-square": lambda t: np.maximum(1 + t, 0.0) ** 2,
    "zero-one": lambda t: (t >= 0).astype(float),
    "sigmoid": lambda t: 1 / (1 + np.exp(-t)),
    "kink0.5": lambda t: np.maximum(1 + t, 0.0) + np.maximum(t - 0.5, 0.0),
}


def loss_matrix(family: str, phi: str, S: np.ndarray) -> np.ndarray:
    """L[n, y] for score rows S[n]."""
    f = PHI.get(phi)
    N, K = S.shape
    out = np.empty((N, K))
    for y in range(K):
        others = [k for k in range(K) if k != y]
        if family == "WW":
            out[:, y] = sum(f(S[:, k] - S[:, y]) for k in others)
        elif family == "CS":
            out[:, y] = np.max(np.stack([f(S[:, k] - S[:, y]) for k in others]), axis=0)
        elif family == "LLW":
            out[:, y] = sum(f(S[:, k]) for k in others)
        elif family == "RRKA":
            out[:, y] = f(-S[:, y]) + sum(f(S[:, k]) for k in others)
        elif family == "ZZH":
            out[:, y] = f(-S[:, y])
        elif family == "Zhang-neglin":
            out[:, y] = -S[:, y] + sum(f(S[:, k]) for k in range(K))
        else:
            raise KeyError(family)
    return out


def risk(family: str, phi: str, S: np.ndarray, p) -> np.ndarray:
    return loss_matrix(family, phi, S) @ np.asarray(p, dtype=float)


def s0_grid(K: int, radius: float, step: float) -> np.ndarray:
    """Sum-to-zero vectors with the first K-1 coordinates on a lattice."""
    axis = np.arange(-radius, radius + step / 2, step)
    mesh = np.meshgrid(*([axis] * (K - 1)), indexing="ij")
    free = np.stack([m.ravel() for m in mesh], axis=1)
    last = -free.sum(axis=1, keepdims=True)
    S = np.hstack([free, last])
    return S[np.abs(last[:, 0]) <= radius + 1e-12]


def full_grid(K: int, radius: float, step: float) -> np.ndarray:
    axis = np.arange(-radius, radius + step / 2, step)
    mesh = np.meshgrid(*([axis] * K), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def worst_pick(S: np.ndarray, p, tol: float = 1e-9) -> np.ndarray:
    """Index of the tied maximiser with the smallest probability, per row."""
    p = np.asarray(p, dtype=float)
    top = S.max(axis=1, keepdims=True)
    tied = S >= top - tol
    key = np.where(tied, p[None, :], np.inf)
    return np.argmin(key, axis=1)


def delta_max_grid(family: str, phi: str, eps: float, p, S: np.ndarray) -> float:
    """inf over eps-suboptimal scores minus inf over all scores, on a grid."""
    p = np.asarray(p, dtype=float)
    R = risk(family, phi, S, p)
    pick = worst_pick(S, p)
    bad = p.max() - p[pick] >= eps - 1e-9
    if not bad.any():
        return np.inf
    return float(R[bad].min() - R.min())


def delta_binary_grid(phi: str, eps: float, radius: float = 20.0, step: float = 1e-4) -> float:
    """Two-infimum form on a dense margin grid, tie t = 0 counted as wrong."""
    f = PHI[phi]
    t = np.arange(-radius, radius + step / 2, step)
    t = np.append(t, 0.0)
    p1, p2 = (1 + eps) / 2, (1 - eps) / 2
    r = p1 * f(-t) + p2 * f(t)
    return float(r[t <= 0].min() - r.min())
