"""Two-sample and goodness-of-fit statistics used by the convergence lab."""
from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .rng import RngLike, as_generator

Z_GRID = (-2.0, -1.0, -0.5, -0.25, 0.25, 0.5, 1.0, 2.0)
N_PERMUTATIONS = 500


def break_ties(x: np.ndarray, spacing: Optional[float], rng: RngLike) -> np.ndarray:
    """Spread lattice-valued data uniformly over one lattice cell so KS sees a continuous law."""
    if not spacing:
        return np.asarray(x, dtype=float)
    gen = as_generator(rng)
    return np.asarray(x, dtype=float) + spacing * (gen.uniform(size=np.shape(x)) - 0.5)


def ks_one_sample(x, cdf: Callable, spacing: Optional[float] = None, rng: RngLike = 0):
    res = stats.kstest(break_ties(x, spacing, rng), cdf)
    return float(res.statistic), float(res.pvalue)


def ks_two_sample(x, y, spacing_x: Optional[float] = None, spacing_y: Optional[float] = None, rng: RngLike = 0):
    gen = as_generator(rng)
    res = stats.ks_2samp(break_ties(x, spacing_x, gen), break_ties(y, spacing_y, gen))
    return float(res.statistic), float(res.pvalue)


def _pairwise_rowsums(pooled: np.ndarray, labels: np.ndarray, block: int = 1024):
    """``D @ labels`` for the Euclidean distance matrix ``D`` of ``pooled`` without storing ``D``."""
    n = len(pooled)
    out = np.zeros((n, labels.shape[1]))
    sq = np.sum(pooled**2, axis=1)
    for s in range(0, n, block):
        e = min(n, s + block)
        d2 = sq[s:e, None] + sq[None, :] - 2.0 * pooled[s:e] @ pooled.T
        out[s:e] = np.sqrt(np.clip(d2, 0.0, None)) @ labels
    return out


def energy_test(x, y, n_perm: int = N_PERMUTATIONS, rng: RngLike = 0):
    """Energy distance between two multivariate samples with a permutation p-value."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[0] == 1 and x.shape[1] > 1 and y.shape[0] == 1:
        x, y = x.T, y.T
    n, m = len(x), len(y)
    pooled = np.vstack([x, y])
    # scale coordinates so no single one dominates the distance
    sd = pooled.std(axis=0)
    pooled = pooled / np.where(sd > 0, sd, 1.0)
    gen = as_generator(rng)
    labels = np.zeros((n + m, n_perm + 2))
    labels[:n, 0] = 1.0
    for k in range(1, n_perm + 1):
        labels[gen.permutation(n + m)[:n], k] = 1.0
    labels[:, -1] = 1.0
    dl = _pairwise_rowsums(pooled, labels)
    total = float(labels[:, -1] @ dl[:, -1])
    a = labels[:, :-1]
    s_xx = np.einsum("ij,ij->j", a, dl[:, :-1])
    row_x = dl[:, -1] @ a  # 1^T D a
    s_xy = row_x - s_xx
    s_yy = total - 2.0 * row_x + s_xx
    energy = 2.0 * s_xy / (n * m) - s_xx / n**2 - s_yy / m**2
    obs = float(energy[0])
    p = (1.0 + np.sum(energy[1:] >= obs - 1e-12 * abs(obs))) / (1.0 + n_perm)
    return obs, float(p)


def empirical_cf(x, z) -> np.ndarray:
    return np.exp(1j * np.outer(z, x)).mean(axis=1)


def cf_sup_gap(x, y=None, ref_cf: Optional[Callable] = None, z_grid=Z_GRID) -> float:
    """Max over ``z_grid`` and over coordinates plus their unit-weight sum of ``|phi_x - phi_ref|``."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    z = np.asarray(z_grid)
    funcs = [np.eye(x.shape[1])[j] for j in range(x.shape[1])] + [np.ones(x.shape[1])]
    gap = 0.0
    for w in funcs:
        lhs = empirical_cf(x @ w, z)
        rhs = empirical_cf(np.atleast_2d(y) @ w, z) if y is not None else ref_cf(w, z)
        gap = max(gap, float(np.max(np.abs(lhs - rhs))))
    return gap


def gaussian_cf(mean, cov):
    mean = np.asarray(mean, dtype=float)
    cov = np.asarray(cov, dtype=float)

    def cf(w, z):
        return np.exp(1j * z * (w @ mean) - 0.5 * z**2 * (w @ cov @ w))

    return cf


def standard_error_cov(x: np.ndarray, i: int, j: int) -> float:
    """Standard error of the sample covariance between columns ``i`` and ``j``."""
    a = x[:, i] - x[:, i].mean()
    b = x[:, j] - x[:, j].mean()
    return float(np.std(a * b, ddof=1) / math.sqrt(len(x)))
