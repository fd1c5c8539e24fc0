"""Samplers and closed-form moments for the limit processes.

Objects covered: the Gaussian process ``V_beta``, the stable subordinator
``W`` and its inverse, the conditionally Gaussian ``Z``, the fractional
integrals against spectrally negative stable motion and against the
inverse subordinator, and the finite- and infinite-mean mixtures.

Grid conventions: a subordinator path is a :class:`GridPath`; by default
it is read as the piecewise-linear interpolation of its grid values, so
the inverse is continuous and Stieltjes integrals against ``dW^<-`` can be
computed as time integrals along the path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .errors import NumericalError, OutOfRangeError, ParameterError
from .renewal import BLOCK_SIZE, inverse_mean_constant
from .responses import CovarianceModel
from .rng import StableSpec, StreamLike, RngLike, as_generator, as_stream, sample_positive_stable, sample_stable_increment
from .samples import FddSample

INTERPRETATIONS = ("linear", "cadlag-step")
LIMIT_CASES = ("V_beta", "Z", "frac_stable", "frac_inverse", "thm21_mix", "thm22_mix")
PSD_TOL = 1e-8
DEFAULT_STEPS = 2**12


@dataclass(frozen=True)
class GridPath:
    times: np.ndarray
    values: np.ndarray
    interpretation: str = "linear"

    def __post_init__(self):
        if self.interpretation not in INTERPRETATIONS:
            raise ParameterError(f"unknown interpretation {self.interpretation!r}")
        if len(self.times) != len(self.values) or len(self.times) < 2:
            raise ParameterError("a grid path needs at least two matching points")
        if np.any(np.diff(self.times) <= 0):
            raise ParameterError("grid times must be strictly increasing")
        if not np.all(np.isfinite(self.values)):
            raise NumericalError("path has non-finite values")


def _check_alpha_sub(alpha: float) -> None:
    if not 0.0 < alpha < 1.0:
        raise ParameterError(f"subordinator needs alpha in (0,1), got {alpha}")


def _increments(alpha: float, dt: float, n: int, gen) -> np.ndarray:
    return sample_stable_increment(StableSpec(alpha), dt, gen, n)


def simulate_subordinator(alpha: float, horizon: float, n_steps: int, stream: RngLike) -> GridPath:
    """Stable subordinator on ``n_steps`` equal cells of ``[0, horizon]``."""
    _check_alpha_sub(alpha)
    if n_steps < 1 or not horizon > 0:
        raise ParameterError("need n_steps >= 1 and a positive horizon")
    gen = as_generator(stream)
    dt = horizon / n_steps
    vals = np.concatenate([[0.0], np.cumsum(_increments(alpha, dt, n_steps, gen))])
    return GridPath(np.linspace(0.0, horizon, n_steps + 1), vals)


def simulate_subordinator_to_level(alpha: float, level: float, n_steps: int, stream: RngLike) -> GridPath:
    """Subordinator path extended until it exceeds ``level``.

    The step is ``T0 / n_steps`` with ``T0`` three times the mean passage
    time of ``level``; the path is extended by quarter chunks when needed.
    """
    _check_alpha_sub(alpha)
    if not level > 0:
        raise ParameterError("level must be positive")
    gen = as_generator(stream)
    dt = 3.0 * inverse_mean_constant(alpha) * level**alpha / n_steps
    parts = [np.zeros(1), np.cumsum(_increments(alpha, dt, n_steps, gen))]
    while parts[-1][-1] <= level:
        parts.append(parts[-1][-1] + np.cumsum(_increments(alpha, dt, n_steps // 4 + 1, gen)))
    vals = np.concatenate(parts)
    return GridPath(dt * np.arange(len(vals)), vals)


def invert_subordinator(path: GridPath, s_grid) -> np.ndarray:
    """``W^<-(s) = inf{t : W(t) > s}`` read off the grid path."""
    s = np.asarray(s_grid, dtype=float)
    if np.any(s < 0) or np.any(s >= path.values[-1]):
        raise OutOfRangeError(f"s must lie in [0, {path.values[-1]})")
    if path.interpretation == "cadlag-step":
        return path.times[np.searchsorted(path.values, s, side="right")]
    return np.interp(s, path.values, path.times)


def sample_inverse_marginal(alpha: float, y: float, stream: RngLike, size=None):
    """``y**alpha * W(1)**-alpha``, the one-dimensional law of ``W^<-(y)``."""
    _check_alpha_sub(alpha)
    if not y > 0:
        raise ParameterError("y must be positive")
    w1 = sample_positive_stable(alpha, as_generator(stream), size, "gamma_scaled")
    return y**alpha * w1 ** (-alpha)


def inverse_path_draws(alpha: float, s: float, reps: int, n_steps: int, stream: StreamLike) -> np.ndarray:
    """``W^<-(s)`` from ``reps`` independent simulated paths (one derived stream each)."""
    root = as_stream(stream)
    out = np.empty(reps)
    for r in range(reps):
        path = simulate_subordinator_to_level(alpha, s, n_steps, root.derive(r).generator())
        out[r] = invert_subordinator(path, s)
    return out


# -- Stieltjes integrals against dW^<- -------------------------------------

def _mean_power(a: np.ndarray, d: np.ndarray, rho: float) -> np.ndarray:
    """Average of ``x**rho`` for ``x`` running linearly from ``a - d`` to ``a`` (``0 <= d <= a``)."""
    if rho == 0:
        return np.ones_like(a)
    ratio = d / a
    with np.errstate(divide="ignore"):
        num = -np.expm1((rho + 1.0) * np.log1p(-ratio))
    out = a**rho * num / ((rho + 1.0) * np.where(ratio > 0, ratio, 1.0))
    return np.where(ratio > 0, out, a**rho)


def _cell_weights(path: GridPath, u: float, rho: float):
    """Per-cell ``int (u - W(t))**rho dt`` over times with ``W(t) < u``, plus the cell mid-levels."""
    v = path.values
    if u > v[-1]:
        raise OutOfRangeError(f"u={u} beyond the path range {v[-1]}")
    n = int(np.searchsorted(v, u, side="left"))
    lo = v[: n]
    hi = np.minimum(v[1 : n + 1], u)
    dt = np.diff(path.times[: n + 1])
    if path.interpretation == "cadlag-step":
        # step reading: W = lo on the whole cell
        return dt * np.power(u - lo, rho) if rho else dt.copy(), lo
    rise = v[1 : n + 1] - lo
    frac = np.where(rise > 0, (hi - lo) / np.where(rise > 0, rise, 1.0), 1.0)
    w = dt * frac * _mean_power(u - lo, hi - lo, rho)
    return w, 0.5 * (lo + hi)


def stieltjes_inverse(path: GridPath, u: float, rho: float = 0.0, smooth: Optional[Callable] = None) -> float:
    """``int_[0,u] (u-y)**rho smooth(y) dW^<-(y)`` along one path."""
    if rho <= -1:
        raise ParameterError("rho must exceed -1 for the cellwise integral")
    w, mid = _cell_weights(path, u, rho)
    if smooth is not None:
        w = w * smooth(mid)
    return float(w.sum())


def fractional_integral_inverse(alpha: float, rho: float, u_grid, path: GridPath) -> np.ndarray:
    """``Q(u) = int_[0,u] (u-y)**rho dW^<-(y)`` at each grid scale."""
    if rho < -alpha:
        raise ParameterError(f"Q needs rho >= -alpha, got rho={rho}, alpha={alpha}")
    return np.array([stieltjes_inverse(path, float(u), rho) for u in np.atleast_1d(u_grid)])


def conditional_Z_cov(path: GridPath, C: CovarianceModel, u_grid) -> np.ndarray:
    """``K_ij = int_[0, u_i ^ u_j] C(u_i - y, u_j - y) dW^<-(y)``."""
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    m = len(u)
    K = np.zeros((m, m))
    for i in range(m):
        for j in range(i, m):
            a, b = (u[i], u[j]) if u[i] <= u[j] else (u[j], u[i])
            parts = C.factorized(a, b)
            if parts is None:
                continue
            rho, smooth = parts
            K[i, j] = K[j, i] = stieltjes_inverse(path, a, rho, smooth)
    return K


# -- Gaussian machinery ---------------------------------------------------

def factorize_psd(M: np.ndarray, tol: float = PSD_TOL) -> np.ndarray:
    """Symmetric square-root factor ``L`` with ``L L^T = M``.

    Eigenvalues down to ``-tol`` times the largest one are treated as zero;
    anything more negative raises :class:`NumericalError`.
    """
    M = 0.5 * (M + M.T)
    lam, vec = np.linalg.eigh(M)
    top = max(float(np.abs(lam).max()), 1e-300)
    if lam.min() < -tol * top:
        raise NumericalError(f"covariance matrix not PSD: smallest eigenvalue {lam.min():.3e}")
    return vec * np.sqrt(np.clip(lam, 0.0, None))


def theoretical_V_cov(C: CovarianceModel, u: float, w: float) -> float:
    """``int_0^u C(u-y, w-y) dy`` for ``0 < u <= w``."""
    if u > w:
        raise ParameterError("theoretical_V_cov expects u <= w")
    if not u > 0:
        raise ParameterError("u must be positive")
    b = C.beta
    if b <= -1:
        raise ParameterError("V_beta needs beta > -1")
    if u == w:
        return u ** (1 + b) / (1 + b)
    if C.form == "fictitious":
        return 0.0
    if C.form == "flat":
        return float(u)
    if C.form == "max_power":
        return (w ** (1 + b) - (w - u) ** (1 + b)) / (1 + b)
    # (u-y)^(b/2) is handled as the algebraic endpoint weight
    val, _ = integrate.quad(lambda y: (w - y) ** (b / 2), 0.0, u, weight="alg", wvar=(0.0, b / 2),
                            epsabs=0.0, epsrel=1e-10, limit=200)
    return float(val)


def V_cov_matrix(C: CovarianceModel, u_grid) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    m = len(u)
    M = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            a, b = sorted((u[i], u[j]))
            M[i, j] = M[j, i] = theoretical_V_cov(C, a, b)
    return M


def _check_grid(u_grid) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    if np.any(u <= 0) or np.any(np.diff(u) <= 0):
        raise ParameterError("u_grid must be positive and strictly increasing")
    return u


def _gaussian_blocks(L: np.ndarray, reps: int, stream: StreamLike) -> np.ndarray:
    root = as_stream(stream)
    out = []
    for b, start in enumerate(range(0, reps, BLOCK_SIZE)):
        n = min(BLOCK_SIZE, reps - start)
        out.append(root.derive(b).generator().standard_normal((n, L.shape[1])) @ L.T)
    return np.concatenate(out)


def sample_V_beta(C: CovarianceModel, u_grid, reps: int, stream: StreamLike) -> FddSample:
    u = _check_grid(u_grid)
    L = factorize_psd(V_cov_matrix(C, u))
    return FddSample(_gaussian_blocks(L, reps, stream), u, case="V_beta")


def sample_Z(alpha: float, C: CovarianceModel, u_grid, reps: int, stream: StreamLike,
             n_steps: int = DEFAULT_STEPS, return_conditional: bool = False) -> FddSample:
    """Draws of ``Z`` (one inverse-subordinator path per replication).

    With ``return_conditional`` the per-replication conditional covariance
    matrices are stored in ``extras["conditional_cov"]``.
    """
    _check_alpha_sub(alpha)
    if C.beta < -alpha:
        raise ParameterError(f"Z needs beta >= -alpha, got beta={C.beta}")
    u = _check_grid(u_grid)
    root = as_stream(stream)
    out = np.empty((reps, len(u)))
    conds = np.empty((reps, len(u), len(u))) if return_conditional else None
    for r in range(reps):
        gen = root.derive(r).generator()
        path = simulate_subordinator_to_level(alpha, u[-1], n_steps, gen)
        K = conditional_Z_cov(path, C, u)
        out[r] = factorize_psd(K) @ gen.standard_normal(len(u))
        if conds is not None:
            conds[r] = K
    extras = {"conditional_cov": conds} if conds is not None else {}
    return FddSample(out, u, case="Z", extras=extras)


def sample_Z_time_changed(alpha: float, beta: float, u_grid, reps: int, stream: StreamLike,
                          n_steps: int = DEFAULT_STEPS) -> FddSample:
    """``int_[0,u] (u-y)**(beta/2) dB(W^<-(y))``: Brownian motion run on the inverse-subordinator clock."""
    _check_alpha_sub(alpha)
    u = _check_grid(u_grid)
    root = as_stream(stream)
    out = np.empty((reps, len(u)))
    for r in range(reps):
        gen = root.derive(r).generator()
        path = simulate_subordinator_to_level(alpha, u[-1], n_steps, gen)
        noise = gen.standard_normal(len(path.times) - 1)
        for j, uj in enumerate(u):
            w, _ = _cell_weights(path, uj, beta)
            # each cell carries B-increment sqrt(dt) N; integrand^2 averaged over the cell
            out[r, j] = float(np.sum(np.sqrt(w) * noise[: len(w)]))
    return FddSample(out, u, case="Z_time_changed")


# -- stable fractional integral ------------------------------------------

def _stable_cell_weights(alpha: float, rho: float, edges: np.ndarray, u: float) -> np.ndarray:
    """``((1/dy) int_cell (u-y)**(rho alpha) dy)**(1/alpha)`` for cells below ``u``, zero above."""
    lo, hi = edges[:-1], edges[1:]
    e = rho * alpha + 1.0
    a = np.clip(u - lo, 0.0, None)
    b = np.clip(u - hi, 0.0, None)
    mass = (a**e - b**e) / e
    return (mass / (hi - lo)) ** (1.0 / alpha)


def _stable_edges(u: np.ndarray, n_steps: int) -> np.ndarray:
    return np.union1d(np.linspace(0.0, u[-1], n_steps + 1), u)


def _refined_steps(alpha: float, rho: float, u: np.ndarray, n_steps: int, cap: int = 2**16) -> int:
    """Double the grid until the pairwise co-dispersions move by less than 0.5%."""
    if len(u) == 1:
        return n_steps

    def codispersion(n):
        edges = _stable_edges(u, n)
        dy = np.diff(edges)
        ws = [_stable_cell_weights(alpha, rho, edges, x) for x in u]
        return np.array([np.sum((ws[i] * ws[j]) ** (alpha / 2) * dy)
                         for i in range(len(u)) for j in range(i + 1, len(u))])

    prev = codispersion(n_steps)
    while n_steps < cap:
        cur = codispersion(2 * n_steps)
        n_steps *= 2
        if np.max(np.abs(cur - prev) / np.abs(prev)) < 5e-3:
            break
        prev = cur
    return n_steps


def fractional_integral_stable(alpha: float, rho: float, u_grid, n_steps: int, stream: RngLike,
                               refine: bool = True) -> np.ndarray:
    """``int_0^u (u-y)**rho dS(y)`` for spectrally negative stable ``S`` at each grid scale.

    Each cell's stable increment is weighted by the ``alpha``-mean of the
    integrand over the cell, so the one-dimensional marginals are exact;
    joint laws converge as the grid is refined.
    """
    if not 1.0 < alpha <= 2.0:
        raise ParameterError(f"stable integrator needs alpha in (1,2], got {alpha}")
    if rho <= -1.0 / alpha:
        raise ParameterError(f"integral diverges for rho <= -1/alpha (rho={rho}, alpha={alpha})")
    u = _check_grid(u_grid)
    if refine:
        n_steps = _refined_steps(alpha, rho, u, n_steps)
    edges = _stable_edges(u, n_steps)
    dy = np.diff(edges)
    spec = StableSpec(alpha, "spectrally_negative")
    gen = as_generator(stream)
    unit = sample_stable_increment(spec, 1.0, gen, len(dy)) * dy ** (1.0 / alpha)
    return np.array([float(np.dot(_stable_cell_weights(alpha, rho, edges, x), unit)) for x in u])


def sample_fractional_stable(alpha: float, rho: float, u_grid, reps: int, stream: StreamLike,
                             n_steps: int = 256) -> FddSample:
    """Replications drawn in blocks of ``BLOCK_SIZE``, one derived stream per block."""
    if not 1.0 < alpha <= 2.0:
        raise ParameterError(f"stable integrator needs alpha in (1,2], got {alpha}")
    if rho <= -1.0 / alpha:
        raise ParameterError(f"integral diverges for rho <= -1/alpha (rho={rho}, alpha={alpha})")
    u = _check_grid(u_grid)
    edges = _stable_edges(u, _refined_steps(alpha, rho, u, n_steps))
    dy = np.diff(edges)
    weights = np.array([_stable_cell_weights(alpha, rho, edges, x) for x in u]) * dy ** (1.0 / alpha)
    spec = StableSpec(alpha, "spectrally_negative")
    root = as_stream(stream)
    out = []
    for b, start in enumerate(range(0, reps, BLOCK_SIZE)):
        n = min(BLOCK_SIZE, reps - start)
        unit = sample_stable_increment(spec, 1.0, root.derive(b).generator(), (n, len(dy)))
        out.append(unit @ weights.T)
    return FddSample(np.concatenate(out), u, case="frac_stable")


# -- limit specifications --------------------------------------------------

@dataclass(frozen=True)
class LimitFddSpec:
    """Which limit to sample and with which constants."""

    case: str
    u_grid: tuple
    alpha: Optional[float] = None
    beta: Optional[float] = None
    rho: Optional[float] = None
    p: Optional[float] = None
    q: Optional[float] = None
    mu: Optional[float] = None
    C: Optional[CovarianceModel] = None

    def __post_init__(self):
        if self.case not in LIMIT_CASES:
            raise ParameterError(f"unknown limit case {self.case!r}; expected one of {LIMIT_CASES}")
        object.__setattr__(self, "u_grid", tuple(float(x) for x in _check_grid(self.u_grid)))
        c = self.case
        if c in ("V_beta", "Z") and self.C is None:
            raise ParameterError(f"{c} needs a covariance model")
        if c == "thm21_mix":
            if self.p is None or not 0 <= self.p <= 1 or self.mu is None or self.alpha is None:
                raise ParameterError("thm21_mix needs p in [0,1], mu and alpha")
            if self.p < 1 and (self.C is None or self.C.beta <= -1):
                raise ParameterError("thm21_mix with p < 1 needs a covariance model with beta > -1")
            if self.p > 0 and (self.rho is None or self.rho <= -1.0 / self.alpha):
                raise ParameterError("thm21_mix with p > 0 needs rho > -1/alpha")
        if c == "thm22_mix":
            if self.q is None or not 0 <= self.q <= 1 or self.alpha is None:
                raise ParameterError("thm22_mix needs q in [0,1] and alpha")
            if self.q > 0 and (self.rho is None or self.rho < -self.alpha):
                raise ParameterError("thm22_mix with q > 0 needs rho >= -alpha")
            if self.q < 1:
                if self.C is None or self.C.beta < -self.alpha:
                    raise ParameterError("thm22_mix with q < 1 needs a covariance model with beta >= -alpha")
            if 0 < self.q < 1 and abs(self.rho - (self.C.beta - self.alpha) / 2) > 1e-12:
                raise ParameterError("thm22_mix with q in (0,1) needs rho = (beta - alpha)/2")
        if c in ("frac_stable", "frac_inverse") and (self.alpha is None or self.rho is None):
            raise ParameterError(f"{c} needs alpha and rho")


def sample_limit_fdd(spec: LimitFddSpec, reps: int, stream: StreamLike, n_steps: int = DEFAULT_STEPS) -> FddSample:
    """Draw ``reps`` vectors of the limit described by ``spec``.

    For ``thm22_mix`` both summands use the same inverse-subordinator path;
    the per-replication ``Q`` values are kept in ``extras["Q"]``.
    """
    root = as_stream(stream)
    u = np.array(spec.u_grid)
    c = spec.case
    if c == "V_beta":
        return sample_V_beta(spec.C, u, reps, root)
    if c == "Z":
        return sample_Z(spec.alpha, spec.C, u, reps, root, n_steps)
    if c == "frac_stable":
        return sample_fractional_stable(spec.alpha, spec.rho, u, reps, root)
    if c == "frac_inverse":
        out = np.empty((reps, len(u)))
        for r in range(reps):
            path = simulate_subordinator_to_level(spec.alpha, u[-1], n_steps, root.derive(r).generator())
            out[r] = fractional_integral_inverse(spec.alpha, spec.rho, u, path)
        return FddSample(out, u, case=c)
    if c == "thm21_mix":
        total = np.zeros((reps, len(u)))
        if spec.p < 1:
            v = sample_V_beta(spec.C, u, reps, root.derive(0)).values
            total += math.sqrt((1 - spec.p) * (1 + spec.C.beta) / spec.mu) * v
        if spec.p > 0:
            f = sample_fractional_stable(spec.alpha, spec.rho, u, reps, root.derive(1)).values
            total += math.sqrt(spec.p) * spec.mu ** (-(spec.alpha + 1) / spec.alpha) * f
        return FddSample(total, u, case=c)
    # thm22_mix
    out = np.empty((reps, len(u)))
    qs = np.zeros((reps, len(u)))
    for r in range(reps):
        gen = root.derive(r).generator()
        path = simulate_subordinator_to_level(spec.alpha, u[-1], n_steps, gen)
        z = np.zeros(len(u))
        if spec.q < 1:
            z = factorize_psd(conditional_Z_cov(path, spec.C, u)) @ gen.standard_normal(len(u))
        if spec.q > 0:
            qs[r] = fractional_integral_inverse(spec.alpha, spec.rho, u, path)
        out[r] = math.sqrt(1 - spec.q) * z + math.sqrt(spec.q) * qs[r]
    return FddSample(out, u, case=c, extras={"Q": qs})


# -- closed forms -----------------------------------------------------------

def inverse_mean(alpha: float, y: float) -> float:
    """``E W^<-(y) = y**alpha / (Gamma(1-alpha) Gamma(1+alpha))``."""
    _check_alpha_sub(alpha)
    return inverse_mean_constant(alpha) * y**alpha


def inverse_power_mean(alpha: float, rho: float, s: float) -> float:
    """``E int_[0,s] (s-y)**rho dW^<-(y) = Gamma(rho+1) s**(rho+alpha) / (Gamma(1-alpha) Gamma(rho+alpha+1))``."""
    _check_alpha_sub(alpha)
    if rho <= -1:
        raise ParameterError("rho must exceed -1")
    return gamma(rho + 1) / (gamma(1 - alpha) * gamma(rho + alpha + 1)) * s ** (rho + alpha)


def Z_variance(alpha: float, beta: float, u: float) -> float:
    if beta < -alpha:
        raise ParameterError("Z needs beta >= -alpha")
    return inverse_power_mean(alpha, beta, u)


def _sorted_quadratic(weights, u_points, entry) -> float:
    w = np.asarray(weights, dtype=float)
    u = np.asarray(u_points, dtype=float)
    if w.shape != u.shape:
        raise ParameterError("weights and points must match")
    order = np.argsort(u)
    w, u = w[order], u[order]
    total = 0.0
    for j in range(len(u)):
        total += w[j] ** 2 * entry(u[j], u[j])
        for i in range(j):
            total += 2 * w[i] * w[j] * entry(u[i], u[j])
    return total


def D_matrix(weights, u_points, C: CovarianceModel) -> float:
    """Variance of ``sum_j weights_j V_beta(u_j)``."""
    return _sorted_quadratic(weights, u_points, lambda a, b: theoretical_V_cov(C, a, b))


def D_alpha_beta(weights, u_points, C: CovarianceModel, path: GridPath) -> float:
    """Conditional variance of ``sum_j weights_j Z(u_j)`` given the inverse-subordinator path."""
    def entry(a, b):
        parts = C.factorized(a, b)
        if parts is None:
            return 0.0
        return stieltjes_inverse(path, a, *parts)

    return _sorted_quadratic(weights, u_points, entry)


def negative_moment(alpha: float, theta: float, convention: str = "standard",
                    laplace: Optional[Callable] = None) -> float:
    """``E W**-theta = (1/Gamma(theta)) int_0^inf s**(theta-1) phi(s) ds`` by quadrature.

    ``phi`` defaults to the Laplace transform of the positive stable law in
    the chosen convention; any other transform can be passed in.
    """
    if not theta > 0:
        raise ParameterError("theta must be positive")
    if laplace is None:
        _check_alpha_sub(alpha)
        k = 1.0 if convention == "standard" else float(gamma(1 - alpha))
        laplace = lambda s: math.exp(-k * s**alpha)  # noqa: E731
    f = lambda s: s ** (theta - 1) * laplace(s)  # noqa: E731
    val = integrate.quad(f, 0, 1, limit=200)[0] + integrate.quad(f, 1, np.inf, limit=200)[0]
    return val / gamma(theta)


CLOSED_FORMS = {
    "inverse_mean": inverse_mean,
    "Z_variance": Z_variance,
    "D_matrix": D_matrix,
    "D_alpha_beta": D_alpha_beta,
    "negative_moment": negative_moment,
    "inverse_power_mean": inverse_power_mean,
}


def closed_form_moments(query: str, **kwargs) -> float:
    try:
        fn = CLOSED_FORMS[query]
    except KeyError:
        raise ParameterError(f"unknown query {query!r}; expected one of {sorted(CLOSED_FORMS)}") from None
    return float(fn(**kwargs))
