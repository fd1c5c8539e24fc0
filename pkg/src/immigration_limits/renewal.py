"""Zero-delayed random walks, first-passage counts and FLT normalizations."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.special import gamma

from .errors import OutOfRangeError, ParameterError, UnsupportedScenarioError
from .rng import RngLike, StreamLike, as_generator, as_stream

LAW_KINDS = ("exponential", "pareto", "lognormal", "deterministic", "log_tail")

# replications of cheap scalar statistics are drawn in fixed-size blocks,
# one derived stream per block, so results never depend on worker count
BLOCK_SIZE = 512


@dataclass(frozen=True)
class IncrementLaw:
    """Law of a positive random variable from the catalog.

    ``exponential(rate)``, ``pareto(alpha, x_min)`` with ``P{xi>t} = (t/x_min)**-alpha``,
    ``lognormal(m, s)``, ``deterministic(value)`` and ``log_tail`` with
    ``P{xi>t} = 1/(1+log(1+t))`` (used only as a response-variable law).
    """

    kind: str
    params: tuple = ()

    def __post_init__(self):
        if self.kind not in LAW_KINDS:
            raise ParameterError(f"unknown law kind {self.kind!r}; expected one of {LAW_KINDS}")
        p = tuple(float(x) for x in self.params)
        object.__setattr__(self, "params", p)
        if self.kind == "exponential":
            if len(p) != 1 or p[0] <= 0:
                raise ParameterError("exponential law needs one positive rate")
        elif self.kind == "pareto":
            if len(p) != 2 or p[0] <= 0 or p[1] <= 0:
                raise ParameterError("pareto law needs positive (alpha, x_min)")
            if p[0] == 1.0:
                raise ParameterError("tail index alpha = 1 is excluded")
            if p[0] == 2.0:
                raise ParameterError("pareto alpha = 2 needs a slowly varying truncated second moment; not in the catalog")
        elif self.kind == "lognormal":
            if len(p) != 2 or p[1] <= 0:
                raise ParameterError("lognormal law needs (m, s) with s > 0")
        elif self.kind == "deterministic":
            if len(p) != 1 or p[0] < 0:
                raise ParameterError("deterministic law needs one non-negative value")
        elif self.kind == "log_tail":
            if p:
                raise ParameterError("log_tail law takes no parameters")

    # constructors -----------------------------------------------------
    @classmethod
    def exponential(cls, rate: float = 1.0) -> "IncrementLaw":
        return cls("exponential", (rate,))

    @classmethod
    def pareto(cls, alpha: float, x_min: float = 1.0) -> "IncrementLaw":
        return cls("pareto", (alpha, x_min))

    @classmethod
    def lognormal(cls, m: float = 0.0, s: float = 1.0) -> "IncrementLaw":
        return cls("lognormal", (m, s))

    @classmethod
    def deterministic(cls, value: float) -> "IncrementLaw":
        return cls("deterministic", (value,))

    @classmethod
    def log_tail(cls) -> "IncrementLaw":
        return cls("log_tail", ())

    # summary constants ------------------------------------------------
    @property
    def alpha(self) -> float:
        """Index of the stable domain of attraction (2 for finite variance)."""
        if self.kind == "pareto":
            return min(self.params[0], 2.0)
        if self.kind == "log_tail":
            return 0.0
        return 2.0

    @property
    def mu(self) -> float:
        k, p = self.kind, self.params
        if k == "exponential":
            return 1.0 / p[0]
        if k == "pareto":
            a, xm = p
            return a * xm / (a - 1.0) if a > 1 else math.inf
        if k == "lognormal":
            return math.exp(p[0] + p[1] ** 2 / 2.0)
        if k == "deterministic":
            return p[0]
        return math.inf

    @property
    def sigma2(self) -> float:
        k, p = self.kind, self.params
        if k == "exponential":
            return 1.0 / p[0] ** 2
        if k == "pareto":
            a, xm = p
            return a * xm**2 / ((a - 1.0) ** 2 * (a - 2.0)) if a > 2 else math.inf
        if k == "lognormal":
            m, s = p
            return (math.exp(s**2) - 1.0) * math.exp(2 * m + s**2)
        if k == "deterministic":
            return 0.0
        return math.inf

    @property
    def ell_star(self) -> Optional[float]:
        """Constant slowly varying factor of the tail, when the tail is a pure power."""
        if self.kind == "pareto" and self.params[0] < 2:
            a, xm = self.params
            return xm**a
        return None

    @property
    def finite_mean(self) -> bool:
        return math.isfinite(self.mu)

    def survival(self, t):
        """``P{xi > t}``, vectorised."""
        t = np.asarray(t, dtype=float)
        k, p = self.kind, self.params
        if k == "exponential":
            return np.where(t < 0, 1.0, np.exp(-p[0] * np.maximum(t, 0.0)))
        if k == "pareto":
            a, xm = p
            return np.where(t < xm, 1.0, (np.maximum(t, xm) / xm) ** (-a))
        if k == "lognormal":
            from scipy.stats import lognorm

            return np.where(t <= 0, 1.0, lognorm.sf(np.maximum(t, 1e-300), p[1], scale=math.exp(p[0])))
        if k == "deterministic":
            return np.where(t < p[0], 1.0, 0.0)
        return np.where(t <= 0, 1.0, 1.0 / (1.0 + np.log1p(np.maximum(t, 0.0))))

    def quantile(self, u):
        """Inverse of the distribution function, used for coupled sampling."""
        u = np.asarray(u, dtype=float)
        k, p = self.kind, self.params
        if k == "exponential":
            return -np.log1p(-u) / p[0]
        if k == "pareto":
            a, xm = p
            return xm * (1.0 - u) ** (-1.0 / a)
        if k == "lognormal":
            from scipy.stats import norm

            return np.exp(p[0] + p[1] * norm.ppf(u))
        if k == "deterministic":
            return np.full_like(u, p[0])
        with np.errstate(over="ignore"):
            return np.expm1(1.0 / (1.0 - u) - 1.0)

    def sample(self, rng: RngLike, size=None):
        gen = as_generator(rng)
        k, p = self.kind, self.params
        if k == "exponential":
            return gen.exponential(1.0 / p[0], size)
        if k == "pareto":
            a, xm = p
            return xm * gen.uniform(0.0, 1.0, size) ** (-1.0 / a)
        if k == "lognormal":
            return gen.lognormal(p[0], p[1], size)
        if k == "deterministic":
            return np.full(size, p[0]) if size is not None else p[0]
        return self.quantile(gen.uniform(0.0, 1.0, size))

    def expected_count(self, horizon: float) -> float:
        """Rough ``E nu(horizon)``, used for memory planning only."""
        if self.finite_mean:
            return horizon / self.mu + 1.0
        if self.kind == "pareto":
            a = self.params[0]
            return 1.0 + float(self.survival(horizon)) ** -1 / (gamma(1 - a) * gamma(1 + a))
        raise UnsupportedScenarioError(f"{self.kind} is not an inter-arrival law")

    def describe(self) -> dict:
        return {"kind": self.kind, "params": list(self.params)}


def validate_increment_law(law: IncrementLaw) -> None:
    if law.kind == "log_tail":
        raise ParameterError("log_tail is a response-variable law, not an inter-arrival law")
    if law.kind == "deterministic" and law.params[0] <= 0:
        raise ParameterError("deterministic inter-arrival times must be positive")


@dataclass(frozen=True)
class RenewalPath:
    """Partial sums ``S_0=0 < S_1 < ...`` up to and including the first one above ``horizon``."""

    partial_sums: np.ndarray
    horizon: float

    @property
    def increments(self) -> np.ndarray:
        return np.diff(self.partial_sums)

    @property
    def arrivals(self) -> np.ndarray:
        """Epochs ``S_k <= horizon``."""
        return self.partial_sums[:-1]


def simulate_walk(law: IncrementLaw, horizon: float, rng: RngLike) -> RenewalPath:
    if not horizon > 0:
        raise ParameterError(f"horizon must be positive, got {horizon}")
    validate_increment_law(law)
    gen = as_generator(rng)
    if law.kind == "deterministic":
        n = int(math.floor(horizon / law.params[0])) + 1
        sums = law.params[0] * np.arange(n + 1, dtype=float)
        return RenewalPath(sums, float(horizon))
    chunk = max(16, int(1.2 * law.expected_count(horizon)) + 16)
    pieces = [np.zeros(1)]
    last = 0.0
    while True:
        s = last + np.cumsum(law.sample(gen, chunk))
        pieces.append(s)
        if s[-1] > horizon:
            break
        last = s[-1]
    sums = np.concatenate(pieces)
    stop = int(np.searchsorted(sums, horizon, side="right"))
    return RenewalPath(sums[: stop + 1], float(horizon))


def first_passage(path: RenewalPath, t):
    """``nu(t) = #{k >= 0 : S_k <= t}``."""
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr > path.horizon):
        raise OutOfRangeError(f"t exceeds the simulated horizon {path.horizon}")
    counts = np.searchsorted(path.partial_sums, t_arr, side="right")
    return counts if counts.ndim else int(counts)


def _block_counts(law: IncrementLaw, t_grid: np.ndarray, n: int, gen: np.random.Generator) -> np.ndarray:
    """First-passage counts at ``t_grid`` for ``n`` independent walks (n x len(t_grid))."""
    horizon = float(t_grid.max())
    if law.kind == "deterministic":
        c = np.floor(t_grid / law.params[0]).astype(np.int64) + 1
        return np.where(t_grid < 0, 0, np.broadcast_to(c, (n, len(t_grid))))
    width = max(8, int(1.2 * law.expected_count(horizon)) + 8)
    sums = np.cumsum(law.sample(gen, (n, width)), axis=1)
    while True:
        short = sums[:, -1] <= horizon
        if not short.any():
            break
        extra = sums[:, -1:] + np.cumsum(law.sample(gen, (n, width)), axis=1)
        sums = np.concatenate([sums, extra], axis=1)
    # S_0 = 0 contributes one to every non-negative t
    out = np.empty((n, len(t_grid)), dtype=np.int64)
    for j, t in enumerate(t_grid):
        out[:, j] = (sums <= t).sum(axis=1) + (1 if t >= 0 else 0)
    return out


def sample_first_passage(law: IncrementLaw, t_grid, reps: int, stream: StreamLike) -> np.ndarray:
    """Matrix ``reps x len(t_grid)`` of independent ``nu(t)`` draws (one walk per row)."""
    validate_increment_law(law)
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    root = as_stream(stream)
    rows = []
    for b, start in enumerate(range(0, reps, BLOCK_SIZE)):
        n = min(BLOCK_SIZE, reps - start)
        rows.append(_block_counts(law, t_grid, n, root.derive(b).generator()))
    return np.concatenate(rows, axis=0)


def estimate_renewal_function(law: IncrementLaw, t_grid, reps: int, stream: StreamLike):
    """Monte Carlo ``U(t) = E nu(t)`` with standard errors; returns rows ``(t, U_hat, se)``."""
    if reps < 2:
        raise ParameterError("need at least two replications")
    t_grid = np.atleast_1d(np.asarray(t_grid, dtype=float))
    counts = sample_first_passage(law, t_grid, reps, stream)
    mean = counts.mean(axis=0)
    se = counts.std(axis=0, ddof=1) / math.sqrt(reps)
    return [(float(t), float(m), float(s)) for t, m, s in zip(t_grid, mean, se)]


def norming_c(law: IncrementLaw, t: float) -> float:
    """Scale ``c(t)`` of the functional limit theorem for ``nu``."""
    if law.alpha <= 1.0 or not law.finite_mean:
        raise UnsupportedScenarioError("no FLT normalization in the infinite-mean regime")
    if not t > 0:
        raise ParameterError("t must be positive")
    if math.isfinite(law.sigma2):
        return math.sqrt(law.sigma2 * t)
    # pure power tail: t * ell / c**alpha = 1
    return (law.ell_star * t) ** (1.0 / law.alpha)


def tail_probability(law: IncrementLaw, t: float) -> float:
    return float(law.survival(t))


def inverse_mean_constant(alpha: float) -> float:
    """``d_alpha = 1 / (Gamma(1-alpha) Gamma(1+alpha))``."""
    return 1.0 / (gamma(1.0 - alpha) * gamma(1.0 + alpha))
