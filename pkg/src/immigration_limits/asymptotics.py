"""Numerical checks of regular-variation and renewal-calculus asymptotics."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate
from scipy.special import gamma

from .errors import ParameterError, UnsupportedScenarioError
from .renewal import IncrementLaw, simulate_walk
from .responses import ResponseModel
from .rng import StreamLike, as_stream


@dataclass(frozen=True)
class FunctionSpec:
    """A test function ``g`` on ``[cutoff, inf)``.

    ``power``: ``y**index``; ``power_times_log``: ``y**index * (1 + 1/log y)``
    (needs ``cutoff > 1``); ``callable``: any vectorised function.
    """

    form: str
    index: float = 0.0
    cutoff: float = 0.0
    func: Optional[Callable] = None

    def __post_init__(self):
        if self.form not in ("power", "power_times_log", "callable"):
            raise ParameterError(f"unknown function form {self.form!r}")
        if self.form == "power_times_log" and self.cutoff <= 1:
            raise ParameterError("power_times_log needs a cutoff above 1")
        if self.form == "callable" and self.func is None:
            raise ParameterError("callable form needs func")

    @classmethod
    def power(cls, index: float) -> "FunctionSpec":
        return cls("power", index)

    @classmethod
    def power_times_log(cls, index: float, cutoff: float = math.e) -> "FunctionSpec":
        return cls("power_times_log", index, cutoff)

    @classmethod
    def from_model(cls, model: ResponseModel, which: str = "v", index: Optional[float] = None) -> "FunctionSpec":
        fn = model.v if which == "v" else model.h
        idx = index if index is not None else (model.beta if which == "v" else model.rho)
        return cls("callable", idx if idx is not None else 0.0, 0.0, fn)

    def __call__(self, y):
        y = np.asarray(y, dtype=float)
        if self.form == "power":
            safe = np.where(y > 0, y, 1.0)
            at_zero = 1.0 if self.index == 0 else (0.0 if self.index > 0 else np.inf)
            return np.where(y > 0, safe**self.index, at_zero)
        if self.form == "power_times_log":
            return y**self.index * (1.0 + 1.0 / np.log(y))
        return np.asarray(self.func(y), dtype=float)


@dataclass(frozen=True)
class LemmaCheck:
    lemma: str
    t: float
    statistic: float
    limit: float
    std_err: float = 0.0

    @property
    def abs_gap(self) -> float:
        return abs(self.statistic - self.limit)

    @property
    def rel_gap(self) -> float:
        return self.abs_gap / abs(self.limit)


def _integral(g: FunctionSpec, a: float, t: float) -> float:
    # log substitution keeps the quadrature accurate over many decades
    total = 0.0
    lo = a
    if lo < 1.0:
        top = min(1.0, t)
        total += integrate.quad(lambda y: float(g(y)), lo, top, limit=200)[0]
        lo = top
    if t > lo:
        total += integrate.quad(lambda s: float(g(math.exp(s))) * math.exp(s), math.log(lo), math.log(t),
                                limit=400, epsrel=1e-11)[0]
    return total


def karamata_ratio(g: FunctionSpec, rho: float, a: float, t: float) -> float:
    """``int_a^t g / (t g(t) / (rho + 1))``; tends to 1 for ``g`` regularly varying of index ``rho > -1``."""
    if rho <= -1:
        raise ParameterError("Karamata ratio needs rho > -1")
    if not t > a:
        raise ParameterError("need t > a")
    a = max(a, g.cutoff)
    return _integral(g, a, t) / (t * float(g(t)) / (rho + 1.0))


def _window_sums(phi: FunctionSpec, law: IncrementLaw, r1: float, r2: float, t: float, reps: int,
                 stream: StreamLike) -> np.ndarray:
    root = as_stream(stream)
    out = np.empty(reps)
    for r in range(reps):
        s = simulate_walk(law, t, root.derive(r).generator()).arrivals
        s = s[(s >= r1 * t) & (s <= r2 * t)]
        out[r] = float(np.sum(phi(t - s)))
    return out


def sgibnev_constant(phi: FunctionSpec, beta: float, law: IncrementLaw, r1: float, r2: float, t: float) -> float:
    """``t phi(t) / ((1+beta) E xi) * ((1-r1)**(1+beta) - (1-r2)**(1+beta))``."""
    return t * float(phi(t)) / ((1 + beta) * law.mu) * ((1 - r1) ** (1 + beta) - (1 - r2) ** (1 + beta))


def poisson_window_integral(phi: FunctionSpec, r1: float, r2: float, t: float, rate: float = 1.0) -> float:
    """Exact ``int_[r1 t, r2 t] phi(t-y) dU(y)`` for ``U(y) = rate*y + 1`` (exponential increments)."""
    atom = float(phi(t)) if r1 == 0 else 0.0
    lo, hi = (1 - r2) * t, (1 - r1) * t
    return atom + rate * _integral(phi, lo, hi) if hi > lo else atom


def sgibnev_ratio(phi: FunctionSpec, beta: float, law: IncrementLaw, r1: float, r2: float, t: float,
                  reps: int, stream: StreamLike) -> LemmaCheck:
    """Monte Carlo ``int_[r1 t, r2 t] phi(t-y) dU(y)`` over the asymptotic constant."""
    if not 0 <= r1 < r2 <= 1:
        raise ParameterError("need 0 <= r1 < r2 <= 1")
    if beta <= -1:
        raise ParameterError("need beta > -1")
    if not law.finite_mean:
        raise UnsupportedScenarioError("Sgibnev asymptotics need a finite-mean law")
    sums = _window_sums(phi, law, r1, r2, t, reps, stream)
    const = sgibnev_constant(phi, beta, law, r1, r2, t)
    return LemmaCheck("sgibnev", t, float(sums.mean()) / const, 1.0, float(sums.std(ddof=1)) / math.sqrt(reps) / const)


def infinite_mean_constant(alpha: float, gamma_: float) -> float:
    """``Gamma(1+gamma) / (Gamma(1-alpha) Gamma(1+alpha+gamma))``."""
    return gamma(1 + gamma_) / (gamma(1 - alpha) * gamma(1 + alpha + gamma_))


def infinite_mean_renewal_limit(phi: FunctionSpec, gamma_: float, alpha: float, t: float, reps: int,
                                stream: StreamLike, x_min: float = 1.0) -> LemmaCheck:
    """``P{xi>t} int_[0,t] phi(t-y) dU(y) / phi(t)`` for Pareto(alpha, x_min) increments."""
    if not 0 < alpha < 1:
        raise ParameterError("need alpha in (0,1)")
    if gamma_ < -alpha:
        raise ParameterError("need gamma >= -alpha")
    law = IncrementLaw.pareto(alpha, x_min)
    sums = _window_sums(phi, law, 0.0, 1.0, t, reps, stream)
    k = float(law.survival(t)) / float(phi(t))
    return LemmaCheck("infinite_mean_renewal", t, k * float(sums.mean()), float(infinite_mean_constant(alpha, gamma_)),
                      k * float(sums.std(ddof=1)) / math.sqrt(reps))


def uniform_strip_check(model: ResponseModel, a: float, b: float, w: float, t_list, n_grid: int = 201):
    """``[(t, sup_{u in [a,b]} |f(ut,(u+w)t)/v(t) - C(u,u+w)|)]``."""
    if not 0 < a < b or not w > 0:
        raise ParameterError("need 0 < a < b and w > 0")
    if model.covariance is None:
        raise UnsupportedScenarioError(f"{model.model_id} has no limit function")
    u = np.linspace(a, b, n_grid)
    out = []
    for t in t_list:
        ratio = model.f(u * t, (u + w) * t) / float(model.v(t))
        out.append((float(t), float(np.max(np.abs(ratio - model.covariance(u, u + w))))))
    return out


def lindeberg_ratio(model: ResponseModel, t: float, y: float, regime: str, law: IncrementLaw, reps: int,
                    stream: StreamLike) -> float:
    """Monte Carlo ``E[(X(t)-h(t))^2 1{|X(t)-h(t)| > threshold}] / v(t)``."""
    if not y > 0:
        raise ParameterError("y must be positive")
    v = float(model.v(t))
    if v == 0:
        return 0.0
    if regime == "finite_mean":
        thr = y * math.sqrt(t * v)
    elif regime == "infinite_mean":
        thr = y * math.sqrt(v / float(law.survival(t)))
    else:
        raise ParameterError(f"unknown regime {regime!r}")
    gen = as_stream(stream).generator()
    xi = law.sample(gen, reps)
    x = model.sample(np.full((reps, 1), float(t)), gen, xi=xi)[:, 0]
    d = x - float(model.h(t))
    return float(np.mean(np.where(np.abs(d) > thr, d**2, 0.0))) / v


def write_lemma_csv(checks, target) -> None:
    own = isinstance(target, str) or hasattr(target, "__fspath__")
    fh = open(target, "w", newline="") if own else target
    try:
        w = csv.writer(fh)
        w.writerow(["lemma", "t", "statistic", "limit", "abs_gap"])
        for c in checks:
            w.writerow([c.lemma, repr(c.t), repr(c.statistic), repr(c.limit), repr(c.abs_gap)])
    finally:
        if own:
            fh.close()


def lemma_ladder(t_list=(1e2, 1e3, 1e4), reps: int = 1000, stream: StreamLike = 0):
    """Default lemma checks along a geometric t-ladder."""
    root = as_stream(stream)
    checks = []
    sqrt_fn = FunctionSpec.power(0.5)
    for i, t in enumerate(t_list):
        checks.append(LemmaCheck("karamata_power", t, karamata_ratio(sqrt_fn, 0.5, 0.0, t), 1.0))
        checks.append(LemmaCheck("karamata_log", t,
                                 karamata_ratio(FunctionSpec.power_times_log(0.5), 0.5, math.e, t), 1.0))
        checks.append(sgibnev_ratio(sqrt_fn, 0.5, IncrementLaw.exponential(1.0), 0.0, 1.0, t, reps,
                                    root.derive(2 * i)))
        for g in (0.0, 1.0):
            c = infinite_mean_renewal_limit(FunctionSpec.power(g), g, 0.5, t, reps, root.derive(2 * i + 1))
            checks.append(LemmaCheck(f"infinite_mean_renewal_gamma{g:g}", c.t, c.statistic, c.limit, c.std_err))
    return checks
