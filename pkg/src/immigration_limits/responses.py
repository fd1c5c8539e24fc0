"""Catalog of response processes X(t) with their analytic moment structure.

Every model exposes the mean ``h``, variance ``v`` and covariance ``f``,
the limit function ``C`` of the covariance, the indices ``beta`` (of ``v``)
and ``rho`` (of ``h``), and a sampler that evaluates one path per
immigrant on an arbitrary time grid.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, NamedTuple, Optional

import numpy as np
from scipy import integrate

from .errors import ParameterError, UnsupportedScenarioError
from .renewal import IncrementLaw, norming_c

COV_FORMS = ("max_power", "product_power", "flat", "fictitious")


class Asym(NamedTuple):
    """``coef * t**exp * log(t)**logpow`` as ``t -> infinity``."""

    coef: float
    exp: float
    logpow: float = 0.0

    def __mul__(self, other: "Asym") -> "Asym":
        return Asym(self.coef * other.coef, self.exp + other.exp, self.logpow + other.logpow)

    def power(self, k: float) -> "Asym":
        return Asym(self.coef**k, self.exp * k, self.logpow * k)

    def integrated(self) -> "Asym":
        # Karamata: int_0^t g ~ t g(t) / (exp + 1)
        if self.exp <= -1:
            raise UnsupportedScenarioError("integral of a function with index <= -1 is not regularly varying")
        return Asym(self.coef / (self.exp + 1.0), self.exp + 1.0, self.logpow)

    def order(self):
        return (self.exp, self.logpow)


def limit_share(a: Optional[Asym], b: Optional[Asym]) -> float:
    """``lim a/(a+b)`` for two regularly varying functions (``None`` means identically zero)."""
    if a is None and b is None:
        raise UnsupportedScenarioError("both terms vanish identically")
    if b is None:
        return 1.0
    if a is None:
        return 0.0
    if a.order() > b.order():
        return 1.0
    if a.order() < b.order():
        return 0.0
    return a.coef / (a.coef + b.coef)


@dataclass(frozen=True)
class CovarianceModel:
    """Limit function ``C`` of index ``beta``.

    ``max_power``: ``(u v w)**beta``; ``product_power``: ``(u w)**(beta/2)``;
    ``flat``: ``C == 1`` (index 0); ``fictitious``: ``u**beta`` on the diagonal, 0 off it.
    """

    form: str
    beta: float

    def __post_init__(self):
        if self.form not in COV_FORMS:
            raise ParameterError(f"unknown covariance form {self.form!r}")
        if self.form == "flat" and self.beta != 0:
            raise ParameterError("flat limit function has index 0")

    @property
    def kind(self) -> str:
        return "fictitious" if self.form == "fictitious" else "genuine"

    def __call__(self, u, w):
        u = np.asarray(u, dtype=float)
        w = np.asarray(w, dtype=float)
        b = self.beta
        if self.form == "max_power":
            return np.maximum(u, w) ** b
        if self.form == "product_power":
            return (u * w) ** (b / 2.0)
        if self.form == "flat":
            return np.ones(np.broadcast(u, w).shape)
        return np.where(u == w, u**b, 0.0)

    def factorized(self, u: float, w: float):
        """Split ``y -> C(u-y, w-y)`` on ``[0,u]`` (``u <= w``) as ``(u-y)**rho * smooth(y)``.

        Returns ``None`` when the integrand vanishes (fictitious, off-diagonal).
        """
        b = self.beta
        if u == w:
            return b, None
        if self.form == "fictitious":
            return None
        if self.form == "max_power":
            return 0.0, lambda y: (w - y) ** b
        if self.form == "product_power":
            return b / 2.0, lambda y: (w - y) ** (b / 2.0)
        return 0.0, None

    def matrix(self, points) -> np.ndarray:
        p = np.asarray(points, dtype=float)
        return self(p[:, None], p[None, :])

    def describe(self) -> dict:
        return {"form": self.form, "beta": self.beta, "kind": self.kind}


def _power(x, e: float, at_zero: float = 0.0):
    """``x**e`` for ``x > 0`` with a fixed value at zero; 0 for negative ``x``."""
    x = np.asarray(x, dtype=float)
    safe = np.where(x > 0, x, 1.0)
    out = np.where(x > 0, safe**e, 0.0)
    return np.where(x == 0, at_zero, out)


class ResponseModel:
    """Base class; subclasses fill in the moment functions and the sampler."""

    model_id: str = ""
    rv_kind: Optional[str] = None
    lattice: Optional[float] = None

    def __init__(self, beta=None, rho=None, covariance=None, coupling="independent", kappa=None):
        self.beta = beta
        self.rho = rho
        self.covariance = covariance
        self.coupling = coupling
        self.kappa = kappa
        if covariance is not None:
            self.rv_kind = covariance.kind

    # moments ----------------------------------------------------------
    def h(self, t):
        raise NotImplementedError

    def v(self, t):
        raise NotImplementedError

    def f(self, s, t):
        raise NotImplementedError

    def _kinks(self):
        return []

    def _quad(self, func, x: float) -> float:
        if x <= 0:
            return 0.0
        pts = [k for k in self._kinks() if 0 < k < x]
        edges = [0.0] + pts + [x]
        if math.isinf(x):
            edges = [0.0] + pts + [max(pts + [1.0]) * 2]
        total = 0.0
        for lo, hi in zip(edges[:-1], edges[1:]):
            total += integrate.quad(lambda y: float(func(y)), lo, hi, limit=200)[0]
        if math.isinf(x):
            total += integrate.quad(lambda y: float(func(y)), edges[-1], np.inf, limit=200)[0]
        return total

    def int_h(self, x: float) -> float:
        return self._quad(self.h, x)

    def int_v(self, x: float) -> float:
        return self._quad(self.v, x)

    # asymptotics ------------------------------------------------------
    def h_asym(self) -> Optional[Asym]:
        raise NotImplementedError

    def v_asym(self) -> Optional[Asym]:
        raise NotImplementedError

    def int_v_asym(self) -> Optional[Asym]:
        va = self.v_asym()
        if va is None:
            return None
        if va.exp < -1:
            return Asym(self.int_v(math.inf), 0.0, 0.0)
        return va.integrated()

    # sampling ---------------------------------------------------------
    def sample(self, times, rng: np.random.Generator, xi=None):
        """Evaluate one independent path per row of ``times`` (``X = 0`` for negative times)."""
        raise NotImplementedError

    def describe(self) -> dict:
        d = {"model_id": self.model_id, "beta": self.beta, "rho": self.rho,
             "rv_kind": self.rv_kind, "coupling": self.coupling}
        if self.kappa is not None:
            d["kappa"] = self.kappa
        if self.covariance is not None:
            d["covariance"] = self.covariance.describe()
        return d

    def __repr__(self):
        return f"{type(self).__name__}({self.describe()})"


class _ScaledLaw:
    """Law of ``kappa * xi``."""

    def __init__(self, law: IncrementLaw, kappa: float):
        self.law = law
        self.kappa = kappa

    def survival(self, t):
        return self.law.survival(np.asarray(t, dtype=float) / self.kappa)

    def sample(self, rng, size=None):
        return self.kappa * self.law.sample(rng, size)


def _eta_index(law) -> Optional[float]:
    """Tail index ``beta`` with ``P{eta>t}`` regularly varying of index ``beta``, if any."""
    base = law.law if isinstance(law, _ScaledLaw) else law
    if base.kind == "pareto":
        return -base.params[0]
    if base.kind == "log_tail":
        return 0.0
    return None


def _eta_kinks(law):
    base = law.law if isinstance(law, _ScaledLaw) else law
    k = law.kappa if isinstance(law, _ScaledLaw) else 1.0
    if base.kind == "pareto":
        return [k * base.params[1]]
    if base.kind == "deterministic":
        return [k * base.params[0]]
    return []


class _IndicatorModel(ResponseModel):
    lattice = 1.0

    def __init__(self, eta_law=None, coupling="independent", kappa=None, xi_law=None):
        if coupling == "scaled":
            if kappa is None or kappa <= 0 or xi_law is None:
                raise ParameterError("scaled coupling needs kappa > 0 and the inter-arrival law")
            eta_law = _ScaledLaw(xi_law, float(kappa))
        elif coupling != "independent":
            raise ParameterError(f"unknown coupling {coupling!r}")
        if eta_law is None:
            raise ParameterError("indicator models need a law for eta")
        self.eta_law = eta_law
        ResponseModel.__init__(self, coupling=coupling, kappa=kappa)

    def G(self, t):
        return self.eta_law.survival(t)

    def _kinks(self):
        return _eta_kinks(self.eta_law)

    def _eta(self, rng, n, xi):
        if self.coupling == "scaled":
            return self.kappa * np.asarray(xi, dtype=float)
        return np.asarray(self.eta_law.sample(rng, n), dtype=float)

    def v(self, t):
        g = self.G(t)
        return np.where(np.asarray(t) < 0, 0.0, g * (1.0 - g))

    def f(self, s, t):
        lo = np.minimum(s, t)
        hi = np.maximum(s, t)
        return np.where(lo < 0, 0.0, (1.0 - self.G(lo)) * self.G(hi))

    def int_v(self, x: float) -> float:
        return self._quad(self.v, x)

    def describe(self):
        d = super().describe()
        base = self.eta_law.law if isinstance(self.eta_law, _ScaledLaw) else self.eta_law
        d["eta_law"] = base.describe()
        return d


class IndicatorSurvival(_IndicatorModel):
    """``X(t) = 1{eta > t}``."""

    model_id = "indicator_survival"

    def __init__(self, beta=None, x_min=1.0, eta_law=None, coupling="independent", kappa=None, xi_law=None):
        if eta_law is None and coupling == "independent":
            if beta is None:
                raise ParameterError("indicator_survival needs beta or eta_law")
            beta = float(beta)
            if not -1.0 < beta <= 0.0:
                raise ParameterError(f"indicator_survival needs beta in (-1,0], got {beta}")
            eta_law = IncrementLaw.log_tail() if beta == 0 else IncrementLaw.pareto(-beta, x_min)
        super().__init__(eta_law, coupling, kappa, xi_law)
        b = _eta_index(self.eta_law)
        if b is None or not -1.0 < b <= 0.0:
            raise ParameterError("indicator_survival needs P{eta>t} regularly varying with index in (-1,0]")
        self.beta = b
        self.rho = b
        self.covariance = CovarianceModel("max_power", b)
        self.rv_kind = "genuine"

    def h(self, t):
        return np.where(np.asarray(t) < 0, 0.0, self.G(t))

    def int_h(self, x: float) -> float:
        law = self.eta_law
        if isinstance(law, IncrementLaw) and law.kind == "pareto":
            a, xm = law.params
            if x <= xm:
                return max(x, 0.0)
            return xm + xm**a * (x ** (1 - a) - xm ** (1 - a)) / (1 - a)
        return self._quad(self.h, x)

    def int_v(self, x: float) -> float:
        law = self.eta_law
        if isinstance(law, IncrementLaw) and law.kind == "pareto":
            a, xm = law.params
            if x <= xm:
                return 0.0
            if 2 * a == 1.0:
                sq = xm * math.log(x / xm)
            else:
                sq = xm ** (2 * a) * (x ** (1 - 2 * a) - xm ** (1 - 2 * a)) / (1 - 2 * a)
            return self.int_h(x) - xm - sq
        return self._quad(self.v, x)

    def h_asym(self):
        return self._tail_asym()

    def v_asym(self):
        return self._tail_asym()

    def _tail_asym(self):
        law = self.eta_law
        base = law.law if isinstance(law, _ScaledLaw) else law
        k = law.kappa if isinstance(law, _ScaledLaw) else 1.0
        if base.kind == "pareto":
            a, xm = base.params
            return Asym((k * xm) ** a, -a, 0.0)
        return Asym(1.0, 0.0, -1.0)

    def sample(self, times, rng, xi=None):
        times = np.asarray(times, dtype=float)
        eta = self._eta(rng, times.shape[0], xi)
        return ((eta[:, None] > times) & (times >= 0)).astype(float)


class IndicatorHit(_IndicatorModel):
    """``X(t) = 1{eta <= t}``."""

    model_id = "indicator_hit"

    def __init__(self, eta_law=None, coupling="independent", kappa=None, xi_law=None):
        super().__init__(eta_law, coupling, kappa, xi_law)
        b = _eta_index(self.eta_law)
        self.rho = 0.0
        if b is not None and -1.0 < b <= 0.0:
            self.beta = b
            self.covariance = CovarianceModel("max_power", b)
            self.rv_kind = "genuine"

    def h(self, t):
        return np.where(np.asarray(t) < 0, 0.0, 1.0 - self.G(t))

    def h_asym(self):
        return Asym(1.0, 0.0, 0.0)

    def v_asym(self):
        law = self.eta_law
        base = law.law if isinstance(law, _ScaledLaw) else law
        k = law.kappa if isinstance(law, _ScaledLaw) else 1.0
        if base.kind == "deterministic":
            return None
        if base.kind == "pareto":
            a, xm = base.params
            return Asym((k * xm) ** a, -a, 0.0)
        if base.kind == "log_tail":
            return Asym(1.0, 0.0, -1.0)
        # exponential and lognormal tails are integrable
        return Asym(0.0, -math.inf, 0.0)

    def int_v_asym(self):
        va = self.v_asym()
        if va is None:
            return None
        if va.exp < -1:
            return Asym(self.int_v(math.inf), 0.0, 0.0)
        return va.integrated()

    def sample(self, times, rng, xi=None):
        times = np.asarray(times, dtype=float)
        eta = self._eta(rng, times.shape[0], xi)
        return ((eta[:, None] <= times) & (times >= 0)).astype(float)


class ScaledVariable(ResponseModel):
    """``X(t) = eta * t**(beta/2)`` with Gaussian ``eta``."""

    model_id = "scaled_variable"

    def __init__(self, beta, eta_mean=0.0, eta_var=1.0):
        beta = float(beta)
        if not beta > -1:
            raise ParameterError(f"scaled_variable needs beta > -1, got {beta}")
        if eta_var <= 0:
            raise ParameterError("eta_var must be positive")
        super().__init__(beta=beta, rho=beta / 2.0, covariance=CovarianceModel("product_power", beta))
        self.eta_mean = float(eta_mean)
        self.eta_var = float(eta_var)

    def g(self, t):
        return _power(t, self.beta / 2.0, at_zero=1.0 if self.beta == 0 else 0.0)

    def h(self, t):
        return self.eta_mean * self.g(t)

    def v(self, t):
        return self.eta_var * self.g(t) ** 2

    def f(self, s, t):
        return self.eta_var * self.g(s) * self.g(t)

    def int_h(self, x):
        e = 1.0 + self.beta / 2.0
        return self.eta_mean * max(x, 0.0) ** e / e

    def int_v(self, x):
        e = 1.0 + self.beta
        return self.eta_var * max(x, 0.0) ** e / e

    def h_asym(self):
        return None if self.eta_mean == 0 else Asym(self.eta_mean, self.beta / 2.0)

    def v_asym(self):
        return Asym(self.eta_var, self.beta)

    def sample(self, times, rng, xi=None):
        times = np.asarray(times, dtype=float)
        eta = self.eta_mean + math.sqrt(self.eta_var) * rng.standard_normal(times.shape[0])
        return eta[:, None] * self.g(times)

    def describe(self):
        d = super().describe()
        d.update(eta_mean=self.eta_mean, eta_var=self.eta_var)
        return d


class OUModulated(ResponseModel):
    """``X(t) = (t+1)**(beta/2) Z(t)`` with ``Z`` a stationary OU process of variance 1/2."""

    model_id = "ou_modulated"

    def __init__(self, beta):
        beta = float(beta)
        if not -1.0 < beta < 0.0:
            raise ParameterError(f"ou_modulated needs beta in (-1,0), got {beta}")
        super().__init__(beta=beta, rho=None, covariance=CovarianceModel("fictitious", beta))

    def h(self, t):
        return np.zeros(np.shape(t))

    def v(self, t):
        t = np.asarray(t, dtype=float)
        return np.where(t < 0, 0.0, 0.5 * (np.maximum(t, 0) + 1.0) ** self.beta)

    def f(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        val = 0.5 * ((np.maximum(s, 0) + 1) * (np.maximum(t, 0) + 1)) ** (self.beta / 2) * np.exp(-np.abs(s - t))
        return np.where((s < 0) | (t < 0), 0.0, val)

    def int_h(self, x):
        return 0.0

    def int_v(self, x):
        e = 1.0 + self.beta
        return ((max(x, 0.0) + 1.0) ** e - 1.0) / (2.0 * e)

    def h_asym(self):
        return None

    def v_asym(self):
        return Asym(0.5, self.beta)

    def sample(self, times, rng, xi=None):
        times = np.asarray(times, dtype=float)
        n, m = times.shape
        order = np.argsort(times, axis=1)
        st = np.take_along_axis(times, order, axis=1)
        z = np.empty((n, m))
        z[:, 0] = math.sqrt(0.5) * rng.standard_normal(n)
        for j in range(1, m):
            decay = np.exp(-(st[:, j] - st[:, j - 1]))
            z[:, j] = decay * z[:, j - 1] + np.sqrt(0.5 * (1.0 - decay**2)) * rng.standard_normal(n)
        out = np.empty_like(z)
        np.put_along_axis(out, order, z, axis=1)
        return np.where(times >= 0, (np.maximum(times, 0) + 1.0) ** (self.beta / 2.0) * out, 0.0)


class ShrinkingBM(ResponseModel):
    """``X(t) = B((t+1)**-alpha)`` for a standard Brownian motion ``B``."""

    model_id = "shrinking_bm"

    def __init__(self, alpha):
        alpha = float(alpha)
        if not 0.0 < alpha < 1.0:
            raise ParameterError(f"shrinking_bm needs alpha in (0,1), got {alpha}")
        super().__init__(beta=-alpha, rho=None, covariance=CovarianceModel("max_power", -alpha))
        self.alpha = alpha

    def _clock(self, t):
        return (np.maximum(np.asarray(t, dtype=float), 0.0) + 1.0) ** (-self.alpha)

    def h(self, t):
        return np.zeros(np.shape(t))

    def v(self, t):
        return np.where(np.asarray(t) < 0, 0.0, self._clock(t))

    def f(self, s, t):
        s = np.asarray(s, dtype=float)
        t = np.asarray(t, dtype=float)
        return np.where((s < 0) | (t < 0), 0.0, self._clock(np.maximum(s, t)))

    def int_h(self, x):
        return 0.0

    def int_v(self, x):
        e = 1.0 - self.alpha
        return ((max(x, 0.0) + 1.0) ** e - 1.0) / e

    def h_asym(self):
        return None

    def v_asym(self):
        return Asym(1.0, -self.alpha)

    def sample(self, times, rng, xi=None):
        times = np.asarray(times, dtype=float)
        n, m = times.shape
        clock = self._clock(times)
        order = np.argsort(clock, axis=1)
        sc = np.take_along_axis(clock, order, axis=1)
        gaps = np.diff(np.concatenate([np.zeros((n, 1)), sc], axis=1), axis=1)
        b = np.cumsum(np.sqrt(np.maximum(gaps, 0.0)) * rng.standard_normal((n, m)), axis=1)
        out = np.empty_like(b)
        np.put_along_axis(out, order, b, axis=1)
        return np.where(times >= 0, out, 0.0)

    def describe(self):
        d = super().describe()
        d["alpha"] = self.alpha
        return d


class DeterministicH(ResponseModel):
    """``X(t) = scale * t**rho``: renewal shot noise with a deterministic response."""

    model_id = "deterministic_h"

    def __init__(self, rho=0.0, scale=1.0):
        rho = float(rho)
        if not rho > -1:
            raise ParameterError(f"deterministic_h needs rho > -1 for local integrability, got {rho}")
        super().__init__(beta=None, rho=rho)
        self.scale = float(scale)
        if rho == 0:
            self.lattice = abs(self.scale) or None

    def h(self, t):
        return self.scale * _power(t, self.rho, at_zero=1.0 if self.rho == 0 else 0.0)

    def v(self, t):
        return np.zeros(np.shape(t))

    def f(self, s, t):
        return np.zeros(np.broadcast(np.asarray(s), np.asarray(t)).shape)

    def int_h(self, x):
        return self.scale * max(x, 0.0) ** (1 + self.rho) / (1 + self.rho)

    def int_v(self, x):
        return 0.0

    def h_asym(self):
        return None if self.scale == 0 else Asym(self.scale, self.rho)

    def v_asym(self):
        return None

    def sample(self, times, rng, xi=None):
        return self.h(times)

    def describe(self):
        d = super().describe()
        d["scale"] = self.scale
        return d


class DriftPlusNoise(ResponseModel):
    """``X(t) = a t**rho + b eta t**(beta/2)`` with standard normal ``eta``.

    Mean and fluctuation carry separate indices ``rho`` and ``beta``, so
    the mixing parameter can sit strictly between 0 and 1.
    """

    model_id = "drift_plus_noise"

    def __init__(self, a=1.0, rho=0.0, b=1.0, beta=0.0):
        beta = float(beta)
        rho = float(rho)
        if not beta > -1:
            raise ParameterError(f"drift_plus_noise needs beta > -1, got {beta}")
        if not rho > -1:
            raise ParameterError(f"drift_plus_noise needs rho > -1, got {rho}")
        if b == 0:
            raise ParameterError("noise amplitude b must be non-zero; use deterministic_h instead")
        form = "flat" if beta == 0 else "product_power"
        super().__init__(beta=beta, rho=rho, covariance=CovarianceModel(form, beta))
        self.a = float(a)
        self.b = float(b)

    def _g(self, t, e):
        return _power(t, e, at_zero=1.0 if e == 0 else 0.0)

    def h(self, t):
        return self.a * self._g(t, self.rho)

    def v(self, t):
        return self.b**2 * self._g(t, self.beta)

    def f(self, s, t):
        return self.b**2 * self._g(s, self.beta / 2) * self._g(t, self.beta / 2)

    def int_h(self, x):
        return self.a * max(x, 0.0) ** (1 + self.rho) / (1 + self.rho)

    def int_v(self, x):
        return self.b**2 * max(x, 0.0) ** (1 + self.beta) / (1 + self.beta)

    def h_asym(self):
        return None if self.a == 0 else Asym(self.a, self.rho)

    def v_asym(self):
        return Asym(self.b**2, self.beta)

    def sample(self, times, rng, xi=None):
        times = np.asarray(times, dtype=float)
        eta = rng.standard_normal(times.shape[0])
        return self.h(times) + self.b * eta[:, None] * self._g(times, self.beta / 2)

    def describe(self):
        d = super().describe()
        d.update(a=self.a, b=self.b)
        return d


MODELS = {
    cls.model_id: cls
    for cls in (IndicatorSurvival, IndicatorHit, ScaledVariable, OUModulated, ShrinkingBM, DeterministicH, DriftPlusNoise)
}


def instantiate(model_id: str, **params) -> ResponseModel:
    try:
        cls = MODELS[model_id]
    except KeyError:
        raise ParameterError(f"unknown model {model_id!r}; expected one of {sorted(MODELS)}") from None
    try:
        return cls(**params)
    except TypeError as exc:
        raise ParameterError(f"bad parameters for {model_id}: {exc}") from None


def eval_moments(model: ResponseModel, s: float, t: float):
    """``(h(t), v(t), f(s, t))``."""
    if s < 0 or t < 0:
        raise ParameterError("moment evaluation needs non-negative times")
    return float(model.h(t)), float(model.v(t)), float(model.f(s, t))


def limit_covariance_C(model: ResponseModel, u: float, w: float) -> float:
    if not (u > 0 and w > 0):
        raise ParameterError("limit function is defined on (0, inf)^2")
    if model.covariance is None:
        raise UnsupportedScenarioError(f"{model.model_id} has no regularly varying covariance")
    return float(model.covariance(u, w))


def c_squared_asym(law: IncrementLaw) -> Asym:
    if math.isfinite(law.sigma2):
        return Asym(law.sigma2, 1.0)
    return Asym(law.ell_star ** (2.0 / law.alpha), 2.0 / law.alpha)


def mixing_parameter(model: ResponseModel, law: IncrementLaw):
    """Limit share of the renewal term: ``("p", value)`` for finite mean, ``("q", value)`` otherwise."""
    ha = model.h_asym()
    if ha is None:
        raise UnsupportedScenarioError(f"{model.model_id} has h identically zero; no non-random centering theorem applies")
    if law.finite_mean:
        if law.alpha <= 1:
            raise UnsupportedScenarioError("finite-mean law outside the alpha in (1,2] domain")
        renewal = c_squared_asym(law) * ha.power(2)
        return "p", limit_share(renewal, model.int_v_asym())
    if law.ell_star is None or not 0 < law.alpha < 1:
        raise UnsupportedScenarioError("infinite-mean case needs a pure power tail with alpha in (0,1)")
    va = model.v_asym()
    noise = None if va is None else va * Asym(law.ell_star, -law.alpha)
    if noise is not None and noise.coef == 0:
        noise = None
    return "q", limit_share(ha.power(2), noise)
