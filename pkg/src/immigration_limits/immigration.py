"""Random process with immigration ``Y(t) = sum_k X_{k+1}(t - S_k) 1{S_k <= t}``.

Each immigrant arriving at ``S_k`` brings its own response path ``X_{k+1}``,
paired with the waiting time ``xi_{k+1} = S_{k+1} - S_k`` (relevant only
for coupled models).
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ParameterError, ResourceError, UnsupportedScenarioError
from .renewal import IncrementLaw, norming_c, simulate_walk, validate_increment_law
from .responses import ResponseModel, mixing_parameter
from .rng import RngLike, StreamSeed, as_generator, as_stream
from .samples import FddSample

CASES = ("prop21", "prop22", "thm21", "thm22")
VARIANCE_SCALES = ("integral", "karamata", "survival")
DEFAULT_BUDGET = 5_000_000


@dataclass(frozen=True)
class Scenario:
    """A law, a response model and the limit theorem whose normalization is applied.

    ``variance_scale`` picks the variance part of the ``thm21`` scale:
    ``integral`` uses ``int_0^t v`` and ``karamata`` its regular-variation
    equivalent ``t v(t) / (1 + beta)``. ``survival`` is for indicator_survival
    only: the whole scale is ``sqrt(t h(t) / mu)`` (``v ~ h`` there) and the
    limit is ``V_beta`` itself, without the ``sqrt((1+beta)/mu)`` factor.
    """

    law: IncrementLaw
    model: ResponseModel
    case: str
    u_grid: tuple
    t: float
    reps: int = 1000
    seed: StreamSeed = field(default_factory=lambda: StreamSeed(0))
    variance_scale: str = "integral"
    budget: float = DEFAULT_BUDGET

    def __post_init__(self):
        object.__setattr__(self, "u_grid", tuple(float(u) for u in self.u_grid))
        object.__setattr__(self, "seed", as_stream(self.seed))
        self.validate()

    @property
    def mixing(self) -> Optional[float]:
        if self.case in ("thm21", "thm22"):
            return mixing_parameter(self.model, self.law)[1]
        return None

    def validate(self) -> None:
        u = np.asarray(self.u_grid)
        if len(u) == 0 or np.any(u <= 0) or np.any(np.diff(u) <= 0):
            raise ParameterError("u_grid must be positive and strictly increasing")
        if not self.t > 0 or self.reps < 1:
            raise ParameterError("need t > 0 and reps >= 1")
        if self.case not in CASES:
            raise ParameterError(f"unknown case {self.case!r}; expected one of {CASES}")
        if self.variance_scale not in VARIANCE_SCALES:
            raise ParameterError(f"unknown variance scale {self.variance_scale!r}")
        validate_increment_law(self.law)
        law, model, case = self.law, self.model, self.case
        a = law.alpha
        if case in ("prop21", "thm21"):
            if not law.finite_mean:
                raise UnsupportedScenarioError(f"{case} needs a finite-mean law (alpha in (1,2])")
        elif not (law.kind == "pareto" and 0 < a < 1):
            raise UnsupportedScenarioError(f"{case} needs a pareto law with alpha in (0,1)")
        if self.variance_scale == "survival" and (case != "thm21" or model.model_id != "indicator_survival"):
            raise UnsupportedScenarioError("the survival scale applies to thm21 with indicator_survival only")
        b = model.beta
        if case == "prop21" and b is not None and b <= -1:
            raise UnsupportedScenarioError("prop21 needs beta > -1")
        if case == "prop22" and b is not None and b < -a:
            raise UnsupportedScenarioError("prop22 needs beta >= -alpha")
        if case == "thm21":
            p = self.mixing
            if 0 < p < 1 and model.coupling != "independent":
                raise UnsupportedScenarioError("p in (0,1) requires X independent of xi")
            if p > 0 and not model.rho > -1.0 / a:
                raise UnsupportedScenarioError(f"p > 0 requires rho > -1/alpha, got rho={model.rho}")
            if p < 1 and (b is None or b <= -1):
                raise UnsupportedScenarioError("p < 1 requires v regularly varying with beta > -1")
        if case == "thm22":
            q = self.mixing
            if 0 < q < 1 and model.coupling != "independent":
                raise UnsupportedScenarioError("q in (0,1) requires X independent of xi")
            if q > 0 and not model.rho >= -a:
                raise UnsupportedScenarioError(f"q > 0 requires rho >= -alpha, got rho={model.rho}")
            if q < 1 and (b is None or b < -a):
                raise UnsupportedScenarioError("q < 1 requires v regularly varying with beta >= -alpha")
        expected = law.expected_count(u[-1] * self.t)
        if expected > self.budget:
            raise ResourceError(f"about {expected:.3g} immigrants per replication exceeds the budget {self.budget:.3g}")

    def describe(self) -> dict:
        d = {"law": self.law.describe(), "model": self.model.describe(), "case": self.case,
             "u_grid": list(self.u_grid), "t": self.t, "reps": self.reps,
             "seed": {"root": self.seed.root, "path": list(self.seed.path)},
             "variance_scale": self.variance_scale}
        if self.case in ("thm21", "thm22"):
            d["p" if self.case == "thm21" else "q"] = self.mixing
        return d


def _replicate(law: IncrementLaw, model: ResponseModel, t: float, u: np.ndarray, gen, budget: float):
    """One realization of ``(Y(ut), sum_k h(ut - S_k))`` over the grid."""
    path = simulate_walk(law, float(u[-1] * t), gen)
    arrivals = path.arrivals
    if len(arrivals) > budget:
        raise ResourceError(f"{len(arrivals)} immigrants exceed the budget {budget:.3g}")
    times = u[None, :] * t - arrivals[:, None]
    x = model.sample(times, gen, xi=path.increments)
    alive = times >= 0
    y = np.where(alive, x, 0.0).sum(axis=0)
    mean_part = np.where(alive, model.h(times), 0.0).sum(axis=0)
    return y, mean_part


def _grid(u_grid) -> np.ndarray:
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    if np.any(u <= 0) or np.any(np.diff(u) <= 0):
        raise ParameterError("u_grid must be positive and strictly increasing")
    return u


def simulate_Y(scenario: Scenario, t: float, u_grid, stream: RngLike) -> np.ndarray:
    y, _ = _replicate(scenario.law, scenario.model, t, _grid(u_grid), as_generator(stream), scenario.budget)
    return y


def decompose(scenario: Scenario, t: float, u_grid, stream: RngLike):
    """``(Y - sum h(ut - S_k), sum h(ut - S_k))`` from one realization."""
    y, mean_part = _replicate(scenario.law, scenario.model, t, _grid(u_grid), as_generator(stream), scenario.budget)
    return y - mean_part, mean_part


def _rows(args):
    law, model, t, u, seed, budget, start, stop = args
    ys = np.empty((stop - start, len(u)))
    ms = np.empty_like(ys)
    for i, r in enumerate(range(start, stop)):
        ys[i], ms[i] = _replicate(law, model, t, u, seed.derive(r).generator(), budget)
    return ys, ms


def raw_replications(scenario: Scenario, jobs: int = 1):
    """``(Y, mean_part)`` matrices, one row per replication stream ``seed.derive(r)``."""
    u = np.asarray(scenario.u_grid)
    n = scenario.reps
    chunk = max(1, math.ceil(n / (4 * max(jobs, 1))))
    tasks = [(scenario.law, scenario.model, scenario.t, u, scenario.seed, scenario.budget, s, min(s + chunk, n))
             for s in range(0, n, chunk)]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            parts = list(ex.map(_rows, tasks))
    else:
        parts = [_rows(task) for task in tasks]
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def thm21_scale(scenario: Scenario) -> float:
    model, law, t = scenario.model, scenario.law, scenario.t
    if scenario.variance_scale == "survival":
        return math.sqrt(t * float(model.h(t)) / law.mu)
    if scenario.variance_scale == "karamata":
        var = t * float(model.v(t)) / (1.0 + model.beta) if model.beta is not None else 0.0
    else:
        var = model.int_v(t)
    return math.sqrt(var + norming_c(law, t) ** 2 * float(model.h(t)) ** 2)


def normalization(scenario: Scenario) -> dict:
    """Centering and scale applied by :func:`normalized_fdd_sample`."""
    model, law, t, case = scenario.model, scenario.law, scenario.t, scenario.case
    u = np.asarray(scenario.u_grid)
    v_t = float(model.v(t))
    if case == "prop21":
        return {"centering": "random", "scale": math.sqrt(t * v_t / law.mu)}
    if case == "prop22":
        return {"centering": "random", "scale": math.sqrt(v_t / float(law.survival(t)))}
    if case == "thm21":
        center = [model.int_h(x) / law.mu for x in u * t]
        return {"centering": center, "scale": thm21_scale(scenario), "p": scenario.mixing}
    tail = float(law.survival(t))
    return {"centering": 0.0, "scale": math.sqrt(v_t * tail + float(model.h(t)) ** 2) / tail,
            "q": scenario.mixing}


def normalize(scenario: Scenario, y: np.ndarray, mean_part: np.ndarray):
    """Apply the case normalization to raw ``(Y, mean_part)`` matrices."""
    desc = normalization(scenario)
    scale = desc["scale"]
    if scenario.case in ("prop21", "prop22"):
        if scale == 0:
            return np.zeros_like(y), desc
        return (y - mean_part) / scale, desc
    return (y - np.asarray(desc["centering"])) / scale, desc


def normalized_fdd_sample(scenario: Scenario, jobs: int = 1) -> FddSample:
    y, mean_part = raw_replications(scenario, jobs)
    values, desc = normalize(scenario, y, mean_part)
    lattice = None
    if scenario.case in ("thm21", "thm22") and scenario.model.lattice and desc["scale"] > 0:
        lattice = scenario.model.lattice / desc["scale"]
    return FddSample(values, np.asarray(scenario.u_grid), scenario.t, scenario.case, desc, lattice)
