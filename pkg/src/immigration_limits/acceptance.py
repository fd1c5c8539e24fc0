"""Acceptance suite: every criterion at its stated sample size and tolerance, with fixed seeds."""
from __future__ import annotations

import json
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy import stats

from .asymptotics import (FunctionSpec, infinite_mean_renewal_limit, karamata_ratio, poisson_window_integral,
                          sgibnev_constant, sgibnev_ratio)
from .errors import NumericalError
from .immigration import Scenario, decompose, normalized_fdd_sample, simulate_Y
from .lab import compare_fdds, gaussian_reference, reference_for
from .limits import (LimitFddSpec, V_cov_matrix, Z_variance, fractional_integral_inverse, inverse_mean,
                     inverse_path_draws, inverse_power_mean, invert_subordinator, sample_inverse_marginal,
                     sample_limit_fdd, sample_Z, simulate_subordinator_to_level)
from .renewal import IncrementLaw, norming_c, sample_first_passage
from .responses import CovarianceModel, instantiate
from .rng import StreamSeed
from .stats import cf_sup_gap, energy_test, ks_one_sample, ks_two_sample

D_HALF = 2.0 / math.pi


@dataclass
class Check:
    label: str
    value: float
    threshold: str
    ok: bool


@dataclass
class CriterionResult:
    number: int
    name: str
    checks: list = field(default_factory=list)
    seconds: float = 0.0
    error: Optional[str] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.error is None and bool(self.checks) and all(c.ok for c in self.checks)

    def add(self, label: str, value: float, threshold: str, ok: bool) -> None:
        self.checks.append(Check(label, float(value), threshold, bool(ok)))

    def note(self, text: str) -> None:
        self.notes.append(text)

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        worst = "; ".join(f"{c.label}={c.value:.4g} ({c.threshold})" for c in self.checks if not c.ok)
        extra = f" [{worst}]" if worst else ""
        if self.error:
            extra = f" [error: {self.error}]"
        return f"criterion {self.number:2d} {status}  {self.name} ({self.seconds:.1f}s){extra}"


@dataclass
class AcceptanceConfig:
    seed: int = 7
    only: Optional[tuple] = None


def _rel(x: float, target: float) -> float:
    return abs(x / target - 1.0)


class _Suite:
    def __init__(self, seed: int):
        self.seed = seed
        self._cache = {}

    def stream(self, n: int, *path) -> StreamSeed:
        return StreamSeed(self.seed, (n,) + path)

    def path_draws(self):
        if "path" not in self._cache:
            self._cache["path"] = inverse_path_draws(0.5, 1.0, 10_000, 2**14, self.stream(1, 1))
        return self._cache["path"]

    # -- 1 ------------------------------------------------------------------
    def c1(self, r: CriterionResult):
        marg = sample_inverse_marginal(0.5, 1.0, self.stream(1, 0), 10**6)
        r.add("marginal mean rel gap", _rel(marg.mean(), D_HALF), "< 0.01", _rel(marg.mean(), D_HALF) < 0.01)
        path = self.path_draws()
        r.add("path mean rel gap", _rel(path.mean(), D_HALF), "< 0.05", _rel(path.mean(), D_HALF) < 0.05)

    def c2(self, r: CriterionResult):
        marg = sample_inverse_marginal(0.5, 1.0, self.stream(2), 10_000)
        _, p = ks_two_sample(self.path_draws(), marg)
        r.add("KS p", p, "> 0.01", p > 0.01)

    def c3(self, r: CriterionResult):
        for k, (a, b, u) in enumerate([(0.5, 0.0, 1.0), (0.5, 0.5, 1.0), (0.7, -0.3, 2.0)]):
            s = sample_Z(a, CovarianceModel("max_power", b), [u], 10_000, self.stream(3, k), return_conditional=True)
            target = Z_variance(a, b, u)
            raw = float(np.mean(s.values**2))
            r.add(f"E Z^2 rel gap (a={a},b={b},u={u})", _rel(raw, target), "< 0.05", _rel(raw, target) < 0.05)
            rb = float(s.extras["conditional_cov"].mean())
            r.add(f"conditional-variance mean rel gap (a={a},b={b},u={u})", _rel(rb, target), "< 0.05",
                  _rel(rb, target) < 0.05)

    def c4(self, r: CriterionResult):
        s = sample_limit_fdd(LimitFddSpec("frac_inverse", (1.0,), alpha=0.5, rho=1.0), 10_000, self.stream(4))
        target = 4.0 / (3.0 * math.pi)
        gap = _rel(s.values.mean(), target)
        r.add("E Q rel gap", gap, "< 0.05", gap < 0.05)

    # -- 5 ------------------------------------------------------------------
    def c5(self, r: CriterionResult):
        # normalization sqrt(t P{eta>t} / mu) with V_beta as the limit for the survival indicator;
        # both t share one stream so the trend is not masked by independent noise
        u = (0.5, 1.0, 2.0)
        model = instantiate("indicator_survival", beta=-0.5)
        law = IncrementLaw.exponential(1.0)
        target = V_cov_matrix(model.covariance, u)
        gaps = {}
        for t in (1e2, 1e3):
            sc = Scenario(law, model, "thm21", u, t, 10_000, self.stream(5), variance_scale="survival")
            sample = normalized_fdd_sample(sc)
            gaps[t] = np.abs(np.cov(sample.values.T) / target - 1.0)
        r.add("max cov rel gap t=1e3", gaps[1e3].max(), "< 0.10", gaps[1e3].max() < 0.10)
        r.add("max cov rel gap decrease", gaps[1e2].max() - gaps[1e3].max(), "> 0", gaps[1e3].max() < gaps[1e2].max())
        ref = gaussian_reference(reference_for(sc))
        rep = compare_fdds(sample, ref, self.stream(5, 9), energy=False)
        for k in rep.ks:
            r.add(f"KS p u={k['u']:g}", k["p"], "> 0.01", k["p"] > 0.01)

    def c6(self, r: CriterionResult):
        u = (0.5, 1.0)
        law = IncrementLaw.exponential(1.0)
        model = instantiate("indicator_hit", eta_law=IncrementLaw.exponential(1.0))
        sc = Scenario(law, model, "thm21", u, 1e3, 10_000, self.stream(6))
        sample = normalized_fdd_sample(sc)
        for j, x in enumerate(u):
            col = sample.values[:, j]
            gap = _rel(col.var(ddof=1), x)
            r.add(f"variance rel gap u={x:g}", gap, "< 0.10", gap < 0.10)
            _, p = ks_one_sample(col, stats.norm(0, math.sqrt(x)).cdf, sample.lattice, self.stream(6, j).generator())
            r.add(f"KS p u={x:g}", p, "> 0.01", p > 0.01)
            # diagnostic only: with exponential arrivals E Y(ut) exceeds the printed centering by h(ut)
            shifted = col - float(model.h(x * sc.t)) / sample.normalization["scale"]
            _, p_shift = ks_one_sample(shifted, stats.norm(0, math.sqrt(x)).cdf, sample.lattice,
                                       self.stream(6, j).generator())
            r.note(f"KS p u={x:g} after removing the exact renewal offset: {p_shift:.3g}")

    def c7(self, r: CriterionResult):
        law = IncrementLaw.exponential(1.0)
        t = 1e4
        nu = sample_first_passage(law, [t], 2000, self.stream(7, 0))[:, 0]
        scale = law.mu**-1.5 * norming_c(law, t)
        z = (nu - t / law.mu) / scale
        _, p = ks_one_sample(z, stats.norm.cdf, 1.0 / scale, self.stream(7, 1).generator())
        r.add("FLT KS p (exponential)", p, "> 0.01", p > 0.01)
        law = IncrementLaw.pareto(0.5, 1.0)
        t = 1e3
        tail = float(law.survival(t))
        scaled = tail * sample_first_passage(law, [t], 2000, self.stream(7, 2))[:, 0]
        ref = sample_inverse_marginal(0.5, 1.0, self.stream(7, 3), 2000)
        _, p = ks_two_sample(scaled, ref, tail, None, self.stream(7, 4).generator())
        r.add("inverse-subordinator KS p (pareto 0.5)", p, "> 0.01", p > 0.01)

    def c8(self, r: CriterionResult):
        model = instantiate("ou_modulated", beta=-0.5)
        sc = Scenario(IncrementLaw.exponential(1.0), model, "prop21", (1.0, 2.0), 500.0, 10_000, self.stream(8))
        s = normalized_fdd_sample(sc)
        corr = float(np.corrcoef(s.values.T)[0, 1])
        r.add("|corr(u=1,u=2)|", abs(corr), "< 0.05", abs(corr) < 0.05)

    def c9(self, r: CriterionResult):
        u = (0.5, 1.0, 2.0)
        model = instantiate("drift_plus_noise", a=1.0, rho=-0.25, b=1.0, beta=0.0)
        law = IncrementLaw.pareto(0.5, 1.0)
        gaps = {}
        for i, t in enumerate((1e2, 1e3)):
            sc = Scenario(law, model, "thm22", u, t, 5000, self.stream(9, i))
            if i == 0:
                spec = reference_for(sc)
                r.add("q", sc.mixing, "= 0.5", abs(sc.mixing - 0.5) < 1e-12)
                ref = sample_limit_fdd(spec, 5000, self.stream(9, 100))
            emp = normalized_fdd_sample(sc)
            gaps[t] = cf_sup_gap(emp.values, ref.values)
        _, p = energy_test(emp.values, ref.values, 500, self.stream(9, 200).generator())
        r.add("energy p t=1e3", p, "> 0.01", p > 0.01)
        r.add("CF gap decrease", gaps[1e2] - gaps[1e3], "> 0", gaps[1e3] < gaps[1e2])

    def c10(self, r: CriterionResult):
        for label, g, rho, a in [("y^2", FunctionSpec.power(2.0), 2.0, 1.0),
                                 ("sqrt y", FunctionSpec.power(0.5), 0.5, 0.0),
                                 ("sqrt y (1+1/log y)", FunctionSpec.power_times_log(0.5), 0.5, math.e)]:
            k = karamata_ratio(g, rho, a, 1e6)
            r.add(f"Karamata {label}", abs(k - 1), "< 0.02", abs(k - 1) < 0.02)
        law = IncrementLaw.exponential(1.0)
        phi = FunctionSpec.power(0.5)
        for i, (r1, r2) in enumerate([(0.0, 1.0), (0.5, 1.0)]):
            c = sgibnev_ratio(phi, 0.5, law, r1, r2, 1e4, 400, self.stream(10, i))
            r.add(f"Sgibnev [{r1},{r2}]", abs(c.statistic - 1), "< 0.03", abs(c.statistic - 1) < 0.03)
            exact_ratio = poisson_window_integral(phi, r1, r2, 1e4) / sgibnev_constant(phi, 0.5, law, r1, r2, 1e4)
            z = abs(c.statistic - exact_ratio) / c.std_err
            r.add(f"Sgibnev [{r1},{r2}] vs exact Poisson (SE units)", z, "< 4", z < 4)
        for i, g in enumerate((0.0, 1.0)):
            c = infinite_mean_renewal_limit(FunctionSpec.power(g), g, 0.5, 1e3, 10_000, self.stream(10, 10 + i))
            r.add(f"infinite-mean limit gamma={g:g}", c.rel_gap, "< 0.10", c.rel_gap < 0.10)

    def c11(self, r: CriterionResult):
        # PSD of every catalog limit function on an 8-point grid
        grid = np.geomspace(0.1, 10, 8)
        worst = math.inf
        for C in [CovarianceModel("max_power", b) for b in (-0.9, -0.5, 0.0)] + \
                 [CovarianceModel("product_power", b) for b in (-0.5, 0.5, 2.0)] + \
                 [CovarianceModel("fictitious", -0.5), CovarianceModel("flat", 0.0)]:
            worst = min(worst, float(np.linalg.eigvalsh(C.matrix(grid)).min()))
            try:
                V_cov_matrix(C, grid)
            except NumericalError:
                worst = -math.inf
        r.add("min eigenvalue of C matrices", worst, ">= -1e-10", worst >= -1e-10)
        # decomposition identity
        law = IncrementLaw.exponential(1.0)
        worst_gap = 0.0
        for k, (mid, params) in enumerate([("indicator_survival", {"beta": -0.5}),
                                           ("scaled_variable", {"beta": 0.5, "eta_mean": 1.0}),
                                           ("shrinking_bm", {"alpha": 0.5})]):
            sc = Scenario(law, instantiate(mid, **params), "prop21", (0.5, 1.0, 2.0), 200.0, 1, self.stream(11, k))
            mart, mean = decompose(sc, 200.0, sc.u_grid, self.stream(11, k).generator())
            y = simulate_Y(sc, 200.0, sc.u_grid, self.stream(11, k).generator())
            worst_gap = max(worst_gap, float(np.max(np.abs(mart + mean - y) / np.maximum(np.abs(y), 1.0))))
        r.add("decomposition identity gap", worst_gap, "<= 1e-10", worst_gap <= 1e-10)
        # monotone paths
        mono = True
        for k in range(20):
            path = simulate_subordinator_to_level(0.5, 2.0, 1024, self.stream(11, 100, k).generator())
            s = np.linspace(0, 2.0, 50, endpoint=False)
            q = fractional_integral_inverse(0.5, 0.5, np.linspace(0.1, 2.0, 20), path)
            mono &= bool(np.all(np.diff(path.values) >= 0) and np.all(np.diff(invert_subordinator(path, s)) >= 0)
                         and np.all(np.diff(q) >= 0))
        r.add("monotone subordinator/inverse/Q paths", float(mono), "= 1", mono)
        # bit-identical reruns
        a = sample_Z(0.5, CovarianceModel("max_power", 0.0), [0.5, 1.0], 50, self.stream(11, 200)).values
        b = sample_Z(0.5, CovarianceModel("max_power", 0.0), [0.5, 1.0], 50, self.stream(11, 200)).values
        same = bool(np.array_equal(a, b))
        r.add("bit-identical rerun", float(same), "= 1", same)
        # KS null calibration
        pv = []
        for k in range(200):
            g = self.stream(11, 300, k).generator()
            pv.append(stats.ks_2samp(g.standard_normal(500), g.standard_normal(500)).pvalue)
        frac = float(np.mean(np.array(pv) < 0.05))
        r.add("KS null fraction below 0.05", frac, "in [0.01, 0.12]", 0.01 <= frac <= 0.12)


CRITERIA = {
    1: ("inverse-subordinator mean", "c1"),
    2: ("path inversion vs marginal formula", "c2"),
    3: ("Z second moment", "c3"),
    4: ("Q integral mean", "c4"),
    5: ("indicator_survival, finite mean, p=0", "c5"),
    6: ("indicator_hit, finite mean, p=1", "c6"),
    7: ("renewal FLT endpoints", "c7"),
    8: ("OU white noise", "c8"),
    9: ("infinite-mean mixture q=0.5", "c9"),
    10: ("renewal-calculus lemmas", "c10"),
    11: ("property suite", "c11"),
}


def run_criterion(number: int, seed: int = 7, suite: Optional[_Suite] = None) -> CriterionResult:
    suite = suite or _Suite(seed)
    name, method = CRITERIA[number]
    res = CriterionResult(number, name)
    start = time.perf_counter()
    try:
        getattr(suite, method)(res)
    except Exception as exc:  # failures are reported, never raised
        res.error = f"{type(exc).__name__}: {exc}"
    res.seconds = time.perf_counter() - start
    return res


def run_acceptance_suite(config: Optional[AcceptanceConfig] = None, echo: Optional[Callable] = None) -> dict:
    config = config or AcceptanceConfig()
    suite = _Suite(config.seed)
    numbers = sorted(config.only) if config.only else sorted(CRITERIA)
    results = []
    for n in numbers:
        res = run_criterion(n, config.seed, suite)
        results.append(res)
        if echo:
            echo(res.line())
    return {
        "seed": config.seed,
        "all_passed": all(r.passed for r in results),
        "criteria": [dict(asdict(r), passed=r.passed) for r in results],
    }


def summary_json(summary: dict) -> str:
    return json.dumps(summary, indent=2)
