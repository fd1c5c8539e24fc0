"""Comparison of simulated finite-dimensional samples with their limits, and convergence studies."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Optional, Union

import numpy as np
from scipy import integrate, stats

from .errors import ParameterError, UnsupportedScenarioError
from .immigration import Scenario, normalized_fdd_sample
from .limits import LimitFddSpec, V_cov_matrix, factorize_psd, sample_limit_fdd
from .rng import StreamLike, as_stream
from .samples import FddSample
from .stats import cf_sup_gap, energy_test, gaussian_cf, ks_one_sample, ks_two_sample, standard_error_cov

P_THRESHOLD = 0.01


@dataclass(frozen=True)
class GaussianReference:
    """Closed-form centred-or-not Gaussian law on the grid."""

    u_grid: tuple
    mean: tuple
    cov: tuple

    @classmethod
    def build(cls, u_grid, mean, cov) -> "GaussianReference":
        return cls(tuple(map(float, u_grid)), tuple(map(float, mean)), tuple(map(tuple, np.asarray(cov, dtype=float))))

    @property
    def cov_matrix(self) -> np.ndarray:
        return np.array(self.cov)

    def sample(self, reps: int, stream: StreamLike) -> FddSample:
        L = factorize_psd(self.cov_matrix)
        z = as_stream(stream).generator().standard_normal((reps, len(self.u_grid)))
        return FddSample(np.array(self.mean) + z @ L.T, np.array(self.u_grid), case="gaussian")


Reference = Union[FddSample, GaussianReference]


def _same_grid(a, b) -> bool:
    a, b = np.asarray(a, dtype=float), np.asarray(b, dtype=float)
    return a.shape == b.shape and bool(np.allclose(a, b))


@dataclass
class VerificationReport:
    u_grid: list
    marginals: list = field(default_factory=list)
    covariances: list = field(default_factory=list)
    ks: list = field(default_factory=list)
    energy: dict = field(default_factory=dict)
    cf_gap: float = 0.0
    verdicts: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, default=float)

    def to_text(self) -> str:
        lines = [f"{'u':>8} {'mean':>10} {'ref':>10} {'var':>10} {'ref':>10} {'KS D':>8} {'KS p':>8}"]
        for m, k in zip(self.marginals, self.ks):
            lines.append(f"{m['u']:8.3g} {m['mean']:10.4f} {m['ref_mean']:10.4f} {m['var']:10.4f} "
                         f"{m['ref_var']:10.4f} {k['stat']:8.4f} {k['p']:8.4f}")
        for c in self.covariances:
            lines.append(f"cov({c['u']:g},{c['w']:g}) = {c['cov']:.4f}  ref {c['ref']:.4f}  se {c['se']:.4f}")
        lines.append(f"energy {self.energy.get('stat', float('nan')):.5f}  p {self.energy.get('p', float('nan')):.4f}")
        lines.append(f"cf sup-gap {self.cf_gap:.4f}")
        lines.extend(f"{k:<24} {'PASS' if v else 'FAIL'}" for k, v in self.verdicts.items())
        return "\n".join(lines)


def _reference_moments(reference: Reference):
    if isinstance(reference, GaussianReference):
        return np.array(reference.mean), reference.cov_matrix
    return reference.values.mean(axis=0), np.atleast_2d(np.cov(reference.values.T))


def compare_fdds(empirical: FddSample, reference: Reference, stream: StreamLike = 0,
                 n_perm: int = 500, energy: bool = True) -> VerificationReport:
    """Moment gaps, marginal KS, joint energy test and CF gap between a sample and a reference law."""
    if not _same_grid(empirical.u_grid, reference.u_grid):
        raise ParameterError("u_grids of the sample and the reference differ")
    root = as_stream(stream)
    x = empirical.values
    ref_mean, ref_cov = _reference_moments(reference)
    emp_cov = np.atleast_2d(np.cov(x.T))
    n = len(x)
    rep = VerificationReport(u_grid=list(map(float, empirical.u_grid)))
    gaussian = isinstance(reference, GaussianReference)
    for j, u in enumerate(empirical.u_grid):
        rep.marginals.append({"u": float(u), "mean": float(x[:, j].mean()), "ref_mean": float(ref_mean[j]),
                              "mean_se": float(x[:, j].std(ddof=1) / math.sqrt(n)),
                              "var": float(emp_cov[j, j]), "ref_var": float(ref_cov[j, j]),
                              "var_se": standard_error_cov(x, j, j)})
        if gaussian:
            sd = math.sqrt(ref_cov[j, j])
            cdf = stats.norm(ref_mean[j], sd).cdf
            d, p = ks_one_sample(x[:, j], cdf, empirical.lattice, root.derive(j).generator())
        else:
            d, p = ks_two_sample(x[:, j], reference.values[:, j], empirical.lattice, reference.lattice,
                                 root.derive(j).generator())
        rep.ks.append({"u": float(u), "stat": d, "p": p})
    m = len(empirical.u_grid)
    for i in range(m):
        for j in range(i + 1, m):
            rep.covariances.append({"u": float(empirical.u_grid[i]), "w": float(empirical.u_grid[j]),
                                    "cov": float(emp_cov[i, j]), "ref": float(ref_cov[i, j]),
                                    "se": standard_error_cov(x, i, j)})
    if gaussian:
        ref_sample = reference.sample(n, root.derive(1000))
        rep.cf_gap = cf_sup_gap(x, ref_cf=gaussian_cf(ref_mean, ref_cov))
    else:
        ref_sample = reference
        rep.cf_gap = cf_sup_gap(x, ref_sample.values)
    if energy:
        stat, p = energy_test(x, ref_sample.values, n_perm, root.derive(1001).generator())
        rep.energy = {"stat": stat, "p": p, "n_perm": n_perm}
    rep.thresholds = {"ks_p": P_THRESHOLD, "energy_p": P_THRESHOLD}
    rep.verdicts = {f"ks_u={k['u']:g}": k["p"] > P_THRESHOLD for k in rep.ks}
    if energy:
        rep.verdicts["energy"] = rep.energy["p"] > P_THRESHOLD
    return rep


def _frac_gaussian_cov(rho: float, u: np.ndarray) -> np.ndarray:
    """Covariance of ``int_0^u (u-y)**rho dB(y)`` for Brownian ``B``."""
    m = len(u)
    M = np.empty((m, m))
    for i in range(m):
        for j in range(i, m):
            a, b = min(u[i], u[j]), max(u[i], u[j])
            if a == b:
                M[i, j] = a ** (2 * rho + 1) / (2 * rho + 1)
            else:
                M[i, j] = integrate.quad(lambda y: (b - y) ** rho, 0, a, weight="alg", wvar=(0, rho),
                                         epsrel=1e-10)[0]
            M[j, i] = M[i, j]
    return M


def gaussian_reference(spec: LimitFddSpec) -> Optional[GaussianReference]:
    """Closed-form Gaussian law of the limit when it is Gaussian, else ``None``."""
    u = np.array(spec.u_grid)
    if spec.case == "V_beta":
        return GaussianReference.build(u, np.zeros(len(u)), V_cov_matrix(spec.C, u))
    if spec.case == "thm21_mix" and (spec.p == 0 or spec.alpha == 2.0):
        cov = np.zeros((len(u), len(u)))
        if spec.p < 1:
            cov += (1 - spec.p) * (1 + spec.C.beta) / spec.mu * V_cov_matrix(spec.C, u)
        if spec.p > 0:
            cov += spec.p * spec.mu**-3 * _frac_gaussian_cov(spec.rho, u)
        return GaussianReference.build(u, np.zeros(len(u)), cov)
    return None


def reference_for(scenario: Scenario) -> LimitFddSpec:
    """The limit named by the scenario's theorem case."""
    model, law, u = scenario.model, scenario.law, scenario.u_grid
    case = scenario.case
    if case == "prop21":
        if model.covariance is None:
            raise UnsupportedScenarioError(f"{model.model_id} has no limit function")
        return LimitFddSpec("V_beta", u, C=model.covariance)
    if case == "prop22":
        return LimitFddSpec("Z", u, alpha=law.alpha, C=model.covariance)
    if case == "thm21" and scenario.variance_scale == "survival":
        return LimitFddSpec("V_beta", u, C=model.covariance)
    if case == "thm21":
        return LimitFddSpec("thm21_mix", u, alpha=law.alpha, rho=model.rho, p=scenario.mixing, mu=law.mu,
                            C=model.covariance)
    return LimitFddSpec("thm22_mix", u, alpha=law.alpha, rho=model.rho, q=scenario.mixing, C=model.covariance)


@dataclass
class TrendReport:
    rows: list  # (t, statistic, value, target)
    reports: dict
    trend_ok: bool
    final_ok: bool

    @property
    def passed(self) -> bool:
        return self.trend_ok and self.final_ok

    def to_csv(self, target) -> None:
        own = isinstance(target, str) or hasattr(target, "__fspath__")
        fh = open(target, "w", newline="") if own else target
        try:
            w = csv.writer(fh)
            w.writerow(["t", "statistic", "value", "target"])
            for r in self.rows:
                w.writerow([repr(r[0]), r[1], repr(r[2]), repr(r[3])])
        finally:
            if own:
                fh.close()


def convergence_study(template: Scenario, t_list, reference: Optional[Reference] = None,
                      ref_reps: Optional[int] = None, stream: StreamLike = 0, jobs: int = 1,
                      n_perm: int = 500) -> TrendReport:
    """Normalized samples along ``t_list`` compared with one reference sample or law.

    The primary statistic is the CF sup-gap; it must not increase by more
    than two noise units between consecutive ``t`` and the final energy
    test must have ``p > 0.01``.
    """
    t_list = [float(t) for t in t_list]
    if any(b <= a for a, b in zip(t_list, t_list[1:])):
        raise ParameterError("t_list must be increasing")
    root = as_stream(stream)
    if reference is None:
        spec = reference_for(template)
        reference = gaussian_reference(spec) or sample_limit_fdd(spec, ref_reps or template.reps, root.derive(0))
    if not _same_grid(reference.u_grid, template.u_grid):
        raise ParameterError("reference grid does not match the scenario grid")
    rows, reports = [], {}
    for i, t in enumerate(t_list):
        sc = replace(template, t=t)
        rep = compare_fdds(normalized_fdd_sample(sc, jobs), reference, root.derive(i + 1), n_perm)
        reports[t] = rep
        rows.append((t, "cf_gap", rep.cf_gap, 0.0))
        rows.append((t, "energy_p", rep.energy["p"], P_THRESHOLD))
    noise = 2.0 / math.sqrt(template.reps)
    gaps = [reports[t].cf_gap for t in t_list]
    trend_ok = all(b <= a + noise for a, b in zip(gaps, gaps[1:]))
    final_ok = reports[t_list[-1]].energy["p"] > P_THRESHOLD
    return TrendReport(rows, reports, trend_ok, final_ok)
