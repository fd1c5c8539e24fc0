import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from immigration_limits.errors import ParameterError, UnsupportedScenarioError
from immigration_limits.renewal import IncrementLaw
from immigration_limits.responses import (
    MODELS,
    Asym,
    CovarianceModel,
    eval_moments,
    instantiate,
    limit_covariance_C,
    limit_share,
    mixing_parameter,
)
from immigration_limits.rng import StreamSeed
from immigration_limits.stats import standard_error_cov

EXP1 = IncrementLaw.exponential(1.0)

CATALOG = {
    "indicator_survival": dict(beta=-0.5),
    "indicator_survival_log": dict(beta=0.0),
    "indicator_hit": dict(eta_law=IncrementLaw.exponential(1.0)),
    "scaled_variable": dict(beta=0.5, eta_mean=1.0, eta_var=2.0),
    "ou_modulated": dict(beta=-0.5),
    "shrinking_bm": dict(alpha=0.5),
    "deterministic_h": dict(rho=0.5),
    "drift_plus_noise": dict(a=1.0, rho=-0.25, b=1.5, beta=0.4),
}


def build(name):
    return instantiate(name.replace("_log", ""), **CATALOG[name])


def test_registry_complete():
    assert set(MODELS) == {n.replace("_log", "") for n in CATALOG}


def test_unknown_model_and_bad_params():
    with pytest.raises(ParameterError):
        instantiate("nope")
    with pytest.raises(ParameterError):
        instantiate("indicator_survival", beta=0.5)
    with pytest.raises(ParameterError):
        instantiate("indicator_survival", beta=-1.0)
    with pytest.raises(ParameterError):
        instantiate("ou_modulated", beta=0.0)
    with pytest.raises(ParameterError):
        instantiate("scaled_variable", beta=-0.5, bogus=1)


@pytest.mark.parametrize("name", [n for n in CATALOG if build(n).covariance is not None])
def test_C_is_one_at_unit(name):
    assert limit_covariance_C(build(name), 1.0, 1.0) == 1.0


def test_C_examples():
    assert limit_covariance_C(instantiate("indicator_survival", beta=-0.5), 1, 4) == pytest.approx(0.5)
    assert limit_covariance_C(instantiate("ou_modulated", beta=-0.5), 1, 2) == 0.0
    assert limit_covariance_C(instantiate("scaled_variable", beta=1.0), 1, 4) == pytest.approx(2.0)
    with pytest.raises(UnsupportedScenarioError):
        limit_covariance_C(instantiate("deterministic_h"), 1, 1)


def test_moment_examples():
    survival = instantiate("indicator_survival", beta=-0.5)
    assert eval_moments(survival, 4, 4) == pytest.approx((0.5, 0.25, 0.25))
    det = instantiate("deterministic_h", rho=0.3)
    assert eval_moments(det, 2, 3)[1:] == (0.0, 0.0)
    sv = instantiate("scaled_variable", beta=1.0, eta_mean=0.0, eta_var=1.0)
    assert float(sv.f(2.0, 8.0)) == pytest.approx(4.0)
    ou = instantiate("ou_modulated", beta=-0.5)
    s, t = 1.0, 2.5
    expected = 0.5 * (s + 1) ** -0.25 * (t + 1) ** -0.25 * math.exp(-(t - s))
    assert float(ou.f(s, t)) == pytest.approx(expected)


forms = st.sampled_from(["max_power", "product_power", "fictitious"])


@given(forms, st.floats(-0.9, 2.0), st.floats(0.1, 10), st.floats(0.1, 10), st.sampled_from([0.5, 2.0]))
@settings(max_examples=200, deadline=None)
def test_C_homogeneity(form, beta, u, w, a):
    C = CovarianceModel(form, beta)
    assert abs(C(a * u, a * w) - a**beta * C(u, w)) <= 1e-12 * max(1.0, abs(C(a * u, a * w)))
    assert C(u, u) == pytest.approx(u**beta)


@given(st.sampled_from(["max_power", "product_power", "fictitious", "flat"]), st.floats(-0.9, 2.0),
       st.lists(st.floats(0.05, 20), min_size=1, max_size=8, unique=True))
@settings(max_examples=200, deadline=None)
def test_C_matrix_psd(form, beta, points):
    if form == "flat":
        beta = 0.0
    if form == "max_power" and beta > 0:
        # (u v w)^beta is a covariance kernel only for beta <= 0
        beta = -beta / 3
    M = CovarianceModel(form, beta).matrix(sorted(points))
    assert np.linalg.eigvalsh(M).min() >= -1e-10 * max(1.0, np.abs(M).max())


@pytest.mark.parametrize("name", list(CATALOG))
def test_cauchy_schwarz(name):
    m = build(name)
    s, t = np.meshgrid(np.geomspace(0.01, 100, 25), np.geomspace(0.01, 100, 25))
    assert np.all(np.abs(m.f(s, t)) <= 0.5 * (m.v(s) + m.v(t)) + 1e-12)


@pytest.mark.parametrize("name", list(CATALOG))
def test_sampler_matches_moments(name):
    m = build(name)
    n = 100_000
    times = np.array([1.0, 2.0, 3.0, 5.0])
    x = m.sample(np.broadcast_to(times, (n, 4)).copy(), StreamSeed(20, (len(name),)).generator())
    for j, t in enumerate(times):
        col = x[:, j]
        se_mean = col.std(ddof=1) / math.sqrt(n) + 1e-12
        assert abs(col.mean() - float(m.h(t))) < 4 * se_mean
        assert abs(col.var() - float(m.v(t))) < 4 * standard_error_cov(x, j, j) + 1e-12
    for i, j in ((0, 2), (1, 3)):
        cov = np.cov(x[:, i], x[:, j])[0, 1]
        assert abs(cov - float(m.f(times[i], times[j]))) < 4 * standard_error_cov(x, i, j) + 1e-12


def test_negative_times_are_zero():
    for name in CATALOG:
        x = build(name).sample(np.full((3, 2), -1.0), StreamSeed(1).generator())
        assert np.all(x == 0)


def test_scaled_coupling_uses_waiting_time():
    m = instantiate("indicator_survival", coupling="scaled", kappa=2.0, xi_law=IncrementLaw.pareto(0.5, 1.0))
    xi = np.array([0.5, 1.5, 3.0])
    x = m.sample(np.full((3, 1), 4.0), StreamSeed(0).generator(), xi=xi)
    assert x[:, 0].tolist() == [0.0, 0.0, 1.0]
    assert float(m.h(8.0)) == pytest.approx(0.5)
    with pytest.raises(ParameterError):
        instantiate("indicator_survival", coupling="scaled", kappa=2.0, xi_law=EXP1)
    with pytest.raises(ParameterError):
        instantiate("indicator_hit", coupling="scaled", kappa=1.0)


def test_integrals_match_quadrature():
    from scipy import integrate

    for name in CATALOG:
        m = build(name)
        for x in (0.5, 3.0, 40.0):
            ref_h = integrate.quad(lambda y: float(m.h(y)), 0, x, points=[1.0], limit=400)[0]
            ref_v = integrate.quad(lambda y: float(m.v(y)), 0, x, points=[1.0], limit=400)[0]
            assert m.int_h(x) == pytest.approx(ref_h, rel=1e-6, abs=1e-9)
            assert m.int_v(x) == pytest.approx(ref_v, rel=1e-6, abs=1e-9)


def test_mixing_parameter_examples():
    assert mixing_parameter(instantiate("indicator_survival", beta=-0.5), EXP1) == ("p", 0.0)
    assert mixing_parameter(instantiate("indicator_hit", eta_law=EXP1), EXP1) == ("p", 1.0)
    kind, p = mixing_parameter(instantiate("scaled_variable", beta=0.0, eta_mean=1.0, eta_var=1.0), EXP1)
    assert kind == "p" and p == pytest.approx(0.5)
    kind, q = mixing_parameter(instantiate("drift_plus_noise", a=1.0, rho=-0.25, b=1.0, beta=0.0),
                               IncrementLaw.pareto(0.5, 1.0))
    assert kind == "q" and q == pytest.approx(0.5)


@given(st.floats(-0.9, 1.5), st.floats(0.1, 3), st.floats(0.1, 3), st.floats(0.2, 3))
@settings(max_examples=100, deadline=None)
def test_scaled_variable_mixing_formula(beta, mean, var, sigma):
    law = IncrementLaw.lognormal(0.0, sigma)
    _, p = mixing_parameter(instantiate("scaled_variable", beta=beta, eta_mean=mean, eta_var=var), law)
    s2 = law.sigma2
    assert p == pytest.approx(s2 * mean**2 / (var / (1 + beta) + s2 * mean**2))


def test_mixing_parameter_unsupported():
    with pytest.raises(UnsupportedScenarioError):
        mixing_parameter(instantiate("ou_modulated", beta=-0.5), EXP1)


def test_limit_share():
    assert limit_share(Asym(1, 2), Asym(5, 1)) == 1.0
    assert limit_share(Asym(1, 1, 0), Asym(5, 1, 1)) == 0.0
    assert limit_share(Asym(1, 1), Asym(3, 1)) == 0.25
    assert limit_share(None, Asym(1, 0)) == 0.0
    assert Asym(2.0, 0.5).integrated() == (2.0 / 1.5, 1.5, 0.0)
