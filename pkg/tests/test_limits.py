import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats

from immigration_limits.errors import NumericalError, OutOfRangeError, ParameterError
from immigration_limits.lab import compare_fdds
from immigration_limits.limits import (
    GridPath,
    LimitFddSpec,
    V_cov_matrix,
    closed_form_moments,
    conditional_Z_cov,
    factorize_psd,
    fractional_integral_inverse,
    invert_subordinator,
    sample_fractional_stable,
    sample_inverse_marginal,
    sample_limit_fdd,
    sample_V_beta,
    sample_Z,
    sample_Z_time_changed,
    simulate_subordinator,
    simulate_subordinator_to_level,
    stieltjes_inverse,
    theoretical_V_cov,
)
from immigration_limits.responses import CovarianceModel
from immigration_limits.rng import StreamSeed, gamma_scaled_char_exponent, sample_positive_stable
from immigration_limits.stats import energy_test, standard_error_cov

# 30-digit quadrature oracles: int_0^1 sqrt((1-y)(2-y)) dy and int_0^1 ((1-y)(3-y))^(1/4) dy
PRODUCT_POWER_1_2 = 0.840316775024935530
PRODUCT_POWER_HALF_1_3 = 1.010362746004531902


def paths(alpha, level, n, n_steps, seed):
    root = StreamSeed(seed)
    return [simulate_subordinator_to_level(alpha, level, n_steps, root.derive(r).generator()) for r in range(n)]


def test_single_step_is_one_stable_draw():
    path = simulate_subordinator(0.5, 1.0, 1, StreamSeed(1).generator())
    assert path.values[1] == pytest.approx(sample_positive_stable(0.5, StreamSeed(1).generator(), 1)[0])


def test_laplace_transform_of_subordinator():
    x = np.array([simulate_subordinator(0.5, 1.0, 1, g).values[-1]
                  for g in (StreamSeed(2, (r,)).generator() for r in range(20_000))])
    m, se = np.exp(-x).mean(), np.exp(-x).std(ddof=1) / math.sqrt(len(x))
    assert abs(m - math.exp(-math.sqrt(math.pi))) < 3 * se


def test_subordinator_self_similarity():
    root = StreamSeed(3)
    at2 = np.array([simulate_subordinator(0.5, 2.0, 4, root.derive(r).generator()).values[-1] for r in range(10_000)])
    at1 = sample_positive_stable(0.5, StreamSeed(4), 10_000)
    assert stats.ks_2samp(at2, 4.0 * at1).pvalue > 0.01


def test_invert_linear_stub():
    t = np.linspace(0, 5, 51)
    path = GridPath(t, 2 * t)
    s = np.array([0.0, 0.3, 1.7, 9.9])
    assert np.allclose(invert_subordinator(path, s), s / 2, atol=0.1)
    step = GridPath(t, 2 * t, "cadlag-step")
    assert np.allclose(invert_subordinator(step, s), s / 2, atol=0.1)
    with pytest.raises(OutOfRangeError):
        invert_subordinator(path, 10.0)


def test_inverse_at_zero():
    path = simulate_subordinator(0.5, 1.0, 64, StreamSeed(5).generator())
    assert path.values[1] > 0
    assert invert_subordinator(path, 0.0) == 0.0


@given(st.integers(0, 10**6), st.floats(0.2, 0.9))
@settings(max_examples=30, deadline=None)
def test_paths_monotone(seed, alpha):
    path = simulate_subordinator_to_level(alpha, 2.0, 256, StreamSeed(seed).generator())
    assert path.values[0] == 0 and np.all(np.diff(path.values) >= 0) and path.values[-1] > 2.0
    s = np.linspace(0, 2.0, 40)
    assert np.all(np.diff(invert_subordinator(path, s)) >= 0)
    for rho in (0.0, 0.5, 1.0):
        q = fractional_integral_inverse(alpha, rho, s[1:], path)
        assert np.all(np.diff(q) >= -1e-12)


def test_inverse_marginal_mean():
    x = sample_inverse_marginal(0.5, 1.0, StreamSeed(6), 1_000_000)
    assert abs(x.mean() / (2 / math.pi) - 1) < 0.01


def test_inverse_marginal_scaling():
    a = sample_inverse_marginal(0.5, 4.0, StreamSeed(7, (0,)), 10_000)
    b = 2.0 * sample_inverse_marginal(0.5, 1.0, StreamSeed(7, (1,)), 10_000)
    assert stats.ks_2samp(a, b).pvalue > 0.01


def test_theoretical_V_cov():
    assert theoretical_V_cov(CovarianceModel("max_power", -0.5), 1, 2) == pytest.approx(2 * (math.sqrt(2) - 1))
    for form, beta in (("max_power", -0.3), ("product_power", 0.7), ("fictitious", -0.5), ("flat", 0.0)):
        assert theoretical_V_cov(CovarianceModel(form, beta), 1.7, 1.7) == pytest.approx(1.7 ** (1 + beta) / (1 + beta))
    assert theoretical_V_cov(CovarianceModel("product_power", 1.0), 1, 2) == pytest.approx(PRODUCT_POWER_1_2, rel=1e-10)
    assert theoretical_V_cov(CovarianceModel("product_power", 0.5), 1, 3) == pytest.approx(PRODUCT_POWER_HALF_1_3,
                                                                                         rel=1e-9)
    with pytest.raises(ParameterError):
        theoretical_V_cov(CovarianceModel("max_power", -0.5), 2, 1)


@given(st.sampled_from(["max_power", "product_power", "fictitious"]), st.floats(-0.9, 0.0),
       st.lists(st.floats(0.1, 10), min_size=1, max_size=8, unique=True))
@settings(max_examples=60, deadline=None)
def test_V_cov_psd(form, beta, pts):
    M = V_cov_matrix(CovarianceModel(form, beta), sorted(pts))
    assert np.linalg.eigvalsh(M).min() >= -1e-10 * np.abs(M).max()


def test_factorize_psd():
    M = np.array([[1.0, 0.5], [0.5, 2.0]])
    L = factorize_psd(M)
    assert np.allclose(L @ L.T, M)
    tiny = np.array([[1.0, 1.0], [1.0, 1.0 - 1e-12]])
    factorize_psd(tiny)
    with pytest.raises(NumericalError, match="eigenvalue"):
        factorize_psd(np.array([[1.0, 2.0], [2.0, 1.0]]))


def test_V_beta_white_noise_and_variance():
    beta = -0.5
    s = sample_V_beta(CovarianceModel("fictitious", beta), [1.0, 2.0], 100_000, StreamSeed(8))
    cov = np.cov(s.values.T)
    assert abs(cov[0, 1]) < 4 * standard_error_cov(s.values, 0, 1)
    assert abs(cov[0, 0] * (1 + beta) - 1) < 0.02


def test_V_beta_flat_is_brownian():
    s = sample_V_beta(CovarianceModel("flat", 0.0), [1.0, 2.0], 100_000, StreamSeed(9))
    cov = np.cov(s.values.T)
    assert abs(cov[0, 1] - 1.0) < 4 * standard_error_cov(s.values, 0, 1)


def test_V_beta_against_D_matrix():
    C = CovarianceModel("max_power", -0.5)
    u = np.array([0.5, 1.0, 2.0])
    s = sample_V_beta(C, u, 20_000, StreamSeed(10))
    x = s.values
    for w in (np.array([1.0, 0.0, 0.0]), np.array([1.0, -1.0, 2.0]), np.ones(3)):
        proj = x @ w
        se = np.std((proj - proj.mean()) ** 2, ddof=1) / math.sqrt(len(proj))
        assert abs(proj.var() - closed_form_moments("D_matrix", weights=w, u_points=u, C=C)) < 3 * se


def test_Z_second_moment_rao_blackwell():
    s = sample_Z(0.5, CovarianceModel("max_power", 0.0), [1.0], 2000, StreamSeed(11), n_steps=2**11,
                 return_conditional=True)
    rb = s.extras["conditional_cov"][:, 0, 0].mean()
    assert abs(rb / (2 / math.pi) - 1) < 0.05
    assert abs(np.mean(s.values[:, 0] ** 2) / (2 / math.pi) - 1) < 0.10


def test_Z_fictitious_uncorrelated():
    s = sample_Z(0.5, CovarianceModel("fictitious", -0.25), [1.0, 2.0], 3000, StreamSeed(12), n_steps=2**10,
                 return_conditional=True)
    assert np.all(s.extras["conditional_cov"][:, 0, 1] == 0)
    c = np.cov(s.values.T)[0, 1]
    assert abs(c) < 4 * standard_error_cov(s.values, 0, 1)


def test_Z_conditional_gaussianity():
    # two independent conditional draws given the same path are uncorrelated
    C = CovarianceModel("max_power", -0.25)
    a, b = [], []
    root = StreamSeed(13)
    for r, path in enumerate(paths(0.5, 1.0, 2000, 2**10, 14)):
        L = factorize_psd(conditional_Z_cov(path, C, [1.0]))
        g = root.derive(r).generator()
        a.append((L @ g.standard_normal(1))[0])
        b.append((L @ g.standard_normal(1))[0])
    a, b = np.array(a), np.array(b)
    assert abs(np.corrcoef(a, b)[0, 1]) < 4 / math.sqrt(len(a))


def test_Z_time_changed_construction_agrees():
    beta = 0.5
    u = [0.5, 1.0, 2.0]
    direct = sample_Z(0.5, CovarianceModel("product_power", beta), u, 1500, StreamSeed(15), n_steps=2**10)
    clock = sample_Z_time_changed(0.5, beta, u, 1500, StreamSeed(16), n_steps=2**10)
    assert energy_test(direct.values, clock.values, 300, 17)[1] > 0.01


def test_grid_refinement_stability():
    C = CovarianceModel("max_power", -0.25)
    fine, coarse = [], []
    for path in paths(0.5, 2.0, 300, 2**12, 18):
        half = GridPath(path.times[::2], path.values[::2])
        fine.append(conditional_Z_cov(path, C, [1.0, 2.0]))
        coarse.append(conditional_Z_cov(half, C, [1.0, 2.0]))
    f, c = np.mean(fine, axis=0), np.mean(coarse, axis=0)
    assert np.max(np.abs(f - c) / np.abs(f)) < 0.01


def test_fractional_stable_gaussian_endpoint():
    s = sample_fractional_stable(2.0, 0.0, [1.0], 100_000, StreamSeed(19))
    assert abs(s.values[:, 0].var() - 1) < 0.02
    s = sample_fractional_stable(2.0, 1.0, [1.0], 100_000, StreamSeed(20))
    assert abs(s.values[:, 0].var() * 3 - 1) < 0.03


def test_fractional_stable_char_function():
    s = sample_fractional_stable(1.5, 0.0, [1.0], 100_000, StreamSeed(21))
    emp = np.mean(np.exp(1j * s.values[:, 0]))
    assert abs(emp - np.exp(gamma_scaled_char_exponent(1.0, 1.5))) < 0.02


def test_fractional_stable_rejects_divergent_rho():
    with pytest.raises(ParameterError):
        sample_fractional_stable(1.5, -1 / 1.5, [1.0], 10, 0)


@pytest.mark.parametrize("rho,target", [(0.0, 2 / math.pi), (1.0, 4 / (3 * math.pi))])
def test_Q_mean(rho, target):
    q = [fractional_integral_inverse(0.5, rho, [1.0], p)[0] for p in paths(0.5, 1.0, 3000, 2**11, 22)]
    assert abs(np.mean(q) / target - 1) < 0.05
    assert closed_form_moments("inverse_power_mean", alpha=0.5, rho=rho, s=1.0) == pytest.approx(target)


def test_Q_rho_zero_is_inverse():
    for p in paths(0.5, 2.0, 20, 512, 23):
        s = np.array([0.3, 1.0, 1.9])
        assert np.allclose(fractional_integral_inverse(0.5, 0.0, s, p), invert_subordinator(p, s), atol=1e-12)
    with pytest.raises(ParameterError):
        fractional_integral_inverse(0.5, -0.6, [1.0], p)


def test_stieltjes_singular_kernel_exact_on_linear_path():
    # W(t) = t makes W^<-(y) = y, so int_0^u (u-y)^rho dy = u^(rho+1)/(rho+1)
    t = np.linspace(0, 3, 7)
    path = GridPath(t, t)
    for rho in (-0.5, -0.25, 0.0, 1.3):
        assert stieltjes_inverse(path, 2.0, rho) == pytest.approx(2.0 ** (rho + 1) / (rho + 1), rel=1e-12)


def test_limit_spec_validation():
    C = CovarianceModel("flat", 0.0)
    with pytest.raises(ParameterError):
        LimitFddSpec("thm22_mix", [1.0], alpha=0.5, q=0.5, rho=0.0, C=C)
    with pytest.raises(ParameterError):
        LimitFddSpec("thm21_mix", [1.0], alpha=1.5, p=1.0, rho=-0.7, mu=1.0)
    with pytest.raises(ParameterError):
        LimitFddSpec("nope", [1.0])
    LimitFddSpec("thm22_mix", [1.0], alpha=0.5, q=0.5, rho=-0.25, C=C)


def test_thm21_mix_p0_is_scaled_V():
    C = CovarianceModel("max_power", -0.5)
    spec = LimitFddSpec("thm21_mix", [0.5, 1.0], alpha=2.0, p=0.0, mu=2.0, C=C)
    root = StreamSeed(24)
    mix = sample_limit_fdd(spec, 100, root).values
    v = sample_V_beta(C, [0.5, 1.0], 100, root.derive(0)).values
    assert np.allclose(mix, math.sqrt(0.5 / 2.0) * v)


def test_thm22_q1_mean():
    spec = LimitFddSpec("thm22_mix", [1.0], alpha=0.5, q=1.0, rho=0.0)
    s = sample_limit_fdd(spec, 3000, StreamSeed(25), n_steps=2**11)
    assert abs(s.values.mean() / (2 / math.pi) - 1) < 0.05


def test_thm22_mixture_regression_slope():
    spec = LimitFddSpec("thm22_mix", [0.5, 1.0, 2.0], alpha=0.5, q=0.5, rho=-0.25, C=CovarianceModel("flat", 0.0))
    s = sample_limit_fdd(spec, 2000, StreamSeed(26), n_steps=2**10)
    q = s.extras["Q"][:, 1]
    slope = np.polyfit(q, s.values[:, 1], 1)[0]
    assert abs(slope / math.sqrt(0.5) - 1) < 0.05


def test_closed_forms():
    assert closed_form_moments("inverse_mean", alpha=0.5, y=1.0) == pytest.approx(0.63662, abs=1e-5)
    for form, beta in (("max_power", -0.5), ("product_power", 0.8), ("fictitious", -0.2)):
        d = closed_form_moments("D_matrix", weights=[1.0], u_points=[1.0], C=CovarianceModel(form, beta))
        assert d == pytest.approx(1 / (1 + beta))
    assert closed_form_moments("negative_moment", alpha=0.5, theta=0.5) == pytest.approx(1.12838, abs=1e-5)
    assert closed_form_moments("Z_variance", alpha=0.7, beta=-0.3, u=2.0) == pytest.approx(
        math.gamma(0.7) / (math.gamma(0.3) * math.gamma(1.4)) * 2.0**0.4)
    with pytest.raises(ParameterError):
        closed_form_moments("nope")


def test_sample_vs_itself_is_identical():
    s = sample_V_beta(CovarianceModel("max_power", -0.5), [0.5, 1.0], 300, StreamSeed(27))
    rep = compare_fdds(s, s, 28, n_perm=99)
    assert rep.energy["stat"] == pytest.approx(0.0, abs=1e-12)
    for m in rep.marginals:
        assert m["mean"] == pytest.approx(m["ref_mean"], abs=1e-12)
        assert m["var"] == pytest.approx(m["ref_var"], rel=1e-12)
    assert all(c["cov"] == pytest.approx(c["ref"], rel=1e-12) for c in rep.covariances)
