import io
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special

from immigration_limits.asymptotics import (
    FunctionSpec,
    infinite_mean_constant,
    infinite_mean_renewal_limit,
    karamata_ratio,
    lemma_ladder,
    lindeberg_ratio,
    poisson_window_integral,
    sgibnev_constant,
    sgibnev_ratio,
    uniform_strip_check,
    write_lemma_csv,
)
from immigration_limits.errors import ParameterError, UnsupportedScenarioError
from immigration_limits.renewal import IncrementLaw
from immigration_limits.responses import instantiate
from immigration_limits.rng import StreamSeed

EXP1 = IncrementLaw.exponential(1.0)
SQRT = FunctionSpec.power(0.5)


def test_karamata_exact_powers():
    t = 1e3
    assert karamata_ratio(FunctionSpec.power(2.0), 2.0, 1.0, t) == pytest.approx((t**3 - 1) / t**3, rel=1e-10)
    assert karamata_ratio(SQRT, 0.5, 0.0, 1e4) == pytest.approx(1.0, rel=1e-10)


@given(st.floats(-0.9, 3.0), st.floats(10, 1e6))
@settings(max_examples=50, deadline=None)
def test_karamata_pure_power_property(rho, t):
    assert karamata_ratio(FunctionSpec.power(rho), rho, 0.0, t) == pytest.approx(1.0, rel=1e-8)


def test_karamata_perturbed():
    g = FunctionSpec.power_times_log(0.5)
    t = 1e6
    direct = integrate.quad(lambda y: y**0.5 * (1 + 1 / math.log(y)), math.e, t, limit=1000)[0]
    assert karamata_ratio(g, 0.5, math.e, t) == pytest.approx(direct / (t * g(t) / 1.5), rel=1e-6)
    assert abs(karamata_ratio(g, 0.5, math.e, t) - 1) < 0.02


def test_karamata_rejects_index():
    with pytest.raises(ParameterError):
        karamata_ratio(SQRT, -1.0, 0.0, 10.0)


def test_poisson_oracle_closed_form():
    t = 1e4
    assert poisson_window_integral(SQRT, 0.0, 1.0, t) == pytest.approx(math.sqrt(t) + 2 / 3 * t**1.5, rel=1e-10)
    assert poisson_window_integral(FunctionSpec.power(0.0), 0.0, 1.0, t) == pytest.approx(t + 1)
    assert poisson_window_integral(FunctionSpec.power(0.0), 0.0, 1.0, t) / sgibnev_constant(
        FunctionSpec.power(0.0), 0.0, EXP1, 0.0, 1.0, t) == pytest.approx(1.0001)


def test_sgibnev_full_window():
    c = sgibnev_ratio(SQRT, 0.5, EXP1, 0.0, 1.0, 1e4, 400, StreamSeed(1))
    assert abs(c.statistic - 1) < 0.02
    exact = poisson_window_integral(SQRT, 0.0, 1.0, 1e4) / sgibnev_constant(SQRT, 0.5, EXP1, 0.0, 1.0, 1e4)
    assert abs(c.statistic - exact) < 4 * c.std_err


def test_sgibnev_half_window():
    assert sgibnev_constant(SQRT, 0.5, EXP1, 0.5, 1.0, 1.0) == pytest.approx(0.5**1.5 / 1.5)
    c = sgibnev_ratio(SQRT, 0.5, EXP1, 0.5, 1.0, 1e4, 400, StreamSeed(2))
    assert abs(c.statistic - 1) < 0.03


def test_sgibnev_rejects_infinite_mean():
    with pytest.raises(UnsupportedScenarioError):
        sgibnev_ratio(SQRT, 0.5, IncrementLaw.pareto(0.5, 1.0), 0.0, 1.0, 10.0, 5, 0)


def test_infinite_mean_constants():
    assert infinite_mean_constant(0.5, 1.0) == pytest.approx(4 / (3 * math.pi))
    assert infinite_mean_constant(0.5, 0.0) == pytest.approx(2 / math.pi)
    for a in (0.2, 0.5, 0.8):
        assert infinite_mean_constant(a, -a) == pytest.approx(1.0)
    assert infinite_mean_constant(0.3, 0.7) == pytest.approx(
        special.gamma(1.7) / (special.gamma(0.7) * special.gamma(2.0)))


@pytest.mark.parametrize("g", [0.0, 1.0])
def test_infinite_mean_renewal_limit(g):
    c = infinite_mean_renewal_limit(FunctionSpec.power(g), g, 0.5, 1e3, 4000, StreamSeed(3, (int(g),)))
    assert abs(c.rel_gap) < 0.10


def test_strip_check_max_power_decreases():
    survival = instantiate("indicator_survival", beta=-0.5)
    gaps = [g for _, g in uniform_strip_check(survival, 1.0, 2.0, 1.0, [1e2, 1e3, 1e4])]
    assert gaps[0] > gaps[1] > gaps[2] and gaps[2] < 1e-2


def test_strip_check_shrinking_bm():
    (_, g3), (_, g4) = uniform_strip_check(instantiate("shrinking_bm", alpha=0.5), 1.0, 2.0, 1.0, [1e3, 1e4])
    assert g3 < 1e-2 and g4 < 1e-3


def test_strip_check_fictitious():
    (_, g), = uniform_strip_check(instantiate("ou_modulated", beta=-0.5), 1.0, 2.0, 1.0, [1e2])
    assert g < 1e-20


def test_lindeberg_bounded_response():
    survival = instantiate("indicator_survival", beta=-0.5)
    t = 100.0
    assert 2.0 * math.sqrt(t * float(survival.v(t))) > 1
    assert lindeberg_ratio(survival, t, 2.0, "finite_mean", EXP1, 1000, 4) == 0.0


def test_lindeberg_light_tails():
    sv = instantiate("scaled_variable", beta=0.5, eta_mean=0.0, eta_var=1.0)
    assert lindeberg_ratio(sv, 1e4, 1.0, "finite_mean", EXP1, 20_000, 5) < 0.01
    bm = instantiate("shrinking_bm", alpha=0.5)
    assert lindeberg_ratio(bm, 1e3, 1.0, "infinite_mean", IncrementLaw.pareto(0.5, 1.0), 20_000, 6) < 0.01
    with pytest.raises(ParameterError):
        lindeberg_ratio(bm, 1e3, 1.0, "other", EXP1, 10, 0)


def test_lemma_ladder_trend_and_csv():
    checks = lemma_ladder((1e2, 1e3, 1e4), reps=600, stream=StreamSeed(7))
    by = {}
    for c in checks:
        by.setdefault(c.lemma, []).append(c)
    assert set(by) == {"karamata_power", "karamata_log", "sgibnev", "infinite_mean_renewal_gamma0",
                       "infinite_mean_renewal_gamma1"}
    log_gaps = [c.abs_gap for c in by["karamata_log"]]
    assert log_gaps == sorted(log_gaps, reverse=True)
    for name in ("sgibnev", "infinite_mean_renewal_gamma0", "infinite_mean_renewal_gamma1"):
        first, last = by[name][0], by[name][-1]
        assert last.abs_gap <= first.abs_gap + 3 * last.std_err
    buf = io.StringIO()
    write_lemma_csv(checks, buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "lemma,t,statistic,limit,abs_gap" and len(lines) == len(checks) + 1
