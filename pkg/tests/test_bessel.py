from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
import sympy as sp
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.special import gammaincc

from fraclap.bessel import (
    PathConfig,
    gamma_sample,
    hitting_cdf,
    hitting_density,
    hitting_mass,
    hitting_time_from_gamma,
    sample_hitting_time,
    simulate_exits,
    simulate_path,
)
from fraclap.errors import BudgetExceededError, DomainError
from fraclap.validation import ks_one_sample, ks_two_sample


def test_density_examples():
    assert hitting_density(-1.0, 1.0, 0.3) == 0.0
    assert hitting_density(1.0, 1.0, 0.5) == pytest.approx(math.exp(-0.5) / math.sqrt(2 * math.pi), rel=1e-14)


def test_density_levy_form():
    t = np.logspace(-3, 3, 50)
    levy = t**-1.5 * np.exp(-1 / (2 * t)) / math.sqrt(2 * math.pi)
    np.testing.assert_allclose(hitting_density(t, 1.0, 0.5), levy, rtol=1e-13)


@pytest.mark.parametrize("y0, s", [(0.0, 0.5), (-1.0, 0.5), (1.0, 0.0), (1.0, 1.0)])
def test_density_domain(y0, s):
    with pytest.raises(DomainError):
        hitting_density(1.0, y0, s)


def test_inverse_gamma_change_of_variables_symbolic():
    # t = y0^2/(2g), g ~ Gamma(s, 1)  =>  density of t equals the hitting density
    t, y0, s = sp.symbols("t y0 s", positive=True)
    g = y0**2 / (2 * t)
    gamma_pdf = g ** (s - 1) * sp.exp(-g) / sp.gamma(s)
    pushed = gamma_pdf * sp.Abs(sp.diff(g, t))
    target = (1 / (t * sp.gamma(s))) * (y0**2 / (2 * t)) ** s * sp.exp(-y0**2 / (2 * t))
    assert sp.simplify(sp.powsimp(sp.expand_power_base(pushed / target, force=True), force=True)) == 1


@pytest.mark.parametrize("y0", [0.5, 1.0, 3.0])
@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_unit_mass(y0, s):
    r = hitting_mass(y0, s, tol=1e-10)
    assert abs(r.value - 1.0) <= 1e-8


def test_unit_mass_high_precision_oracle():
    s, y0 = 0.37, 1.3
    f = lambda t: (1 / (t * mpmath.gamma(s))) * (y0**2 / (2 * t)) ** s * mpmath.exp(-(y0**2) / (2 * t))  # noqa: E731
    assert float(mpmath.quad(f, [0, 0.1, 1] + [10.0**k for k in range(1, 30, 2)] + [mpmath.inf])) == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("s", [0.25, 0.5, 0.75])
def test_cdf_matches_incomplete_gamma(s):
    t = np.logspace(-2, 4, 40)
    y0 = 1.7
    np.testing.assert_allclose(hitting_cdf(t, y0, s), gammaincc(s, y0**2 / (2 * t)), atol=1e-10)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.05, 0.95), st.floats(0.1, 10.0), st.floats(1e-3, 1e3))
def test_density_scaling_law(s, y0, t):
    lhs = hitting_density(t, y0, s)
    rhs = hitting_density(t / y0**2, 1.0, s) / y0**2
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-300)


@settings(max_examples=80, deadline=None)
@given(st.floats(0.0, 50.0), st.floats(0.05, 0.95), st.floats(0.1, 5.0))
def test_density_nonnegative(t, s, y0):
    assert hitting_density(t, y0, s) >= 0.0


def test_gamma_map_examples():
    assert hitting_time_from_gamma(1.0, 0.5) == 1.0
    assert hitting_time_from_gamma(2.0, 0.5) == 4.0


def test_sample_scaling_under_same_draw():
    a = sample_hitting_time(1.0, 0.4, np.random.default_rng(3), size=100)
    b = sample_hitting_time(2.5, 0.4, np.random.default_rng(3), size=100)
    np.testing.assert_allclose(b, 6.25 * a, rtol=1e-15)


def test_gamma_sample_mean():
    g = gamma_sample(0.5, np.random.default_rng(1), size=1_000_000)
    assert abs(g.mean() - 0.5) <= 4 * math.sqrt(0.5 / 1e6)


def test_gamma_sample_variance():
    n = 1_000_000
    g = gamma_sample(0.3, np.random.default_rng(2), size=n)
    # var of the sample variance: (mu4 - sigma^4 (n-3)/(n-1)) / n with Gamma central moment mu4 = 3k^2 + 6k
    k = 0.3
    se = math.sqrt((3 * k * k + 6 * k - k * k * (n - 3) / (n - 1)) / n)
    assert abs(g.var(ddof=1) - 0.3) <= 4 * se


def test_gamma_sample_deterministic():
    a = gamma_sample(0.7, np.random.default_rng(9), size=1000)
    b = gamma_sample(0.7, np.random.default_rng(9), size=1000)
    assert np.array_equal(a, b)
    assert np.all(a > 0)


@pytest.mark.parametrize("shape", [0.0, 1.0, -0.5, 1.5])
def test_gamma_sample_domain(shape):
    with pytest.raises(DomainError):
        gamma_sample(shape, np.random.default_rng(0), size=3)


def test_exact_sampler_ks():
    t = np.sort(sample_hitting_time(1.0, 0.3, np.random.default_rng(77), size=100_000))
    assert ks_one_sample(t, hitting_cdf(t, 1.0, 0.3)) <= 0.01


def test_path_basics_and_determinism():
    cfg = PathConfig(dt=1e-3, max_steps=200_000)
    a = simulate_path(0.5, 0.5, cfg, np.random.default_rng(4))
    b = simulate_path(0.5, 0.5, cfg, np.random.default_rng(4))
    assert a.values[0] == 0.5 and a.times[0] == 0.0
    assert np.all(np.diff(a.times) > 0)
    assert np.all(np.asarray(a.values) >= 0)
    assert np.array_equal(a.values, b.values) and a.absorbed_at == b.absorbed_at
    assert a.absorbed and a.absorbed_at == a.times[-1] and a.values[-1] == 0.0
    assert np.all(np.asarray(a.values)[:-1] > cfg.eps_for(0.5))


def test_path_budget_error():
    with pytest.raises(BudgetExceededError):
        simulate_path(10.0, 0.3, PathConfig(dt=1e-4, max_steps=10), np.random.default_rng(0))


def test_path_start_below_threshold():
    with pytest.raises(DomainError):
        simulate_path(1.0, 0.5, PathConfig(eps_boundary=2.0), np.random.default_rng(0))


def test_absorption_fraction_tends_to_one():
    # survival to t is erf(y0 / sqrt(2t)) at s = 1/2, about 2.5% at t = 1e3
    n = 4000
    fractions = []
    for horizon in (10.0, 100.0, 1000.0):
        batch = simulate_exits(1.0, 0.5, PathConfig(dt=1e-2, max_steps=int(horizon / 1e-2)), n,
                               np.random.default_rng(8))
        frac = float(np.mean(~np.isnan(batch.tau)))
        exact = 1 - math.erf(1 / math.sqrt(2 * horizon))
        assert abs(frac - exact) <= 4 * math.sqrt(exact * (1 - exact) / n) + 5e-3
        fractions.append(frac)
    assert fractions == sorted(fractions)
    assert fractions[-1] > 0.96


@pytest.mark.slow
def test_pathwise_matches_exact_law():
    n = 10_000
    cfg = PathConfig(dt=1e-4, max_steps=200_000)
    batch = simulate_exits(1.0, 0.5, cfg, n, np.random.default_rng(21))
    tau = np.where(np.isnan(batch.tau), np.inf, batch.tau)
    exact = sample_hitting_time(1.0, 0.5, np.random.default_rng(22), size=n)
    cap = batch.t_final[np.isnan(batch.tau)].min() if np.isnan(batch.tau).any() else np.inf
    exact = np.where(exact > cap, np.inf, exact)
    assert ks_two_sample(tau, exact) <= 0.05
