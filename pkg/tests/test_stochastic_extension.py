from __future__ import annotations

import math

import numpy as np
import pytest

from fraclap.bessel import PathConfig
from fraclap.core import FracParams, HalfSpacePoint, MCEstimate
from fraclap.errors import DomainError
from fraclap.kernel import extension_quadrature
from fraclap.registry import parse_function
from fraclap.stochastic_extension import (
    generator_apply,
    generator_mc_check,
    mc_extension,
    mc_extension_pathwise,
)


def quad_y(x, y):
    return y**2


def lin_x(x, y):
    return x[:, 0]


def one(x, y):
    return np.ones_like(y)


def test_mc_constant_exact():
    u = parse_function("const:c=1.75")
    est = mc_extension(u, HalfSpacePoint([0.3], 0.8), FracParams(1, 0.4), n_samples=5000, seed=1)
    assert est.mean == 1.75 and est.stderr == 0.0 and est.n_samples == 5000


def test_mc_cos_harmonic():
    est = mc_extension(parse_function("cos:xi=1"), HalfSpacePoint([0.0], 1.0), FracParams(1, 0.5),
                       n_samples=1_000_000, seed=3)
    assert abs(est.mean - math.exp(-1)) <= 4 * est.stderr
    assert est.stderr == pytest.approx(7e-4, rel=0.2)


def test_mc_gauss_2d_matches_quadrature():
    u = parse_function("gauss")
    at, p = HalfSpacePoint([0.0, 0.0], 0.5), FracParams(2, 0.3)
    est = mc_extension(u, at, p, n_samples=1_000_000, seed=4)
    ref = extension_quadrature(u, at, p, tol=1e-6)
    assert abs(est.mean - ref.value) <= 4 * est.stderr + ref.err_estimate


def test_mc_mean_within_bound():
    u = parse_function("cos:xi=5")
    for seed in range(5):
        est = mc_extension(u, HalfSpacePoint([0.0], 0.01), FracParams(1, 0.9), n_samples=200, seed=seed)
        assert -u.bound <= est.mean <= u.bound


def test_mc_reproducible_and_seed_sensitive():
    u, at, p = parse_function("rational"), HalfSpacePoint([0.5], 1.0), FracParams(1, 0.25)
    a = mc_extension(u, at, p, n_samples=150_000, seed=7)
    b = mc_extension(u, at, p, n_samples=150_000, seed=7)
    c = mc_extension(u, at, p, n_samples=150_000, seed=8)
    assert a.mean == b.mean and a.stderr == b.stderr
    assert a.mean != c.mean


def test_mc_thread_count_invariance():
    u, at, p = parse_function("gauss"), HalfSpacePoint([0.1], 0.7), FracParams(1, 0.6)
    means = {mc_extension(u, at, p, n_samples=200_000, seed=2, threads=k).mean for k in (1, 2, 4)}
    assert len(means) == 1


def test_mc_rejects_bad_inputs():
    u = parse_function("gauss")
    with pytest.raises(DomainError):
        mc_extension(u, HalfSpacePoint([0.0], 0.0), FracParams(1, 0.5))
    with pytest.raises(DomainError):
        mc_extension(u, HalfSpacePoint([0.0], 1.0), FracParams(1, 0.5), n_samples=1)
    with pytest.raises(DomainError):
        mc_extension(u, HalfSpacePoint([0.0, 0.0], 1.0), FracParams(1, 0.5))


def test_mc_works_beyond_quadrature_dims():
    u = parse_function("const:c=2")
    est = mc_extension(u, HalfSpacePoint([0.0] * 5, 1.0), FracParams(5, 0.5), n_samples=100)
    assert est.mean == 2.0


def test_estimate_helpers():
    est = MCEstimate.from_samples(np.array([1.0, 2.0, 3.0, 4.0]), seed=0)
    assert est.mean == 2.5
    assert est.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert est.within(2.5 + 3 * est.stderr)
    assert not est.within(2.5 + 5 * est.stderr)


def test_pathwise_constant():
    est = mc_extension_pathwise(parse_function("const:c=-0.5"), HalfSpacePoint([0.0], 1.0), FracParams(1, 0.3),
                                PathConfig(dt=1e-3, max_steps=2000), n_samples=200, seed=0)
    assert est.mean == -0.5 and est.stderr == 0.0


@pytest.mark.slow
def test_pathwise_cos_harmonic():
    est = mc_extension_pathwise(parse_function("cos:xi=1"), HalfSpacePoint([0.0], 1.0), FracParams(1, 0.5),
                                PathConfig(dt=1e-4, max_steps=20_000), n_samples=100_000, seed=5)
    assert abs(est.mean - math.exp(-1)) <= max(4 * est.stderr, 5e-3)
    assert "unabsorbed" in est.diagnostics


def test_pathwise_agrees_with_exact_route():
    u, at, p = parse_function("gauss"), HalfSpacePoint([0.3], 0.6), FracParams(1, 0.7)
    a = mc_extension_pathwise(u, at, p, PathConfig(dt=1e-3, max_steps=50_000), n_samples=20_000, seed=9)
    b = mc_extension(u, at, p, n_samples=200_000, seed=9)
    assert abs(a.mean - b.mean) <= 4 * math.hypot(a.stderr, b.stderr) + 5e-3


def test_pathwise_reject_reports_unabsorbed():
    u, at, p = parse_function("gauss"), HalfSpacePoint([0.0], 1.0), FracParams(1, 0.5)
    est = mc_extension_pathwise(u, at, p, PathConfig(dt=1e-2, max_steps=50), n_samples=2000, seed=1,
                                on_budget="reject")
    assert est.diagnostics["unabsorbed"] > 0
    assert est.n_samples == 2000 - est.diagnostics["unabsorbed"]


@pytest.mark.parametrize("s", [0.1, 0.3, 0.5, 0.7, 0.9])
def test_generator_quadratic_exact(s):
    assert generator_apply(quad_y, HalfSpacePoint([0.0], 1.0), FracParams(1, s)) == pytest.approx(2 * (1 - s), abs=1e-12)


def test_generator_linear_and_radial():
    p = FracParams(2, 0.35)
    assert generator_apply(lin_x, HalfSpacePoint([0.4, -1.0], 2.0), p) == pytest.approx(0.0, abs=1e-10)
    radial = lambda x, y: y ** (2 * p.s)  # noqa: E731
    assert generator_apply(radial, HalfSpacePoint([0.0, 0.0], 1.0), p) == pytest.approx(0.0, abs=1e-6)


def test_generator_stencil_guard():
    with pytest.raises(DomainError):
        generator_apply(quad_y, HalfSpacePoint([0.0], 0.0005), FracParams(1, 0.5))


@pytest.mark.parametrize("s", [0.3, 0.7])
def test_generator_mc_quadratic(s):
    at, p = HalfSpacePoint([0.0], 1.0), FracParams(1, s)
    est = generator_mc_check(quad_y, at, p, t=1e-3, n_samples=1_000_000, seed=5)
    assert abs(est.mean - generator_apply(quad_y, at, p)) <= 4 * est.stderr + 0.05
    assert est.diagnostics["boundary_hits"] == 0


def test_generator_mc_constant_and_martingale():
    at, p = HalfSpacePoint([0.0], 1.0), FracParams(1, 0.4)
    c = generator_mc_check(one, at, p, n_samples=10_000, seed=1)
    assert c.mean == 0.0 and c.stderr == 0.0
    m = generator_mc_check(lin_x, at, p, n_samples=200_000, seed=2)
    assert abs(m.mean) <= 4 * m.stderr


def test_generator_mc_bias_shrinks_with_t():
    # f = y^2 has an exact generator; a larger horizon gives a larger Euler/expectation gap
    at, p = HalfSpacePoint([0.0], 0.3), FracParams(1, 0.2)
    target = generator_apply(quad_y, at, p)
    gaps = []
    for t in (1e-2, 1e-3, 1e-4):
        est = generator_mc_check(quad_y, at, p, t=t, n_samples=400_000, seed=3)
        gaps.append((abs(est.mean - target), est.stderr))
    for (g_big, se_big), (g_small, se_small) in zip(gaps, gaps[1:]):
        assert g_small <= g_big + 4 * math.hypot(se_big, se_small)
