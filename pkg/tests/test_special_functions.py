from __future__ import annotations

import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fraclap.core import FracParams
from fraclap.errors import DomainError, PoleError
from fraclap.special_functions import (
    gamma,
    gamma_reflected,
    kernel_constant,
    log_gamma,
    pv_constant,
    sphere_area,
    trace_constant,
)


@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (0.5, 1.7724538509055160), (5.0, 24.0)])
def test_gamma_values(x, expected):
    assert gamma(x) == pytest.approx(expected, rel=1e-14)


@pytest.mark.parametrize("x, expected", [(-0.5, -3.5449077018110320), (0.5, 1.7724538509055160),
                                         (-1.5, 2.3632718012073547)])
def test_gamma_reflected_values(x, expected):
    assert gamma_reflected(x) == pytest.approx(expected, rel=1e-13)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.0, -7.0])
def test_poles_raise(x):
    with pytest.raises(PoleError):
        gamma_reflected(x)


def test_pole_error_is_domain_error():
    assert issubclass(PoleError, DomainError)


def test_gamma_against_mpmath_grid():
    xs = np.linspace(0.05, 30.0, 400)
    worst = max(abs(gamma(x) / float(mpmath.gamma(x)) - 1) for x in xs)
    assert worst < 1e-12


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.05, max_value=20.0))
def test_recurrence(x):
    assert gamma(x + 1) == pytest.approx(x * gamma(x), rel=1e-12)


@settings(max_examples=200, deadline=None)
@given(st.floats(min_value=0.01, max_value=0.99))
def test_reflection_formula(x):
    assert gamma(x) * gamma(1 - x) == pytest.approx(math.pi / math.sin(math.pi * x), rel=1e-12)


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=0.1, max_value=60.0))
def test_log_gamma_consistent(x):
    assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-12, abs=1e-13)


def test_sphere_area():
    assert sphere_area(1) == pytest.approx(2.0)
    assert sphere_area(2) == pytest.approx(2 * math.pi)
    assert sphere_area(3) == pytest.approx(4 * math.pi)


def test_kernel_constant_values():
    assert kernel_constant(FracParams(1, 0.5)) == pytest.approx(1 / math.pi, rel=1e-13)
    assert kernel_constant(FracParams(2, 0.5)) == pytest.approx(1 / (2 * math.pi), rel=1e-13)
    oracle = float(mpmath.gamma(0.75) / (mpmath.sqrt(mpmath.pi) * mpmath.gamma(0.25)))
    assert kernel_constant(FracParams(1, 0.25)) == pytest.approx(oracle, rel=1e-12)


def test_pv_constant_values():
    assert pv_constant(FracParams(1, 0.5)) == pytest.approx(1 / math.pi, rel=1e-13)
    oracle = float(mpmath.mpf(4) ** 0.25 * mpmath.gamma(0.75) / (mpmath.sqrt(mpmath.pi) * abs(mpmath.gamma(-0.25))))
    assert pv_constant(FracParams(1, 0.25)) == pytest.approx(oracle, rel=1e-12)


def _symbol_integral(n, s):
    # int_{R^n} (1 - cos z_1) |z|^{-n-2s} dz, reduced to a radial integral of 1 - (sphere average of cos)
    mpmath.mp.dps = 30
    s = mpmath.mpf(s)
    if n == 1:
        osc, avg = (lambda r: mpmath.cos(r) * r ** (-1 - 2 * s)), (lambda r: mpmath.cos(r))
    elif n == 2:
        osc, avg = (lambda r: mpmath.besselj(0, r) * r ** (-1 - 2 * s)), (lambda r: mpmath.besselj(0, r))
    else:
        osc, avg = (lambda r: mpmath.sin(r) * r ** (-2 - 2 * s)), (lambda r: mpmath.sin(r) / r)
    head = mpmath.quad(lambda r: (1 - avg(r)) * r ** (-1 - 2 * s), [0, 1])
    tail = 1 / (2 * s) - mpmath.quadosc(osc, [1, mpmath.inf], omega=1)
    out = sphere_area(n) * (head + tail)
    mpmath.mp.dps = 15
    return float(out)


@pytest.mark.parametrize("n, s", [(1, 0.25), (1, 0.5), (1, 0.75), (2, 0.3), (3, 0.6)])
def test_pv_constant_symbol_integral(n, s):
    assert pv_constant(FracParams(n, s)) * _symbol_integral(n, s) == pytest.approx(1.0, rel=1e-8)


@pytest.mark.parametrize("s", [0.2, 0.5, 0.8])
def test_trace_constant_from_cos_profile(s):
    # extension of cos(x) is cos(x) phi(y), phi(y) = 1 - c y^{2s} + ..., so y^{1-2s} phi' -> -2s c
    # and the trace constant must turn -2s c into the symbol value 1
    with mpmath.workdps(40):
        phi = lambda y: 2 ** (1 - s) / mpmath.gamma(s) * y ** s * mpmath.besselk(s, y)  # noqa: E731
        # 1 - phi(y) = c y^{2s} + a y^2 + b y^{2+2s} + d y^4 + ...; solve for c from five heights
        ys = [mpmath.mpf("0.01") / 2 ** k for k in range(5)]
        exps = [2 * s, 2, 2 + 2 * s, 4, 4 + 2 * s]
        m = mpmath.matrix([[y ** e for e in exps] for y in ys])
        coef = mpmath.lu_solve(m, mpmath.matrix([1 - phi(y) for y in ys]))
        c = coef[0]
    assert trace_constant(FracParams(1, s)) * float(2 * s * c) == pytest.approx(1.0, rel=1e-8)


def test_trace_constant_half():
    assert trace_constant(FracParams(1, 0.5)) == pytest.approx(1.0, rel=1e-14)


@pytest.mark.parametrize("n, s", [(0, 0.5), (1, 0.0), (1, 1.0), (2, -0.1)])
def test_params_reject_bad_values(n, s):
    with pytest.raises(DomainError):
        FracParams(n, s)
