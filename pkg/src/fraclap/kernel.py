"""Poisson-type kernel of the half-space and the extension U = K_y * u."""

from __future__ import annotations

import math

import numpy as np

from .core import FracParams, HalfSpacePoint, QuadResult
from .errors import DomainError
from .quadrature import integrate
from .special_functions import kernel_constant, sphere_area
from .spherical import sphere_average

_LOG_SWITCH = 1e100


def kernel_radial(r, y: float, p: FracParams, const: float | None = None) -> np.ndarray:
    """K_y as a function of |x|, vectorised over ``r``."""
    if const is None:
        const = kernel_constant(p)
    r = np.asarray(r, dtype=float)
    q = np.hypot(r, y)
    ratio = y / q
    extreme = (q < 1.0 / _LOG_SWITCH) | (q > _LOG_SWITCH)
    with np.errstate(over="ignore", under="ignore", divide="ignore"):
        direct = const * ratio ** (2.0 * p.s) * q ** (-float(p.n))
        if np.any(extreme):
            logged = np.exp(math.log(const) + 2.0 * p.s * np.log(ratio) - p.n * np.log(q))
            direct = np.where(extreme, logged, direct)
    return direct


def poisson_kernel(offset, y: float, p: FracParams) -> float | np.ndarray:
    """K_y(offset) = C_{n,s} y^{2s} / (|offset|^2 + y^2)^{n/2 + s}.

    ``offset`` is one vector of length n (a float is accepted when n = 1) or
    an array of shape (m, n); the result is a float or an array of length m.
    """
    y = float(y)
    if not math.isfinite(y) or y <= 0:
        raise DomainError(f"kernel needs y > 0, got {y}")
    off = np.asarray(offset, dtype=float)
    single = off.ndim <= 1
    off = off.reshape(1, -1) if single else off
    if off.shape[-1] != p.n:
        raise DomainError(f"offset has dimension {off.shape[-1]}, expected n={p.n}")
    if not np.all(np.isfinite(off)):
        raise DomainError("kernel offset must be finite")
    r = np.sqrt(np.sum(off * off, axis=1))
    val = kernel_radial(r, y, p)
    return float(val[0]) if single else val


def radial_breakpoints(scale: float, stop: float, start: float = 0.0) -> np.ndarray:
    """start, then scale * 2^k for k >= -3 while below stop, then stop."""
    pts = [start]
    r = scale / 8.0
    while r < stop:
        if r > pts[-1] * (1 + 1e-12):
            pts.append(r)
        r *= 2.0
    if stop > pts[-1]:
        pts.append(stop)
    return np.array(pts)


def _tail_radius(y: float, p: FracParams, const: float, budget: float,
                 bound: float, ray_bound: float | None) -> tuple[float, float]:
    """Truncation radius R and a rigorous bound on |int_{|x|>R} K_y u|."""
    n, s = p.n, p.s
    area = sphere_area(n)
    scale = const * area * y ** (2 * s)
    # |u| <= bound:  tail <= scale * bound * R^{-2s} / (2s)
    log_r_sup = (math.log(scale * bound / (2 * s)) - math.log(budget)) / (2 * s)
    r_min = max(y * math.sqrt((n - 1) / (1 + 2 * s)), y)
    candidates = [max(math.exp(min(log_r_sup, 700.0)), r_min)]
    if ray_bound is not None:
        # second mean value theorem, weight r^{n-1} y^{2s} (r^2+y^2)^{-n/2-s} decreasing past r_min
        log_r_ray = (math.log(scale * ray_bound) - math.log(budget)) / (1 + 2 * s)
        candidates.append(max(math.exp(min(log_r_ray, 700.0)), r_min))
    R = min(candidates)
    tail_sup = scale * bound * R ** (-2 * s) / (2 * s)
    tail = tail_sup
    if ray_bound is not None:
        weight = area * float(kernel_radial(R, y, p, const)) * R ** (n - 1)
        tail = min(tail_sup, weight * ray_bound)
    return R, tail


def kernel_mass(y: float, p: FracParams, tol: float = 1e-8, max_evals: int = 5_000_000) -> QuadResult:
    """Total mass of K_y over R^n by radial quadrature (should be 1)."""
    p.require_quadrature_dim()
    y = float(y)
    if not y > 0 or not math.isfinite(y):
        raise DomainError(f"kernel_mass needs y > 0, got {y}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    const = kernel_constant(p)
    area = sphere_area(p.n)
    R, tail = _tail_radius(y, p, const, tol / 2, 1.0, None)

    def integrand(r):
        return area * kernel_radial(r, y, p, const) * r ** (p.n - 1)

    res = integrate(integrand, radial_breakpoints(y, R), tol - tail, max_evals=max_evals)
    return QuadResult(res.value, res.err_estimate + tail, res.evaluations,
                      {"truncation_radius": R, "tail_bound": tail, **res.diagnostics})


def extension_quadrature(u, at: HalfSpacePoint, p: FracParams, tol: float = 1e-8,
                         max_evals: int = 20_000_000) -> QuadResult:
    """U(x0, y0) = int K_{y0}(x0 - x) u(x) dx by adaptive radial quadrature.

    The integral is written around x0 as int_0^R |S| K(r) r^{n-1} avg_u(r) dr,
    where avg_u(r) is the mean of u over the sphere of radius r.  The part
    beyond R is bounded analytically and included in ``err_estimate``.  On the
    boundary (y = 0) the boundary value u(x0) is returned.
    """
    p.require_quadrature_dim()
    at.check(p, interior=False)
    if not tol > 0:
        raise DomainError("tol must be positive")
    x0 = at.x_array()
    if at.y == 0:
        return QuadResult(float(u.eval(x0)), 0.0, 1, {"boundary": True})
    if u.value_range is not None and u.value_range[0] == u.value_range[1]:
        # the kernel has unit mass, so constants extend to themselves
        return QuadResult(float(u.value_range[0]), 0.0, 1, {"constant": True})
    y = at.y
    const = kernel_constant(p)
    area = sphere_area(p.n)
    R, tail = _tail_radius(y, p, const, tol / 2, u.bound, u.ray_integral_bound)
    ang_tol = tol / 4
    counter = [0]

    def integrand(r):
        avg, err = sphere_average(u, x0, r, ang_tol, counter=counter, max_count=max_evals * 20)
        w = area * kernel_radial(r, y, p, const) * r ** (p.n - 1)
        return w * avg, w * err

    res = integrate(integrand, radial_breakpoints(y, R), tol - tail, max_evals=max_evals)
    return QuadResult(res.value, res.err_estimate + tail, res.evaluations,
                      {"truncation_radius": R, "tail_bound": tail, **res.diagnostics})
