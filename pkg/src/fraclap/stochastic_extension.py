"""Monte Carlo for w(x0, y0) = E[u(Z_tau)] with Z = (X, Y), plus generator checks.

``mc_extension`` uses the factorised form: tau is drawn exactly from the
hitting-time law of Y, then X_tau ~ N(x0, tau I_n) because X is a Brownian
motion independent of Y.  Each chunk owns two generators, one for tau and one
for the Gaussian, mirroring the product of the two probability spaces.
``mc_extension_pathwise`` instead simulates (X, Y) jointly on one time grid.
"""

from __future__ import annotations

import math

import numpy as np

from .bessel import PathConfig, gamma_sample, hitting_time_from_gamma, simulate_exits
from .core import FracParams, HalfSpacePoint, MCEstimate
from .errors import BudgetExceededError, DomainError
from .streams import run_chunks

# caps astronomically late exits so sqrt(tau) * N(0, 1) stays finite
_TAU_CAP = 1e300


def _check_samples(n_samples: int) -> int:
    n = int(n_samples)
    if n < 2:
        raise DomainError(f"n_samples must be >= 2, got {n_samples}")
    return n


def _finish(values: np.ndarray, seed: int, **diag) -> MCEstimate:
    est = MCEstimate.from_samples(values, seed, **diag)
    # the mean of bounded samples stays inside their range
    est.mean = float(min(max(est.mean, values.min()), values.max()))
    return est


def mc_extension(u, at: HalfSpacePoint, p: FracParams, n_samples: int = 100_000,
                 seed: int = 0, threads: int | None = None) -> MCEstimate:
    """Exact-hitting-time estimate of the s-harmonic extension at ``at``."""
    at.check(p)
    n_samples = _check_samples(n_samples)
    x0, y0, s = at.x_array(), at.y, p.s

    def work(size, gens, _k):
        rng_tau, rng_x = gens
        tau = np.minimum(hitting_time_from_gamma(y0, gamma_sample(s, rng_tau, size)), _TAU_CAP)
        x_exit = x0[None, :] + np.sqrt(tau)[:, None] * rng_x.standard_normal((size, p.n))
        return np.asarray(u.func(x_exit), dtype=float)

    values = np.concatenate(run_chunks(work, n_samples, seed, n_streams=2, threads=threads))
    return _finish(values, seed, method="exact-hitting-time")


def mc_extension_pathwise(u, at: HalfSpacePoint, p: FracParams, cfg: PathConfig | None = None,
                          n_samples: int = 10_000, seed: int = 0, on_budget: str = "complete",
                          threads: int | None = None) -> MCEstimate:
    """Estimate of the same expectation by Euler-Maruyama simulation of (X, Y).

    Paths still alive after ``cfg.max_steps`` are either finished with one
    exact hitting-time draw from their current height (``on_budget="complete"``,
    valid by the strong Markov property) or dropped (``"reject"``).  Dropping
    biases the estimate towards early exits; the count is always reported.
    """
    at.check(p)
    n_samples = _check_samples(n_samples)
    if on_budget not in ("complete", "reject"):
        raise DomainError(f"on_budget must be 'complete' or 'reject', got {on_budget!r}")
    cfg = cfg or PathConfig()
    x0, y0, s = at.x_array(), at.y, p.s

    def work(size, gens, _k):
        rng_y, rng_x, rng_tail = gens
        batch = simulate_exits(y0, s, cfg, size, rng_y, x0=x0, rng_x=rng_x)
        alive = np.isnan(batch.tau)
        x_exit = batch.x_exit
        if np.any(alive):
            if on_budget == "complete":
                y_now = batch.y_final[alive]
                extra = np.minimum(y_now ** 2 / (2.0 * gamma_sample(s, rng_tail, y_now.size)), _TAU_CAP)
                x_exit = x_exit.copy()
                x_exit[alive] = batch.x_final[alive] + np.sqrt(extra)[:, None] * rng_tail.standard_normal((y_now.size, p.n))
            else:
                x_exit = x_exit[~alive]
        vals = np.asarray(u.func(x_exit), dtype=float) if x_exit.shape[0] else np.empty(0)
        return vals, int(alive.sum())

    parts = run_chunks(work, n_samples, seed, n_streams=3, threads=threads)
    values = np.concatenate([v for v, _ in parts])
    unabsorbed = sum(c for _, c in parts)
    if values.size < 2:
        raise BudgetExceededError(f"{unabsorbed} of {n_samples} paths unabsorbed within {cfg.max_steps} steps")
    return _finish(values, seed, method="pathwise", unabsorbed=unabsorbed, on_budget=on_budget,
                   dt=cfg.dt, max_steps=cfg.max_steps)


def _as_point_arrays(f, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    return np.asarray(f(xs, ys), dtype=float).reshape(-1)


def generator_apply(f, at: HalfSpacePoint, p: FracParams, h: float = 2.0 ** -10) -> float:
    """(1 - 2s)/(2y) df/dy + (1/2) Laplacian_{x,y} f by centred differences.

    ``f(x, y)`` takes x of shape (m, n) and y of shape (m,).  The default step
    is a power of two so quadratics are differentiated without rounding at
    dyadic points.
    """
    at.check(p)
    h = float(h)
    if not h > 0:
        raise DomainError("h must be positive")
    if at.y <= h:
        raise DomainError(f"stencil leaves the half-space: y={at.y} <= h={h}")
    n = p.n
    x0 = at.x_array()
    xs = [x0, x0, x0]
    ys = [at.y, at.y + h, at.y - h]
    for i in range(n):
        e = np.zeros(n)
        e[i] = h
        xs += [x0 + e, x0 - e]
        ys += [at.y, at.y]
    vals = _as_point_arrays(f, np.array(xs), np.array(ys))
    f0, fyp, fym = vals[0], vals[1], vals[2]
    lap = (fyp - 2.0 * f0 + fym) / (h * h)
    for i in range(n):
        lap += (vals[3 + 2 * i] - 2.0 * f0 + vals[4 + 2 * i]) / (h * h)
    dy = (fyp - fym) / (2.0 * h)
    return float((1.0 - 2.0 * p.s) / (2.0 * at.y) * dy + 0.5 * lap)


def generator_mc_check(f, at: HalfSpacePoint, p: FracParams, t: float = 1e-3,
                       n_samples: int = 1_000_000, seed: int = 0, n_steps: int = 10,
                       eps_boundary: float | None = None, threads: int | None = None) -> MCEstimate:
    """Monte Carlo estimate of (E[f(Z_t)] - f(z)) / t for the unstopped diffusion.

    Z is advanced by ``n_steps`` Euler-Maruyama steps over [0, t].  Samples
    whose Y falls below ``eps_boundary`` (default 1e-4 * y) are discarded and
    counted in ``diagnostics["boundary_hits"]``.
    """
    at.check(p)
    n_samples = _check_samples(n_samples)
    t = float(t)
    if not t > 0:
        raise DomainError("t must be positive")
    x0, y0 = at.x_array(), at.y
    eps = 1e-4 * y0 if eps_boundary is None else float(eps_boundary)
    drift = 0.5 * (1.0 - 2.0 * p.s)
    dt = t / n_steps
    sq = math.sqrt(dt)
    f0 = float(_as_point_arrays(f, x0[None, :], np.array([y0]))[0])

    def work(size, gens, _k):
        rng_y, rng_x = gens
        y = np.full(size, y0)
        alive = np.ones(size, dtype=bool)
        for _ in range(n_steps):
            ysafe = np.where(alive, y, 1.0)
            y = y + drift / ysafe * dt + sq * rng_y.standard_normal(size)
            alive &= y > eps
        x = x0[None, :] + math.sqrt(t) * rng_x.standard_normal((size, p.n))
        vals = (_as_point_arrays(f, x[alive], y[alive]) - f0) / t
        return vals, int((~alive).sum())

    parts = run_chunks(work, n_samples, seed, n_streams=2, threads=threads)
    values = np.concatenate([v for v, _ in parts])
    hits = sum(c for _, c in parts)
    if values.size < 2:
        raise BudgetExceededError("every sample hit the boundary; reduce t or raise y")
    est = MCEstimate.from_samples(values, seed, boundary_hits=hits, t=t, n_steps=n_steps)
    return est
