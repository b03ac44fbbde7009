"""The Bessel-type process dY = (1 - 2s) / (2Y) dt + dB and its first hit of 0.

The hitting time from y0 has density

    Phi(t) = 1/(t Gamma(s)) * (y0^2 / (2t))^s * exp(-y0^2 / (2t)),   t > 0,

which is the law of y0^2 / (2G) with G ~ Gamma(s, 1).  The mean is infinite
for every s in (0, 1), so all distributional checks here are CDF based.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import QuadResult
from .errors import BudgetExceededError, DomainError
from .quadrature import fixed_gk, integrate
from .special_functions import gamma, log_gamma

# e^{-745} is below the smallest subnormal
_A_NEGLIGIBLE = 745.0


def _check_y0_s(y0: float, s: float) -> tuple[float, float]:
    y0, s = float(y0), float(s)
    if not math.isfinite(y0) or y0 <= 0:
        raise DomainError(f"starting height must be positive, got {y0}")
    if not math.isfinite(s) or not 0.0 < s < 1.0:
        raise DomainError(f"s must lie in (0, 1), got {s}")
    return y0, s


def hitting_density(t, y0: float, s: float):
    """Density of the first hitting time of 0 from y0; zero for t <= 0."""
    y0, s = _check_y0_s(y0, s)
    arr = np.asarray(t, dtype=float)
    pos = arr > 0
    safe = np.where(pos, arr, 1.0)
    with np.errstate(under="ignore", divide="ignore", over="ignore", invalid="ignore"):
        a = y0 * y0 / (2.0 * safe)
        log_phi = s * np.log(a) - a - np.log(safe) - log_gamma(s)
        # a overflows for subnormal t; the density has long underflowed there
        out = np.where(pos & np.isfinite(a), np.exp(log_phi), 0.0)
    return float(out) if out.ndim == 0 else out


def _log_time_integrand(y0: float, s: float):
    # Phi(t) dt = Phi(e^v) e^v dv
    def g(v):
        t = np.exp(v)
        return hitting_density(t, y0, s) * t
    return g


def hitting_mass(y0: float, s: float, tol: float = 1e-10) -> QuadResult:
    """Integral of the hitting density over (0, inf), by quadrature in log t.

    The two truncated tails are bounded with incomplete-gamma inequalities:
    P(G > a) <= a^{s-1} e^{-a} / Gamma(s) and P(G < a) <= a^s / Gamma(s + 1).
    """
    y0, s = _check_y0_s(y0, s)
    half = 0.5 * y0 * y0
    a_lo_time = _A_NEGLIGIBLE  # small t  <->  large a
    lower_tail = a_lo_time ** (s - 1) * math.exp(-a_lo_time) / gamma(s)
    a_hi_time = math.exp((math.log(tol / 4) + log_gamma(s + 1)) / s)
    upper_tail = a_hi_time ** s / gamma(s + 1)
    v_lo = math.log(half / a_lo_time)
    v_hi = math.log(half / a_hi_time)
    bps = np.linspace(v_lo, v_hi, int(math.ceil((v_hi - v_lo) / 0.5)) + 1)
    res = integrate(_log_time_integrand(y0, s), bps, tol / 2)
    tail = lower_tail + upper_tail
    return QuadResult(res.value, res.err_estimate + tail, res.evaluations,
                      {"tail_bound": tail, **res.diagnostics})


def hitting_cdf(t, y0: float, s: float, grid_step: float = 0.1) -> np.ndarray:
    """P(T <= t) by integrating the density, for an array of times.

    Works in v = log t on a merged grid of the requested times and a uniform
    grid of spacing ``grid_step``, one 21-point Kronrod panel per cell, then
    accumulates.  Intended for many times at once (KS statistics).
    """
    y0, s = _check_y0_s(y0, s)
    t = np.asarray(t, dtype=float)
    flat = t.ravel()
    out = np.zeros(flat.shape)
    pos = flat > 0
    if not np.any(pos):
        return out.reshape(t.shape)
    v_req = np.log(flat[pos])
    v_lo = math.log(0.5 * y0 * y0 / _A_NEGLIGIBLE)
    v_top = max(float(np.max(v_req[np.isfinite(v_req)], initial=v_lo)), v_lo)
    grid = np.arange(v_lo, v_top + grid_step, grid_step)
    finite_req = v_req[np.isfinite(v_req)]
    nodes = np.unique(np.concatenate([grid, np.clip(finite_req, v_lo, None)]))
    cells = fixed_gk(_log_time_integrand(y0, s), nodes[:-1], nodes[1:])
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    idx = np.searchsorted(nodes, np.clip(v_req, v_lo, None))
    vals = np.where(np.isfinite(v_req), cum[np.minimum(idx, cum.size - 1)], 1.0)
    out[pos] = np.minimum(vals, 1.0)
    return out.reshape(t.shape)


def gamma_sample(shape: float, rng: np.random.Generator, size=None):
    """Gamma(shape, 1) draws for 0 < shape < 1.

    Marsaglia-Tsang squeeze/rejection for shape + 1, multiplied by
    U^{1/shape}.  Vectorised; rejected candidates are redrawn in batches.
    """
    shape = float(shape)
    if not math.isfinite(shape) or not 0.0 < shape < 1.0:
        raise DomainError(f"gamma_sample needs shape in (0, 1), got {shape}")
    count = 1 if size is None else int(np.prod(size))
    d = shape + 1.0 - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    out = np.empty(count)
    filled = 0
    while filled < count:
        need = count - filled
        batch = need + need // 20 + 16
        x = rng.standard_normal(batch)
        u = rng.random(batch)
        v = 1.0 + c * x
        ok = v > 0
        v3 = np.where(ok, v, 1.0) ** 3
        with np.errstate(divide="ignore", invalid="ignore"):
            accept = ok & (
                (u < 1.0 - 0.0331 * x ** 4)
                | (np.log(u) < 0.5 * x * x + d * (1.0 - v3 + np.log(v3)))
            )
        got = (d * v3)[accept][:need]
        out[filled:filled + got.size] = got
        filled += got.size
    boost = rng.random(count) ** (1.0 / shape)
    g = np.maximum(out * boost, np.finfo(float).tiny)
    return float(g[0]) if size is None else g.reshape(size)


def hitting_time_from_gamma(y0: float, g):
    """Deterministic map t = y0^2 / (2 g) from a Gamma(s, 1) draw to a hitting time."""
    return y0 * y0 / (2.0 * np.asarray(g, dtype=float)) if np.ndim(g) else y0 * y0 / (2.0 * float(g))


def sample_hitting_time(y0: float, s: float, rng: np.random.Generator, size=None):
    """Exact draws of the first time the process started at y0 reaches 0."""
    y0, s = _check_y0_s(y0, s)
    return hitting_time_from_gamma(y0, gamma_sample(s, rng, size))


@dataclass(frozen=True)
class PathConfig:
    """Euler-Maruyama settings.

    ``eps_boundary`` of None means 1e-4 * y0.  Steps shrink by
    ``substep_factor`` while the path is below 10 * eps_boundary.
    """

    dt: float = 1e-4
    eps_boundary: float | None = None
    substep_factor: float = 10.0
    max_steps: int = 1_000_000

    def __post_init__(self):
        if not self.dt > 0:
            raise DomainError("dt must be positive")
        if self.eps_boundary is not None and not self.eps_boundary > 0:
            raise DomainError("eps_boundary must be positive")
        if not self.substep_factor >= 1:
            raise DomainError("substep_factor must be >= 1")
        if int(self.max_steps) < 1:
            raise DomainError("max_steps must be >= 1")

    def eps_for(self, y0: float) -> float:
        return 1e-4 * y0 if self.eps_boundary is None else float(self.eps_boundary)


@dataclass
class BesselPath:
    times: np.ndarray
    values: np.ndarray
    absorbed_at: float | None

    @property
    def absorbed(self) -> bool:
        return self.absorbed_at is not None


def simulate_path(y0: float, s: float, cfg: PathConfig, rng: np.random.Generator,
                  raise_on_budget: bool = True) -> BesselPath:
    """One recorded Euler-Maruyama path, stopped the first time it crosses eps.

    The crossing time is interpolated linearly inside the last step and the
    path ends there at height 0.
    """
    y0, s = _check_y0_s(y0, s)
    eps = cfg.eps_for(y0)
    if y0 <= eps:
        raise DomainError(f"starting height {y0} must exceed eps_boundary {eps}")
    drift = 0.5 * (1.0 - 2.0 * s)
    near = 10.0 * eps
    fine = cfg.dt / cfg.substep_factor
    times = [0.0]
    values = [y0]
    t, y = 0.0, y0
    block = np.empty(0)
    pos = 0
    for _ in range(int(cfg.max_steps)):
        if pos == block.size:
            block = rng.standard_normal(4096)
            pos = 0
        z = block[pos]
        pos += 1
        h = fine if y < near else cfg.dt
        y_new = y + drift / y * h + math.sqrt(h) * z
        if y_new <= eps:
            hit = t + h * (y - eps) / (y - y_new)
            times.append(hit)
            values.append(0.0)
            return BesselPath(np.array(times), np.array(values), hit)
        t += h
        y = y_new
        times.append(t)
        values.append(y)
    if raise_on_budget:
        raise BudgetExceededError(f"path not absorbed within {cfg.max_steps} steps (t={t:.4g}, y={y:.4g})")
    return BesselPath(np.array(times), np.array(values), None)


@dataclass
class ExitBatch:
    """Absorption data for a batch of paths; NaN times mark unabsorbed paths."""

    tau: np.ndarray
    x_exit: np.ndarray | None
    t_final: np.ndarray
    y_final: np.ndarray
    x_final: np.ndarray | None
    steps: int


def simulate_exits(y0: float, s: float, cfg: PathConfig, n_paths: int,
                   rng_y: np.random.Generator, x0=None,
                   rng_x: np.random.Generator | None = None) -> ExitBatch:
    """Vectorised Euler-Maruyama for many independent paths of Y (and X).

    When ``x0`` is given, an n-dimensional Brownian motion is advanced on the
    same per-path time grid (including substeps) and interpolated at the
    crossing exactly like the time.
    """
    y0, s = _check_y0_s(y0, s)
    eps = cfg.eps_for(y0)
    if y0 <= eps:
        raise DomainError(f"starting height {y0} must exceed eps_boundary {eps}")
    drift = 0.5 * (1.0 - 2.0 * s)
    near = 10.0 * eps
    fine = cfg.dt / cfg.substep_factor
    sqrt_dt, sqrt_fine = math.sqrt(cfg.dt), math.sqrt(fine)
    with_x = x0 is not None
    if with_x:
        x0 = np.atleast_1d(np.asarray(x0, dtype=float))
        if rng_x is None:
            raise ValueError("rng_x is required when x0 is given")
    tau = np.full(n_paths, np.nan)
    x_exit = np.full((n_paths, x0.size), np.nan) if with_x else None
    idx = np.arange(n_paths)
    y = np.full(n_paths, y0)
    t = np.zeros(n_paths)
    x = np.tile(x0, (n_paths, 1)) if with_x else None
    steps = 0
    while idx.size and steps < cfg.max_steps:
        steps += 1
        z = rng_y.standard_normal(idx.size)
        small = y < near
        h = np.where(small, fine, cfg.dt)
        y_new = y + drift / y * h + np.where(small, sqrt_fine, sqrt_dt) * z
        if with_x:
            dx = rng_x.standard_normal((idx.size, x0.size)) * np.where(small, sqrt_fine, sqrt_dt)[:, None]
            x_new = x + dx
        hit = y_new <= eps
        if np.any(hit):
            frac = (y[hit] - eps) / (y[hit] - y_new[hit])
            tau[idx[hit]] = t[hit] + h[hit] * frac
            if with_x:
                x_exit[idx[hit]] = x[hit] + frac[:, None] * (x_new[hit] - x[hit])
            live = ~hit
            idx, y, t, h, y_new = idx[live], y[live], t[live], h[live], y_new[live]
            if with_x:
                x_new = x_new[live]
        y = y_new
        t = t + h
        if with_x:
            x = x_new
    t_final = np.full(n_paths, np.nan)
    y_final = np.full(n_paths, np.nan)
    t_final[idx] = t
    y_final[idx] = y
    x_final = None
    if with_x:
        x_final = np.full((n_paths, x0.size), np.nan)
        x_final[idx] = x
    return ExitBatch(tau, x_exit, t_final, y_final, x_final, steps)
