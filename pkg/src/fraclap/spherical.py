"""Averages of a boundary function over spheres, batched over radii.

n = 1 averages the two points x0 +- r exactly.  n = 2 uses the trapezoid rule
in the angle; n = 3 uses Gauss-Legendre in cos(theta) times the trapezoid rule
in the azimuth.  Both double their resolution until consecutive levels agree,
and report the last difference as the error of each average.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import QuadratureError

_BLOCK_POINTS = 2_000_000


@lru_cache(maxsize=None)
def _rule(n: int, m: int) -> tuple[np.ndarray, np.ndarray]:
    if n == 2:
        theta = 2.0 * np.pi * np.arange(m) / m
        dirs = np.stack([np.cos(theta), np.sin(theta)], axis=1)
        return dirs, np.full(m, 1.0 / m)
    if n == 3:
        mu, w = np.polynomial.legendre.leggauss(m)
        phi = 2.0 * np.pi * np.arange(2 * m) / (2 * m)
        mu_g, phi_g = np.meshgrid(mu, phi, indexing="ij")
        rho = np.sqrt(1.0 - mu_g ** 2)
        dirs = np.stack([rho * np.cos(phi_g), rho * np.sin(phi_g), mu_g], axis=-1).reshape(-1, 3)
        weights = (np.repeat(w / 2.0, 2 * m) / (2 * m))
        return dirs, weights
    raise ValueError(f"no angular rule for n={n}")


def _average_at_level(u, x0: np.ndarray, r: np.ndarray, n: int, m: int) -> np.ndarray:
    dirs, weights = _rule(n, m)
    q = dirs.shape[0]
    out = np.empty(r.size)
    step = max(1, _BLOCK_POINTS // q)
    for lo in range(0, r.size, step):
        rb = r[lo:lo + step]
        pts = x0[None, None, :] + rb[:, None, None] * dirs[None, :, :]
        vals = np.asarray(u.func(pts.reshape(-1, n)), dtype=float).reshape(rb.size, q)
        out[lo:lo + step] = vals @ weights
    return out


def sphere_average(u, x0: np.ndarray, r: np.ndarray, tol: float, m_start: int = 8,
                   m_max: int | None = None, counter: list | None = None,
                   max_count: int | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Mean of u over the sphere |x - x0| = r for every radius in ``r``.

    Returns ``(average, error)``.  Radii whose rule never settles within
    ``m_max`` keep the last level and its (large) error, which the caller folds
    into its own error estimate.  ``counter`` (a one-element list) accumulates
    the number of evaluations of u; exceeding ``max_count`` raises.
    """
    counter = [0] if counter is None else counter
    x0 = np.asarray(x0, dtype=float)
    r = np.asarray(r, dtype=float)
    n = x0.size
    if n == 1:
        pts_p = (x0[0] + r)[:, None]
        pts_m = (x0[0] - r)[:, None]
        avg = 0.5 * (np.asarray(u.func(pts_p)) + np.asarray(u.func(pts_m)))
        counter[0] += 2 * r.size
        return avg, np.zeros_like(avg)
    if m_max is None:
        m_max = 4096 if n == 2 else 256
    avg = np.empty(r.size)
    err = np.empty(r.size)
    pending = np.arange(r.size)
    m = m_start
    prev = _average_at_level(u, x0, r, n, m)
    counter[0] += r.size * _rule(n, m)[1].size
    while pending.size:
        m *= 2
        cur = _average_at_level(u, x0, r[pending], n, m)
        counter[0] += pending.size * _rule(n, m)[1].size
        if max_count is not None and counter[0] > max_count:
            raise QuadratureError(f"angular averaging exceeded {max_count} evaluations", evaluations=counter[0])
        diff = np.abs(cur - prev)
        done = diff <= tol
        if m >= m_max:
            done[:] = True
        idx = pending[done]
        avg[idx] = cur[done]
        err[idx] = diff[done]
        pending = pending[~done]
        prev = cur[~done]
    return avg, err
