"""Bounded boundary functions u: R^n -> R with optional analytic oracles.

There is deliberately no expression parser: a fixed, parameterised registry
keeps the boundedness contract checkable.  Every entry works in any dimension;
``cos`` depends on the first coordinate only.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy import special as sps

from .core import FracParams
from .errors import ConfigError
from .special_functions import gamma


def _as_points(x) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=float)
    scalar = arr.ndim <= 1
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    elif arr.ndim == 1:
        arr = arr.reshape(1, -1)
    return arr, scalar


@dataclass
class BoundaryFunction:
    """A bounded continuous function on R^n.

    ``func`` maps an array of shape (m, n) to shape (m,).  Calling the object
    also accepts a single point and then returns a float.

    ``ray_integral_bound`` is a constant B with |int_a^b g(r) dr| <= B for
    every centre x0 and every 0 <= a < b, where g(r) is the average of u over
    the sphere of radius r around x0.  When present it gives far sharper tail
    bounds for oscillating or decaying data than ``bound`` alone.
    """

    func: Callable[[np.ndarray], np.ndarray]
    bound: float
    label: str
    value_range: tuple[float, float] | None = None
    laplacian: Callable[[np.ndarray], np.ndarray] | None = None
    d4_bound: float | None = None
    ray_integral_bound: float | None = None
    known_extension: Callable[[np.ndarray, float, FracParams], float] | None = None
    known_fraclap: Callable[[np.ndarray, FracParams], float] | None = None
    symbol: Callable[[FracParams], float] | None = None
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.bound > 0 or not math.isfinite(self.bound):
            raise ValueError(f"bound must be positive and finite, got {self.bound}")

    def eval(self, x) -> np.ndarray | float:
        pts, scalar = _as_points(x)
        out = np.asarray(self.func(pts), dtype=float)
        return float(out[0]) if scalar else out

    __call__ = eval


def _const(c: float = 1.0) -> BoundaryFunction:
    c = float(c)
    return BoundaryFunction(
        func=lambda x: np.full(x.shape[0], c),
        bound=abs(c) if c != 0 else 1.0,
        label=f"const:c={c:g}",
        value_range=(c, c),
        laplacian=lambda x: np.zeros(np.atleast_2d(x).shape[0]),
        d4_bound=0.0,
        known_extension=lambda x, y, p: c,
        known_fraclap=lambda x, p: 0.0,
        symbol=lambda p: 0.0,
        params={"c": c},
    )


def cos_extension_profile(z, s: float):
    """phi(z) = 2^{1-s} / Gamma(s) z^s K_s(z), the extension of a unit Fourier mode at height z."""
    z = np.asarray(z, dtype=float)
    safe = np.where(z > 0, z, 1.0)
    val = 2.0 ** (1.0 - s) / gamma(s) * safe ** s * sps.kv(s, safe)
    return np.where(z > 0, val, 1.0)


def _cos(xi: float = 1.0) -> BoundaryFunction:
    xi = float(xi)
    k = abs(xi)

    def func(x):
        return np.cos(xi * x[:, 0])

    def known_extension(x, y, p):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return float(np.cos(xi * x[0]) * cos_extension_profile(k * y, p.s))

    return BoundaryFunction(
        func=func,
        bound=1.0,
        label=f"cos:xi={xi:g}",
        value_range=(-1.0, 1.0),
        laplacian=lambda x: -xi * xi * np.cos(xi * np.atleast_2d(x)[:, 0]),
        d4_bound=xi ** 4,
        # antiderivatives of cos, J0 and sinc stay within 2 in absolute range
        ray_integral_bound=2.0 / k if k > 0 else None,
        known_extension=known_extension,
        known_fraclap=lambda x, p: k ** (2 * p.s) * math.cos(xi * float(np.atleast_1d(x)[0])),
        symbol=lambda p: k ** (2 * p.s),
        params={"xi": xi},
    )


def _gauss() -> BoundaryFunction:
    def func(x):
        return np.exp(-np.sum(x * x, axis=1))

    def lap(x):
        x = np.atleast_2d(x)
        r2 = np.sum(x * x, axis=1)
        return (4.0 * r2 - 2.0 * x.shape[1]) * np.exp(-r2)

    def known_fraclap(x, p):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        r2 = float(x @ x)
        n = p.n
        return 4.0 ** p.s * gamma(n / 2 + p.s) / gamma(n / 2) * float(sps.hyp1f1(n / 2 + p.s, n / 2, -r2))

    return BoundaryFunction(
        func=func,
        bound=1.0,
        label="gauss",
        value_range=(0.0, 1.0),
        laplacian=lap,
        d4_bound=12.0,
        ray_integral_bound=math.sqrt(math.pi),
        known_fraclap=known_fraclap,
        params={},
    )


def _rational() -> BoundaryFunction:
    def func(x):
        return 1.0 / (1.0 + np.sum(x * x, axis=1))

    def lap(x):
        x = np.atleast_2d(x)
        n = x.shape[1]
        r2 = np.sum(x * x, axis=1)
        return ((8.0 - 2.0 * n) * r2 - 2.0 * n) / (1.0 + r2) ** 3

    def known_fraclap(x, p):
        if p.n != 1:
            return None
        t = float(np.atleast_1d(x)[0])
        a = 1.0 + 2.0 * p.s
        return gamma(a) * math.cos(a * math.atan(t)) / (1.0 + t * t) ** (a / 2)

    return BoundaryFunction(
        func=func,
        bound=1.0,
        label="rational",
        value_range=(0.0, 1.0),
        laplacian=lap,
        d4_bound=24.0,
        ray_integral_bound=math.pi,
        known_fraclap=known_fraclap,
        params={},
    )


_BUILDERS: dict[str, tuple[Callable[..., BoundaryFunction], tuple[str, ...]]] = {
    "const": (_const, ("c",)),
    "cos": (_cos, ("xi",)),
    "gauss": (_gauss, ()),
    "rational": (_rational, ()),
}

REGISTRY_LABELS = tuple(_BUILDERS)


def parse_function(expr: str) -> BoundaryFunction:
    """Build a registry entry from ``label[:key=value,...]``.

    >>> parse_function("cos:xi=2").params
    {'xi': 2.0}
    """
    if not isinstance(expr, str) or not expr.strip():
        raise ConfigError("function label must be a non-empty string")
    label, _, rest = expr.strip().partition(":")
    label = label.strip()
    if label not in _BUILDERS:
        raise ConfigError(f"unknown function {label!r}; available: {', '.join(REGISTRY_LABELS)}")
    builder, allowed = _BUILDERS[label]
    kwargs = {}
    if rest.strip():
        for item in rest.split(","):
            key, eq, raw = item.partition("=")
            key = key.strip()
            if not eq or key not in allowed:
                raise ConfigError(f"bad parameter {item.strip()!r} for {label!r}; accepted: {', '.join(allowed) or 'none'}")
            try:
                val = float(raw)
            except ValueError as exc:
                raise ConfigError(f"parameter {key} of {label!r} is not a number: {raw!r}") from exc
            if not math.isfinite(val):
                raise ConfigError(f"parameter {key} of {label!r} must be finite")
            kwargs[key] = val
    return builder(**kwargs)
