"""Gamma function and the normalisation constants built from it."""

from __future__ import annotations

import math

from .core import FracParams
from .errors import DomainError, PoleError

# Lanczos approximation, g = 7, nine coefficients
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)
_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _lanczos_parts(x: float) -> tuple[float, float]:
    # valid for x >= 0.5; returns (series sum, t) with Gamma(x) = sqrt(2 pi) t^(x-1/2) e^-t * sum
    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i in range(1, len(_LANCZOS_COEF)):
        acc += _LANCZOS_COEF[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return acc, t


def _check_real(x) -> float:
    try:
        x = float(x)
    except (TypeError, ValueError) as exc:
        raise DomainError(f"gamma needs a real argument, got {x!r}") from exc
    if not math.isfinite(x):
        raise DomainError(f"gamma needs a finite argument, got {x}")
    return x


def gamma(x: float) -> float:
    """Gamma function for real x > 0.

    Lanczos approximation for x >= 1/2 and the reflection formula below that,
    giving relative error well under 1e-12 on [0.05, 30].
    """
    x = _check_real(x)
    if x <= 0:
        raise DomainError(f"gamma is defined here for x > 0 only, got {x}; use gamma_reflected")
    if x < 0.5:
        return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))
    if x > 171.7:
        return math.inf
    acc, t = _lanczos_parts(x)
    if x > 140.0:
        # split the power to avoid overflowing t**(x - 0.5) before e**-t damps it
        half = t ** (0.5 * (x - 0.5))
        return _SQRT_2PI * half * math.exp(-t) * half * acc
    return _SQRT_2PI * t ** (x - 0.5) * math.exp(-t) * acc


def log_gamma(x: float) -> float:
    """log Gamma(x) for x > 0 from the same Lanczos series."""
    x = _check_real(x)
    if x <= 0:
        raise DomainError(f"log_gamma needs x > 0, got {x}")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - log_gamma(1.0 - x)
    acc, t = _lanczos_parts(x)
    return math.log(_SQRT_2PI) + (x - 0.5) * math.log(t) - t + math.log(acc)


def gamma_reflected(x: float) -> float:
    """Gamma on the whole real line except the poles 0, -1, -2, ...

    Negative arguments go through Gamma(x) Gamma(1 - x) = pi / sin(pi x).
    """
    x = _check_real(x)
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x > 0:
        return gamma(x)
    return math.pi / (math.sin(math.pi * x) * gamma(1.0 - x))


def sphere_area(n: int) -> float:
    """Surface measure of the unit sphere S^{n-1} in R^n (2 for n = 1)."""
    return 2.0 * math.pi ** (n / 2.0) / gamma(n / 2.0)


def kernel_constant(p: FracParams) -> float:
    """C_{n,s} = Gamma(s + n/2) / (pi^{n/2} Gamma(s)); makes K_y a probability density."""
    return gamma(p.s + p.n / 2.0) / (math.pi ** (p.n / 2.0) * gamma(p.s))


def pv_constant(p: FracParams) -> float:
    """A_{n,s} = 4^s Gamma(n/2 + s) / (pi^{n/2} |Gamma(-s)|).

    With this normalisation the principal-value operator has Fourier symbol
    |xi|^{2s}.
    """
    return 4.0 ** p.s * gamma(p.n / 2.0 + p.s) / (math.pi ** (p.n / 2.0) * abs(gamma_reflected(-p.s)))


def trace_constant(p: FracParams) -> float:
    """d_s = 2^{2s-1} Gamma(s) / Gamma(1 - s), independent of n.

    (-Delta)^s u(x) = -d_s lim_{y->0} y^{1-2s} dU/dy (x, y) when U is the
    kernel extension normalised by ``kernel_constant``.  Near y = 0 the
    extension behaves like u + Gamma(-s) / (4^s Gamma(s)) y^{2s} (-Delta)^s u,
    which fixes d_s.
    """
    s = p.s
    return 2.0 ** (2.0 * s - 1.0) * gamma(s) / gamma(1.0 - s)
