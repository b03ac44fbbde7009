"""Small value types carried between modules."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True)
class FracParams:
    """Ambient dimension ``n`` and fractional order ``s`` in (0, 1)."""

    n: int
    s: float

    def __post_init__(self):
        if isinstance(self.n, bool) or int(self.n) != self.n or self.n < 1:
            raise DomainError(f"dimension n must be a positive integer, got {self.n!r}")
        s = float(self.s)
        if not math.isfinite(s) or not 0.0 < s < 1.0:
            raise DomainError(f"fractional order s must lie in (0, 1), got {self.s!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "s", s)

    def require_quadrature_dim(self) -> None:
        if self.n > 3:
            raise DomainError(f"deterministic quadrature supports n <= 3, got n={self.n}")


@dataclass(frozen=True)
class HalfSpacePoint:
    """A point (x, y) of the closed upper half-space, x in R^n and y >= 0."""

    x: tuple[float, ...]
    y: float

    def __init__(self, x, y):
        xs = tuple(float(v) for v in np.atleast_1d(np.asarray(x, dtype=float)).ravel())
        y = float(y)
        if not all(math.isfinite(v) for v in xs) or not math.isfinite(y):
            raise DomainError("half-space point must have finite coordinates")
        if y < 0:
            raise DomainError(f"half-space point needs y >= 0, got y={y}")
        object.__setattr__(self, "x", xs)
        object.__setattr__(self, "y", y)

    @property
    def dim(self) -> int:
        return len(self.x)

    def x_array(self) -> np.ndarray:
        return np.array(self.x, dtype=float)

    def check(self, p: FracParams, interior: bool = True) -> None:
        if self.dim != p.n:
            raise DomainError(f"point has {self.dim} horizontal coordinates but n={p.n}")
        if interior and self.y <= 0:
            raise DomainError("operation requires an interior point (y > 0)")


@dataclass
class QuadResult:
    value: float
    err_estimate: float
    evaluations: int
    diagnostics: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.err_estimate < 0 or self.evaluations < 1:
            raise ValueError("QuadResult needs err_estimate >= 0 and evaluations >= 1")


@dataclass
class MCEstimate:
    mean: float
    stderr: float
    n_samples: int
    seed: int
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_samples(cls, values: np.ndarray, seed: int, **diagnostics) -> MCEstimate:
        values = np.asarray(values, dtype=float)
        n = values.size
        # shifting by the first sample keeps constant integrands exact
        shift = values[0]
        centred = values - shift
        mean = float(shift + centred.mean())
        stderr = float(centred.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
        return cls(mean=mean, stderr=stderr, n_samples=n, seed=seed, diagnostics=dict(diagnostics))

    def within(self, target: float, k: float = 4.0, slack: float = 0.0) -> bool:
        return abs(self.mean - target) <= k * self.stderr + slack
