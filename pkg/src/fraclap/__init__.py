"""Caffarelli-Silvestre extension and the fractional Laplacian, three ways.

The extension of a bounded boundary function is computed by convolution with
the Poisson-type kernel, by exact-hitting-time Monte Carlo, and by simulating
the diffusion (X, Y) pathwise.  The fractional Laplacian is obtained both as a
principal-value integral and as the weighted Neumann trace of the extension.
"""

from .bessel import (
    BesselPath,
    PathConfig,
    gamma_sample,
    hitting_cdf,
    hitting_density,
    hitting_mass,
    sample_hitting_time,
    simulate_path,
)
from .core import FracParams, HalfSpacePoint, MCEstimate, QuadResult
from .errors import (
    BudgetExceededError,
    ConfigError,
    DomainError,
    FracLapError,
    PoleError,
    QuadratureError,
)
from .fractional_laplacian import (
    NeumannTraceResult,
    consistency_report,
    frac_laplacian_pv,
    neumann_trace,
)
from .kernel import extension_quadrature, kernel_mass, poisson_kernel
from .registry import BoundaryFunction, parse_function
from .special_functions import (
    gamma,
    gamma_reflected,
    kernel_constant,
    pv_constant,
    trace_constant,
)
from .stochastic_extension import (
    generator_apply,
    generator_mc_check,
    mc_extension,
    mc_extension_pathwise,
)

__version__ = "0.1.0"

__all__ = [
    "BesselPath",
    "BoundaryFunction",
    "BudgetExceededError",
    "ConfigError",
    "DomainError",
    "FracLapError",
    "FracParams",
    "HalfSpacePoint",
    "MCEstimate",
    "NeumannTraceResult",
    "PathConfig",
    "PoleError",
    "QuadResult",
    "QuadratureError",
    "consistency_report",
    "extension_quadrature",
    "frac_laplacian_pv",
    "gamma",
    "gamma_reflected",
    "gamma_sample",
    "generator_apply",
    "generator_mc_check",
    "hitting_cdf",
    "hitting_density",
    "hitting_mass",
    "kernel_constant",
    "kernel_mass",
    "mc_extension",
    "mc_extension_pathwise",
    "neumann_trace",
    "parse_function",
    "poisson_kernel",
    "pv_constant",
    "sample_hitting_time",
    "simulate_path",
    "trace_constant",
]
