"""Invariant and acceptance checks shared by ``fraclap validate`` and the test suite.

Each check returns a :class:`CheckResult`; ``scale`` < 1 shrinks sample
counts for quick smoke runs (tolerances are never relaxed, so a quick run
may legitimately fail a statistical criterion it would pass at full scale).
"""

from __future__ import annotations

import math
import os
import time
from dataclasses import asdict, dataclass, field

import numpy as np

from .bessel import PathConfig, hitting_cdf, hitting_mass, sample_hitting_time, simulate_exits
from .core import FracParams, HalfSpacePoint
from .fractional_laplacian import frac_laplacian_pv, neumann_trace
from .kernel import extension_quadrature, kernel_mass, poisson_kernel
from .registry import parse_function
from .stochastic_extension import generator_apply, generator_mc_check, mc_extension, mc_extension_pathwise
from .streams import chunk_generators


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str
    elapsed_s: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail} ({self.elapsed_s:.1f}s)"

    def to_dict(self) -> dict:
        return asdict(self)


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        res = fn(*args, **kwargs)
        res.elapsed_s = time.perf_counter() - t0
        return res
    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def ks_one_sample(samples: np.ndarray, cdf_values_sorted: np.ndarray) -> float:
    n = samples.size
    i = np.arange(1, n + 1)
    return float(max(np.max(i / n - cdf_values_sorted), np.max(cdf_values_sorted - (i - 1) / n)))


def ks_two_sample(a: np.ndarray, b: np.ndarray) -> float:
    """Two-sample KS distance; +inf entries act as censored observations."""
    a = np.sort(a)
    b = np.sort(b)
    grid = np.concatenate([a, b])
    grid = grid[np.isfinite(grid)]
    fa = np.searchsorted(a, grid, side="right") / a.size
    fb = np.searchsorted(b, grid, side="right") / b.size
    return float(np.max(np.abs(fa - fb))) if grid.size else 0.0


@_timed
def check_kernel_normalization(tol: float = 1e-6, limit: float = 1e-5) -> CheckResult:
    worst = 0.0
    for y in (0.1, 1.0, 10.0):
        for n in (1, 2):
            for s in (0.1, 0.25, 0.5, 0.75, 0.9):
                res = kernel_mass(y, FracParams(n, s), tol)
                worst = max(worst, abs(res.value - 1.0))
    return CheckResult("kernel normalization", worst <= limit, f"max |mass - 1| = {worst:.2e} <= {limit:g}",
                       data={"max_deviation": worst})


@_timed
def check_classical_reduction() -> CheckResult:
    p = FracParams(1, 0.5)
    xs = np.linspace(-5.0, 5.0, 10)
    ys = np.logspace(-2, 1, 10)
    worst = 0.0
    for y in ys:
        k = poisson_kernel(xs[:, None], y, p)
        exact = (1 / math.pi) * y / (xs ** 2 + y ** 2)
        worst = max(worst, float(np.max(np.abs(k / exact - 1))))
    ext = extension_quadrature(parse_function("cos"), HalfSpacePoint([0.0], 1.0), p, 1e-9)
    dev = abs(ext.value - math.exp(-1))
    ok = worst <= 1e-12 and dev <= 1e-8
    return CheckResult("classical reduction", ok,
                       f"kernel rel err {worst:.1e} <= 1e-12, |U(0,1) - e^-1| = {dev:.1e} <= 1e-8",
                       data={"kernel_rel_err": worst, "extension_err": dev})


@_timed
def check_hitting_law(n_samples: int = 100_000, seed: int = 20240601) -> CheckResult:
    worst_ks, worst_mass = 0.0, 0.0
    for i, y0 in enumerate((1.0, 2.0)):
        for j, s in enumerate((0.25, 0.5, 0.75)):
            (rng,) = chunk_generators(seed, 10 * i + j)
            t = np.sort(sample_hitting_time(y0, s, rng, n_samples))
            ks = ks_one_sample(t, hitting_cdf(t, y0, s))
            mass = hitting_mass(y0, s, 1e-10)
            worst_ks = max(worst_ks, ks)
            worst_mass = max(worst_mass, abs(mass.value - 1))
    ok = worst_ks <= 0.01 and worst_mass <= 1e-8
    return CheckResult("hitting-time law", ok, f"max KS {worst_ks:.4f} <= 0.01, max |mass - 1| {worst_mass:.1e} <= 1e-8",
                       data={"max_ks": worst_ks, "max_mass_err": worst_mass})


@_timed
def check_pathwise_vs_exact(n_paths: int = 10_000, dt: float = 1e-4, max_steps: int = 200_000,
                            seed: int = 7) -> CheckResult:
    y0, s = 1.0, 0.5
    rng_path, rng_exact = chunk_generators(seed, 0, 2)
    batch = simulate_exits(y0, s, PathConfig(dt=dt, max_steps=max_steps), n_paths, rng_path)
    exact = sample_hitting_time(y0, s, rng_exact, n_paths)
    alive = np.isnan(batch.tau)
    # censor both samples at the earliest time an unabsorbed path reached
    horizon = float(np.min(batch.t_final[alive])) if np.any(alive) else math.inf
    sim = np.where(alive | (batch.tau > horizon), np.inf, batch.tau)
    ex = np.where(exact > horizon, np.inf, exact)
    ks = ks_two_sample(sim, ex)
    return CheckResult("pathwise vs exact sampler", ks <= 0.05,
                       f"censored two-sample KS {ks:.4f} <= 0.05 (horizon {horizon:.3g}, {int(alive.sum())} unabsorbed)",
                       data={"ks": ks, "horizon": horizon, "unabsorbed": int(alive.sum())})


ROUTE_POINTS = {1: [([0.0], 0.5), ([0.0], 1.0), ([1.0], 2.0)],
                2: [([0.0, 0.0], 0.5), ([0.0, 0.0], 1.0), ([1.0, 0.0], 2.0)]}
ROUTE_TOL = {1: 1e-6, 2: 1e-4}


@_timed
def check_route_agreement(n_samples: int = 1_000_000, seed: int = 11,
                          labels=("cos", "gauss", "rational"), dims=(1, 2)) -> CheckResult:
    rows = []
    ok = True
    for n in dims:
        tol = ROUTE_TOL[n]
        for label in labels:
            u = parse_function(label)
            for x, y in ROUTE_POINTS[n]:
                for s in (0.25, 0.5, 0.75):
                    p = FracParams(n, s)
                    at = HalfSpacePoint(x, y)
                    quad = extension_quadrature(u, at, p, tol)
                    mc = mc_extension(u, at, p, n_samples, seed)
                    gap = abs(mc.mean - quad.value)
                    allowed = 4 * mc.stderr + tol
                    ok &= gap <= allowed
                    rows.append({"n": n, "u": label, "x": list(x), "y": y, "s": s, "mc": mc.mean,
                                 "stderr": mc.stderr, "quad": quad.value, "gap": gap, "allowed": allowed})
    worst = max(r["gap"] / r["allowed"] for r in rows)
    return CheckResult("route agreement w = U", ok, f"{len(rows)} cases, max gap/allowance {worst:.2f} <= 1",
                       data={"rows": rows})


@_timed
def check_generator(n_samples: int = 1_000_000, t: float = 1e-3, seed: int = 5) -> CheckResult:
    f = lambda x, y: y ** 2  # noqa: E731
    at = HalfSpacePoint([0.0], 1.0)
    parts = []
    ok = True
    for s in (0.3, 0.7):
        p = FracParams(1, s)
        exact = 2 * (1 - s)
        fd = generator_apply(f, at, p)
        mc = generator_mc_check(f, at, p, t, n_samples, seed)
        ok &= abs(fd - exact) <= 1e-12 and abs(mc.mean - exact) <= 4 * mc.stderr + 0.05
        parts.append(f"s={s}: fd {fd:.15g}, mc {mc.mean:.4f}+-{mc.stderr:.4f} vs {exact:g}")
    return CheckResult("generator of Z", ok, "; ".join(parts))


@_timed
def check_symbol_identity(tol: float = 1e-8, limit: float = 1e-6) -> CheckResult:
    worst = 0.0
    for xi in (0.5, 1.0, 2.0):
        for s in (0.25, 0.5, 0.75):
            val = frac_laplacian_pv(parse_function(f"cos:xi={xi}"), [0.0], FracParams(1, s), tol).value
            worst = max(worst, abs(val / xi ** (2 * s) - 1))
    return CheckResult("symbol identity", worst <= limit, f"max rel err {worst:.1e} <= {limit:g}",
                       data={"max_rel_err": worst})


@_timed
def check_trace_theorem(labels=("cos", "gauss", "rational"), x0s=(0.0, 0.7)) -> CheckResult:
    rows = []
    ok = True
    for label in labels:
        u = parse_function(label)
        for s in (0.25, 0.5, 0.75):
            p = FracParams(1, s)
            for x0 in x0s:
                pv = frac_laplacian_pv(u, [x0], p, 1e-8).value
                tr = neumann_trace(u, [x0], p).value
                gap = abs(tr - pv)
                allowed = 1e-2 * max(1.0, abs(pv))
                ok &= gap <= allowed
                rows.append({"u": label, "s": s, "x0": x0, "pv": pv, "trace": tr, "gap": gap})
    worst = max(r["gap"] / (1e-2 * max(1.0, abs(r["pv"]))) for r in rows)
    return CheckResult("extension theorem (trace = P.V.)", ok,
                       f"{len(rows)} cases, max gap/allowance {worst:.3f} <= 1", data={"rows": rows})


PDE_POINTS = [(0.0, 0.5), (0.5, 0.75), (-1.0, 1.0), (1.5, 1.5), (0.3, 2.0)]


@_timed
def check_pde_residual(labels=("gauss", "rational"), h: float = 1e-3, tol: float = 1e-10) -> CheckResult:
    worst = 0.0
    for label in labels:
        u = parse_function(label)
        for s in (0.3, 0.7):
            p = FracParams(1, s)

            def U(xs, ys):
                return np.array([extension_quadrature(u, HalfSpacePoint(x, y), p, tol).value
                                 for x, y in zip(xs, ys)])

            for x, y in PDE_POINTS:
                worst = max(worst, abs(generator_apply(U, HalfSpacePoint([x], y), p, h)))
    return CheckResult("PDE residual of the extension", worst <= 1e-3, f"max |A U| = {worst:.1e} <= 1e-3",
                       data={"max_residual": worst})


@_timed
def check_determinism(n_samples: int = 300_000, seed: int = 99) -> CheckResult:
    u = parse_function("gauss")
    at = HalfSpacePoint([0.2], 0.8)
    p = FracParams(1, 0.4)
    saved = os.environ.get("FRACLAP_THREADS")
    means = []
    try:
        for threads in ("1", "4", "1", "4"):
            os.environ["FRACLAP_THREADS"] = threads
            a = mc_extension(u, at, p, n_samples, seed)
            b = mc_extension_pathwise(u, at, p, PathConfig(dt=1e-3, max_steps=2000), 2000, seed)
            c = generator_mc_check(lambda x, y: y ** 2, HalfSpacePoint([0.0], 1.0), p, 1e-3, n_samples, seed)
            means.append((a.mean, a.stderr, b.mean, c.mean))
    finally:
        if saved is None:
            os.environ.pop("FRACLAP_THREADS", None)
        else:
            os.environ["FRACLAP_THREADS"] = saved
    ok = all(m == means[0] for m in means)
    return CheckResult("seed determinism across thread counts", ok,
                       f"{len(means)} runs (FRACLAP_THREADS 1/4) bit-identical: {ok}")


def run_validation(scale: float = 1.0) -> list[CheckResult]:
    """All checks in order; ``scale`` multiplies Monte Carlo sample counts."""
    k = lambda n: max(1000, int(n * scale))  # noqa: E731
    return [
        check_kernel_normalization(),
        check_classical_reduction(),
        check_hitting_law(k(100_000)),
        check_pathwise_vs_exact(k(10_000), max_steps=200_000 if scale >= 1 else 50_000),
        check_route_agreement(k(1_000_000)),
        check_generator(k(1_000_000)),
        check_symbol_identity(),
        check_trace_theorem(),
        check_pde_residual(),
        check_determinism(k(300_000)),
    ]
