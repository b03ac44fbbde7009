"""``fraclap`` command-line front end.

A run is described by one JSON config (file or ``-`` for stdin) and/or flag
overrides; flags win.  The report is JSON with the resolved config echoed,
so any report can be fed back in as a config.

Exit codes: 0 success, 1 invalid config, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import __version__
from .bessel import PathConfig
from .core import FracParams, HalfSpacePoint
from .errors import BudgetExceededError, ConfigError, DomainError, QuadratureError
from .fractional_laplacian import ConsistencyConfig, consistency_report, frac_laplacian_pv, neumann_trace
from .kernel import extension_quadrature
from .registry import parse_function
from .stochastic_extension import mc_extension, mc_extension_pathwise
from .streams import thread_count

MODES = ("extend-quad", "extend-mc", "extend-path", "pv", "trace", "consistency", "validate")
INTERIOR_MODES = ("extend-quad", "extend-mc", "extend-path")
BOUNDARY_MODES = ("pv", "trace", "consistency")

DEFAULTS = {
    "tol": 1e-8,
    "n_samples": 100_000,
    "seed": 0,
    "dt": 1e-4,
    "max_steps": 100_000,
    "y_seq": [0.2, 0.1, 0.05, 0.025],
    "scale": 1.0,
}
KNOWN_KEYS = {"mode", "params", "function", "points", "tol", "n_samples", "seed", "dt",
              "max_steps", "y_seq", "scale", "output"}


def version_string() -> str:
    try:
        out = subprocess.run(["git", "describe", "--tags", "--always", "--dirty"],
                             cwd=Path(__file__).resolve().parent, capture_output=True, text=True, timeout=5)
        if out.returncode == 0 and out.stdout.strip():
            return f"{__version__}+g{out.stdout.strip()}"
    except (OSError, subprocess.SubprocessError):
        pass
    return __version__


class _Located:
    """Maps config keys to line numbers of the raw JSON text for error messages."""

    def __init__(self, text: str | None, source: str):
        self.lines = text.splitlines() if text else []
        self.source = source

    def where(self, key: str) -> str:
        needle = f'"{key}"'
        for i, line in enumerate(self.lines, 1):
            if needle in line:
                return f"{self.source}:{i}: "
        return f"{self.source}: " if self.lines else ""


def _num(value, name: str, loc: _Located, kind=float, positive: bool = False):
    if isinstance(value, bool):
        raise ConfigError(f"{loc.where(name)}{name} must be a number, got {value!r}")
    try:
        v = kind(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{loc.where(name)}{name} must be a number, got {value!r}") from exc
    if kind is int and float(value) != v:
        raise ConfigError(f"{loc.where(name)}{name} must be an integer, got {value!r}")
    if kind is float and not math.isfinite(v):
        raise ConfigError(f"{loc.where(name)}{name} must be finite")
    if positive and not v > 0:
        raise ConfigError(f"{loc.where(name)}{name} must be positive, got {value!r}")
    return v


def validate_config(raw: dict, text: str | None = None, source: str = "<config>") -> dict:
    """Check and normalise a config dict; returns the resolved config.

    Raises :class:`ConfigError` with a ``file:line:`` prefix when the raw text
    is available.
    """
    loc = _Located(text, source)
    if not isinstance(raw, dict):
        raise ConfigError(f"{source}: config must be a JSON object")
    unknown = set(raw) - KNOWN_KEYS
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"{loc.where(key)}unknown config key {key!r}")
    mode = raw.get("mode")
    if mode not in MODES:
        raise ConfigError(f"{loc.where('mode')}mode must be one of {', '.join(MODES)}, got {mode!r}")
    cfg = {"mode": mode}
    for key, default in DEFAULTS.items():
        cfg[key] = raw.get(key, default)
    cfg["tol"] = _num(cfg["tol"], "tol", loc, positive=True)
    cfg["n_samples"] = _num(cfg["n_samples"], "n_samples", loc, kind=int)
    if cfg["n_samples"] < 2:
        raise ConfigError(f"{loc.where('n_samples')}n_samples must be >= 2")
    cfg["seed"] = _num(cfg["seed"], "seed", loc, kind=int)
    if cfg["seed"] < 0:
        raise ConfigError(f"{loc.where('seed')}seed must be non-negative")
    cfg["dt"] = _num(cfg["dt"], "dt", loc, positive=True)
    cfg["max_steps"] = _num(cfg["max_steps"], "max_steps", loc, kind=int, positive=True)
    cfg["scale"] = _num(cfg["scale"], "scale", loc, positive=True)
    ys = cfg["y_seq"]
    if not isinstance(ys, list) or len(ys) < 3:
        raise ConfigError(f"{loc.where('y_seq')}y_seq must be a list of at least three heights")
    cfg["y_seq"] = [_num(v, "y_seq", loc, positive=True) for v in ys]

    output = raw.get("output", {}) or {}
    if not isinstance(output, dict):
        raise ConfigError(f"{loc.where('output')}output must be an object with path and format")
    fmt = output.get("format", "json")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"{loc.where('format')}output format must be json or csv, got {fmt!r}")
    path = output.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError(f"{loc.where('path')}output path must be a string")
    cfg["output"] = {"path": path, "format": fmt}

    if mode == "validate":
        cfg.update(params=None, function=None, points=[])
        return cfg

    params = raw.get("params")
    if not isinstance(params, dict) or "n" not in params or "s" not in params:
        raise ConfigError(f"{loc.where('params')}params must be an object with n and s")
    n = _num(params["n"], "n", loc, kind=int)
    s = _num(params["s"], "s", loc)
    try:
        fp = FracParams(n, s)
    except DomainError as exc:
        raise ConfigError(f"{loc.where('params')}{exc}") from exc
    if mode not in ("extend-mc", "extend-path") and fp.n > 3:
        raise ConfigError(f"{loc.where('params')}mode {mode} uses quadrature and needs n <= 3")
    cfg["params"] = {"n": fp.n, "s": fp.s}

    function = raw.get("function")
    try:
        parse_function(function)
    except ConfigError as exc:
        raise ConfigError(f"{loc.where('function')}{exc}") from exc
    cfg["function"] = function

    points = raw.get("points")
    if not isinstance(points, list) or not points:
        raise ConfigError(f"{loc.where('points')}points must be a non-empty list")
    resolved = []
    for pt in points:
        if not isinstance(pt, list) or not pt:
            raise ConfigError(f"{loc.where('points')}each point must be a list of numbers, got {pt!r}")
        coords = [_num(v, "points", loc) for v in pt]
        if mode in INTERIOR_MODES:
            if len(coords) != fp.n + 1:
                raise ConfigError(f"{loc.where('points')}interior point {pt!r} needs n + 1 = {fp.n + 1} coordinates (x..., y)")
            if coords[-1] <= 0 and mode != "extend-quad":
                raise ConfigError(f"{loc.where('points')}point {pt!r} must have y > 0")
            if coords[-1] < 0:
                raise ConfigError(f"{loc.where('points')}point {pt!r} must have y >= 0")
        else:
            if len(coords) == fp.n + 1 and coords[-1] == 0:
                coords = coords[:-1]
            if len(coords) != fp.n:
                raise ConfigError(f"{loc.where('points')}boundary point {pt!r} needs n = {fp.n} coordinates")
        resolved.append(coords)
    cfg["points"] = resolved
    return cfg


def _compute_point(cfg: dict, u, p: FracParams, coords: list[float]) -> dict:
    mode = cfg["mode"]
    if mode in INTERIOR_MODES:
        at = HalfSpacePoint(coords[:-1], coords[-1])
        if mode == "extend-quad":
            r = extension_quadrature(u, at, p, cfg["tol"])
            return {"point": coords, "value": r.value, "err": r.err_estimate,
                    "diagnostics": {"evaluations": r.evaluations, **r.diagnostics}}
        if mode == "extend-mc":
            r = mc_extension(u, at, p, cfg["n_samples"], cfg["seed"])
        else:
            r = mc_extension_pathwise(u, at, p, PathConfig(dt=cfg["dt"], max_steps=cfg["max_steps"]),
                                      cfg["n_samples"], cfg["seed"])
        return {"point": coords, "value": r.mean, "err": 4 * r.stderr, "stderr": r.stderr,
                "diagnostics": {"n_samples": r.n_samples, "seed": r.seed, **r.diagnostics}}
    if mode == "pv":
        r = frac_laplacian_pv(u, coords, p, cfg["tol"])
        return {"point": coords, "value": r.value, "err": r.err_estimate,
                "diagnostics": {"evaluations": r.evaluations, **r.diagnostics}}
    if mode == "trace":
        r = neumann_trace(u, coords, p, cfg["y_seq"])
        return {"point": coords, "value": r.value, "err": r.err_estimate,
                "diagnostics": {"raw_sequence": r.raw_sequence, "extrapolation_residual": r.extrapolation_residual,
                                "warnings": r.warnings, **r.diagnostics}}
    rep = consistency_report(u, coords, p, ConsistencyConfig(
        pv_tol=cfg["tol"], y_seq=tuple(cfg["y_seq"]), mc_samples=cfg["n_samples"], seed=cfg["seed"]))
    rep.pop("wall_time_s", None)
    return {"point": coords, "value": rep["pv_value"], "err": rep["absolute_discrepancy"], "diagnostics": rep}


def run(cfg: dict) -> tuple[int, dict]:
    """Execute a validated config; returns (exit status, report)."""
    t0 = time.perf_counter()
    report = {"config": cfg, "results": [], "version": version_string()}
    status = 0
    try:
        if cfg["mode"] == "validate":
            from .validation import run_validation

            checks = run_validation(cfg["scale"])
            report["results"] = [{"point": [], "value": 1.0 if c.passed else 0.0, "err": 0.0,
                                  "diagnostics": {"name": c.name, "passed": c.passed, "detail": c.detail}}
                                 for c in checks]
            status = 0 if all(c.passed for c in checks) else 2
        else:
            u = parse_function(cfg["function"])
            p = FracParams(cfg["params"]["n"], cfg["params"]["s"])
            workers = min(thread_count(), len(cfg["points"]))
            if workers > 1:
                with ThreadPoolExecutor(max_workers=workers) as pool:
                    report["results"] = list(pool.map(lambda c: _compute_point(cfg, u, p, c), cfg["points"]))
            else:
                report["results"] = [_compute_point(cfg, u, p, c) for c in cfg["points"]]
    except (QuadratureError, BudgetExceededError) as exc:
        status = 2
        report["error"] = {"type": type(exc).__name__, "message": str(exc),
                           "diagnostics": {k: getattr(exc, k, None) for k in ("value", "err_estimate", "evaluations")}}
    report["wall_time_s"] = time.perf_counter() - t0
    return status, report


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if hasattr(obj, "item"):
        return _jsonable(obj.item())
    return obj


def to_csv(report: dict) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    results = report["results"]
    n = report["config"]["params"]["n"] if report["config"].get("params") else 1
    interior = report["config"]["mode"] in INTERIOR_MODES
    xcols = ["x"] if n == 1 else [f"x{i + 1}" for i in range(n)]
    writer.writerow(xcols + ["y", "value", "err"])
    fmt = lambda v: format(float(v), ".17g")  # noqa: E731
    for r in results:
        pt = r["point"]
        xs = pt[:-1] if interior else pt
        y = pt[-1] if interior else 0.0
        writer.writerow([fmt(v) for v in xs] + [fmt(y), fmt(r["value"]), fmt(r["err"])])
    return buf.getvalue()


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fraclap", description=__doc__.splitlines()[0])
    ap.add_argument("mode", choices=MODES)
    ap.add_argument("--config", help="JSON config file, or - for stdin")
    ap.add_argument("--s", type=float)
    ap.add_argument("--n", type=int)
    ap.add_argument("--point", action="append", help="comma-separated coordinates; repeat for a panel")
    ap.add_argument("--function", help="registry label, e.g. cos:xi=2, gauss, const:c=1.5, rational")
    ap.add_argument("--samples", type=int)
    ap.add_argument("--seed", type=int)
    ap.add_argument("--dt", type=float)
    ap.add_argument("--tol", type=float)
    ap.add_argument("--scale", type=float, help="sample-count multiplier for validate")
    ap.add_argument("--out", help="report path (stdout when omitted)")
    ap.add_argument("--format", choices=("json", "csv"))
    return ap


class _ArgumentError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgumentError(message)


def _fail(status: int, kind: str, message: str) -> int:
    sys.stderr.write(json.dumps({"error": {"type": kind, "message": message, "exit_code": status}}) + "\n")
    return status


def main(argv=None) -> int:
    parser = build_parser()
    parser.__class__ = _Parser
    try:
        args = parser.parse_args(argv)
    except _ArgumentError as exc:
        return _fail(1, "ArgumentError", str(exc))
    text, source, raw = None, "<flags>", {}
    if args.config:
        try:
            if args.config == "-":
                text, source = sys.stdin.read(), "<stdin>"
            else:
                text, source = Path(args.config).read_text(), args.config
            raw = json.loads(text)
        except OSError as exc:
            return _fail(1, "ConfigError", f"cannot read config: {exc}")
        except json.JSONDecodeError as exc:
            return _fail(1, "ConfigError", f"{source}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}")
    if not isinstance(raw, dict):
        return _fail(1, "ConfigError", f"{source}: config must be a JSON object")
    raw = dict(raw)
    if raw.get("mode") not in (None, args.mode):
        text = None  # flag overrides the file; line numbers no longer apply to mode
    raw["mode"] = args.mode
    if args.n is not None or args.s is not None:
        params = dict(raw.get("params") or {})
        if args.n is not None:
            params["n"] = args.n
        if args.s is not None:
            params["s"] = args.s
        raw["params"] = params
    for flag, key in (("function", "function"), ("samples", "n_samples"), ("seed", "seed"),
                      ("dt", "dt"), ("tol", "tol"), ("scale", "scale")):
        val = getattr(args, flag)
        if val is not None:
            raw[key] = val
    if args.point:
        try:
            raw["points"] = [[float(v) for v in pt.split(",")] for pt in args.point]
        except ValueError:
            return _fail(1, "ConfigError", f"--point must be comma-separated numbers, got {args.point!r}")
    if args.out is not None or args.format is not None:
        output = dict(raw.get("output") or {})
        if args.out is not None:
            output["path"] = args.out
        if args.format is not None:
            output["format"] = args.format
        raw["output"] = output
    try:
        cfg = validate_config(raw, text, source)
    except ConfigError as exc:
        return _fail(1, "ConfigError", str(exc))

    status, report = run(cfg)
    report = _jsonable(report)
    body = json.dumps(report, indent=2)
    out_path = cfg["output"]["path"]
    if cfg["output"]["format"] == "csv" and "error" not in report:
        csv_text = to_csv(report)
        if out_path:
            Path(out_path).write_text(csv_text)
            Path(out_path).with_suffix(".json").write_text(body + "\n")
        else:
            sys.stdout.write(csv_text)
    elif out_path:
        Path(out_path).write_text(body + "\n")
    else:
        sys.stdout.write(body + "\n")
    if status:
        err = report.get("error", {"type": "ValidationFailure", "message": "one or more checks failed"})
        return _fail(status, err["type"], err["message"])
    return 0


if __name__ == "__main__":
    sys.exit(main())
