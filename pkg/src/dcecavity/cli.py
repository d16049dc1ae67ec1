"""Command-line front end.

Subcommands
-----------
spectrum  ``N_mean`` for modes ``1..n_max`` (CSV: n, N_mean, tail_bound)
scan      ``N_mean`` over a theta grid (CSV: theta, n, N_mean, tail_bound)
maxima    position of the maximum per gamma (CSV)
verify    run verification suites (JSON report, exit status 1 on failure)
oracle    compare independent routes at one parameter point (JSON report)

Options may also come from a flat ``key=value`` config file (``--config``);
flags given on the command line override it.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Sequence

import numpy as np

from .core import params_from

__all__ = ["RunConfig", "ConfigError", "emit_config", "parse_config", "build_parser", "main"]

SUBCOMMANDS = ("spectrum", "scan", "maxima", "verify", "oracle")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


@dataclass(frozen=True)
class RunConfig:
    """Everything a run needs, as given (before normalization)."""

    subcommand: str
    v: float | None = None
    gamma: float | None = None
    rho: float | None = None
    rho_power: int | None = None
    duration: float | None = None
    l_i: float | None = None
    theta: float | None = None
    n_max: int | None = None
    tol: float | None = None
    grid: str | None = None
    modes: tuple[int, ...] | None = None
    gammas: tuple[float, ...] | None = None
    suite: tuple[str, ...] | None = None
    routes: tuple[str, ...] | None = None
    out: str | None = None
    format: str | None = None
    workers: int | None = None
    plot: bool | None = None


_FIELD_TYPES = {
    "subcommand": str,
    "v": float,
    "gamma": float,
    "rho": float,
    "rho_power": int,
    "duration": float,
    "l_i": float,
    "theta": float,
    "n_max": int,
    "tol": float,
    "grid": str,
    "modes": (tuple, int),
    "gammas": (tuple, float),
    "suite": (tuple, str),
    "routes": (tuple, str),
    "out": str,
    "format": str,
    "workers": int,
    "plot": bool,
}


def _fmt(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit_config(cfg: RunConfig) -> str:
    """Flat ``key=value`` text, one line per set field, in field order."""
    lines = []
    for f in fields(cfg):
        val = getattr(cfg, f.name)
        if val is None:
            continue
        text = ",".join(_fmt(x) for x in val) if isinstance(val, tuple) else _fmt(val)
        lines.append(f"{f.name}={text}")
    return "\n".join(lines) + "\n"


def _convert(key: str, text: str):
    kind = _FIELD_TYPES[key]
    try:
        if isinstance(kind, tuple):
            return tuple(_convert_scalar(kind[1], t.strip()) for t in text.split(",") if t.strip())
        return _convert_scalar(kind, text)
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {text!r} ({exc})") from None


def _convert_scalar(kind, text: str):
    if kind is bool:
        if text.lower() in ("true", "1", "yes"):
            return True
        if text.lower() in ("false", "0", "no"):
            return False
        raise ValueError("expected true or false")
    if kind is int:
        return int(text)
    return kind(text)


def parse_config(text: str) -> dict:
    """Parse config text into field values (blank lines and ``#`` comments ignored)."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        key = key.strip().replace("-", "_")
        if not sep or key not in _FIELD_TYPES:
            raise ConfigError(f"config line {lineno}: expected key=value with a known key, got {raw!r}")
        out[key] = _convert(key, value.strip())
    return out


def config_from_text(text: str) -> RunConfig:
    vals = parse_config(text)
    if "subcommand" not in vals:
        raise ConfigError("config lacks a subcommand")
    return RunConfig(**vals)


# --------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dcecavity", description="Particle creation in a uniformly contracting cavity.")
    sub = parser.add_subparsers(dest="subcommand", required=True)
    S = argparse.SUPPRESS

    def common(p):
        p.add_argument("--config", default=S, help="key=value config file; flags override it")
        p.add_argument("--out", default=S, help="output path ('-' for stdout)")
        p.add_argument("--format", choices=("csv", "json"), default=S)
        p.add_argument("--workers", type=int, default=S)

    def speed(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--v", type=float, default=S, help="wall speed (units of c)")
        g.add_argument("--gamma", type=float, default=S, help="Lorentz factor of the wall")

    def duration(p):
        g = p.add_mutually_exclusive_group()
        g.add_argument("--rho", type=float, default=S, help="squeeze rate l_f/l_i")
        g.add_argument("--rho-power", type=int, default=S, help="k in rho = d^-k")
        g.add_argument("--duration", type=float, default=S, help="contraction time T")
        g.add_argument("--theta", type=float, default=S, help="fractional part theta directly")
        p.add_argument("--l-i", type=float, default=S, help="initial length (default 1)")

    def plot(p):
        p.add_argument("--plot", action="store_true", default=S, help="also render a PNG next to --out")

    p = sub.add_parser("spectrum", help="N_mean for modes 1..n_max")
    speed(p)
    duration(p)
    p.add_argument("--n-max", type=int, default=S)
    p.add_argument("--tol", type=float, default=S)
    common(p)
    plot(p)

    p = sub.add_parser("scan", help="N_mean over a theta grid")
    speed(p)
    p.add_argument("--grid", default=S, help="start:stop:count (stop excluded)")
    p.add_argument("--modes", default=S, help="comma-separated mode list")
    p.add_argument("--tol", type=float, default=S)
    common(p)
    plot(p)

    p = sub.add_parser("maxima", help="theta of the maximum per gamma")
    p.add_argument("--gammas", default=S, help="comma-separated gamma list")
    p.add_argument("--modes", default=S, help="comma-separated mode list")
    common(p)
    plot(p)

    p = sub.add_parser("verify", help="run verification suites")
    p.add_argument("--suite", default=S, help="comma-separated suite names or 'all'")
    common(p)

    p = sub.add_parser("oracle", help="compare independent routes at one point")
    speed(p)
    duration(p)
    p.add_argument("--n-max", type=int, default=S)
    p.add_argument("--routes", default=S, help="comma-separated routes")
    common(p)
    return parser


def resolve_config(argv: Sequence[str] | None) -> RunConfig:
    """Merge the config file (if any) with command-line flags."""
    ns = vars(build_parser().parse_args(argv))
    path = ns.pop("config", None)
    vals: dict = {}
    if path is not None:
        try:
            vals = parse_config(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        if vals.get("subcommand", ns["subcommand"]) != ns["subcommand"]:
            raise ConfigError(f"config is for {vals['subcommand']!r}, not {ns['subcommand']!r}")
    # a flag from an exclusive group replaces the whole group from the file
    for group in (("v", "gamma"), ("rho", "rho_power", "duration", "theta")):
        if any(k in ns for k in group):
            for k in group:
                vals.pop(k, None)
    for key, val in ns.items():
        if isinstance(val, str) and isinstance(_FIELD_TYPES.get(key), tuple):
            val = _convert(key, val)
        vals[key] = val
    if vals.get("v") is not None and vals.get("gamma") is not None:
        raise ConfigError("give either v or gamma, not both")
    return RunConfig(**vals)


# --------------------------------------------------------------------------
# helpers


def _params(cfg: RunConfig, need_duration: bool = True):
    if cfg.v is None and cfg.gamma is None:
        raise ConfigError("a wall speed is required: --v or --gamma")
    forms = {k: getattr(cfg, k) for k in ("rho", "rho_power", "duration", "theta") if getattr(cfg, k) is not None}
    if need_duration and len(forms) != 1:
        raise ConfigError("give exactly one of --rho, --rho-power, --duration or --theta")
    if not need_duration:
        forms = {"theta": 0.5}
    kw = {"T" if k == "duration" else k: v for k, v in forms.items()}
    try:
        return params_from(v=cfg.v, gamma=cfg.gamma, l_i=cfg.l_i if cfg.l_i is not None else 1.0, **kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_grid(spec: str) -> list[float]:
    """``start:stop:count`` with ``stop`` excluded, so ``0:1:256`` gives ``k/256``."""
    try:
        start, stop, count = spec.split(":")
        start, stop, count = float(start), float(stop), int(count)
    except ValueError:
        raise ConfigError(f"grid must be start:stop:count, got {spec!r}") from None
    if count < 1 or not (0.0 <= start < stop <= 1.0):
        raise ConfigError("grid needs count >= 1 and 0 <= start < stop <= 1")
    return [start + (stop - start) * k / count for k in range(count)]


def _num(x) -> str:
    x = float(x)
    return repr(x) if math.isfinite(x) else str(x)


def _write_csv(cfg: RunConfig, header, rows) -> str:
    if cfg.format not in (None, "csv"):
        raise ConfigError("data outputs are CSV; JSON is reserved for verification reports")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(x) if isinstance(x, (float, np.floating)) else x for x in r])
    _emit(cfg, buf.getvalue())
    return buf.getvalue()


def _write_json(cfg: RunConfig, records) -> None:
    if cfg.format not in (None, "json"):
        raise ConfigError("reports are JSON; CSV is reserved for data outputs")
    _emit(cfg, json.dumps(records, indent=2, sort_keys=False, allow_nan=True) + "\n")


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out in (None, "-"):
        sys.stdout.write(text)
        return
    try:
        with open(cfg.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise ConfigError(f"cannot write {cfg.out}: {exc}") from None


def _plot_path(cfg: RunConfig) -> Path | None:
    if not cfg.plot:
        return None
    if cfg.out in (None, "-"):
        raise ConfigError("--plot needs an --out file; the figure is written next to it")
    return Path(cfg.out).with_suffix(".png")


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def _jsonable(x):
    if isinstance(x, dict):
        return {k: _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    return x


# --------------------------------------------------------------------------
# subcommands


def run_spectrum(cfg: RunConfig) -> int:
    from .spectrum import DEFAULT_TOL, spectrum

    p = _params(cfg)
    png = _plot_path(cfg)
    res = spectrum(p.d, p.theta, cfg.n_max or 16, tol=cfg.tol or DEFAULT_TOL)
    if res.shortfall:
        _warn(f"tail bound above tolerance for modes {list(res.shortfall)}")
    _write_csv(cfg, ("n", "N_mean", "tail_bound"), [(e.n, e.n_mean, e.tail_bound) for e in res.entries])
    if png:
        from .plotting import plot_spectrum

        plot_spectrum([e.n for e in res.entries], [e.n_mean for e in res.entries], png,
                      title=f"d={p.d:.4g}, theta={p.theta:.4g}")
    return 0


def run_scan(cfg: RunConfig) -> int:
    from .spectrum import scan_theta

    p = _params(cfg, need_duration=False)
    png = _plot_path(cfg)
    grid = parse_grid(cfg.grid or "0:1:64")
    rows = scan_theta(cfg.modes or (1,), p.d, grid, tol=cfg.tol or 1e-8, workers=cfg.workers or 1)
    bad = sorted({(r.n, r.theta) for r in rows if not r.converged})
    if bad:
        _warn(f"{len(bad)} points did not reach the tolerance (first {bad[:3]})")
    _write_csv(cfg, ("theta", "n", "N_mean", "tail_bound"), [(r.theta, r.n, r.n_mean, r.tail_bound) for r in rows])
    if png:
        from .plotting import plot_scan

        plot_scan(rows, png, title=f"d={p.d:.4g}")
    return 0


def run_maxima(cfg: RunConfig) -> int:
    from .spectrum import exact_maximum_search, maxima_positions

    png = _plot_path(cfg)
    rows = []
    for gamma in cfg.gammas or (2.0, 10.0, 100.0, 1000.0):
        try:
            d = params_from(gamma=gamma, theta=0.5).d
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        for n in cfg.modes or (1,):
            m = exact_maximum_search(n, d)
            preds = maxima_positions(n, d)
            pred = min(preds, key=lambda t: abs(t - m.theta_max)) if preds else math.nan
            rows.append((float(gamma), n, pred, m.theta_max, m.n_at_max, "true" if m.multimodal else "false"))
    _write_csv(cfg, ("gamma", "n", "theta_max_predicted", "theta_max_exact", "N_at_max", "multimodal"), rows)
    if png:
        from .plotting import plot_maxima

        first = [r for r in rows if r[1] == (cfg.modes or (1,))[0]]
        plot_maxima([r[0] for r in first], [r[2] for r in first], [r[3] for r in first], png)
    return 0


def run_verify(cfg: RunConfig) -> int:
    from .verify import run_suites

    try:
        results = run_suites(cfg.suite or ("all",), workers=cfg.workers or 1)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    _write_json(cfg, [_jsonable(r.as_dict()) for r in results])
    for r in results:
        if not r.passed:
            _warn(f"{r.suite}/{r.check} failed: measured {r.measured:.4g}, threshold {r.threshold:.4g}")
    return 0 if all(r.passed for r in results) else 1


def run_oracle(cfg: RunConfig) -> int:
    from .oracles import compare_routes

    p = _params(cfg)
    routes = cfg.routes or ("closed_form", "region", "double_quadrature")
    pt = {"d": p.d, "theta": p.theta, "N": cfg.n_max or 4}
    try:
        reports = compare_routes([pt], routes)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    records = []
    for rep in reports:
        for row in rep.per_point:
            records.append({
                "suite": "oracle",
                "check": f"{rep.route_a}_vs_{rep.route_b}",
                "status": "pass" if row.passed else "fail",
                "measured": row.max_abs_diff,
                "threshold": row.budget,
                "params": _jsonable({**row.params, **({"failure": row.failure} if row.failure else {})}),
            })
    _write_json(cfg, records)
    return 0 if all(r["status"] == "pass" for r in records) else 1


_RUNNERS = {
    "spectrum": run_spectrum,
    "scan": run_scan,
    "maxima": run_maxima,
    "verify": run_verify,
    "oracle": run_oracle,
}


def run(cfg: RunConfig) -> int:
    return _RUNNERS[cfg.subcommand](cfg)


def main(argv: Sequence[str] | None = None) -> int:
    try:
        cfg = resolve_config(argv)
        return run(cfg)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
