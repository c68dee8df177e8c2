"""Command-line front end.

Subcommands: ``occupancy`` (single point), ``sweep`` (tables along sigma,
cq, theta, alpha, or omega), ``spectra`` (position/momentum spectra with the
per-source decomposition), ``optimize`` (cutoff or joint gain/cutoff
optimum), ``selfcheck`` (embedded cross-validation suite).

Configuration comes from an optional JSON file plus flag overrides (flags
win).  Angles cross the CLI boundary in degrees and are radians internally.
Outputs are pure functions of the resolved configuration: byte-identical
reruns, LF line endings, '#'-prefixed metadata lines in CSV carrying the
resolved configuration.  Exit codes: 0 success, 1 configuration error, 2
unstable operating point, 3 self-check failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys as _sys
import tempfile

import numpy as np

from .model import FeedbackParams, SystemParams, chi_eff, noise_force_psds
from .occupancy import (
    occupancy_bad_cavity,
    occupancy_exact,
    occupancy_numeric,
    spectra_pointwise,
    theta_opt,
)
from .optimize import optimize_alpha, optimize_joint, sweep_cq, sweep_sigma
from .selfcheck import run_selfcheck
from .stability import UnstableParametersError, routh_hurwitz_margin

__all__ = ["main", "entrypoint", "ConfigError"]

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_UNSTABLE = 2
EXIT_SELFCHECK = 3

SWEEP_AXES = ("sigma", "cq", "theta", "alpha", "omega")

DEFAULT_SWEEPS = {
    "sigma": (1e1, 1e7, 200),
    "cq": (1e-2, 1e3, 25),
    "theta": (5.0, 90.0, 86),   # degrees
    "alpha": (1e-2, 1e2, 101),
    "omega": (0.0, 2.0, 501),
}


class ConfigError(Exception):
    """Invalid or inconsistent run configuration."""


# ---------------------------------------------------------------------------
# configuration handling
# ---------------------------------------------------------------------------

def _load_config_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            cfg = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("config file must contain a JSON object")
    return cfg


def _resolve_config(args) -> dict:
    cfg = {"system": {}, "feedback": {}, "sweep": {}, "output": {}}
    if args.config:
        loaded = _load_config_file(args.config)
        for block in cfg:
            section = loaded.get(block, {})
            if not isinstance(section, dict):
                raise ConfigError(f"config block '{block}' must be an object")
            cfg[block].update(section)
        unknown = set(loaded) - set(cfg)
        if unknown:
            raise ConfigError(f"unknown config blocks: {sorted(unknown)}")

    # flag overrides
    if getattr(args, "sigma", None) is not None:
        cfg["feedback"]["sigma"] = args.sigma
    if getattr(args, "theta", None) is not None:
        cfg["feedback"]["theta"] = _parse_theta_flag(args.theta)
    for name in ("axis", "points"):
        value = getattr(args, name, None)
        if value is not None:
            cfg["sweep"][name] = value
    if getattr(args, "from_", None) is not None:
        cfg["sweep"]["from"] = args.from_
    if getattr(args, "to", None) is not None:
        cfg["sweep"]["to"] = args.to
    if getattr(args, "format", None) is not None:
        cfg["output"]["format"] = args.format
    if getattr(args, "out", None) is not None:
        cfg["output"]["path"] = args.out
    if getattr(args, "precision", None) is not None:
        cfg["output"]["precision"] = args.precision
    if getattr(args, "path", None) is not None:
        cfg["output"]["occupancy_path"] = args.path

    out = cfg["output"]
    out.setdefault("format", "csv")
    out.setdefault("path", None)
    out.setdefault("precision", 12)
    out.setdefault("occupancy_path", "auto")
    if out["format"] not in ("csv", "json"):
        raise ConfigError(f"output.format must be 'csv' or 'json', got {out['format']!r}")
    if not isinstance(out["precision"], int) or not 1 <= out["precision"] <= 17:
        raise ConfigError("output.precision must be an integer in [1, 17]")
    return cfg


def _parse_theta_flag(text: str):
    if text == "opt":
        return "opt"
    if text.startswith("deg:"):
        try:
            return float(text[4:])
        except ValueError as exc:
            raise ConfigError(f"cannot parse angle {text!r}; use opt or deg:<value>") from exc
    raise ConfigError(f"--theta must be 'opt' or 'deg:<value>', got {text!r}")


def _build_system(cfg: dict) -> SystemParams:
    block = cfg["system"]
    has_ccl = "c_cl" in block
    has_cq = "c_q" in block
    if has_ccl and has_cq:
        raise ConfigError("system.c_cl and system.c_q are mutually exclusive; give exactly one")
    if not has_ccl and not has_cq:
        raise ConfigError("one of system.c_cl or system.c_q is required")
    if "q_m" not in block:
        raise ConfigError("system.q_m is required")
    n_bar = float(block.get("n_bar", 0.0))
    if has_cq:
        if "n_bar" not in block:
            raise ConfigError("system.c_q requires system.n_bar to derive c_cl")
        c_cl = float(block["c_q"]) * n_bar
    else:
        c_cl = float(block["c_cl"])
    try:
        return SystemParams(
            q_m=float(block["q_m"]),
            beta=float(block.get("beta", 0.0)),
            c_cl=c_cl,
            n_bar=n_bar,
            eta=float(block.get("eta", 1.0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid system block: {exc}") from exc


def _build_feedback(cfg: dict, sys_params: SystemParams) -> tuple[FeedbackParams, bool]:
    """Returns the controller settings and whether theta was auto-optimized."""
    block = cfg["feedback"]
    if "sigma" not in block:
        raise ConfigError("feedback.sigma is required for this command")
    sigma = float(block["sigma"])
    alpha = float(block.get("alpha", 1.0))
    theta_spec = block.get("theta", 90.0)
    theta_is_opt = theta_spec == "opt"
    if theta_is_opt:
        theta = theta_opt(sys_params, sigma, alpha)
    else:
        theta = math.radians(float(theta_spec))
    try:
        return FeedbackParams(sigma=sigma, alpha=alpha, theta=theta), theta_is_opt
    except ValueError as exc:
        raise ConfigError(f"invalid feedback block: {exc}") from exc


def _sweep_grid(cfg: dict, axis: str) -> np.ndarray:
    block = cfg["sweep"]
    lo_default, hi_default, pts_default = DEFAULT_SWEEPS[axis]
    lo = float(block.get("from", lo_default))
    hi = float(block.get("to", hi_default))
    points = int(block.get("points", pts_default))
    if points < 2:
        raise ConfigError("sweep.points must be at least 2")
    if axis in ("sigma", "cq", "alpha"):
        if lo <= 0 or hi <= 0:
            raise ConfigError(f"sweep range for axis '{axis}' must be positive")
        return np.geomspace(lo, hi, points)
    return np.linspace(lo, hi, points)


# ---------------------------------------------------------------------------
# output writing
# ---------------------------------------------------------------------------

def _fmt(value, precision: int) -> str:
    if isinstance(value, str):
        return value
    return format(float(value), f".{precision}g")


def _render_csv(columns, rows, config, precision) -> str:
    buf = io.StringIO()
    buf.write("# feedcool output\n")
    buf.write("# config: " + json.dumps(config, sort_keys=True, default=str) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row[c], precision) for c in columns])
    return buf.getvalue()


def _render_json(columns, rows, config, precision) -> str:
    payload = {
        "config": config,
        "rows": [
            {c: (row[c] if isinstance(row[c], str) else float(_fmt(row[c], precision)))
             for c in columns}
            for row in rows
        ],
    }
    return json.dumps(payload, indent=2, sort_keys=True, default=str) + "\n"


def _emit(columns, rows, cfg: dict) -> None:
    for row in rows:
        for c in columns:
            v = row[c]
            if not isinstance(v, str) and not math.isfinite(float(v)):
                raise UnstableParametersError(f"non-finite value in output column '{c}'")
    out = cfg["output"]
    # the echoed configuration describes the computation, not the invocation:
    # the same physics written to two different files must be byte-identical
    echoed = {k: (dict(v) if isinstance(v, dict) else v) for k, v in cfg.items()}
    echoed["output"].pop("path", None)
    text = (_render_csv if out["format"] == "csv" else _render_json)(
        columns, rows, echoed, out["precision"]
    )
    path = out["path"]
    if path is None:
        _sys.stdout.write(text)
        return
    directory = os.path.dirname(os.path.abspath(path)) or "."
    try:
        fd, tmp = tempfile.mkstemp(dir=directory, prefix=".feedcool-", text=True)
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except OSError as exc:
        raise ConfigError(f"cannot write output file {path}: {exc}") from exc


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

BREAKDOWN_COLUMNS = ["n_th", "n_ba", "n_fb", "n_co", "n_v", "n_tot"]


def _occupancy_for_path(sys_params, fb, which: str):
    if which == "auto":
        which = "bad-cavity" if sys_params.beta == 0 else "exact"
    if which == "bad-cavity":
        return occupancy_bad_cavity(sys_params, fb), which
    if which == "exact":
        return occupancy_exact(sys_params, fb), which
    if which == "numeric":
        return occupancy_numeric(sys_params, fb), which
    raise ConfigError(f"unknown occupancy path {which!r}")


def _cmd_occupancy(cfg: dict) -> None:
    sys_params = _build_system(cfg)
    fb, _ = _build_feedback(cfg, sys_params)
    margin = routh_hurwitz_margin(sys_params, fb)
    breakdown, used = _occupancy_for_path(sys_params, fb, cfg["output"]["occupancy_path"])
    row = {
        "path": used,
        "sigma": fb.sigma,
        "alpha": fb.alpha,
        "theta_deg": math.degrees(fb.theta),
        **breakdown.as_dict(),
        "margin": margin,
    }
    _emit(["path", "sigma", "alpha", "theta_deg", *BREAKDOWN_COLUMNS, "margin"], [row], cfg)


def _theta_mode(cfg: dict) -> str:
    mode = cfg["sweep"].get("theta_mode", "opt")
    if mode not in ("opt", "pi2"):
        raise ConfigError("sweep.theta_mode must be 'opt' or 'pi2'")
    return mode


def _occupancy_sweep_path(cfg: dict, sys_params: SystemParams) -> str:
    which = cfg["output"]["occupancy_path"]
    if which == "auto":
        return "bad_cavity" if sys_params.beta == 0 else "exact"
    if which == "bad-cavity":
        return "bad_cavity"
    if which == "exact":
        return "exact"
    raise ConfigError(f"occupancy path {which!r} is not available for sweeps")


def _cmd_sweep(cfg: dict) -> None:
    axis = cfg["sweep"].get("axis")
    if axis is None:
        raise ConfigError("sweep.axis (or --axis) is required")
    if axis not in SWEEP_AXES:
        raise ConfigError(f"sweep.axis must be one of {SWEEP_AXES}, got {axis!r}")
    if axis == "omega":
        _cmd_spectra(cfg)
        return
    sys_params = _build_system(cfg)
    grid = _sweep_grid(cfg, axis)

    if axis == "sigma":
        path = _occupancy_sweep_path(cfg, sys_params)
        table = sweep_sigma(sys_params, grid, path=path)
        columns = ["sigma", "alpha_opt", "theta_opt_deg", *BREAKDOWN_COLUMNS,
                   "n_tot_pi2", "alpha_opt_pi2", "margin"]
        rows = []
        for value, rec, comp in zip(table.values, table.records, table.comparison):
            rows.append({
                "sigma": value,
                "alpha_opt": rec.alpha,
                "theta_opt_deg": math.degrees(rec.theta),
                **rec.breakdown.as_dict(),
                "n_tot_pi2": comp.n_tot,
                "alpha_opt_pi2": comp.alpha,
                "margin": rec.margin,
            })
        _emit(columns, rows, cfg)
        return

    if axis == "cq":
        path = _occupancy_sweep_path(cfg, sys_params)
        table = sweep_cq(sys_params, grid, path=path)
        columns = ["cq", "sigma_opt", "alpha_opt", "theta_opt_deg", *BREAKDOWN_COLUMNS,
                   "n_tot_pi2", "sigma_opt_pi2", "alpha_opt_pi2", "margin"]
        rows = []
        for value, rec, comp in zip(table.values, table.records, table.comparison):
            rows.append({
                "cq": value,
                "sigma_opt": rec.sigma,
                "alpha_opt": rec.alpha,
                "theta_opt_deg": math.degrees(rec.theta),
                **rec.breakdown.as_dict(),
                "n_tot_pi2": comp.n_tot,
                "sigma_opt_pi2": comp.sigma,
                "alpha_opt_pi2": comp.alpha,
                "margin": rec.margin,
            })
        _emit(columns, rows, cfg)
        return

    # plain parameter scans at fixed remaining settings
    fb, theta_was_opt = _build_feedback(cfg, sys_params)
    which = cfg["output"]["occupancy_path"]
    rows = []
    for value in grid:
        if axis == "theta":
            point = FeedbackParams(fb.sigma, fb.alpha, math.radians(float(value)))
        else:
            alpha = float(value)
            theta = theta_opt(sys_params, fb.sigma, alpha) if theta_was_opt else fb.theta
            point = FeedbackParams(fb.sigma, alpha, theta)
        breakdown, _ = _occupancy_for_path(sys_params, point, which)
        rows.append({
            "alpha": point.alpha,
            "theta_deg": math.degrees(point.theta),
            **breakdown.as_dict(),
            "margin": routh_hurwitz_margin(sys_params, point),
        })
    lead = ["theta_deg", "alpha"] if axis == "theta" else ["alpha", "theta_deg"]
    _emit([*lead, *BREAKDOWN_COLUMNS, "margin"], rows, cfg)


def _cmd_spectra(cfg: dict) -> None:
    sys_params = _build_system(cfg)
    fb, _ = _build_feedback(cfg, sys_params)
    routh_margin = routh_hurwitz_margin(sys_params, fb)
    if routh_margin <= 0:
        raise UnstableParametersError(
            f"spectra undefined for unstable loop, margin = {routh_margin:.6e}"
        )
    grid = _sweep_grid(cfg, "omega")
    rows = []
    for omega in grid:
        psds = noise_force_psds(omega, sys_params, fb)
        weight = abs(chi_eff(omega, sys_params, fb)) ** 2
        point = spectra_pointwise(omega, sys_params, fb)
        rows.append({
            "omega": omega,
            "s_x": point.s_x,
            "s_p": point.s_p,
            "s_x_th": weight * psds.s_th,
            "s_x_ba": weight * psds.s_ba,
            "s_x_fb": weight * psds.s_fb,
            "s_x_co": weight * psds.s_co,
            "s_x_v": weight * psds.s_v,
        })
    _emit(["omega", "s_x", "s_p", "s_x_th", "s_x_ba", "s_x_fb", "s_x_co", "s_x_v"], rows, cfg)


def _cmd_optimize(cfg: dict) -> None:
    sys_params = _build_system(cfg)
    mode = _theta_mode(cfg)
    path = _occupancy_sweep_path(cfg, sys_params)
    if "sigma" in cfg["feedback"]:
        record = optimize_alpha(sys_params, float(cfg["feedback"]["sigma"]), mode, path=path)
    else:
        record = optimize_joint(sys_params, mode, path=path)
    row = {
        "mode": record.mode,
        "sigma": record.sigma,
        "alpha": record.alpha,
        "theta_deg": math.degrees(record.theta),
        **record.breakdown.as_dict(),
        "margin": record.margin,
    }
    _emit(["mode", "sigma", "alpha", "theta_deg", *BREAKDOWN_COLUMNS, "margin"], [row], cfg)


def _cmd_selfcheck(cfg: dict) -> int:
    report = run_selfcheck()
    for line in report.lines():
        print(line)
    return EXIT_OK if report.ok else EXIT_SELFCHECK


# ---------------------------------------------------------------------------
# argument parsing and dispatch
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="feedcool",
        description="Steady-state occupancy of a feedback-cooled oscillator "
                    "with variational homodyne readout",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON configuration file")
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", help="output file (default: stdout)")
    common.add_argument("--precision", type=int, help="significant digits (default 12)")
    common.add_argument("--theta", help="homodyne angle: opt or deg:<value>")
    common.add_argument("--sigma", type=float, help="feedback gain override")
    common.add_argument(
        "--path",
        choices=("auto", "bad-cavity", "exact", "numeric"),
        help="occupancy evaluation path (default auto)",
    )

    sub.add_parser("occupancy", parents=[common], help="single operating point")
    sweep = sub.add_parser("sweep", parents=[common], help="tables along one axis")
    sweep.add_argument("--axis", choices=SWEEP_AXES)
    sweep.add_argument("--from", dest="from_", type=float, help="axis start")
    sweep.add_argument("--to", type=float, help="axis end")
    sweep.add_argument("--points", type=int, help="number of grid points")
    spectra = sub.add_parser("spectra", parents=[common], help="fluctuation spectra")
    spectra.add_argument("--from", dest="from_", type=float, help="frequency start")
    spectra.add_argument("--to", type=float, help="frequency end")
    spectra.add_argument("--points", type=int, help="number of grid points")
    sub.add_parser("optimize", parents=[common], help="cutoff or joint optimum")
    sub.add_parser("selfcheck", help="run the embedded cross-validation suite")
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "selfcheck":
            return _cmd_selfcheck({})
        cfg = _resolve_config(args)
        dispatch = {
            "occupancy": _cmd_occupancy,
            "sweep": _cmd_sweep,
            "spectra": _cmd_spectra,
            "optimize": _cmd_optimize,
        }
        dispatch[args.command](cfg)
        return EXIT_OK
    except ConfigError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG
    except UnstableParametersError as exc:
        print(f"instability: {exc}", file=_sys.stderr)
        return EXIT_UNSTABLE
    except ValueError as exc:
        print(f"config error: {exc}", file=_sys.stderr)
        return EXIT_CONFIG


def entrypoint() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    entrypoint()
