"""Command-line driver: simulate, validate, estimate, sweep.

Configuration is a flat ``key=value`` file (``#`` starts a comment) plus
command-line flags that mirror the keys; flags win over the file.  Keys:

    mode       simulate | validate | estimate | sweep (informational; the
               subcommand on the command line decides)
    j0         mean exchange coupling (default 1.0)
    epsilon    coupling noise standard deviation (default 0.5)
    m          field strength; sweep mode accepts a comma list (default 0.0)
    t_max      grid horizon for simulate/validate (default 10.0)
    n_steps    grid points for simulate/validate (default 201)
    n_samples  Monte Carlo runs (default 20000)
    seed       master seed of the counter-based sampler (default 12345)
    dt         estimator sample spacing (default 0.05)
    delta      damping threshold of the estimator window (default 1e-3)
    snr        detection SNR threshold (default 10.0)
    refine     run the least-squares refinement, true/false (default true)
    source     analytic | mc series for estimate/sweep (default analytic)
    output     output path; '-' writes to standard output (default '-')
    format     csv | json (default: json for estimate, csv otherwise)
    workers    worker threads for the Monte Carlo series (default 1)

Exit codes: 0 success, 1 configuration error, 2 I/O error, 3 validation
failure, 4 estimation failure (insufficient window data or an aliased
field tone).  Output bytes are independent of the worker count.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass

import numpy as np

from .estimator import EstimatorConfig, FieldEstimate, InsufficientDataError, estimate_field
from .model import SystemParams
from .noise import NoiseEnsemble, analytic_averaged_density, mc_averaged_density_series
from .runner import (
    TABLE_COLUMNS,
    estimation_times,
    return_probability_series,
    simulate_table,
    simulation_times,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2
EXIT_VALIDATION = 3
EXIT_ESTIMATION = 4

MODES = ("simulate", "validate", "estimate", "sweep")
ESTIMATE_JSON_KEYS = ("m_hat", "std_err", "detected", "peak_omega", "residual_rms", "window_start")
SWEEP_COLUMNS = ("m_true",) + ESTIMATE_JSON_KEYS


class ConfigError(Exception):
    pass


def _parse_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "1", "yes", "on"):
        return True
    if lowered in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {text!r}")


_KEY_PARSERS = {
    "mode": str,
    "j0": float,
    "epsilon": float,
    "m": str,  # float, or a comma list in sweep mode
    "t_max": float,
    "n_steps": int,
    "n_samples": int,
    "seed": int,
    "dt": float,
    "delta": float,
    "snr": float,
    "refine": _parse_bool,
    "source": str,
    "output": str,
    "format": str,
    "workers": int,
}

_DEFAULTS = {
    "mode": None,
    "j0": 1.0,
    "epsilon": 0.5,
    "m": "0.0",
    "t_max": 10.0,
    "n_steps": 201,
    "n_samples": 20000,
    "seed": 12345,
    "dt": 0.05,
    "delta": 1e-3,
    "snr": 10.0,
    "refine": True,
    "source": "analytic",
    "output": "-",
    "format": None,
    "workers": 1,
}


@dataclass(frozen=True)
class RunConfig:
    mode: str
    params: SystemParams
    t_max: float
    n_steps: int
    ensemble: NoiseEnsemble
    estimator: EstimatorConfig
    m_values: tuple[float, ...]
    source: str
    output: str
    fmt: str
    workers: int


def parse_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, "r", encoding="utf-8") as handle:
            lines = handle.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {raw.strip()!r}")
        key, _, text = line.partition("=")
        key = key.strip()
        if key not in _KEY_PARSERS:
            raise ConfigError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _KEY_PARSERS[key](text.strip())
        except ConfigError:
            raise
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _parse_m_list(text: str) -> tuple[float, ...]:
    try:
        values = tuple(float(part) for part in str(text).split(",") if part.strip() != "")
    except ValueError as exc:
        raise ConfigError(f"bad field strength list {text!r}: {exc}") from exc
    if not values:
        raise ConfigError(f"no field strengths in {text!r}")
    return values


def build_run_config(mode: str, file_values: dict, flag_values: dict) -> RunConfig:
    """Merge defaults, config file and flags (flags win) into a RunConfig."""
    if mode not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {mode!r}")
    merged = dict(_DEFAULTS)
    merged.update(file_values)
    merged.update({k: v for k, v in flag_values.items() if v is not None})
    if merged["mode"] is not None and merged["mode"] not in MODES:
        raise ConfigError(f"mode must be one of {MODES}, got {merged['mode']!r}")

    m_values = _parse_m_list(merged["m"])
    if mode != "sweep" and len(m_values) != 1:
        raise ConfigError(f"{mode} mode takes a single field strength, got {merged['m']!r}")
    if merged["source"] not in ("analytic", "mc"):
        raise ConfigError(f"source must be analytic or mc, got {merged['source']!r}")
    fmt = merged["format"] or ("json" if mode == "estimate" else "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {merged['format']!r}")
    if merged["n_steps"] < 1:
        raise ConfigError(f"n_steps must be >= 1, got {merged['n_steps']}")
    if merged["workers"] < 1:
        raise ConfigError(f"workers must be >= 1, got {merged['workers']}")
    try:
        params = SystemParams(j0=merged["j0"], epsilon=merged["epsilon"], m=m_values[0])
        ensemble = NoiseEnsemble(n_samples=merged["n_samples"], master_seed=merged["seed"])
        estimator = EstimatorConfig(
            dt=merged["dt"],
            t_max=merged["t_max"] if mode in ("estimate", "sweep") else _DEFAULTS["t_max"],
            damp_threshold=merged["delta"],
            detection_snr=merged["snr"],
            refine=merged["refine"],
        )
        if not merged["t_max"] > 0:
            raise ValueError(f"t_max must be > 0, got {merged['t_max']}")
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return RunConfig(
        mode=mode,
        params=params,
        t_max=merged["t_max"],
        n_steps=merged["n_steps"],
        ensemble=ensemble,
        estimator=estimator,
        m_values=m_values,
        source=merged["source"],
        output=merged["output"],
        fmt=fmt,
        workers=merged["workers"],
    )


def _fmt(value: float) -> str:
    """Floats at 17 significant digits: lossless on re-parse."""
    return format(float(value), ".17g")


def _write_text(path: str, text: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        return
    with open(path, "w", encoding="utf-8", newline="") as handle:
        handle.write(text)


def _csv_text(columns: tuple[str, ...], rows) -> str:
    lines = [",".join(columns)]
    for row in rows:
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def cmd_simulate(cfg: RunConfig) -> int:
    times = simulation_times(cfg.t_max, cfg.n_steps)
    table = simulate_table(cfg.params, times, cfg.ensemble, workers=cfg.workers)
    if cfg.fmt == "csv":
        rows = (
            tuple(_fmt(table[col][i]) for col in TABLE_COLUMNS) for i in range(times.size)
        )
        text = _csv_text(TABLE_COLUMNS, rows)
    else:
        records = [
            {col: float(table[col][i]) for col in TABLE_COLUMNS} for i in range(times.size)
        ]
        text = json.dumps(records, indent=2) + "\n"
    _write_text(cfg.output, text)
    return EXIT_OK


def cmd_validate(cfg: RunConfig) -> int:
    times = simulation_times(cfg.t_max, cfg.n_steps)
    rhos = mc_averaged_density_series(cfg.params, times, cfg.ensemble, workers=cfg.workers)
    errors = np.array(
        [
            np.abs(rhos[i] - analytic_averaged_density(cfg.params, float(t))).max()
            for i, t in enumerate(times)
        ]
    )
    margin = 3.0 / (2.0 * math.sqrt(cfg.ensemble.n_samples))
    max_error = float(errors.max())
    passed = max_error <= margin
    report = {
        "max_error": max_error,
        "margin": margin,
        "n_samples": cfg.ensemble.n_samples,
        "grid_points": int(times.size),
        "worst_t": float(times[int(errors.argmax())]),
        "passed": bool(passed),
    }
    print(
        f"validate: max entrywise |rho_mc - rho_closed_form| = {max_error:.3e} "
        f"over {times.size} grid points (worst at t = {report['worst_t']:g})"
    )
    print(f"validate: margin 3/(2 sqrt(N)) = {margin:.3e} at N = {cfg.ensemble.n_samples}")
    print(f"validate: {'PASS' if passed else 'FAIL'}")
    if cfg.output not in ("", "-"):
        _write_text(cfg.output, json.dumps(report, indent=2) + "\n")
    return EXIT_OK if passed else EXIT_VALIDATION


def _estimate_record(estimate: FieldEstimate) -> dict:
    return {
        "m_hat": estimate.m_hat,
        "std_err": estimate.std_err,
        "detected": estimate.detected,
        "peak_omega": estimate.peak_omega,
        "residual_rms": estimate.residual_rms,
        "window_start": estimate.window_start,
    }


def _run_estimate(cfg: RunConfig, params: SystemParams) -> FieldEstimate:
    times = estimation_times(cfg.estimator)
    ensemble = cfg.ensemble if cfg.source == "mc" else None
    series = return_probability_series(
        params, times, ensemble, source=cfg.source, workers=cfg.workers
    )
    return estimate_field(series, params, cfg.estimator)


def cmd_estimate(cfg: RunConfig) -> int:
    try:
        estimate = _run_estimate(cfg, cfg.params)
    except InsufficientDataError as exc:
        print(f"estimate: insufficient data: {exc}", file=sys.stderr)
        return EXIT_ESTIMATION
    if cfg.fmt == "csv":
        fields = _estimate_record(estimate)
        row = tuple(
            str(value).lower() if isinstance(value, bool) else _fmt(value)
            for value in fields.values()
        )
        record = _csv_text(ESTIMATE_JSON_KEYS, [row])
    else:
        record = json.dumps(_estimate_record(estimate), indent=2) + "\n"
    if cfg.output not in ("", "-"):
        _write_text(cfg.output, record)
    print(f"{estimate.m_hat:.3f}")
    if cfg.output in ("", "-"):
        sys.stdout.write(record)
    print(
        f"estimate: detected={estimate.detected} peak_omega={estimate.peak_omega:.6g} "
        f"band=(0, {math.pi / cfg.estimator.dt:.6g}) window_start={estimate.window_start:.6g}",
        file=sys.stderr,
    )
    if estimate.note:
        print(f"estimate: {estimate.note}", file=sys.stderr)
    if estimate.note.startswith("aliasing"):
        return EXIT_ESTIMATION
    return EXIT_OK


def cmd_sweep(cfg: RunConfig) -> int:
    rows = []
    records = []
    for m_true in cfg.m_values:
        params = dataclasses.replace(cfg.params, m=m_true)
        try:
            estimate = _run_estimate(cfg, params)
        except InsufficientDataError as exc:
            print(f"sweep: insufficient data at m={m_true:g}: {exc}", file=sys.stderr)
            return EXIT_ESTIMATION
        if estimate.note:
            print(f"sweep: m={m_true:g}: {estimate.note}", file=sys.stderr)
        record = {"m_true": m_true, **_estimate_record(estimate)}
        records.append(record)
        rows.append(
            tuple(
                str(record[col]).lower() if col == "detected" else _fmt(record[col])
                for col in SWEEP_COLUMNS
            )
        )
    if cfg.fmt == "csv":
        text = _csv_text(SWEEP_COLUMNS, rows)
    else:
        text = json.dumps(records, indent=2) + "\n"
    _write_text(cfg.output, text)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    """argparse that reports usage problems as config errors (exit 1)."""

    def error(self, message):
        raise ConfigError(message)


def _add_common_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--j0", type=float)
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--m", type=str, help="field strength (comma list in sweep mode)")
    parser.add_argument("--t_max", type=float)
    parser.add_argument("--n_steps", type=int)
    parser.add_argument("--n_samples", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--dt", type=float)
    parser.add_argument("--delta", type=float)
    parser.add_argument("--snr", type=float)
    parser.add_argument("--refine", type=_parse_bool)
    parser.add_argument("--source", choices=("analytic", "mc"))
    parser.add_argument("--output", type=str)
    parser.add_argument("--format", choices=("csv", "json"))
    parser.add_argument("--workers", type=int)


def main(argv=None) -> int:
    parser = _Parser(prog="spinsense", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    for name in MODES:
        _add_common_flags(sub.add_parser(name))
    try:
        args = parser.parse_args(argv)
        file_values = parse_config_file(args.config) if args.config else {}
        flag_values = {
            key: getattr(args, key) for key in _KEY_PARSERS if hasattr(args, key)
        }
        flag_values.pop("mode", None)
        cfg = build_run_config(args.command, file_values, flag_values)
    except ConfigError as exc:
        print(f"spinsense: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    command = {
        "simulate": cmd_simulate,
        "validate": cmd_validate,
        "estimate": cmd_estimate,
        "sweep": cmd_sweep,
    }[cfg.mode]
    try:
        return command(cfg)
    except OSError as exc:
        print(f"spinsense: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
