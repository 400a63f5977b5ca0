"""Configuration-driven command line front end.

Usage::

    twpasim <task> --config <path> [--out <path>] [--format csv|json]
            [--threads N]

The config is a flat ``key = value`` text file ('#' starts a comment).
Frequencies are in Hz, powers in dBm, flux in flux quanta; see the README
for the full key table and per-task output columns.  Exit codes: 0 on
success, 2 on a configuration error, 3 on a numeric/model error.  The
environment variable ``TWPASIM_LOG`` (debug/info/warning) controls log
verbosity.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import logging
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from . import constants
from .cme import gain_spectrum, isolation_spectrum, saturation_curve
from .errors import ConfigError, TwpaError
from .medium import MediumParams, linear_transmission_db, loss_wavevector, wavevector
from .noisecal import fit_output_line, read_noise_records
from .phasematch import ToneConfig, dk_total
from .unitcell import SnailSpec, cell_coefficients, equilibrium_phase, flux_sweep

log = logging.getLogger("twpasim")

TASKS = ("cell-params", "dispersion", "phase-mismatch", "gain", "isolation",
         "saturation", "noise-fit", "flux-sweep")

# key -> (type, default); REQUIRED means no default, presence enforced
# per task by _TASK_REQUIRED.
_REQUIRED = object()
_SCHEMA = {
    "task": (str, _REQUIRED),
    "critical_current_a": (float, 2.2e-6),
    "asymmetry_ratio": (float, 0.07),
    "ground_capacitance_f": (float, 250e-15),
    "junction_capacitance_f": (float, 35e-15),
    "cells": (int, 700),
    "tan_delta": (float, 2.9e-3),
    "flux": (float, 0.0),
    "consistent_derivatives": (bool, False),
    "amp_scale": (float, 1.0),
    "beta_override": (float, None),
    "gamma_override": (float, None),
    "pump_freq_hz": (float, None),
    "pump_power_dbm": (float, None),
    "iso_pump_freq_hz": (float, None),
    "iso_pump_power_dbm": (float, None),
    "signal_freq_min_hz": (float, 4e9),
    "signal_freq_max_hz": (float, 8e9),
    "signal_points": (int, 101),
    "signal_freq_hz": (float, None),
    "signal_power_dbm": (float, -130.0),
    "signal_power_min_dbm": (float, -150.0),
    "signal_power_max_dbm": (float, -85.0),
    "signal_power_points": (int, 27),
    "flux_min": (float, 0.0),
    "flux_max": (float, 0.5),
    "flux_points": (int, 51),
    "noise_data_path": (str, None),
    "bandwidth_hz": (float, None),
    "solver_rtol": (float, 1e-10),
    "out_path": (str, None),
    "format": (str, "csv"),
    "precision": (int, 12),
}

_TASK_REQUIRED = {
    "gain": ("pump_freq_hz", "pump_power_dbm"),
    "phase-mismatch": ("pump_freq_hz", "pump_power_dbm"),
    "saturation": ("pump_freq_hz", "pump_power_dbm", "signal_freq_hz"),
    "isolation": ("iso_pump_freq_hz", "iso_pump_power_dbm"),
    "noise-fit": ("noise_data_path", "bandwidth_hz"),
}


@dataclass
class RunConfig:
    values: dict
    source_text: str
    threads: int = 1

    def __getattr__(self, name):
        try:
            return self.values[name.replace("__", "-")]
        except KeyError:
            raise AttributeError(name) from None

    def __getitem__(self, key):
        return self.values[key]

    @property
    def config_hash(self) -> str:
        canonical = "\n".join(
            f"{k}={self.values[k]!r}" for k in sorted(self.values))
        return hashlib.sha256(canonical.encode()).hexdigest()


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("true", "yes", "on", "1"):
        return True
    if t in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def validate(config_text: str, threads: int = 1) -> RunConfig:
    """Parse and validate a config, applying defaults.

    Raises :class:`ConfigError` carrying (line, message) diagnostics for
    every problem found.
    """
    diags = []
    seen = {}
    for lineno, raw in enumerate(config_text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            diags.append((lineno, f"expected 'key = value', got {raw!r}"))
            continue
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SCHEMA:
            diags.append((lineno, f"unknown key '{key}'"))
            continue
        if key in seen:
            diags.append((lineno, f"duplicate key '{key}' "
                                  f"(first at line {seen[key][1]})"))
            continue
        seen[key] = (value, lineno)

    values = {}
    for key, (typ, default) in _SCHEMA.items():
        if key in seen:
            text, lineno = seen[key]
            try:
                if typ is bool:
                    values[key] = _parse_bool(text)
                else:
                    values[key] = typ(text)
            except ValueError:
                diags.append((lineno, f"cannot parse '{key}' value "
                                      f"{text!r} as {typ.__name__}"))
        elif default is _REQUIRED:
            diags.append((0, f"missing required key '{key}'"
                          if key != "task" else "missing task"))
        else:
            values[key] = default

    if "task" in values:
        task = values["task"]
        if task not in TASKS:
            diags.append((seen.get("task", ("", 0))[1],
                          f"unknown task '{task}'; expected one of "
                          f"{', '.join(TASKS)}"))
        else:
            for req in _TASK_REQUIRED.get(task, ()):
                if values.get(req) is None:
                    diags.append((0, f"task '{task}' requires key '{req}'"))
        if task == "noise-fit" and values.get("noise_data_path"):
            if not os.path.exists(values["noise_data_path"]):
                diags.append((seen.get("noise_data_path", ("", 0))[1],
                              f"noise_data_path does not exist: "
                              f"{values['noise_data_path']}"))

    if values.get("format") not in ("csv", "json"):
        diags.append((seen.get("format", ("", 0))[1],
                      f"format must be csv or json, got "
                      f"{values.get('format')!r}"))
    for key in ("signal_points", "signal_power_points", "flux_points",
                "precision", "cells"):
        if key in values and values[key] is not None and values[key] < 1:
            diags.append((seen.get(key, ("", 0))[1],
                          f"'{key}' must be >= 1"))

    if diags:
        raise ConfigError(sorted(diags))
    log.info("config valid: task=%s, resolved %d keys", values["task"],
             len(values))
    for k in sorted(values):
        log.debug("  %s = %r", k, values[k])
    return RunConfig(values=values, source_text=config_text, threads=threads)


def _device(cfg: RunConfig):
    spec = SnailSpec(I0=cfg["critical_current_a"],
                     r=cfg["asymmetry_ratio"],
                     Cg=cfg["ground_capacitance_f"],
                     CJ=cfg["junction_capacitance_f"],
                     N=cfg["cells"],
                     tan_delta=cfg["tan_delta"])
    fp = equilibrium_phase(spec, cfg["flux"])
    coeffs = cell_coefficients(spec, fp, cfg["consistent_derivatives"])
    medium = MediumParams.from_cell(spec, coeffs)
    beta = cfg["beta_override"] if cfg["beta_override"] is not None \
        else coeffs.beta
    gamma = cfg["gamma_override"] if cfg["gamma_override"] is not None \
        else coeffs.gamma
    return spec, coeffs, medium, beta, gamma


def _signal_grid(cfg: RunConfig) -> np.ndarray:
    return 2.0 * math.pi * np.linspace(cfg["signal_freq_min_hz"],
                                       cfg["signal_freq_max_hz"],
                                       cfg["signal_points"])


def _cell_row(flux, fp, c):
    return [flux, fp.phi_star, c.alpha, c.beta_t, c.gamma_t, c.L,
            c.omega0 / (2 * math.pi), c.omegaJ / (2 * math.pi), c.Z,
            c.g3, c.g4, c.beta, c.gamma]


_CELL_COLUMNS = ["flux_phi0", "phi_star_rad", "alpha_tilde", "beta_tilde",
                 "gamma_tilde", "inductance_h", "f0_hz", "fj_hz",
                 "impedance_ohm", "g3_rad_s", "g4_rad_s", "beta", "gamma"]


def _map_grid(fn, grid, threads):
    """Apply fn over grid preserving order; optional thread pool."""
    if threads <= 1:
        return [fn(g) for g in grid]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, grid))


def _task_cell_params(cfg: RunConfig):
    spec, coeffs, _, _, _ = _device(cfg)
    fp = coeffs.flux
    return _CELL_COLUMNS, [_cell_row(cfg["flux"], fp, coeffs)], {}


def _task_flux_sweep(cfg: RunConfig):
    spec, _, _, _, _ = _device(cfg)
    grid = np.linspace(cfg["flux_min"], cfg["flux_max"], cfg["flux_points"])
    coeffs = flux_sweep(spec, grid, cfg["consistent_derivatives"])
    rows = [_cell_row(f, c.flux, c) for f, c in zip(grid, coeffs)]
    return _CELL_COLUMNS, rows, {}


def _task_dispersion(cfg: RunConfig):
    _, _, medium, _, _ = _device(cfg)
    omegas = _signal_grid(cfg)

    def point(w):
        try:
            return [w / (2 * math.pi), wavevector(medium, w),
                    loss_wavevector(medium, w),
                    linear_transmission_db(medium, w)]
        except TwpaError:
            return [w / (2 * math.pi), math.nan, math.nan, math.nan]

    rows = _map_grid(point, omegas, cfg.threads)
    cols = ["freq_hz", "k_rad_per_cell", "loss_k_per_cell",
            "transmission_db"]
    return cols, rows, {}


def _breakdown_or_nan(medium, beta, gamma, w, pump, amp_scale):
    try:
        bd = dk_total(medium, beta, gamma,
                      ToneConfig(freq=w, power_dbm=-200.0), pump, amp_scale)
        return [bd.dk_dispersion, bd.dk_kerr, bd.dk_dynamic, bd.dk_total]
    except TwpaError:
        return [math.nan] * 4


def _task_phase_mismatch(cfg: RunConfig):
    _, _, medium, beta, gamma = _device(cfg)
    pump = ToneConfig(freq=2 * math.pi * cfg["pump_freq_hz"],
                      power_dbm=cfg["pump_power_dbm"])
    omegas = _signal_grid(cfg)

    def point(w):
        return [w / (2 * math.pi)] + _breakdown_or_nan(
            medium, beta, gamma, w, pump, cfg["amp_scale"])

    rows = _map_grid(point, omegas, cfg.threads)
    cols = ["freq_hz", "dk_dispersion_rad_per_cell", "dk_kerr_rad_per_cell",
            "dk_dynamic_rad_per_cell", "dk_total_rad_per_cell"]
    return cols, rows, {}


def _task_gain(cfg: RunConfig):
    _, _, medium, beta, gamma = _device(cfg)
    pump = ToneConfig(freq=2 * math.pi * cfg["pump_freq_hz"],
                      power_dbm=cfg["pump_power_dbm"])
    omegas = _signal_grid(cfg)

    def point(w):
        spec_one = gain_spectrum(medium, pump, [w], cfg["signal_power_dbm"],
                                 beta=beta, gamma=gamma,
                                 amp_scale=cfg["amp_scale"],
                                 rtol=cfg["solver_rtol"])
        dk = _breakdown_or_nan(medium, beta, gamma, w, pump,
                               cfg["amp_scale"])[3]
        return [w / (2 * math.pi), float(spec_one.gain_db[0]), dk]

    rows = _map_grid(point, omegas, cfg.threads)
    return ["freq_hz", "gain_db", "dk_total_rad_per_cell"], rows, {}


def _task_isolation(cfg: RunConfig):
    _, _, medium, beta, _ = _device(cfg)
    pump = ToneConfig(freq=2 * math.pi * cfg["iso_pump_freq_hz"],
                      power_dbm=cfg["iso_pump_power_dbm"],
                      direction="backward")
    omegas = _signal_grid(cfg)

    def point(w):
        spec_one = isolation_spectrum(medium, pump, [w],
                                      cfg["signal_power_dbm"], beta=beta,
                                      amp_scale=cfg["amp_scale"],
                                      rtol=cfg["solver_rtol"])
        return [w / (2 * math.pi), float(spec_one.gain_db[0]),
                float(spec_one.upconverted_fraction[0])]

    rows = _map_grid(point, omegas, cfg.threads)
    return ["freq_hz", "isolation_db", "upconverted_fraction"], rows, {}


def _task_saturation(cfg: RunConfig):
    _, _, medium, beta, gamma = _device(cfg)
    pump = ToneConfig(freq=2 * math.pi * cfg["pump_freq_hz"],
                      power_dbm=cfg["pump_power_dbm"])
    powers = np.linspace(cfg["signal_power_min_dbm"],
                         cfg["signal_power_max_dbm"],
                         cfg["signal_power_points"])
    res = saturation_curve(medium, pump, 2 * math.pi * cfg["signal_freq_hz"],
                           powers, beta=beta, gamma=gamma,
                           amp_scale=cfg["amp_scale"],
                           rtol=cfg["solver_rtol"])
    rows = [[p, g] for p, g in zip(res.power_dbm, res.gain_db)]
    meta = {"small_signal_gain_db": res.small_signal_gain_db,
            "compression_1db_dbm": res.compression_1db_dbm}
    return ["signal_power_dbm", "gain_db"], rows, meta


def _task_noise_fit(cfg: RunConfig):
    data = read_noise_records(cfg["noise_data_path"])
    fit = fit_output_line(data, cfg["bandwidth_hz"])
    m = fit.model
    rows = []
    for i in range(m.omega.size):
        photons = m.n_out[i] / (constants.HBAR * m.omega[i])
        rows.append([m.omega[i] / (2 * math.pi), m.g_out[i], m.n_out[i],
                     photons, fit.g_stderr[i], fit.n_stderr[i]])
    cols = ["freq_hz", "g_out", "n_out_w_per_hz", "n_out_photons",
            "g_stderr", "n_stderr"]
    return cols, rows, {"bandwidth_hz": cfg["bandwidth_hz"]}


_TASK_FN = {
    "cell-params": _task_cell_params,
    "flux-sweep": _task_flux_sweep,
    "dispersion": _task_dispersion,
    "phase-mismatch": _task_phase_mismatch,
    "gain": _task_gain,
    "isolation": _task_isolation,
    "saturation": _task_saturation,
    "noise-fit": _task_noise_fit,
}


def _fmt(value, precision: int) -> str:
    if isinstance(value, float):
        return f"{value:.{precision}g}"
    return str(value)


def _round(value, precision: int):
    if isinstance(value, float) and math.isfinite(value):
        return float(f"{value:.{precision}g}")
    return value


def run(cfg: RunConfig, out_path=None, out_format=None) -> str:
    """Execute the configured task and write the artifact file.

    Returns the output path.  Output is deterministic for identical
    configs: rows follow grid order regardless of thread count and
    floats are rendered at the configured precision.
    """
    task = cfg["task"]
    cols, rows, meta = _TASK_FN[task](cfg)
    fmt = out_format or cfg["format"]
    path = out_path or cfg["out_path"] or f"{task}.{fmt}"
    prec = cfg["precision"]

    if fmt == "csv":
        lines = [",".join(cols)]
        for row in rows:
            lines.append(",".join(_fmt(v, prec) for v in row))
        payload = "\n".join(lines) + "\n"
    else:
        doc = {
            "task": task,
            "version": __version__,
            "config_hash": cfg.config_hash,
            "config": {k: cfg.values[k] for k in sorted(cfg.values)},
            "constants": {
                "h": constants.H, "hbar": constants.HBAR,
                "e": constants.E_CHARGE, "k_b": constants.K_B,
                "phi0": constants.PHI0, "r_q": constants.R_Q,
            },
            "columns": cols,
            "rows": [[_round(v, prec) for v in row] for row in rows],
            "metadata": meta,
        }
        payload = json.dumps(doc, indent=1, sort_keys=True,
                             allow_nan=True) + "\n"

    with open(path, "w", encoding="utf-8") as fh:
        fh.write(payload)
    log.info("wrote %d rows to %s", len(rows), path)
    return path


def _error_exit(code: int, kind: str, payload) -> int:
    sys.stderr.write(json.dumps({"error": kind, "detail": payload}) + "\n")
    return code


def main(argv=None) -> int:
    level = os.environ.get("TWPASIM_LOG", "warning").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING),
                        format="%(name)s %(levelname)s %(message)s")

    parser = argparse.ArgumentParser(prog="twpasim", description=__doc__)
    parser.add_argument("task", choices=TASKS)
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", default=None)
    parser.add_argument("--format", choices=("csv", "json"), default=None)
    parser.add_argument("--threads", type=int, default=1)
    args = parser.parse_args(argv)

    try:
        with open(args.config, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        return _error_exit(2, "config", [[0, f"cannot read config: {exc}"]])

    try:
        cfg = validate(text, threads=max(args.threads, 1))
        if cfg["task"] != args.task:
            return _error_exit(2, "config", [[0,
                f"config task '{cfg['task']}' does not match command "
                f"'{args.task}'"]])
    except ConfigError as exc:
        return _error_exit(2, "config", exc.diagnostics)

    try:
        run(cfg, out_path=args.out, out_format=args.format)
    except TwpaError as exc:
        return _error_exit(3, type(exc).__name__, str(exc))
    except (ValueError, OSError) as exc:
        return _error_exit(3, type(exc).__name__, str(exc))
    return 0


if __name__ == "__main__":
    sys.exit(main())
