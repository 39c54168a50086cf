"""Configuration-driven command-line entry point.

Subcommands mirror the deliverable artifacts: `couplings` (exchange
matrix CSV), `spectrum` (gap profile CSV), `scan` (bang-bang grid CSV +
JSON sidecar), `ramp` (locally adiabatic schedule CSV + result JSON)
and `compare` (protocol comparison CSV + JSON).

All floats are written with 17 significant digits, '.' decimal and
'\n' line endings so reruns produce byte-identical artifacts.
"""

import argparse
import json
import os
import platform
import sys
import time

import numpy as np
import jsonschema

from . import __version__
from .errors import ConfigError
from .gapspec import gap_profile
from .optimize import best_point, compare_protocols, scan_bangbang
from .protocols import bangbang_run, cn_evolve, la_ramp, BangBangParams
from .spinmodel import SPIN_CAP, hamiltonian
from .trapchain import TrapConfig, synthetic_couplings, trap_couplings

EXIT_OK = 0
EXIT_USER_ERROR = 1
EXIT_NUMERICAL = 2

OUTPUT_DIR_ENV = "IONTFIM_OUT"

# trap defaults chosen so the 620-950 kHz axial sweep lands the fitted
# exponent inside [0.7, 1.2] with |J_0| near 1 kHz at N=10
DEFAULT_TRANSVERSE_KHZ = 4800.0
DEFAULT_DETUNING_KHZ = 4900.0
DEFAULT_RABI_KHZ = 600.0
DEFAULT_RECOIL_KHZ = 18.5

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "trap": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_ions": {"type": "integer", "minimum": 1},
                "axial_freq": {"type": "number", "exclusiveMinimum": 0},
                "transverse_freq": {"type": "number", "exclusiveMinimum": 0},
                "detuning": {"type": "number", "exclusiveMinimum": 0},
                "rabi_freq": {"type": "number", "exclusiveMinimum": 0},
                "recoil_freq": {"type": "number", "exclusiveMinimum": 0},
                "mass_amu": {"type": "number", "exclusiveMinimum": 0},
                "wavelength_nm": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["n_ions", "axial_freq"],
        },
        "synthetic": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_ions": {"type": "integer", "minimum": 2},
                "j0": {"type": "number"},
                "alpha": {"type": "number", "exclusiveMinimum": 0},
            },
            "required": ["n_ions", "j0", "alpha"],
        },
        "model": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "n_list": {"type": "array", "items": {"type": "integer", "minimum": 2}},
            },
        },
        "protocol": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "b_max": {"type": "number", "exclusiveMinimum": 0},
                "t_f": {"type": "number", "exclusiveMinimum": 0},
                "t_budget": {"type": "number", "exclusiveMinimum": 0},
                "n_b": {"type": "integer", "minimum": 1},
                "n_t": {"type": "integer", "minimum": 1},
                "gap_grid": {"type": "integer", "minimum": 16},
            },
        },
        "numerics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "spin_cap": {"type": "integer", "minimum": 1},
                "dense_cap": {"type": "integer", "minimum": 2},
                "cn_steps": {"type": "integer", "minimum": 2},
                "cn_p_tol": {"type": "number", "exclusiveMinimum": 0},
                "threads": {"type": ["integer", "null"], "minimum": 1},
            },
        },
        "output": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "dir": {"type": "string"},
            },
        },
    },
}

DEFAULTS = {
    "model": {"n_list": [4, 5, 6, 7, 8, 9, 10]},
    "protocol": {"b_max": 5.0, "t_f": 6.0, "t_budget": 6.0,
                 "n_b": 64, "n_t": 64, "gap_grid": 64},
    "numerics": {"spin_cap": SPIN_CAP, "dense_cap": 4096, "cn_steps": 4096,
                 "cn_p_tol": 1e-6, "threads": None},
    "output": {"dir": "out"},
}


def fmt(x):
    """Pinned float formatting: 17 significant digits."""
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".17g")


def load_config(path):
    try:
        with open(path) as f:
            raw = json.load(f)
    except (OSError, json.JSONDecodeError) as e:
        raise ConfigError(f"cannot read config {path}: {e}")
    try:
        jsonschema.validate(raw, CONFIG_SCHEMA)
    except jsonschema.ValidationError as e:
        raise ConfigError(f"config schema violation: {e.message}")
    if ("trap" in raw) == ("synthetic" in raw):
        raise ConfigError("config must contain exactly one of 'trap' or 'synthetic'")
    resolved = {}
    for section, defaults in DEFAULTS.items():
        resolved[section] = {**defaults, **raw.get(section, {})}
    if "trap" in raw:
        trap = {"transverse_freq": DEFAULT_TRANSVERSE_KHZ,
                "detuning": DEFAULT_DETUNING_KHZ,
                "rabi_freq": DEFAULT_RABI_KHZ,
                **raw["trap"]}
        if "recoil_freq" not in trap:
            if "mass_amu" in trap or "wavelength_nm" in trap:
                from .units import recoil_frequency_khz
                trap["recoil_freq"] = recoil_frequency_khz(
                    trap.pop("mass_amu", 171.0), trap.pop("wavelength_nm", 355.0))
            else:
                trap["recoil_freq"] = DEFAULT_RECOIL_KHZ
        trap.pop("mass_amu", None)
        trap.pop("wavelength_nm", None)
        resolved["trap"] = trap
    else:
        resolved["synthetic"] = dict(raw["synthetic"])
    return resolved


def build_couplings(cfg, n_ions=None):
    cap = cfg["numerics"]["spin_cap"]
    if "trap" in cfg:
        trap = dict(cfg["trap"])
        if n_ions is not None:
            trap["n_ions"] = n_ions
        if trap["n_ions"] > cap:
            raise ConfigError(f"n_ions={trap['n_ions']} exceeds the configured cap {cap}")
        return trap_couplings(TrapConfig(**trap))
    syn = cfg["synthetic"]
    n = n_ions if n_ions is not None else syn["n_ions"]
    if n > cap:
        raise ConfigError(f"n_ions={n} exceeds the configured cap {cap}")
    return synthetic_couplings(n, syn["j0"], syn["alpha"])


def coupling_factory(cfg):
    return lambda n: build_couplings(cfg, n_ions=n)


def write_csv(path, header, rows):
    with open(path, "w", newline="") as f:
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(fmt(x) for x in row) + "\n")


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return None if np.isnan(x) else x
    if isinstance(obj, np.integer):
        return int(obj)
    return obj


def write_json(path, obj):
    with open(path, "w") as f:
        json.dump(_jsonable(obj), f, indent=1, sort_keys=True, allow_nan=False)
        f.write("\n")


def _protocol_summary(params, result):
    centers = result.excitation_energies
    probs = result.excitation_probabilities
    return {
        "params": params,
        "ground_probability": result.ground_probability,
        "field_integral_khz_ms": result.field_integral,
        "histogram": {
            "bin_centers_khz": [float(c) for c in centers],
            "probabilities": [float(p) for p in probs],
        },
    }


def cmd_couplings(cfg, outdir):
    cm = build_couplings(cfg)
    n = cm.n_ions
    rows = [(i, j, cm.j[i, j]) for i in range(n) for j in range(n)]
    write_csv(os.path.join(outdir, "couplings.csv"), ["i", "j", "j_khz"], rows)
    write_json(os.path.join(outdir, "couplings.json"),
               {"n_ions": n, "j0_khz": cm.j0, "alpha_fit": cm.alpha_fit})
    return {"n_ions": n, "j0_khz": cm.j0, "alpha_fit": cm.alpha_fit}


def cmd_spectrum(cfg, outdir):
    cm = build_couplings(cfg)
    prof = gap_profile(cm, b_max=cfg["protocol"]["b_max"] * abs(cm.j0),
                       n_grid=cfg["protocol"]["gap_grid"],
                       threads=cfg["numerics"]["threads"])
    rows = list(zip(prof.fields_khz, prof.fields_j0, prof.gaps, prof.ground_energies))
    write_csv(os.path.join(outdir, "spectrum.csv"),
              ["b_khz", "b_over_j0", "gap_khz", "ground_energy_khz"], rows)
    return {"min_gap_khz": float(np.min(prof.gaps))}


def cmd_scan(cfg, outdir):
    cm = build_couplings(cfg)
    p = cfg["protocol"]
    b_axis = np.linspace(0.0, p["b_max"], p["n_b"])
    t_axis = np.linspace(0.0, p["t_f"], p["n_t"])
    grid = scan_bangbang(cm, b_axis, t_axis, threads=cfg["numerics"]["threads"])
    params, p_best = best_point(grid, p["t_budget"])
    rows = [(b, t, grid.probabilities[ib, it])
            for ib, b in enumerate(grid.b_axis)
            for it, t in enumerate(grid.t_axis)]
    write_csv(os.path.join(outdir, "scan.csv"), ["b_over_j0", "t_ms", "probability"], rows)
    result = bangbang_run(cm, params)
    sidecar = {
        "metadata": {k: (None if isinstance(v, float) and np.isnan(v) else v)
                     for k, v in grid.metadata.items()},
        "best": {"b_over_j0": params.quench_field, "t_ms": params.hold_time,
                 "probability": p_best},
        "result": _protocol_summary(
            {"quench_field_over_j0": params.quench_field, "hold_time_ms": params.hold_time},
            result),
    }
    write_json(os.path.join(outdir, "scan.json"), sidecar)
    return {"best_probability": p_best, "best_b_over_j0": params.quench_field,
            "best_t_ms": params.hold_time}


def cmd_ramp(cfg, outdir):
    cm = build_couplings(cfg)
    p = cfg["protocol"]
    prof = gap_profile(cm, b_max=p["b_max"] * abs(cm.j0), n_grid=p["gap_grid"],
                       threads=cfg["numerics"]["threads"])
    ramp = la_ramp(prof, p["t_f"], n_steps=cfg["numerics"]["cn_steps"])
    scale = abs(cm.j0) if cm.j0 != 0 else 1.0
    rows = list(zip(ramp.times, ramp.fields / scale))
    write_csv(os.path.join(outdir, "ramp.csv"), ["t_ms", "b_over_j0"], rows)
    result = cn_evolve(cm, ramp, p_tol=cfg["numerics"]["cn_p_tol"])
    write_json(os.path.join(outdir, "ramp.json"), _protocol_summary(
        {"t_f_ms": p["t_f"], "gamma": ramp.gamma, "b0_khz": ramp.b0}, result))
    return {"gamma": ramp.gamma, "ground_probability": result.ground_probability}


def cmd_compare(cfg, outdir):
    p = cfg["protocol"]
    b_axis = np.linspace(0.0, p["b_max"], p["n_b"])
    t_axis = np.linspace(0.0, p["t_f"], p["n_t"])
    rows = compare_protocols(coupling_factory(cfg), cfg["model"]["n_list"], p["t_f"],
                             b_axis=b_axis, t_axis=t_axis,
                             threads=cfg["numerics"]["threads"],
                             gap_grid=p["gap_grid"])
    write_csv(os.path.join(outdir, "compare.csv"),
              ["n_ions", "p_bangbang", "p_locally_adiabatic", "ratio"],
              [(r.n_ions, r.p_bangbang, r.p_locally_adiabatic, r.ratio) for r in rows])
    write_json(os.path.join(outdir, "compare.json"), [
        {"n_ions": r.n_ions, "p_bangbang": r.p_bangbang,
         "best_b_over_j0": r.best_field, "best_t_ms": r.best_hold,
         "p_locally_adiabatic": r.p_locally_adiabatic, "ratio": r.ratio,
         "field_integral_bangbang_khz_ms": r.field_integral_bangbang,
         "field_integral_locally_adiabatic_khz_ms": r.field_integral_locally_adiabatic}
        for r in rows])
    return {"mean_ratio": float(np.mean([r.ratio for r in rows]))}


COMMANDS = {
    "couplings": cmd_couplings,
    "spectrum": cmd_spectrum,
    "scan": cmd_scan,
    "ramp": cmd_ramp,
    "compare": cmd_compare,
}


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="iontfim",
        description="Trapped-ion Ising simulator: bang-bang vs locally adiabatic "
                    "ground-state preparation")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True, help="JSON config file")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (overrides config)")
    args = parser.parse_args(argv)

    t_start = time.time()
    try:
        cfg = load_config(args.config)
    except ConfigError as e:
        _write_error(args, EXIT_USER_ERROR, str(e))
        return EXIT_USER_ERROR

    outdir = args.out or os.environ.get(OUTPUT_DIR_ENV) or cfg["output"]["dir"]
    cfg["output"]["dir"] = outdir
    if args.threads is not None:
        cfg["numerics"]["threads"] = args.threads
    os.makedirs(outdir, exist_ok=True)

    try:
        summary = COMMANDS[args.command](cfg, outdir)
    except ConfigError as e:
        _write_error(args, EXIT_USER_ERROR, str(e), outdir)
        return EXIT_USER_ERROR
    except (RuntimeError, ValueError) as e:
        _write_error(args, EXIT_NUMERICAL, str(e), outdir)
        return EXIT_NUMERICAL

    write_json(os.path.join(outdir, "resolved_config.json"), cfg)
    manifest = {
        "command": args.command,
        "iontfim_version": __version__,
        "numpy_version": np.__version__,
        "python_version": platform.python_version(),
        "elapsed_s": round(time.time() - t_start, 3),
        "tolerances": {"cn_p_tol": cfg["numerics"]["cn_p_tol"],
                       "linsolve_rtol": 1e-12},
        "summary": summary,
    }
    write_json(os.path.join(outdir, "run_manifest.json"), manifest)
    return EXIT_OK


def _write_error(args, code, message, outdir=None):
    record = {"error": message, "exit_code": code, "command": args.command}
    print(json.dumps(record), file=sys.stderr)
    if outdir:
        try:
            write_json(os.path.join(outdir, "error.json"), record)
        except OSError:
            pass


if __name__ == "__main__":
    sys.exit(main())
