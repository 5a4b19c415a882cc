"""Experiment driver: sweep runner, report/CSV emission, and the CLI.

`run` evaluates every cell of an experiment's (velocity, ADC bits,
transmit EVM, weight scheme) grid along both paths, closed form and Monte
Carlo, writes a versioned JSON report plus a long-format CSV of per-UE
per-instant spectral efficiencies, and compares the two paths against the
experiment tolerance. `se_cdf` and `term_power_trace` post-process a
report into plot-ready CSVs.

Per-term powers in the report are evaluated with each UE's central
weights frozen at the first data instant, so a term's decay across the
data interval reflects aging alone and not the weight adaptation; the
SINR/SE columns use per-instant weights.

The CLI exposes `run`, `cdf`, and `trace` subcommands. Exit codes: 0 on
success (including a run whose paths disagree, which is marked
FAILED-VALIDATION in the report), 2 on configuration or I/O errors, 3 on
numerical failures.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .channel import NumericalError
from .closed_form import TERM_KEYS, ClosedFormEngine
from .config import (ConfigError, ExperimentSpec, HardwareConfig,
                     load_experiment_spec)
from .estimation import est_second_moments
from .hardware import HardwareProfile
from .monte_carlo import mc_term_powers
from .scenario import DomainError, build_scenario

OUTPUT_DIR_ENV = "CFAGING_OUTPUT_DIR"
REPORT_SCHEMA = 1


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _cell_id(velocity, adc_bits, kappa, scheme) -> str:
    if velocity is None:
        v = "default"
    elif isinstance(velocity, (tuple, list)):
        v = "+".join(_fmt(x) for x in velocity)
    else:
        v = _fmt(velocity)
    return f"v={v}_adc={adc_bits}_kt={_fmt(kappa)}_{scheme}"


def _run_cell(spec: ExperimentSpec, velocity, adc_bits, kappa, scheme,
              seed: int, trials: int, workers: int) -> dict:
    cfg = spec.scenario
    if velocity is not None:
        vel = list(velocity) if isinstance(velocity, (tuple, list)) else velocity
        cfg = dataclasses.replace(cfg, ue_velocities_kmh=vel)
    cfg = dataclasses.replace(cfg, seed=seed)
    scn = build_scenario(cfg)
    profile = HardwareProfile.from_config(
        HardwareConfig(kappa_t=kappa, adc_bits=adc_bits), cfg.M, cfg.N, cfg.K)
    moments = est_second_moments(scn, profile)
    engine = ClosedFormEngine(scn, profile, moments)

    sinr_cf, weights = engine.se_table(scheme)
    instants = scn.data_instants
    powers = mc_term_powers(scn, profile, moments, weights, instants=instants,
                            trials=trials, seed=seed, batch=spec.mc_batch,
                            workers=workers)
    den = powers.denominator()
    sinr_mc = powers.ds / den
    se_cf = np.log2(1.0 + sinr_cf).sum(axis=1) / cfg.tau_c
    se_mc = np.log2(1.0 + sinr_mc).sum(axis=1) / cfg.tau_c
    rel_dev = np.abs(se_cf - se_mc) / np.maximum(se_cf, 1e-300)

    # term traces with weights held at the first data instant
    w0 = weights[:, 0, :]
    terms_fixed = {key: np.zeros((cfg.K, len(instants))) for key in TERM_KEYS}
    for j, n in enumerate(instants):
        for k in range(cfg.K):
            p = engine.term_powers(k, int(n), w0[k])
            for key in TERM_KEYS:
                terms_fixed[key][k, j] = p[key]

    return {
        "id": _cell_id(velocity, adc_bits, kappa, scheme),
        "velocity_kmh": (list(velocity) if isinstance(velocity, (tuple, list))
                         else velocity),
        "velocities_per_ue": cfg.velocities_kmh(),
        "adc_bits": adc_bits,
        "kappa_t": kappa,
        "scheme": scheme,
        "data_instants": [int(n) for n in instants],
        "se_closed_form": se_cf.tolist(),
        "se_monte_carlo": se_mc.tolist(),
        "rel_deviation": rel_dev.tolist(),
        "max_rel_deviation": float(rel_dev.max()),
        "sinr_closed_form": sinr_cf.tolist(),
        "sinr_monte_carlo": sinr_mc.tolist(),
        "term_powers_fixed_weights": {key: terms_fixed[key].tolist()
                                      for key in TERM_KEYS},
    }


def run(spec_path, seed=None, trials=None, workers=None, tolerance=None,
        output_dir=None) -> Path:
    """Execute every cell of the experiment and write report.json + summary.csv.

    Returns the path of the JSON report. The output directory resolves in
    order: explicit argument, the CFAGING_OUTPUT_DIR environment variable,
    the experiment's `outputs` field.
    """
    spec = load_experiment_spec(spec_path)
    seed = spec.scenario.seed if seed is None else int(seed)
    trials = spec.trials if trials is None else int(trials)
    workers = spec.workers if workers is None else int(workers)
    if workers <= 0:
        workers = os.cpu_count() or 1
    tolerance = spec.tolerance if tolerance is None else float(tolerance)
    if output_dir is None:
        output_dir = os.environ.get(OUTPUT_DIR_ENV, spec.outputs)
    outdir = Path(output_dir)
    outdir.mkdir(parents=True, exist_ok=True)

    t0 = time.monotonic()
    cells = []
    for velocity in spec.sweep_velocities:
        for adc_bits in spec.sweep_adc_bits:
            for kappa in spec.sweep_kappa:
                for scheme in spec.weight_schemes:
                    cells.append(_run_cell(spec, velocity, adc_bits, kappa,
                                           scheme, seed, trials, workers))

    worst = max(c["max_rel_deviation"] for c in cells)
    status = "VALIDATED" if worst <= tolerance else "FAILED-VALIDATION"
    report = {
        "schema": REPORT_SCHEMA,
        "metadata": {
            "version": __version__,
            "seed": seed,
            "trials": trials,
            "workers": workers,
            "tolerance": tolerance,
            "status": status,
            "max_rel_deviation": worst,
            "wall_time_s": time.monotonic() - t0,
            "spec_path": str(spec_path),
        },
        "cells": cells,
    }
    report_path = outdir / "report.json"
    with open(report_path, "w", encoding="utf-8", newline="\n") as f:
        json.dump(report, f, indent=1, sort_keys=True)
        f.write("\n")

    lines = ["combo,k,n,path,value"]
    for c in cells:
        for path_name, key in (("closed_form", "sinr_closed_form"),
                               ("monte_carlo", "sinr_monte_carlo")):
            sinr = c[key]
            for k in range(len(sinr)):
                for j, n in enumerate(c["data_instants"]):
                    se = np.log2(1.0 + sinr[k][j])
                    lines.append(f"{c['id']},{k},{n},{path_name},{_fmt(se)}")
    (outdir / "summary.csv").write_bytes(("\n".join(lines) + "\n").encode("utf-8"))
    return report_path


def _load_report(report_path) -> dict:
    with open(report_path, "rb") as f:
        report = json.load(f)
    if report.get("schema") != REPORT_SCHEMA:
        raise ConfigError(f"report schema {report.get('schema')!r} is not "
                          f"supported (expected {REPORT_SCHEMA})")
    if not report.get("cells"):
        raise ConfigError("report: contains no sweep cells")
    return report


def se_cdf(report_path, out_path) -> None:
    """Empirical CDF of per-UE SE, split by combo, path, and velocity class."""
    report = _load_report(report_path)
    lines = ["combo,path,velocity_kmh,se,cdf"]
    for c in report["cells"]:
        vel = np.asarray(c["velocities_per_ue"])
        for path_name, key in (("closed_form", "se_closed_form"),
                               ("monte_carlo", "se_monte_carlo")):
            se = np.asarray(c[key])
            for v in sorted(set(vel.tolist())):
                vals = np.sort(se[vel == v])
                n = len(vals)
                for i, x in enumerate(vals):
                    lines.append(f"{c['id']},{path_name},{_fmt(v)},{_fmt(x)},"
                                 f"{_fmt((i + 1) / n)}")
    Path(out_path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def term_power_trace(report_path, ue: int, out_path) -> None:
    """Per-instant decomposition powers of one UE in dB.

    Powers come from the fixed-weight closed-form traces in the report and
    are normalized to the desired-signal power at the first data instant.
    """
    report = _load_report(report_path)
    header = "combo,n,ds_db,ca_db,iui_db,dactrf_db"
    lines = [header]
    floor = 1e-300
    for c in report["cells"]:
        tp = c["term_powers_fixed_weights"]
        if not (0 <= ue < len(tp["DS"])):
            raise ConfigError(f"ue: index {ue} out of range for report with "
                              f"{len(tp['DS'])} UEs")
        ref = tp["DS"][ue][0]
        if ref <= 0:
            raise NumericalError("reference desired-signal power is non-positive")
        for j, n in enumerate(c["data_instants"]):
            row = [c["id"], str(n)]
            for key in ("DS", "CA", "IUI", "DACTRF"):
                val = max(tp[key][ue][j], floor)
                row.append(_fmt(10.0 * np.log10(val / ref)))
            lines.append(",".join(row))
    Path(out_path).write_bytes(("\n".join(lines) + "\n").encode("utf-8"))


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="cfaging",
                                description="Cell-free massive MIMO uplink "
                                            "SE evaluation")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run an experiment spec")
    pr.add_argument("spec", help="experiment spec file (JSON or TOML)")
    pr.add_argument("--seed", type=int, default=None)
    pr.add_argument("--trials", type=int, default=None)
    pr.add_argument("--workers", type=int, default=None)
    pr.add_argument("--tolerance", type=float, default=None)

    pc = sub.add_parser("cdf", help="per-UE SE CDF from a report")
    pc.add_argument("report")
    pc.add_argument("--out", required=True)

    pt = sub.add_parser("trace", help="per-instant term powers of one UE")
    pt.add_argument("report")
    pt.add_argument("--ue", type=int, required=True)
    pt.add_argument("--out", required=True)
    return p


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            report_path = run(args.spec, seed=args.seed, trials=args.trials,
                              workers=args.workers, tolerance=args.tolerance)
            print(report_path)
        elif args.command == "cdf":
            se_cdf(args.report, args.out)
        elif args.command == "trace":
            term_power_trace(args.report, args.ue, args.out)
    except (ConfigError, DomainError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (NumericalError, np.linalg.LinAlgError) as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
