"""Command-line front end.

Subcommands: compute, angle, expansion, oracle, sweep. Exit codes:
0 success, 2 configuration or usage error, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, backend
from .config import SourceConfig, config_hash, load_config, resolved_dict
from .density import (
    apply_filter,
    compute_density_matrix,
    marginal_spectrum,
    normalize,
    purity,
    spectral_fwhm_nm,
)
from .dispersion import solve_phase_matching_angle
from .errors import ConfigError, SpdcsimError
from .fileio import save_heatmap, write_manifest, write_matrix_csv, write_matrix_json
from .oracle import run_oracle
from .paraxial import expand_delta_kz
from .units import omega_from_lambda_nm


def _common_flags(p: argparse.ArgumentParser, heatmap: bool = False) -> None:
    p.add_argument("--config", required=True, help="config JSON (or a run manifest)")
    p.add_argument("--out", default="out", help="output directory (default: out)")
    p.add_argument("--threads", type=int, default=1, help="worker thread cap")
    if heatmap:
        p.add_argument("--heatmap", action="store_true", help="render PNG heatmap of Re rho")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spdcsim",
        description="Spectral density matrix of a fiber-coupled SPDC photon",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("compute", help="full pipeline run with file outputs")
    _common_flags(p, heatmap=True)

    p = sub.add_parser("angle", help="solve the phase-matching angle")
    _common_flags(p)

    p = sub.add_parser("expansion", help="dump the quadratic mismatch expansion as JSON")
    _common_flags(p)
    p.add_argument("--lambda-s-nm", type=float, required=True, help="signal wavelength (nm)")
    p.add_argument("--lambda-i-nm", type=float, required=True, help="idler wavelength (nm)")

    p = sub.add_parser("oracle", help="brute-force validation run")
    _common_flags(p)
    p.add_argument("--mode", choices=["quadratic", "exact"], required=True)
    p.add_argument("--grid-points", type=int, default=5)

    p = sub.add_parser("sweep", help="sweep one config parameter")
    _common_flags(p)
    p.add_argument("--param", action="append", required=True,
                   help="dotted config path, e.g. filter.fwhm_nm")
    p.add_argument("--values", required=True, help="comma-separated numbers")
    return parser


def _run_pipeline(config: SourceConfig, threads: int):
    timings = {}
    t0 = time.perf_counter()
    alpha = config.resolve_alpha()
    timings["solve_alpha_s"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    rho = compute_density_matrix(
        config.crystal,
        config.geometry(alpha),
        config.beams,
        config.pump,
        config.grid_omega(),
        config.quadrature,
        threads=threads,
    )
    timings["compute_s"] = time.perf_counter() - t0
    if config.filter is not None:
        rho = apply_filter(rho, config.filter)
    trace_raw = rho.trace()
    rho_n = normalize(rho)
    return alpha, rho_n, trace_raw, timings


def _cmd_compute(args) -> int:
    config, _ = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    alpha, rho, trace_raw, timings = _run_pipeline(config, args.threads)
    resolved = resolved_dict(config, alpha)
    digest = config_hash(resolved)
    meta = {
        "config_hash": digest,
        "alpha_deg": math.degrees(alpha),
        "alpha_solved": config.alpha_rad is None,
        "purity": purity(rho),
        "trace_unnormalized": trace_raw,
        "filter_applied": config.filter is not None,
    }
    write_matrix_csv(out / "density_matrix.csv", rho)
    write_matrix_json(out / "density_matrix.json", rho, meta)
    manifest = {
        "tool": "spdcsim",
        "version": __version__,
        "backend": backend.BACKEND,
        "threads": args.threads,
        "config_hash": digest,
        "resolved_config": resolved,
        "alpha_deg": math.degrees(alpha),
        "alpha_solved": config.alpha_rad is None,
        "quadrature": resolved["quadrature"],
        "timings_s": timings,
    }
    write_manifest(out / "run_manifest.json", manifest)
    if getattr(args, "heatmap", False):
        title = f"Re rho, alpha = {math.degrees(alpha):.2f} deg"
        save_heatmap(out / "heatmap.png", rho, title)
    print(f"alpha = {math.degrees(alpha):.4f} deg"
          f" | purity = {meta['purity']:.6f}"
          f" | fwhm = {spectral_fwhm_nm(rho):.2f} nm"
          f" | outputs in {out}")
    return 0


def _cmd_angle(args) -> int:
    config, _ = load_config(args.config)
    t0 = time.perf_counter()
    alpha = solve_phase_matching_angle(config.crystal, config.omega0)
    result = {
        "alpha_deg": math.degrees(alpha),
        "alpha_rad": alpha,
        "omega0_rad_fs": config.omega0,
        "runtime_s": time.perf_counter() - t0,
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "angle.json").write_text(json.dumps(result, indent=1) + "\n")
    print(json.dumps(result))
    return 0


def _cmd_expansion(args) -> int:
    config, _ = load_config(args.config)
    geometry = config.geometry()
    exp = expand_delta_kz(
        float(omega_from_lambda_nm(args.lambda_s_nm)),
        float(omega_from_lambda_nm(args.lambda_i_nm)),
        config.crystal,
        geometry,
    )
    doc = {
        "omega_s_rad_fs": exp.omega_s,
        "omega_i_rad_fs": exp.omega_i,
        "k_s0": [float(x) for x in exp.k_s0],
        "k_i0": [float(x) for x in exp.k_i0],
        "dkz0": exp.value,
        "d1": [float(x) for x in exp.gradient],
        "d2": [[float(x) for x in row] for row in exp.half_hessian],
        "alpha_deg": math.degrees(geometry.alpha_rad),
    }
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "expansion.json").write_text(json.dumps(doc, indent=1) + "\n")
    print(json.dumps(doc))
    return 0


def _cmd_oracle(args) -> int:
    config, _ = load_config(args.config)
    report, _, _ = run_oracle(config, args.mode, args.grid_points, threads=args.threads)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "oracle_report.json").write_text(json.dumps(report.to_dict(), indent=1) + "\n")
    print(json.dumps(report.to_dict()))
    return 0


def _set_by_path(doc: dict, dotted: str, value: float) -> None:
    keys = dotted.split(".")
    node = doc
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            raise ConfigError(f"sweep parameter {dotted!r}: section {key!r} missing or not an object")
        node = node[key]
    if keys[-1] not in node:
        raise ConfigError(f"sweep parameter {dotted!r}: no such field in the base config")
    node[keys[-1]] = value


def _cmd_sweep(args) -> int:
    if len(args.param) != 1:
        raise ConfigError("sweep supports exactly one --param")
    param = args.param[0]
    try:
        values = [float(v) for v in args.values.split(",") if v.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}") from None
    if not values:
        raise ConfigError("--values is empty")
    _, base_doc = load_config(args.config)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    from .config import config_from_dict

    for v in values:
        doc = json.loads(json.dumps(base_doc))
        _set_by_path(doc, param, v)
        config = config_from_dict(doc, base_dir=Path(args.config).parent)
        _, rho, trace_raw, _ = _run_pipeline(config, args.threads)
        rows.append((v, trace_raw, purity(rho), spectral_fwhm_nm(rho)))
    import csv as _csv

    with open(out / "sweep.csv", "w", newline="") as fh:
        writer = _csv.writer(fh)
        writer.writerow([param, "trace_unnormalized", "purity", "fwhm_nm"])
        for row in rows:
            writer.writerow([repr(float(x)) for x in row])
    for row in rows:
        print(f"{param}={row[0]:g} trace={row[1]:.6g} purity={row[2]:.6f} fwhm={row[3]:.3f} nm")
    return 0


_COMMANDS = {
    "compute": _cmd_compute,
    "angle": _cmd_angle,
    "expansion": _cmd_expansion,
    "oracle": _cmd_oracle,
    "sweep": _cmd_sweep,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except SpdcsimError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3
    except np.linalg.LinAlgError as err:
        print(f"numerical failure: {err}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
