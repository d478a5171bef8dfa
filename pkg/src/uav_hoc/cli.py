"""Command-line entry point: ``uav-hoc {simulate,fit,estimate,crlb}``.

Exit codes: 0 ok, 2 usage/config error, 3 IO error, 4 unidentifiable fit.
"""
from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import InvalidParameter, UnidentifiableFit, __version__
from .campaign import read_datasets, run_campaign, write_dataset, write_manifest
from .config import ConfigError, load_config
from .estimator import crlb, estimate_velocity, evaluate, rate_coefficient, write_reports
from .statistics import REFERENCE_A, REFERENCE_B, FitParams, fit_datasets, write_pmf_csv

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_FIT = 0, 2, 3, 4

log = logging.getLogger("uav_hoc")


class CliError(Exception):
    def __init__(self, message: str, code: int):
        super().__init__(message)
        self.code = code


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated number list: {text!r}")


def cmd_simulate(args) -> int:
    try:
        run = load_config(args.config)
    except ConfigError as exc:
        raise CliError(str(exc), EXIT_USAGE)
    except OSError as exc:
        raise CliError(f"cannot read config: {exc}", EXIT_IO)
    workers = args.workers if args.workers is not None else run.workers
    out = Path(args.out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise CliError(f"cannot create {out}: {exc}", EXIT_IO)

    def progress(done, total):
        if not args.quiet:
            print(f"\r{done}/{total} trials", end="", file=sys.stderr, flush=True)

    datasets = run_campaign(run.grid, workers=workers, progress=progress)
    if not args.quiet:
        print(file=sys.stderr)
    try:
        paths = [write_dataset(out, ds) for ds in datasets]
        write_manifest(out / "manifest.json", run.sections, [p.name for p in paths])
    except OSError as exc:
        raise CliError(f"write failed: {exc}", EXIT_IO)
    print(f"wrote {len(paths)} datasets to {out}")
    return EXIT_OK


def cmd_fit(args) -> int:
    try:
        datasets = read_datasets(args.dataset_dir)
    except (OSError, InvalidParameter) as exc:
        raise CliError(f"cannot read datasets: {exc}", EXIT_IO)
    if not datasets:
        raise CliError(f"no hoc_*.csv datasets in {args.dataset_dir}", EXIT_IO)
    try:
        fit, summaries = fit_datasets(datasets, refine=args.refine)
    except UnidentifiableFit as exc:
        raise CliError(str(exc), EXIT_FIT)
    reports = [evaluate(ds, fit) for ds in datasets if ds.counts.size >= 2]
    out = Path(args.out_path)
    report = {
        "tool": "uav_hoc", "version": __version__,
        "units": {"lambda_gbs": "1/km^2", "d": "km (v in km/h times T in h)"},
        "inputs": sorted(p.name for p in Path(args.dataset_dir).glob("hoc_*.csv")),
        "fit": {"a": fit.a, "b": fit.b, "residual": fit.residual, "refined": args.refine},
        "scenarios": [s.__dict__ for s in summaries],
    }
    try:
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
        pmf_dir = out.parent / "pmf"
        pmf_dir.mkdir(exist_ok=True)
        for ds in datasets:
            write_pmf_csv(pmf_dir / f"pmf_v={ds.v:g}_lambda={ds.lambda_gbs:g}_T={ds.t_window:g}.csv",
                          ds.counts)
        write_reports(out.parent / "estimator_report.csv", reports)
    except OSError as exc:
        raise CliError(f"write failed: {exc}", EXIT_IO)
    print(f"a = {fit.a:.4f}, b = {fit.b:.4f}, log-residual = {fit.residual:.4g}")
    return EXIT_OK


def cmd_estimate(args) -> int:
    if args.hoc < 0 or args.lambda_gbs <= 0 or args.t_seconds <= 0 or args.a <= 0:
        raise CliError("need hoc >= 0 and positive lambda-gbs, t-seconds and a", EXIT_USAGE)
    k = rate_coefficient(FitParams(args.a, args.b), args.lambda_gbs, args.t_seconds)
    v_hat = estimate_velocity(args.hoc, k)
    sd = np.sqrt(crlb(v_hat, k)) if v_hat > 0 else 0.0
    print(f"v_hat = {v_hat:.2f} km/h")
    print(f"sqrt_crlb = {sd:.2f} km/h")
    return EXIT_OK


def cmd_crlb(args) -> int:
    if min(args.velocities + args.densities + args.t_windows) <= 0 or args.a <= 0:
        raise CliError("grid values and a must be positive", EXIT_USAGE)
    fit = FitParams(args.a, args.b)
    fh = open(args.out, "w", newline="", encoding="utf-8") if args.out else sys.stdout
    try:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["v", "lambda_gbs", "T_s", "sqrt_crlb"])
        for t in args.t_windows:
            for lam in args.densities:
                k = rate_coefficient(fit, lam, t)
                for v in args.velocities:
                    w.writerow([f"{v:g}", f"{lam:g}", f"{t:g}", f"{np.sqrt(crlb(v, k)):.4f}"])
    finally:
        if fh is not sys.stdout:
            fh.close()
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="uav-hoc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("simulate", help="run a Monte Carlo campaign from a config file")
    s.add_argument("config")
    s.add_argument("out_dir")
    s.add_argument("--workers", type=int, default=None)
    s.add_argument("--quiet", action="store_true")
    s.set_defaults(func=cmd_simulate)

    f = sub.add_parser("fit", help="fit the power-law rate model to simulated datasets")
    f.add_argument("dataset_dir")
    f.add_argument("out_path")
    f.add_argument("--refine", action="store_true", help="one Gauss-Newton step in linear space")
    f.set_defaults(func=cmd_fit)

    e = sub.add_parser("estimate", help="velocity estimate from a handover count")
    e.add_argument("--hoc", type=int, required=True)
    e.add_argument("--lambda-gbs", type=float, required=True)
    e.add_argument("--t-seconds", type=float, required=True)
    e.add_argument("--a", type=float, default=REFERENCE_A)
    e.add_argument("--b", type=float, default=REFERENCE_B)
    e.set_defaults(func=cmd_estimate)

    c = sub.add_parser("crlb", help="CSV of sqrt(CRLB) over a parameter grid")
    c.add_argument("--velocities", type=_float_list, required=True)
    c.add_argument("--densities", type=_float_list, required=True)
    c.add_argument("--t-windows", type=_float_list, required=True)
    c.add_argument("--a", type=float, default=REFERENCE_A)
    c.add_argument("--b", type=float, default=REFERENCE_B)
    c.add_argument("--out", default=None)
    c.set_defaults(func=cmd_crlb)
    return p


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
