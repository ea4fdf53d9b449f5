"""Command-line entry point: ``run``, ``estimate`` and ``accounting``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .accounting import overhead_and_complexity
from .channel import assemble_channel, draw_paths
from .config import SystemConfig, load_config
from .errors import ConfigurationError, EstimationError
from .esprit import unitary_esprit
from .metrics import match_angles, nmse
from .omp import build_dictionary, omp_estimate
from .reconstruction import estimate_gains, reconstruct_channel
from .report import CSV_FIELDS, format_cell, write_csv, write_json
from .simulation import SCHEMES, ExperimentConfig, run_monte_carlo
from .training import aggregate_training, estimate_effective_channel, simulate_uplink


def _float_list(text: str) -> tuple[float, ...]:
    parts = [p for p in text.replace(",", " ").split() if p]
    try:
        return tuple(float(p) for p in parts)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from exc


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(int(v) for v in _float_list(text))


def _scheme_list(text: str) -> tuple[str, ...]:
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [s for s in names if s not in SCHEMES]
    if bad:
        raise argparse.ArgumentTypeError(f"unknown scheme(s) {bad}; choose from {SCHEMES}")
    return names


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="YAML/JSON file with SystemConfig fields")
    common.add_argument("--snr", type=_float_list, help="SNR points in dB, e.g. 0,10,20")
    common.add_argument("--paths", type=int, help="number of paths L")
    common.add_argument("--trials", type=int, help="Monte Carlo trials")
    common.add_argument("--seed", type=int, help="RNG seed")
    common.add_argument("--schemes", type=_scheme_list, default=("esprit", "omp"),
                        help="comma-separated subset of " + ",".join(SCHEMES))
    common.add_argument("--out", type=Path, help="output directory")
    common.add_argument("--format", dest="fmt", choices=("csv", "json"), default=None)
    common.add_argument("--jobs", type=int, default=1, help="worker processes")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = argparse.ArgumentParser(
        prog="mmwave-esprit",
        description="2D unitary ESPRIT channel estimation for hybrid mmWave MIMO.")
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("run", parents=[common], help="full Monte Carlo sweep")
    sub.add_parser("estimate", parents=[common], help="one realization, angle table")
    acc = sub.add_parser("accounting", parents=[common], help="overhead/complexity report")
    acc.add_argument("--paths-list", type=_int_list, default=None,
                     help="report several path counts, e.g. 5,10")
    return parser


def config_from_args(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig()
    overrides = {}
    if args.snr is not None:
        overrides["snr_db_grid"] = args.snr
    if args.paths is not None:
        overrides["n_paths"] = args.paths
    if args.trials is not None:
        overrides["n_trials"] = args.trials
    if args.seed is not None:
        overrides["seed"] = args.seed
    return cfg.replace(**overrides) if overrides else cfg


def cmd_run(args, cfg: SystemConfig, out=None) -> int:
    out = out or sys.stdout
    fmt = args.fmt or "csv"
    exp = ExperimentConfig(system=cfg, schemes=args.schemes, out_dir=args.out,
                           fmt=fmt, jobs=args.jobs)
    records = run_monte_carlo(exp)
    if args.out:
        if fmt == "csv":
            path = write_csv(records, args.out / "results.csv")
        else:
            path = write_json(records, cfg, args.out / "results.json")
        print(f"wrote {len(records)} records to {path}", file=out)
    else:
        print(",".join(CSV_FIELDS), file=out)
        for rec in records:
            print(",".join(format_cell(getattr(rec, f)) for f in CSV_FIELDS), file=out)
    return 0


def cmd_estimate(args, cfg: SystemConfig, out=None) -> int:
    out = out or sys.stdout
    snr_db = cfg.snr_db_grid[-1] if cfg.snr_db_grid else 20.0
    rng = np.random.default_rng(cfg.seed)
    paths = draw_paths(cfg, rng)
    h = assemble_channel(paths, cfg)
    sigma_n_sq = cfg.sigma_n_sq(snr_db)
    plan = aggregate_training(cfg)
    h_bar = estimate_effective_channel(simulate_uplink(h, plan, sigma_n_sq, rng), plan)
    angles = unitary_esprit(h_bar, cfg.m1, cfg.m2, cfg.n_paths, cfg.delta)
    d_hat = estimate_gains(h_bar, angles, plan, cfg)
    est = reconstruct_channel(angles, d_hat, cfg)
    ti, ei = match_angles(paths.aoa, paths.aod, angles.aoa, angles.aod)

    deg = np.degrees
    print(f"SNR {snr_db:g} dB, L = {cfg.n_paths}, seed {cfg.seed}", file=out)
    print(f"{'path':>4} {'AoA true':>10} {'AoA est':>10} {'AoD true':>10} {'AoD est':>10}"
          f" {'|gain| true':>11} {'|gain| est':>11}", file=out)
    scale = np.sqrt(cfg.n_bs * cfg.n_ms / cfg.n_paths)
    for t, e in zip(ti, ei):
        print(f"{t:>4} {deg(paths.aoa[t]):>10.4f} {deg(angles.aoa[e]):>10.4f} "
              f"{deg(paths.aod[t]):>10.4f} {deg(angles.aod[e]):>10.4f} "
              f"{abs(paths.gains[t]):>11.4f} {abs(d_hat[e]) / scale:>11.4f}", file=out)
    print(f"esprit NMSE: {nmse(h, est.h_hat):.2f} dB "
          f"(pilot overhead {plan.pilot_overhead})", file=out)
    if "omp" in args.schemes:
        omp_plan = aggregate_training(cfg, cfg.omp_n_b_t, cfg.omp_n_b_r)
        y = simulate_uplink(h, omp_plan, sigma_n_sq, rng)
        dictionary = build_dictionary(cfg, cfg.omp_grid, omp_plan)
        omp_h = omp_estimate(estimate_effective_channel(y, omp_plan), dictionary, cfg.omp_iters)
        print(f"omp NMSE:    {nmse(h, omp_h.h_hat):.2f} dB "
              f"(pilot overhead {omp_plan.pilot_overhead})", file=out)
    return 0


def cmd_accounting(args, cfg: SystemConfig, out=None) -> int:
    out = out or sys.stdout
    counts = args.paths_list or (cfg.n_paths,)
    reports = [overhead_and_complexity(cfg, L).to_dict() for L in counts]
    if args.fmt == "json":
        print(json.dumps(reports, indent=2), file=out)
        return 0
    for rep in reports:
        print(f"L = {rep['n_paths']}", file=out)
        print(f"  T_proposed = {rep['t_proposed']:g}", file=out)
        print(f"  T_omp      = {rep['t_omp']:g}", file=out)
        print(f"  T_acs      = {rep['t_acs']:g}", file=out)
        print(f"  C_proposed = {rep['c_proposed']:g}", file=out)
        print(f"  C_omp      = {rep['c_omp']:.4g}", file=out)
        print(f"  C_acs      = {rep['c_acs']:.4g}", file=out)
        print(f"  C_proposed / C_acs = {rep['ratio_acs']:.3g}", file=out)
        print(f"  C_proposed / C_omp = {rep['ratio_omp']:.3g}", file=out)
    return 0


COMMANDS = {"run": cmd_run, "estimate": cmd_estimate, "accounting": cmd_accounting}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = config_from_args(args)
        return COMMANDS[args.command](args, cfg)
    except (ConfigurationError, EstimationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
