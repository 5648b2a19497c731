"""Command-line entry point.

Examples::

    python -m onebit_mimo mse-sweep --snr 0,10,20 --m 1,2,3 --out fig2.csv
    python -m onebit_mimo mse-sweep --sweep tau --tau 4,20,40,68 --snr 0 --m 1,3
    python -m onebit_mimo ser-sweep --snr 10 --format json --out ser.json
"""
from __future__ import annotations

import argparse
import logging
import sys

from .config import ConfigError, SystemConfig, load_config
from .harness import SweepError, emit_csv, emit_json, run_crb_sweep, run_mse_sweep, run_ser_sweep
from .linalg import NumericalError
from .selftest import run_selftest

EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

_RUNNERS = {"mse-sweep": run_mse_sweep, "ser-sweep": run_ser_sweep, "crb-sweep": run_crb_sweep}


def _floats(text):
    return tuple(float(p) for p in text.split(",") if p.strip())


def _ints(text):
    return tuple(int(p) for p in text.split(",") if p.strip())


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="flat key = value config file")
    p.add_argument("--seed", type=int)
    p.add_argument("--trials", type=int, help="Monte Carlo trials per MSE point")
    p.add_argument("--snr", type=_floats, help="comma separated SNR grid in dB")
    p.add_argument("--m", type=_ints, help="comma separated oversampling factors")
    p.add_argument("--rho", type=float)
    p.add_argument("--tau", type=_ints, help="pilot length (comma list for tau sweeps)")
    p.add_argument("--sweep", choices=("snr", "tau"))
    p.add_argument("--bound-draws", type=int, dest="bound_draws")
    p.add_argument("--ser-symbols", type=int, dest="ser_symbols")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--workers", type=int, default=1, help="worker processes (0 = all cores)")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onebit-mimo", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _RUNNERS:
        _add_common(sub.add_parser(name))
    sub.add_parser("selftest", help="run the built-in oracle checks")
    return parser


def _config_from(args) -> SystemConfig:
    cfg = load_config(args.config) if args.config else SystemConfig()
    overrides = {
        "seed": args.seed,
        "trials": args.trials,
        "snr_db": args.snr,
        "m": args.m,
        "rho": args.rho,
        "tau": args.tau,
        "sweep": args.sweep,
        "bound_draws": args.bound_draws,
        "ser_symbols": args.ser_symbols,
    }
    return cfg.replace(**{k: v for k, v in overrides.items() if v is not None})


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "selftest":
        return 0 if run_selftest() else 1
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        cfg = _config_from(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        records = _RUNNERS[args.command](cfg, workers=args.workers)
    except (SweepError, NumericalError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    emit = emit_csv if args.format == "csv" else emit_json
    try:
        emit(records, args.out or sys.stdout)
    except OSError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
