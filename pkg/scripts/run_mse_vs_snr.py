#!/usr/bin/env python3
"""MSE of LRA-LMMSE, unquantized LMMSE and the Bayesian CRB against SNR.

Writes one CSV per correlation level (rho = 0 and rho = 0.75).
"""
import argparse
from pathlib import Path

from onebit_mimo.config import SystemConfig
from onebit_mimo.harness import emit_csv, run_mse_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--bound-draws", type=int, default=200)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--outdir", type=Path, default=Path("results"))
    args = ap.parse_args()
    args.outdir.mkdir(parents=True, exist_ok=True)
    for rho in (0.0, 0.75):
        cfg = SystemConfig(rho=rho, trials=args.trials, bound_draws=args.bound_draws)
        recs = run_mse_sweep(cfg, workers=args.workers)
        out = args.outdir / f"mse_vs_snr_rho{rho:g}.csv"
        emit_csv(recs, out)
        print(f"wrote {out} ({len(recs)} rows)")


if __name__ == "__main__":
    main()
