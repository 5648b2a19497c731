#!/usr/bin/env python3
"""LRA-LMMSE MSE against pilot length at 0 dB for M = 1 and M = 3."""
import argparse
from pathlib import Path

from onebit_mimo.config import SystemConfig
from onebit_mimo.harness import emit_csv, run_mse_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--tau", default="4,8,12,20,28,40,52,68")
    ap.add_argument("--snr", type=float, default=0.0)
    ap.add_argument("--trials", type=int, default=2000)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/mse_vs_tau.csv"))
    args = ap.parse_args()
    cfg = SystemConfig(
        sweep="tau",
        tau=tuple(int(t) for t in args.tau.split(",")),
        snr_db=(args.snr,),
        m=(1, 3),
        trials=args.trials,
        include_bounds=False,
    )
    args.out.parent.mkdir(parents=True, exist_ok=True)
    emit_csv(run_mse_sweep(cfg, workers=args.workers), args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
