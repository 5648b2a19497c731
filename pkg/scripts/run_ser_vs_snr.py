#!/usr/bin/env python3
"""Uncoded QPSK symbol error rate with perfect and estimated channels."""
import argparse
from pathlib import Path

from onebit_mimo.config import SystemConfig
from onebit_mimo.harness import emit_csv, run_ser_sweep


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--snr", default="-5,0,5,10,15,20")
    ap.add_argument("--symbols", type=int, default=600_000)
    ap.add_argument("--workers", type=int, default=0)
    ap.add_argument("--out", type=Path, default=Path("results/ser_vs_snr.csv"))
    args = ap.parse_args()
    cfg = SystemConfig(snr_db=tuple(float(s) for s in args.snr.split(",")), ser_symbols=args.symbols)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    emit_csv(run_ser_sweep(cfg, workers=args.workers), args.out)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
