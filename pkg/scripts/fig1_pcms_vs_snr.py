"""PCMS vs SNR at N = 150, p = 1000, L_B = 10, K_B = 4 for L = 5 and L = 15.

    python scripts/fig1_pcms_vs_snr.py --out-dir results/fig1 [--trials 1000]
"""

import argparse
import dataclasses
import os

from ebicr.cli import resolve_config
from ebicr.experiment import format_table, sweep, write_results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/fig1")
    ap.add_argument("--trials", type=int, default=None, help="default: preset value (200)")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()

    for preset in ("fig1", "fig1_L15"):
        config = resolve_config(preset)
        if args.trials:
            config = dataclasses.replace(config, trials=args.trials)
        result = sweep(config, threads=args.threads)
        print(f"L = {config.L}")
        print(format_table(result))
        for path in write_results(result, args.out_dir):
            print("  wrote", path)


if __name__ == "__main__":
    main()
