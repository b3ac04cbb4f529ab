"""PCMS vs N at SNR = -4 dB, L = 5, K_B = 4 for L_B = 5 and L_B = 20.

The presets use p = 1000; pass --p 5000 for the full-size problem.

    python scripts/fig2_pcms_vs_n.py --out-dir results/fig2 [--trials 1000] [--p 5000]
"""

import argparse
import dataclasses
import os

from ebicr.cli import resolve_config
from ebicr.experiment import format_table, sweep, write_results


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out-dir", default="results/fig2")
    ap.add_argument("--trials", type=int, default=None, help="default: preset value (200)")
    ap.add_argument("--p", type=int, default=None, help="default: preset value (1000)")
    ap.add_argument("--threads", type=int, default=os.cpu_count() or 1)
    args = ap.parse_args()

    for preset in ("fig2", "fig2_LB20"):
        config = resolve_config(preset)
        changes = {k: v for k, v in (("trials", args.trials), ("p", args.p)) if v}
        if changes:
            config = dataclasses.replace(config, **changes)
        result = sweep(config, threads=args.threads)
        print(f"L_B = {config.L_B}")
        print(format_table(result))
        for path in write_results(result, args.out_dir):
            print("  wrote", path)


if __name__ == "__main__":
    main()
