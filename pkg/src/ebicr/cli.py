"""
Command-line interface::

    ebicr synth       --out-dir DIR [--N 150 --p 1000 --L 5 --L_B 10 --K_B 4 --snr-db 10 --seed 0]
    ebicr select      --in-dir DIR [--K K] [--zeta 1] [--emit-scores FILE]
    ebicr experiment  --config FILE|PRESET --out-dir DIR [--threads T]
    ebicr diag        --in-dir DIR --support 1,2,3

Exit status: 0 success, 1 usage or config error, 2 data or numerical error.
``EBICR_THREADS`` sets the default thread count for ``experiment``.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from importlib import resources
from pathlib import Path

from .bomp import run_bomp
from .criterion import (SelectorConfig, fim_normalization_diagnostic, select_model,
                        sigma0_sq, sigma_sq_block)
from .errors import ConfigError, EbicrError
from .experiment import format_table, load_config, parse_config, sweep, write_results
from .fileio import (DataFormatError, format_support, parse_support, read_dataset,
                     scores_to_csv, write_dataset, write_files_atomic)
from .model import BlockStructure, check_support, default_support, make_rng, synthesize_dataset

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2
PRESETS = ("fig1", "fig1_L15", "fig2", "fig2_LB20")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def default_threads() -> int:
    env = os.environ.get("EBICR_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise UsageError(f"EBICR_THREADS must be an integer, got {env!r}") from None
    return os.cpu_count() or 1


def cmd_synth(args) -> int:
    try:
        structure = BlockStructure(N=args.N, p=args.p, L=args.L, L_B=args.L_B)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not 1 <= args.K_B <= structure.p_B:
        raise UsageError(f"K_B must lie in 1..p_B = {structure.p_B}")
    if args.K_B * args.L_B >= args.N:
        raise UsageError(f"K_B * L_B = {args.K_B * args.L_B} must be < N = {args.N}")
    if not 0 <= args.seed < 2**64:
        raise UsageError("seed must be a 64-bit unsigned integer")
    ds = synthesize_dataset(structure, default_support(args.K_B), args.snr_db,
                            make_rng(args.seed, 0, 0, "data"))
    ds.seed = args.seed
    write_dataset(ds, args.out_dir)
    print(f"wrote {structure.kind} dataset N={args.N} p={args.p} L={args.L} L_B={args.L_B} "
          f"true_support={format_support(ds.true_support)} sigma2={ds.sigma2:.6g} "
          f"to {args.out_dir}")
    return EXIT_OK


def default_path_length(ds) -> int:
    s = ds.structure
    cap = min(s.p_B, max(1, (s.N - 1) // s.L_B))
    if ds.true_support:
        return max(1, min(2 * len(ds.true_support), cap))
    return cap


def cmd_select(args) -> int:
    ds = read_dataset(args.in_dir)
    K = args.K if args.K is not None else default_path_length(ds)
    try:
        config = SelectorConfig(zeta=args.zeta, K=K)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    path = run_bomp(ds.A, ds.Y, K, ds.structure)
    support, scores = select_model(ds.A, ds.Y, path, config, ds.structure)
    if args.emit_scores:
        write_files_atomic({Path(args.emit_scores): scores_to_csv(scores)})
    print(f"path: {format_support(path.blocks)}")
    print(f"selected: {format_support(support)}")
    return EXIT_OK


def resolve_config(name: str):
    if name in PRESETS and not Path(name).exists():
        text = resources.files("ebicr").joinpath("presets", f"{name}.cfg").read_text()
        return parse_config(text, f"preset:{name}")
    return load_config(name)


def cmd_experiment(args) -> int:
    try:
        config = resolve_config(args.config)
    except OSError as exc:
        raise UsageError(f"cannot read config {args.config}: {exc}") from None
    threads = args.threads if args.threads is not None else default_threads()
    if threads < 1:
        raise UsageError("threads must be >= 1")
    result = sweep(config, threads=threads)
    results_path, plot_path = write_results(result, args.out_dir)
    print(format_table(result))
    skipped = sum(result.excluded.values())
    if skipped:
        print(f"excluded trials: {skipped}")
    print(f"wrote {results_path} and {plot_path}")
    return EXIT_OK


def cmd_diag(args) -> int:
    try:
        support = parse_support(args.support)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if not support:
        raise UsageError("support must name at least one block")
    ds = read_dataset(args.in_dir)
    try:
        support = check_support(support, ds.structure)
    except (ValueError, IndexError) as exc:
        raise UsageError(str(exc)) from None
    s2_0 = sigma0_sq(ds.Y, ds.structure)
    s2 = sigma_sq_block(ds.A, ds.Y, support, ds.structure)
    d = fim_normalization_diagnostic(ds.A, support, s2, s2_0, ds.structure)
    print(f"support: {format_support(support)}")
    print(f"sigma2_hat: {s2:.17g}")
    print(f"sigma2_0: {s2_0:.17g}")
    print(f"det_normalized: {d.det_normalized:.17g}")
    print(f"ln_det_normalized: {d.log_det_normalized:.17g}")
    print(f"ln_det_Q: {d.log_det_Q:.17g}")
    print(f"  size_term: {d.log_det_Q_size_term:.17g}")
    print(f"  variance_term: {d.log_det_Q_variance_term:.17g}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="ebicr", description="EBIC_R model selection for block-sparse regression")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", help="generate a synthetic BMMV dataset")
    p.add_argument("--N", type=int, default=150)
    p.add_argument("--p", type=int, default=1000)
    p.add_argument("--L", type=int, default=5)
    p.add_argument("--L_B", "--LB", dest="L_B", type=int, default=10)
    p.add_argument("--K_B", "--KB", dest="K_B", type=int, default=4)
    p.add_argument("--snr-db", type=float, default=10.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("select", help="run B-OMP + EBIC_R on a dataset directory")
    p.add_argument("--in-dir", required=True)
    p.add_argument("--K", type=int, default=None, help="B-OMP path length")
    p.add_argument("--zeta", type=float, default=1.0)
    p.add_argument("--emit-scores", default=None, metavar="FILE")
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("experiment", help="run a Monte Carlo PCMS sweep")
    p.add_argument("--config", required=True,
                   help=f"config file, or one of the presets {', '.join(PRESETS)}")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--threads", type=int, default=None)
    p.set_defaults(func=cmd_experiment)

    p = sub.add_parser("diag", help="FIM normalization diagnostic for one support")
    p.add_argument("--in-dir", required=True)
    p.add_argument("--support", required=True, help="comma-separated 1-based block indices")
    p.set_defaults(func=cmd_diag)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataFormatError, EbicrError, ValueError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
