"""
Monte Carlo harness for probability-of-correct-model-selection (PCMS) sweeps.

Each trial draws a fresh design, signal and noise from its own substream
(see :func:`ebicr.model.make_rng`), runs B-OMP once and hands the same
candidate path to every configured selector.  A selector succeeds when its
estimated support equals the true support as a set.

Config files are flat ``key = value`` documents; list values are
comma-separated.  Keys::

    name            label used in output file names            (default "experiment")
    N               sample count, or a comma-separated N grid  (required)
    p, L, L_B, K_B  problem dimensions                         (required)
    snr_db          SNR in dB, or a comma-separated SNR grid   (required)
    trials          Monte Carlo trials per grid point          (required)
    seed            master seed, 0 <= seed < 2**64             (required)
    zeta            comma-separated EBIC_R zeta values         (default 1)
    methods         subset of ebicr, oracle, exhaustive        (default ebicr, oracle)
    K               B-OMP path length                          (default min(2 K_B, (N-1) // L_B, p_B))
    support_policy  fixed (blocks 1..K_B) or random            (default fixed)
    grid            snr_db or N; inferred from which key holds a list
"""

from __future__ import annotations

import csv
import io
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .bomp import CandidatePath, run_bomp
from .criterion import (MAX_CANDIDATES, SelectorConfig, count_candidates,
                        exhaustive_select, oracle_select, select_model)
from .errors import ConfigError, EbicrError
from .fileio import DataFormatError, fmt_float, parse_key_values, write_files_atomic
from .model import (BlockStructure, default_support, make_rng, random_support,
                    synthesize_dataset)

log = logging.getLogger(__name__)

METHODS = ("ebicr", "oracle", "exhaustive")
SUPPORT_POLICIES = ("fixed", "random")
RESULT_COLUMNS = ("grid_variable", "grid_value", "method", "zeta", "pcms",
                  "stderr", "trials", "mean_k")
REQUIRED_KEYS = ("N", "p", "L", "L_B", "K_B", "snr_db", "trials", "seed")


@dataclass(frozen=True)
class ExperimentConfig:
    N: tuple[int, ...]
    p: int
    L: int
    L_B: int
    K_B: int
    snr_db: tuple[float, ...]
    trials: int = 1000
    seed: int = 0
    zeta: tuple[float, ...] = (1.0,)
    methods: tuple[str, ...] = ("ebicr", "oracle")
    K: Optional[int] = None
    support_policy: str = "fixed"
    name: str = "experiment"
    grid: Optional[str] = None

    def __post_init__(self):
        object.__setattr__(self, "N", tuple(int(n) for n in _as_tuple(self.N)))
        object.__setattr__(self, "snr_db", tuple(float(s) for s in _as_tuple(self.snr_db)))
        object.__setattr__(self, "zeta", tuple(float(z) for z in _as_tuple(self.zeta)))
        object.__setattr__(self, "methods", tuple(_as_tuple(self.methods)))
        self.validate()

    def validate(self):
        if not self.N:
            raise ConfigError("N", "grid is empty")
        if not self.snr_db:
            raise ConfigError("snr_db", "grid is empty")
        if self.trials < 1:
            raise ConfigError("trials", "must be >= 1")
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed", "must be a 64-bit unsigned integer")
        for n in self.N:
            try:
                BlockStructure(N=n, p=self.p, L=self.L, L_B=self.L_B)
            except ValueError as exc:
                key = "L_B" if "divisible" in str(exc) else "N"
                raise ConfigError(key, str(exc)) from None
        p_B = self.p // self.L_B
        if p_B < 2:
            raise ConfigError("p", "need at least two blocks")
        if not 1 <= self.K_B <= p_B:
            raise ConfigError("K_B", f"must lie in 1..{p_B}")
        if self.K_B * self.L_B >= min(self.N):
            raise ConfigError("K_B", f"K_B * L_B = {self.K_B * self.L_B} must be < min N = {min(self.N)}")
        if not self.methods:
            raise ConfigError("methods", "no method selected")
        for m in self.methods:
            if m not in METHODS:
                raise ConfigError("methods", f"unknown method {m!r}; choose from {', '.join(METHODS)}")
        if not self.zeta or any(not z >= 0 for z in self.zeta):
            raise ConfigError("zeta", "need one or more values >= 0")
        if self.support_policy not in SUPPORT_POLICIES:
            raise ConfigError("support_policy", f"must be one of {', '.join(SUPPORT_POLICIES)}")
        if self.K is not None:
            if self.K < self.K_B:
                raise ConfigError("K", f"must be >= K_B = {self.K_B}")
            if self.K > p_B or self.K * self.L_B > min(self.N):
                raise ConfigError("K", "K must be <= p_B and K * L_B <= min N")
        if self.grid is not None and self.grid not in ("snr_db", "N"):
            raise ConfigError("grid", "must be 'snr_db' or 'N'")
        if len(self.N) > 1 and len(self.snr_db) > 1:
            raise ConfigError("grid", "only one of N and snr_db may hold several values")
        if "exhaustive" in self.methods:
            worst = max(count_candidates(p_B, self.path_length(n)) for n in self.N)
            if worst > MAX_CANDIDATES:
                raise ConfigError("methods", f"exhaustive search needs {worst} candidates")

    @property
    def grid_variable(self) -> str:
        if self.grid is not None:
            return self.grid
        return "N" if len(self.N) > 1 else "snr_db"

    def grid_points(self) -> list[tuple[int, float]]:
        """(N, snr_db) per grid point, in grid order."""
        return [(n, s) for n in self.N for s in self.snr_db]

    def structure(self, N: int) -> BlockStructure:
        return BlockStructure(N=N, p=self.p, L=self.L, L_B=self.L_B)

    def path_length(self, N: int) -> int:
        if self.K is not None:
            return self.K
        return min(2 * self.K_B, (N - 1) // self.L_B, self.p // self.L_B)

    def method_labels(self) -> list[tuple[str, Optional[float]]]:
        labels: list[tuple[str, Optional[float]]] = []
        for m in METHODS:
            if m not in self.methods:
                continue
            if m == "oracle":
                labels.append((m, None))
            else:
                labels.extend((m, z) for z in self.zeta)
        return labels


def _as_tuple(value):
    if isinstance(value, (list, tuple)):
        return tuple(value)
    return (value,)


def _split(text: str) -> list[str]:
    return [tok.strip() for tok in text.split(",") if tok.strip()]


def parse_config(text: str, source: str = "<config>") -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a ``key = value`` document."""
    try:
        kv = parse_key_values(text, source)
    except DataFormatError as exc:
        raise ConfigError("<syntax>", str(exc)) from None
    known = {f.name for f in ExperimentConfig.__dataclass_fields__.values()}
    for key in kv:
        if key not in known:
            raise ConfigError(key, "unknown key")
    for key in REQUIRED_KEYS:
        if key not in kv:
            raise ConfigError(key, "required key is missing")

    def conv(key, fn, many=False):
        try:
            vals = [fn(tok) for tok in _split(kv[key])]
        except ValueError:
            raise ConfigError(key, f"cannot parse {kv[key]!r}") from None
        if not vals:
            raise ConfigError(key, "empty value")
        if not many and len(vals) != 1:
            raise ConfigError(key, "expected a single value")
        return tuple(vals) if many else vals[0]

    args = dict(
        N=conv("N", int, many=True), p=conv("p", int), L=conv("L", int),
        L_B=conv("L_B", int), K_B=conv("K_B", int),
        snr_db=conv("snr_db", float, many=True), trials=conv("trials", int),
        seed=conv("seed", int),
    )
    if "zeta" in kv:
        args["zeta"] = conv("zeta", float, many=True)
    if "methods" in kv:
        args["methods"] = conv("methods", str, many=True)
    if "K" in kv:
        args["K"] = conv("K", int)
    for key in ("support_policy", "name", "grid"):
        if key in kv:
            args[key] = kv[key]
    return ExperimentConfig(**args)


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    return parse_config(path.read_text(), str(path))


def config_to_text(config: ExperimentConfig) -> str:
    def join(vals):
        return ", ".join(fmt_float(v) if isinstance(v, float) else str(v) for v in vals)

    lines = [
        f"name = {config.name}", f"N = {join(config.N)}", f"p = {config.p}",
        f"L = {config.L}", f"L_B = {config.L_B}", f"K_B = {config.K_B}",
        f"snr_db = {join(config.snr_db)}", f"trials = {config.trials}",
        f"seed = {config.seed}", f"zeta = {join(config.zeta)}",
        f"methods = {join(config.methods)}",
        f"support_policy = {config.support_policy}",
    ]
    if config.K is not None:
        lines.append(f"K = {config.K}")
    if config.grid is not None:
        lines.append(f"grid = {config.grid}")
    return "\n".join(lines) + "\n"


@dataclass
class TrialOutcome:
    grid_index: int
    trial_index: int
    true_support: tuple[int, ...] = ()
    path: Optional[CandidatePath] = None
    selections: dict = field(default_factory=dict)
    error: Optional[str] = None


def run_trial(config: ExperimentConfig, grid_index: int, trial_index: int) -> TrialOutcome:
    """Synthesize one dataset and apply every configured selector to one path."""
    N, snr_db = config.grid_points()[grid_index]
    structure = config.structure(N)
    if config.support_policy == "random":
        support = random_support(structure, config.K_B,
                                 make_rng(config.seed, grid_index, trial_index, "support"))
    else:
        support = default_support(config.K_B)
    out = TrialOutcome(grid_index, trial_index, true_support=support)
    try:
        ds = synthesize_dataset(structure, support, snr_db,
                                make_rng(config.seed, grid_index, trial_index, "data"))
        path = run_bomp(ds.A, ds.Y, config.path_length(N), structure)
        out.path = path
        for method, zeta in config.method_labels():
            if method == "oracle":
                sel = oracle_select(path, config.K_B)
            elif method == "ebicr":
                sel, _ = select_model(ds.A, ds.Y, path, SelectorConfig(zeta=zeta), structure)
            else:
                sel = exhaustive_select(ds.A, ds.Y, config.path_length(N),
                                        SelectorConfig(zeta=zeta), structure)
            out.selections[(method, zeta)] = tuple(sel)
    except EbicrError as exc:
        out.selections = {}
        out.error = f"{type(exc).__name__}: {exc}"
    return out


@dataclass(frozen=True)
class PointResult:
    grid_variable: str
    grid_value: float
    method: str
    zeta: Optional[float]
    pcms: float
    stderr: float
    trials: int
    mean_k: float

    @property
    def label(self) -> str:
        return self.method if self.zeta is None else f"{self.method}_zeta={self.zeta:g}"


@dataclass
class SweepResult:
    config: ExperimentConfig
    rows: list[PointResult]
    excluded: dict[int, int]

    def get(self, method: str, zeta: Optional[float] = None) -> list[PointResult]:
        if method != "oracle" and zeta is None:
            zeta = self.config.zeta[0]
        return [r for r in self.rows if r.method == method and r.zeta == zeta]

    def pcms(self, method: str, zeta: Optional[float] = None) -> list[float]:
        return [r.pcms for r in self.get(method, zeta)]

    def stderr(self, method: str, zeta: Optional[float] = None) -> list[float]:
        return [r.stderr for r in self.get(method, zeta)]


def pcms_stderr(pcms: float, trials: int) -> float:
    return math.sqrt(pcms * (1.0 - pcms) / trials)


def aggregate(config: ExperimentConfig, outcomes) -> SweepResult:
    """Reduce trial outcomes to PCMS rows; independent of outcome order."""
    labels = config.method_labels()
    points = config.grid_points()
    hits = {}
    ksum = {}
    valid = [0] * len(points)
    excluded = {g: 0 for g in range(len(points))}
    for oc in outcomes:
        if oc.error is not None:
            excluded[oc.grid_index] += 1
            continue
        valid[oc.grid_index] += 1
        truth = set(oc.true_support)
        for lab in labels:
            sel = oc.selections[lab]
            key = (oc.grid_index, lab)
            hits[key] = hits.get(key, 0) + (set(sel) == truth)
            ksum[key] = ksum.get(key, 0) + len(sel)
    rows = []
    gv = config.grid_variable
    for g, (n, s) in enumerate(points):
        value = n if gv == "N" else s
        if excluded[g]:
            log.warning("grid point %s=%s: %d of %d trials excluded after numerical failures",
                        gv, value, excluded[g], config.trials)
        for lab in labels:
            t = valid[g]
            p_hat = hits.get((g, lab), 0) / t if t else math.nan
            rows.append(PointResult(
                grid_variable=gv, grid_value=value, method=lab[0], zeta=lab[1],
                pcms=p_hat, stderr=pcms_stderr(p_hat, t) if t else math.nan,
                trials=t, mean_k=ksum.get((g, lab), 0) / t if t else math.nan,
            ))
    return SweepResult(config, rows, excluded)


def sweep(config: ExperimentConfig, threads: int = 1) -> SweepResult:
    """Run every (grid point, trial) pair and aggregate PCMS per method."""
    tasks = [(g, t) for g in range(len(config.grid_points())) for t in range(config.trials)]
    if threads <= 1:
        outcomes = [run_trial(config, g, t) for g, t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(lambda gt: run_trial(config, *gt), tasks))
    return aggregate(config, outcomes)


def _fmt_grid(value, grid_variable):
    return str(int(value)) if grid_variable == "N" else fmt_float(value)


def results_to_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RESULT_COLUMNS)
    for r in result.rows:
        w.writerow([r.grid_variable, _fmt_grid(r.grid_value, r.grid_variable), r.method,
                    "" if r.zeta is None else fmt_float(r.zeta), fmt_float(r.pcms),
                    fmt_float(r.stderr), r.trials, fmt_float(r.mean_k)])
    return buf.getvalue()


def plot_data_to_csv(result: SweepResult) -> str:
    """One x column (the grid variable) plus one PCMS column per method."""
    labels = result.config.method_labels()
    gv = result.config.grid_variable
    by_label = {lab: [r for r in result.rows if (r.method, r.zeta) == lab] for lab in labels}
    names = [PointResult(gv, 0, m, z, 0, 0, 0, 0).label for m, z in labels]
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([gv] + names)
    n_points = len(result.config.grid_points())
    for i in range(n_points):
        x = by_label[labels[0]][i].grid_value
        w.writerow([_fmt_grid(x, gv)] + [fmt_float(by_label[lab][i].pcms) for lab in labels])
    return buf.getvalue()


def write_results(result: SweepResult, destination) -> tuple[Path, Path]:
    """Write ``<name>_results.csv`` and ``<name>_plot.csv`` into ``destination``."""
    destination = Path(destination)
    name = result.config.name
    results_path = destination / f"{name}_results.csv"
    plot_path = destination / f"{name}_plot.csv"
    write_files_atomic({results_path: results_to_csv(result),
                        plot_path: plot_data_to_csv(result)})
    return results_path, plot_path


def read_results(path) -> list[PointResult]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            gv = rec["grid_variable"]
            rows.append(PointResult(
                grid_variable=gv,
                grid_value=int(rec["grid_value"]) if gv == "N" else float(rec["grid_value"]),
                method=rec["method"],
                zeta=float(rec["zeta"]) if rec["zeta"] else None,
                pcms=float(rec["pcms"]), stderr=float(rec["stderr"]),
                trials=int(rec["trials"]), mean_k=float(rec["mean_k"]),
            ))
    return rows


def format_table(result: SweepResult) -> str:
    """Human-readable PCMS table, one row per grid point."""
    labels = result.config.method_labels()
    gv = result.config.grid_variable
    names = [PointResult(gv, 0, m, z, 0, 0, 0, 0).label for m, z in labels]
    width = max(12, *(len(n) + 2 for n in names))
    lines = [f"{gv:>8}" + "".join(f"{n:>{width}}" for n in names)]
    n_points = len(result.config.grid_points())
    for i in range(n_points):
        cells = []
        for lab in labels:
            r = [row for row in result.rows if (row.method, row.zeta) == lab][i]
            cells.append(f"{r.pcms:.3f}+-{r.stderr:.3f}".rjust(width))
        x = result.rows[i * len(labels)].grid_value
        lines.append(f"{x:>8g}" + "".join(cells))
    return "\n".join(lines)
