"""
Plain-text file formats.

Dataset directory::

    A.csv, Y.csv, X.csv   headerless comma-separated rows, 17 significant digits
    meta.txt              "key = value" lines: N, p, L, L_B, snr_db, seed,
                          true_support (comma-separated 1-based), sigma2

Every writer stages its output in temporary files and renames them into
place only after all of them were written, so a failure never leaves a
partial result behind.
"""

from __future__ import annotations

import csv
import io
import os
import tempfile
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from .model import BlockStructure, Dataset

FLOAT_FMT = "%.17g"
META_NAME = "meta.txt"
SCORE_COLUMNS = ("k_B", "support", "term_fit", "term_dim", "term_ratio",
                 "term_prior", "total")


class DataFormatError(ValueError):
    """A dataset or score file is malformed or inconsistent."""


def fmt_float(x: float) -> str:
    return FLOAT_FMT % x


def write_files_atomic(files: Mapping[Path, str]) -> None:
    """Write several text files, renaming them into place only at the end."""
    staged = []
    try:
        for path, text in files.items():
            path = Path(path)
            path.parent.mkdir(parents=True, exist_ok=True)
            fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
            staged.append((tmp, path))
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
    except BaseException:
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    for tmp, path in staged:
        os.replace(tmp, path)


def matrix_to_csv(M: np.ndarray) -> str:
    buf = io.StringIO()
    np.savetxt(buf, np.atleast_2d(M), fmt=FLOAT_FMT, delimiter=",")
    return buf.getvalue()


def read_matrix(path) -> np.ndarray:
    path = Path(path)
    try:
        M = np.loadtxt(path, delimiter=",", ndmin=2)
    except (OSError, ValueError) as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if not np.all(np.isfinite(M)):
        raise DataFormatError(f"{path}: non-finite entries")
    return M


def format_support(support: Iterable[int], sep: str = ",") -> str:
    return sep.join(str(int(j)) for j in support)


def parse_support(text: str) -> tuple[int, ...]:
    text = text.strip()
    if not text:
        return ()
    try:
        return tuple(int(tok) for tok in text.replace(";", ",").split(","))
    except ValueError as exc:
        raise ValueError(f"malformed support {text!r}: expected comma-separated integers") from exc


def parse_key_values(text: str, source: str = "<string>") -> dict[str, str]:
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, value = (s.strip() for s in line.split("=", 1))
        if not key:
            raise DataFormatError(f"{source}:{lineno}: empty key")
        if key in out:
            raise DataFormatError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def dataset_meta(ds: Dataset) -> str:
    s = ds.structure
    lines = [f"N = {s.N}", f"p = {s.p}", f"L = {s.L}", f"L_B = {s.L_B}"]
    if ds.snr_db is not None:
        lines.append(f"snr_db = {fmt_float(ds.snr_db)}")
    if ds.seed is not None:
        lines.append(f"seed = {ds.seed}")
    if ds.true_support is not None:
        lines.append(f"true_support = {format_support(ds.true_support)}")
    if ds.sigma2 is not None:
        lines.append(f"sigma2 = {fmt_float(ds.sigma2)}")
    return "\n".join(lines) + "\n"


def write_dataset(ds: Dataset, out_dir) -> None:
    out_dir = Path(out_dir)
    files = {out_dir / "A.csv": matrix_to_csv(ds.A),
             out_dir / "Y.csv": matrix_to_csv(ds.Y),
             out_dir / META_NAME: dataset_meta(ds)}
    if ds.X is not None:
        files[out_dir / "X.csv"] = matrix_to_csv(ds.X)
    write_files_atomic(files)


def read_dataset(in_dir) -> Dataset:
    """Load a dataset directory, checking every shape against meta.txt."""
    in_dir = Path(in_dir)
    meta_path = in_dir / META_NAME
    try:
        meta = parse_key_values(meta_path.read_text(), str(meta_path))
    except OSError as exc:
        raise DataFormatError(f"{meta_path}: {exc}") from exc
    try:
        structure = BlockStructure(N=int(meta["N"]), p=int(meta["p"]),
                                   L=int(meta["L"]), L_B=int(meta["L_B"]))
        snr_db = float(meta["snr_db"]) if "snr_db" in meta else None
        seed = int(meta["seed"]) if "seed" in meta else None
        sigma2 = float(meta["sigma2"]) if "sigma2" in meta else None
        support = parse_support(meta["true_support"]) if "true_support" in meta else None
    except KeyError as exc:
        raise DataFormatError(f"{meta_path}: missing key {exc.args[0]!r}") from exc
    except ValueError as exc:
        raise DataFormatError(f"{meta_path}: {exc}") from exc
    A = read_matrix(in_dir / "A.csv")
    Y = read_matrix(in_dir / "Y.csv")
    X = None
    if (in_dir / "X.csv").exists():
        X = read_matrix(in_dir / "X.csv")
    try:
        return Dataset(structure, A, Y, X=X, true_support=support,
                       sigma2=sigma2, snr_db=snr_db, seed=seed)
    except (ValueError, IndexError) as exc:
        raise DataFormatError(f"{in_dir}: {exc}") from exc


def scores_to_csv(scores) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SCORE_COLUMNS)
    for sc in scores:
        w.writerow([sc.k_B, format_support(sc.support, ";"),
                    fmt_float(sc.term_fit), fmt_float(sc.term_dim),
                    fmt_float(sc.term_ratio), fmt_float(sc.term_prior),
                    fmt_float(sc.total)])
    return buf.getvalue()


def read_scores(path) -> list[dict]:
    rows = []
    with open(path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append({
                "k_B": int(rec["k_B"]),
                "support": parse_support(rec["support"]),
                **{k: float(rec[k]) for k in SCORE_COLUMNS[2:]},
            })
    return rows
