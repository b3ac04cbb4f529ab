"""
Block structure bookkeeping and synthetic BMMV data.

Block indices are 1-based on every public surface: block ``j`` owns the
rows ``(j-1)*L_B + 1, ..., j*L_B`` of ``X`` (and the same columns of ``A``).

Random streams
--------------
All randomness flows from :func:`make_rng`, which feeds
``numpy.random.SeedSequence(master_seed, spawn_key=(grid, trial, tag))``
into a PCG64 generator.  ``SeedSequence`` hashes the entropy and spawn key
together, so every ``(master_seed, grid index, trial index, purpose)``
tuple owns a statistically independent stream, and trials can run in any
order or in parallel without changing their draws.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import IndexOutOfRange, ZeroSignal

PURPOSE_TAGS = {"data": 0, "support": 1}


def make_rng(master_seed: int, grid_index: int = 0, trial_index: int = 0,
             purpose: str = "data") -> np.random.Generator:
    """PCG64 generator for one (seed, grid point, trial, purpose) substream."""
    if master_seed < 0 or master_seed >= 2**64:
        raise ValueError("master_seed must be a 64-bit unsigned integer")
    ss = np.random.SeedSequence(
        int(master_seed),
        spawn_key=(int(grid_index), int(trial_index), PURPOSE_TAGS[purpose]),
    )
    return np.random.Generator(np.random.PCG64(ss))


@dataclass(frozen=True)
class BlockStructure:
    """Dimensions of a block regression problem.

    ``N`` samples, ``p`` predictors split into ``p_B = p / L_B`` equal
    blocks, ``L`` response columns.  SMV, MMV, BSMV and BMMV are the four
    combinations of ``L == 1`` / ``L > 1`` and ``L_B == 1`` / ``L_B > 1``.
    """

    N: int
    p: int
    L: int = 1
    L_B: int = 1

    def __post_init__(self):
        for name in ("N", "p", "L", "L_B"):
            value = getattr(self, name)
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")
        if self.p % self.L_B:
            raise ValueError(
                f"p = {self.p} is not divisible by the block length L_B = {self.L_B}"
            )

    @property
    def p_B(self) -> int:
        return self.p // self.L_B

    @property
    def kind(self) -> str:
        if self.L_B == 1:
            return "SMV" if self.L == 1 else "MMV"
        return "BSMV" if self.L == 1 else "BMMV"

    def with_N(self, N: int) -> "BlockStructure":
        return BlockStructure(N=N, p=self.p, L=self.L, L_B=self.L_B)


def check_support(support: Sequence[int], structure: BlockStructure) -> tuple[int, ...]:
    """Validate a block support (1-based, distinct) and return it as a tuple."""
    support = tuple(int(j) for j in support)
    if len(set(support)) != len(support):
        raise ValueError(f"duplicate block index in support {support}")
    for j in support:
        if not 1 <= j <= structure.p_B:
            raise IndexOutOfRange(f"block index {j} outside 1..{structure.p_B}")
    return support


def block_rows(j: int, structure: BlockStructure) -> list[int]:
    """1-based row indices of block ``j``."""
    if not 1 <= j <= structure.p_B:
        raise IndexOutOfRange(f"block index {j} outside 1..{structure.p_B}")
    start = (j - 1) * structure.L_B
    return list(range(start + 1, start + structure.L_B + 1))


def block_columns(support: Sequence[int], structure: BlockStructure) -> np.ndarray:
    """0-based column indices into ``A`` for the stacked blocks in ``support``."""
    L_B = structure.L_B
    support = check_support(support, structure)
    if not support:
        return np.zeros(0, dtype=int)
    starts = (np.asarray(support) - 1) * L_B
    return (starts[:, None] + np.arange(L_B)).ravel()


@dataclass
class Dataset:
    structure: BlockStructure
    A: np.ndarray
    Y: np.ndarray
    X: Optional[np.ndarray] = None
    true_support: Optional[tuple[int, ...]] = None
    sigma2: Optional[float] = None
    snr_db: Optional[float] = None
    seed: Optional[int] = None

    def __post_init__(self):
        s = self.structure
        if self.A.shape != (s.N, s.p):
            raise ValueError(f"A has shape {self.A.shape}, expected {(s.N, s.p)}")
        if self.Y.shape != (s.N, s.L):
            raise ValueError(f"Y has shape {self.Y.shape}, expected {(s.N, s.L)}")
        if self.X is not None and self.X.shape != (s.p, s.L):
            raise ValueError(f"X has shape {self.X.shape}, expected {(s.p, s.L)}")
        if self.true_support is not None:
            self.true_support = check_support(self.true_support, s)


def default_support(K_B: int) -> tuple[int, ...]:
    return tuple(range(1, K_B + 1))


def generate_design(structure: BlockStructure, rng: np.random.Generator) -> np.ndarray:
    """I.i.d. N(0, 1) design of shape (N, p)."""
    return rng.standard_normal((structure.N, structure.p))


def generate_signal(structure: BlockStructure, true_support: Sequence[int],
                    rng: np.random.Generator) -> np.ndarray:
    """Block-sparse X with equiprobable +-1 entries on the supported rows."""
    X = np.zeros((structure.p, structure.L))
    rows = block_columns(true_support, structure)
    if rows.size:
        X[rows] = rng.choice(np.array([-1.0, 1.0]), size=(rows.size, structure.L))
    return X


def noise_variance_for_snr(A, X, snr_db: float, structure: BlockStructure):
    """
    Signal power ``||AX||_F^2 / (N L)`` and the noise variance that yields
    ``snr_db``.

    Returns
    -------
    sigma_s2, sigma2 : float
    """
    AX = A @ X
    energy = float(np.sum(AX * AX))
    if energy == 0.0:
        raise ZeroSignal("A @ X is identically zero")
    sigma_s2 = energy / (structure.N * structure.L)
    return sigma_s2, sigma_s2 / 10.0 ** (snr_db / 10.0)


def random_support(structure: BlockStructure, K_B: int,
                   rng: np.random.Generator) -> tuple[int, ...]:
    picks = rng.choice(structure.p_B, size=K_B, replace=False) + 1
    return tuple(sorted(int(j) for j in picks))


def synthesize_dataset(structure: BlockStructure, true_support: Sequence[int],
                       snr_db: float, rng: np.random.Generator,
                       noise_variance: Optional[float] = None) -> Dataset:
    """Draw ``A``, ``X`` and ``W`` and return ``Y = A X + W``.

    The noise variance is derived from the raw (unnormalized) design.
    Passing ``noise_variance`` overrides it, e.g. 0 for noiseless data.
    """
    true_support = check_support(true_support, structure)
    if len(true_support) * structure.L_B >= structure.N:
        raise ValueError(
            f"K_B * L_B = {len(true_support) * structure.L_B} must be < N = {structure.N}"
        )
    A = generate_design(structure, rng)
    X = generate_signal(structure, true_support, rng)
    _, sigma2 = noise_variance_for_snr(A, X, snr_db, structure)
    if noise_variance is not None:
        sigma2 = float(noise_variance)
    W = np.sqrt(sigma2) * rng.standard_normal((structure.N, structure.L))
    return Dataset(structure, A, A @ X + W, X=X, true_support=true_support,
                   sigma2=sigma2, snr_db=snr_db)
