"""Block orthogonal matching pursuit (B-OMP) for BMMV models."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import as_matrix, normalize_columns, residual_matrix
from .model import BlockStructure, block_columns

EARLY_STOP_TOL = 1e-10


@dataclass(frozen=True)
class CandidatePath:
    """Ordered block indices chosen by B-OMP (1-based).

    ``residual_norms[i]`` is ``||R^{i+1}||_F`` after the first ``i + 1``
    blocks have been projected out.
    """

    blocks: tuple[int, ...]
    residual_norms: tuple[float, ...] = ()

    def __len__(self):
        return len(self.blocks)

    def prefix(self, k: int) -> tuple[int, ...]:
        return self.blocks[:k]


def block_correlations(A_normalized: np.ndarray, R: np.ndarray,
                       structure: BlockStructure) -> np.ndarray:
    """``||A[:, I_j].T @ R||_F`` for every block ``j`` (0-based array)."""
    C = A_normalized.T @ R
    return np.sqrt(np.sum((C * C).reshape(structure.p_B, -1), axis=1))


def run_bomp(A, Y, K: int, structure: BlockStructure,
             early_stop_tol: float = EARLY_STOP_TOL) -> CandidatePath:
    """
    Greedy block selection with ``K`` iterations.

    Works on a column-normalized copy of ``A``.  Each iteration appends the
    block with the largest Frobenius correlation against the current
    residual (ties go to the smallest index), then recomputes the residual
    as the projection of ``Y`` off all selected blocks.

    If the residual drops below ``early_stop_tol * ||Y||_F`` the path stops
    there and can be shorter than ``K``.

    Raises
    ------
    ValueError
        If ``K < 1``, ``K > p_B`` or ``K * L_B > N``.
    RankDeficient, ZeroColumn
        From the projection and normalization steps.
    """
    A = as_matrix(A)
    Y = as_matrix(Y)
    if K < 1:
        raise ValueError("K must be at least 1")
    if K > structure.p_B:
        raise ValueError(f"K = {K} exceeds the number of blocks p_B = {structure.p_B}")
    if K * structure.L_B > structure.N:
        raise ValueError(f"K * L_B = {K * structure.L_B} exceeds N = {structure.N}")

    An = normalize_columns(A)
    y_norm = np.linalg.norm(Y)
    R = Y
    chosen: list[int] = []
    norms: list[float] = []
    available = np.ones(structure.p_B, dtype=bool)
    for _ in range(K):
        corr = block_correlations(An, R, structure)
        corr[~available] = -np.inf
        # np.argmax returns the first maximum: smallest index on ties
        d = int(np.argmax(corr))
        available[d] = False
        chosen.append(d + 1)
        R = residual_matrix(An[:, block_columns(chosen, structure)], Y)
        norms.append(float(np.linalg.norm(R)))
        if norms[-1] < early_stop_tol * y_norm:
            break
    return CandidatePath(tuple(chosen), tuple(norms))
