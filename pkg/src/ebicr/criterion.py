"""
EBIC_R scoring and model selection for block-sparse regression.

For a candidate block support ``I`` with ``k_B`` blocks the score is::

    EBIC_R(I) = N L ln s2_I
              + k_B L_B L ln(N / (2 pi L_B))
              + (k_B L_B L + 2) ln(s2_0 / s2_I)
              + 2 k_B zeta ln p_B

where ``s2_I = ||P_perp(A_I) Y||_F^2 / (N L)`` is the residual variance
of the block fit and ``s2_0 = ||Y||_F^2 / (N L)``.  The estimated support
minimizes the score.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .bomp import CandidatePath
from .errors import PathTooShort, RankDeficient, TooManyCandidates, ZeroResponse
from .linalg import as_matrix, residual_sq_norm
from .model import BlockStructure, block_columns, check_support

MAX_CANDIDATES = 10**6


@dataclass(frozen=True)
class SelectorConfig:
    """Tuning of the selector.

    ``var_floor_rel`` floors the residual variance at
    ``var_floor_rel * s2_0`` before any logarithm; without it a support
    that interpolates ``Y`` exactly would score ``-inf``.
    """

    zeta: float = 1.0
    var_floor_rel: float = 1e-12
    K: Optional[int] = None

    def __post_init__(self):
        if not self.zeta >= 0:
            raise ValueError(f"zeta must be >= 0, got {self.zeta}")
        if not self.var_floor_rel > 0:
            raise ValueError(f"var_floor_rel must be > 0, got {self.var_floor_rel}")


@dataclass(frozen=True)
class CriterionScore:
    support: tuple[int, ...]
    k_B: int
    sigma2_hat: float
    sigma2_0: float
    term_fit: float
    term_dim: float
    term_ratio: float
    term_prior: float
    total: float


def sigma0_sq(Y, structure: BlockStructure) -> float:
    """Mean squared response ``||Y||_F^2 / (N L)``."""
    Y = as_matrix(Y)
    value = float(np.sum(Y * Y)) / (structure.N * structure.L)
    if value == 0.0:
        raise ZeroResponse("Y is identically zero")
    return value


def sigma_sq_block(A, Y, support: Sequence[int], structure: BlockStructure) -> float:
    """Residual variance ``||P_perp(A_I) Y||_F^2 / (N L)`` of the block fit."""
    support = check_support(support, structure)
    if len(support) * structure.L_B > structure.N:
        raise ValueError(
            f"support of {len(support)} blocks needs {len(support) * structure.L_B} "
            f"columns but N = {structure.N}"
        )
    A = as_matrix(A)
    if not support:
        return sigma0_sq(Y, structure)
    cols = block_columns(support, structure)
    return residual_sq_norm(A[:, cols], Y) / (structure.N * structure.L)


def score_from_variances(support: Sequence[int], sigma2_hat: float, sigma2_0: float,
                         config: SelectorConfig, structure: BlockStructure) -> CriterionScore:
    """Assemble the four EBIC_R terms from precomputed residual variances."""
    N, L, L_B, p_B = structure.N, structure.L, structure.L_B, structure.p_B
    support = tuple(support)
    k_B = len(support)
    s2 = max(sigma2_hat, config.var_floor_rel * sigma2_0)
    n_params = k_B * L_B * L
    term_fit = N * L * math.log(s2)
    term_dim = n_params * math.log(N / (2.0 * math.pi * L_B))
    term_ratio = (n_params + 2) * math.log(sigma2_0 / s2)
    term_prior = 2.0 * k_B * config.zeta * math.log(p_B)
    return CriterionScore(
        support=support, k_B=k_B, sigma2_hat=sigma2_hat, sigma2_0=sigma2_0,
        term_fit=term_fit, term_dim=term_dim, term_ratio=term_ratio,
        term_prior=term_prior,
        total=term_fit + term_dim + term_ratio + term_prior,
    )


def ebicr_score(A, Y, support: Sequence[int], config: SelectorConfig,
                structure: BlockStructure) -> CriterionScore:
    """EBIC_R value of one block support, with its term decomposition."""
    if structure.p_B < 2:
        raise ValueError("EBIC_R needs at least two blocks (ln p_B > 0)")
    support = check_support(support, structure)
    s2_0 = sigma0_sq(Y, structure)
    s2 = sigma_sq_block(A, Y, support, structure) if support else s2_0
    return score_from_variances(support, s2, s2_0, config, structure)


def select_model(A, Y, path: CandidatePath, config: SelectorConfig,
                 structure: BlockStructure):
    """
    Score every prefix of a B-OMP path and return the minimizer.

    Prefixes ``k_B = 1 .. len(path)`` are scored (the empty model is not a
    candidate here).  On equal totals the shorter prefix wins.

    Returns
    -------
    support : tuple of int
        Selected blocks, in path order.
    scores : list of CriterionScore
        One entry per prefix length.
    """
    blocks = path.blocks if isinstance(path, CandidatePath) else tuple(path)
    if not blocks:
        raise ValueError("candidate path is empty")
    scores = [ebicr_score(A, Y, blocks[:k], config, structure)
              for k in range(1, len(blocks) + 1)]
    best = scores[0]
    for sc in scores[1:]:
        if sc.total < best.total:
            best = sc
    return best.support, scores


def count_candidates(p_B: int, k_max: int) -> int:
    return sum(math.comb(p_B, k) for k in range(k_max + 1))


def exhaustive_select(A, Y, k_max: int, config: SelectorConfig,
                      structure: BlockStructure,
                      max_candidates: int = MAX_CANDIDATES) -> tuple[int, ...]:
    """Minimize EBIC_R over all block supports with at most ``k_max`` blocks.

    Includes the empty support.  Ties go to the smaller cardinality, then to
    the lexicographically smaller support.  Returns a sorted tuple.
    """
    k_max = min(int(k_max), structure.p_B)
    if k_max * structure.L_B > structure.N:
        raise ValueError(f"k_max * L_B = {k_max * structure.L_B} exceeds N = {structure.N}")
    total = count_candidates(structure.p_B, k_max)
    if total > max_candidates:
        raise TooManyCandidates(f"{total} supports exceed the limit of {max_candidates}")
    A = as_matrix(A)
    s2_0 = sigma0_sq(Y, structure)
    best_support: tuple[int, ...] = ()
    best_total = score_from_variances((), s2_0, s2_0, config, structure).total
    for k in range(1, k_max + 1):
        for support in itertools.combinations(range(1, structure.p_B + 1), k):
            s2 = sigma_sq_block(A, Y, support, structure)
            t = score_from_variances(support, s2, s2_0, config, structure).total
            if t < best_total:
                best_total, best_support = t, support
    return best_support


def oracle_select(path: CandidatePath, K_B: int) -> tuple[int, ...]:
    """First ``K_B`` blocks of the path: B-OMP told the true sparsity."""
    blocks = path.blocks if isinstance(path, CandidatePath) else tuple(path)
    if len(blocks) < K_B:
        raise PathTooShort(f"path has {len(blocks)} blocks, oracle needs {K_B}")
    return tuple(blocks[:K_B])


class FimDiagnostic(NamedTuple):
    det_normalized: float
    log_det_Q: float
    log_det_normalized: float
    log_det_Q_size_term: float
    log_det_Q_variance_term: float


def fim_normalization_diagnostic(A, support: Sequence[int], sigma2_hat: float,
                                 sigma2_0: float, structure: BlockStructure) -> FimDiagnostic:
    """
    Normalized Fisher-information determinant and ``ln|Q|`` for a support.

    The sample FIM of the vectorized model is block diagonal,
    ``diag(kron(I_L, A_I.T A_I) / s2_I, N L / (2 s2_I^2))``.  After the
    ``Q^{-1/2}`` scaling its determinant is::

        L_B^(m+1) L / (2 s2_0^(m+2)) * |A_I.T A_I / N|^L,   m = k_B L_B L

    which stays O(1) as N grows for regular designs.  ``ln|Q|`` is split as
    ``(m+1) ln(N/L_B) + (m+2) ln(s2_0/s2_I)``.
    """
    support = check_support(support, structure)
    if sigma2_hat <= 0 or sigma2_0 <= 0:
        raise ValueError("variances must be positive")
    A = as_matrix(A)
    N, L, L_B = structure.N, structure.L, structure.L_B
    m = len(support) * L_B * L
    log_gram = 0.0
    if support:
        A_I = A[:, block_columns(support, structure)]
        if A_I.shape[1] > N:
            raise RankDeficient(f"{A_I.shape[1]} columns exceed N = {N}")
        sign, log_gram = np.linalg.slogdet(A_I.T @ A_I / N)
        if sign <= 0:
            raise RankDeficient("A_I.T A_I is not positive definite")
    log_det_norm = ((m + 1) * math.log(L_B) + math.log(L) - math.log(2.0)
                    - (m + 2) * math.log(sigma2_0) + L * float(log_gram))
    size_term = (m + 1) * math.log(N / L_B)
    var_term = (m + 2) * math.log(sigma2_0 / sigma2_hat)
    return FimDiagnostic(
        det_normalized=math.exp(log_det_norm) if log_det_norm < 700 else math.inf,
        log_det_Q=size_term + var_term,
        log_det_normalized=log_det_norm,
        log_det_Q_size_term=size_term,
        log_det_Q_variance_term=var_term,
    )
