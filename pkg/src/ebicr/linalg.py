"""
Dense least-squares primitives.

Every routine here works through a reduced QR factorization of the
sub-design instead of forming ``A.T @ A``; the results agree in exact
arithmetic and the QR route keeps the conditioning of ``A`` rather than
squaring it.
"""

from __future__ import annotations

import numpy as np

from .errors import RankDeficient, ZeroColumn

RANK_TOL = 1e-10
NORM_TOL = 1e-300


def as_matrix(Y) -> np.ndarray:
    """Return ``Y`` as a 2-D float array; 1-D input becomes a single column."""
    Y = np.asarray(Y, dtype=float)
    if Y.ndim == 1:
        Y = Y[:, None]
    if Y.ndim != 2:
        raise ValueError(f"expected a matrix, got array with shape {Y.shape}")
    return Y


def _orthonormal_basis(A_sub: np.ndarray, rank_tol: float = RANK_TOL):
    """Reduced QR of ``A_sub`` with a rank check on the triangular factor."""
    N, m = A_sub.shape
    if m > N:
        raise RankDeficient(f"{m} columns cannot be independent in R^{N}")
    Q, R = np.linalg.qr(A_sub, mode="reduced")
    diag = np.abs(np.diag(R))
    if diag.size and (diag.max() == 0.0 or diag.min() < rank_tol * diag.max()):
        raise RankDeficient(
            f"effective rank below {m}: |R_ii| ranges "
            f"[{diag.min():.3g}, {diag.max():.3g}]"
        )
    return Q, R


def least_squares_fit(A_sub, Y, rank_tol: float = RANK_TOL) -> np.ndarray:
    """
    Solve ``min_X ||Y - A_sub X||_F`` column by column.

    Parameters
    ----------
    A_sub : array_like, shape (N, m)
        Sub-design with full column rank, ``m <= N``.
    Y : array_like, shape (N, L) or (N,)
        Responses.
    rank_tol : float
        Relative threshold on the diagonal of the triangular factor.

    Returns
    -------
    X_hat : ndarray, shape (m, L)

    Raises
    ------
    RankDeficient
        If the smallest ``|R_ii|`` is below ``rank_tol * max |R_ii|``.
    """
    A_sub = as_matrix(A_sub)
    Y = as_matrix(Y)
    if A_sub.shape[0] != Y.shape[0]:
        raise ValueError(f"row mismatch: A_sub has {A_sub.shape[0]}, Y has {Y.shape[0]}")
    if A_sub.shape[1] == 0:
        return np.zeros((0, Y.shape[1]))
    Q, R = _orthonormal_basis(A_sub, rank_tol)
    return np.linalg.solve(R, Q.T @ Y)


def residual_matrix(A_sub, Y, rank_tol: float = RANK_TOL) -> np.ndarray:
    """Project ``Y`` onto the orthogonal complement of ``span(A_sub)``.

    An empty design (zero columns) returns a copy of ``Y``.
    """
    Y = as_matrix(Y)
    A_sub = np.asarray(A_sub, dtype=float)
    if A_sub.ndim == 1:
        A_sub = A_sub[:, None]
    if A_sub.shape[0] != Y.shape[0]:
        raise ValueError(f"row mismatch: A_sub has {A_sub.shape[0]}, Y has {Y.shape[0]}")
    if A_sub.shape[1] == 0:
        return Y.copy()
    Q, _ = _orthonormal_basis(A_sub, rank_tol)
    return Y - Q @ (Q.T @ Y)


def residual_sq_norm(A_sub, Y, rank_tol: float = RANK_TOL) -> float:
    """Squared Frobenius norm of :func:`residual_matrix`."""
    Rm = residual_matrix(A_sub, Y, rank_tol)
    return float(np.sum(Rm * Rm))


def normalize_columns(A, norm_tol: float = NORM_TOL) -> np.ndarray:
    """Return a copy of ``A`` whose columns have unit Euclidean norm."""
    A = as_matrix(A)
    norms = np.linalg.norm(A, axis=0)
    bad = np.flatnonzero(norms <= norm_tol)
    if bad.size:
        raise ZeroColumn(int(bad[0]))
    return A / norms


def gram_eigenvalue_range(A_sub) -> tuple[float, float]:
    """Extreme eigenvalues of ``A_sub.T @ A_sub / N``.

    A cheap check of the design-regularity assumption: for well-behaved
    designs both values stay bounded away from 0 and infinity as N grows.
    """
    A_sub = as_matrix(A_sub)
    N = A_sub.shape[0]
    s = np.linalg.svd(A_sub, compute_uv=False)
    ev = s * s / N
    return float(ev.min()), float(ev.max())
