"""Dense linear-algebra kernels: validation, centering, thin SVD, least squares.

Everything here works on plain float64 ndarrays.  The SVD routine switches to
a Gram-matrix eigendecomposition when the input is much wider than it is tall,
which keeps the cost at O(n^2 p) instead of O(n p^2) for n rows and p columns.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NumericalError, ShapeError

_EPS = np.finfo(np.float64).eps


def as_matrix(x, name: str = "matrix") -> np.ndarray:
    """Coerce ``x`` to a 2-D float64 array and validate it.

    Parameters
    ----------
    x : array_like
        Candidate matrix.
    name : str
        Label used in error messages.

    Returns
    -------
    numpy.ndarray
        A 2-D float64 array with at least one row and one column and all
        entries finite.

    Raises
    ------
    ShapeError
        If ``x`` is not 2-D or has a zero-length axis.
    ValueError
        If any entry is NaN or infinite.
    """
    m = np.asarray(x, dtype=np.float64)
    if m.ndim != 2:
        raise ShapeError(f"{name} must be 2-D, got ndim={m.ndim}")
    if m.shape[0] < 1 or m.shape[1] < 1:
        raise ShapeError(f"{name} must have at least one row and one column, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError(f"{name} contains non-finite entries")
    return m


def center_columns(x) -> tuple[np.ndarray, np.ndarray]:
    """Subtract column means.

    Returns
    -------
    (means, centered) : tuple of ndarray
        ``means`` has shape (p,), ``centered`` has the shape of ``x`` and
        exactly zero column sums up to roundoff.
    """
    m = as_matrix(x, "x")
    means = m.mean(axis=0)
    return means, m - means


@dataclass
class SvdResult:
    """Compact singular value decomposition ``M ~ left @ diag(singular) @ right.T``.

    ``left`` is n x r, ``right`` is p x r, ``singular`` is length r with the
    values sorted in non-increasing order.  Triples whose singular value falls
    below the numerical noise floor are dropped, so r is the numerical rank
    (except for an exactly zero matrix, which keeps min(n, p) zero triples).
    """

    left: np.ndarray
    singular: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return int(self.singular.size)


def _apply_sign_convention(left: np.ndarray, right: np.ndarray) -> None:
    """Flip singular vector pairs so each right vector's largest-magnitude entry is positive."""
    for j in range(right.shape[1]):
        i = int(np.argmax(np.abs(right[:, j])))
        if right[i, j] < 0.0:
            right[:, j] = -right[:, j]
            left[:, j] = -left[:, j]


def thin_svd(m, max_rank: int | None = None) -> SvdResult:
    """Thin SVD with numerical-rank trimming and a fixed sign convention.

    Parameters
    ----------
    m : array_like
        n x p matrix with finite entries.
    max_rank : int, optional
        Keep at most this many leading triples.

    Returns
    -------
    SvdResult

    Notes
    -----
    For p > n the decomposition goes through the n x n Gram matrix
    ``M M^T``: eigenvalues give squared singular values and right vectors are
    recovered as ``M^T u / sigma``.  Recovered directions with sigma below
    ``sigma_1 * sqrt(max(n, p) * eps)`` are dominated by roundoff and are
    dropped; the direct route uses the usual ``sigma_1 * max(n, p) * eps``
    cutoff.  Sign convention: the largest-magnitude entry of each right
    vector is made positive, which fixes the otherwise arbitrary signs.
    """
    m = as_matrix(m, "m")
    n, p = m.shape
    if max_rank is not None and max_rank < 0:
        raise ValueError(f"max_rank must be nonnegative, got {max_rank}")

    if p > n:
        gram = m @ m.T
        try:
            lam, u = np.linalg.eigh(gram)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"eigendecomposition failed: {exc}") from exc
        order = np.argsort(lam)[::-1]
        lam = np.clip(lam[order], 0.0, None)
        sigma = np.sqrt(lam)
        u = u[:, order]
        cutoff = sigma[0] * np.sqrt(max(n, p) * _EPS) if sigma.size else 0.0
        keep = sigma > cutoff
        if not np.any(keep):
            # Exactly (or numerically) zero matrix: keep zero triples with
            # trivially orthonormal vectors.
            r = min(n, p)
            return SvdResult(np.eye(n, r), np.zeros(r), np.eye(p, r))
        sigma = sigma[keep]
        u = u[:, keep]
        v = (m.T @ u) / sigma
        left, singular, right = u, sigma, v
    else:
        try:
            u, sigma, vt = np.linalg.svd(m, full_matrices=False)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"SVD failed to converge: {exc}") from exc
        cutoff = sigma[0] * max(n, p) * _EPS if sigma.size else 0.0
        keep = sigma > cutoff
        if sigma.size and sigma[0] == 0.0:
            # Zero matrix: the decomposition is exact as returned.
            keep = np.ones_like(sigma, dtype=bool)
        sigma = sigma[keep]
        left, singular, right = u[:, keep], sigma, vt[keep].T

    if max_rank is not None and singular.size > max_rank:
        left = left[:, :max_rank]
        singular = singular[:max_rank]
        right = right[:, :max_rank]
    left = np.ascontiguousarray(left)
    right = np.ascontiguousarray(right)
    _apply_sign_convention(left, right)
    return SvdResult(left, singular, right)


def min_norm_lstsq(m, y, rtol: float | None = None) -> np.ndarray:
    """Minimum-norm least-squares solution of ``m @ w ~ y``.

    Parameters
    ----------
    m : array_like
        n x q design matrix.
    y : array_like
        Length-n target vector.
    rtol : float, optional
        Singular values below ``rtol * sigma_1`` are treated as zero.
        Defaults to ``1e-12 * max(n, q)``.

    Returns
    -------
    numpy.ndarray
        The length-q solution of minimum Euclidean norm.
    """
    m = as_matrix(m, "m")
    y = np.asarray(y, dtype=np.float64)
    if y.ndim != 1:
        raise ShapeError(f"y must be 1-D, got ndim={y.ndim}")
    if y.shape[0] != m.shape[0]:
        raise ShapeError(f"y has length {y.shape[0]} but m has {m.shape[0]} rows")
    if not np.all(np.isfinite(y)):
        raise ValueError("y contains non-finite entries")
    if rtol is None:
        rtol = 1e-12 * max(m.shape)
    if not 0.0 < rtol < 1.0:
        raise ValueError(f"rtol must lie in (0, 1), got {rtol}")
    try:
        w, _, _, _ = np.linalg.lstsq(m, y, rcond=rtol)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"least-squares solve failed: {exc}") from exc
    return w
