"""Projection bases for high-dimensional discriminant fitting.

A fit projects features onto a low-dimensional basis before the
least-squares step.  The basis can be the leading principal components of
the (column-centered) training matrix or of an independent auxiliary
matrix, the identity, or a user-supplied matrix.  When the number of
components is not fixed in advance it is chosen by minimizing a penalized
residual criterion over the singular value tail.
"""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import DataFormatError, RankDeficiencyError, ShapeError
from .numerics import SvdResult, as_matrix, center_columns, thin_svd

__all__ = [
    "ProjectionSpec",
    "Projection",
    "KSelection",
    "select_k",
    "principal_component_basis",
    "resolve_projection",
]

_KINDS = ("pc", "identity", "user")


@dataclass
class ProjectionSpec:
    """Declarative description of how to build a projection basis.

    ``kind`` is one of ``"pc"``, ``"identity"``, ``"user"``.  For ``"pc"``,
    ``rank=None`` requests data-driven rank selection with constants ``c0``
    and ``nu``; a positive integer fixes the rank.  For ``"user"``,
    ``matrix`` holds the basis columns.
    """

    kind: str
    rank: int | None = None
    matrix: np.ndarray | None = None
    c0: float = 2.1
    nu: float = 100.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ValueError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        if self.rank is not None:
            self.rank = int(self.rank)
            if self.rank < 1:
                raise ValueError(f"rank must be at least 1, got {self.rank}")
            if self.kind != "pc":
                raise ValueError("rank applies only to pc projections")
        if self.kind == "user":
            if self.matrix is None:
                raise ValueError("user projection requires a matrix")
            self.matrix = as_matrix(self.matrix, "matrix")
        elif self.matrix is not None:
            raise ValueError("matrix applies only to user projections")
        self.c0 = float(self.c0)
        self.nu = float(self.nu)
        if self.c0 <= 0.0:
            raise ValueError(f"c0 must be positive, got {self.c0}")
        if self.nu <= 1.0:
            raise ValueError(f"nu must exceed 1, got {self.nu}")

    @classmethod
    def pc(cls, rank: int | None = None, c0: float = 2.1, nu: float = 100.0):
        return cls(kind="pc", rank=rank, c0=c0, nu=nu)

    @classmethod
    def identity(cls):
        return cls(kind="identity")

    @classmethod
    def user(cls, matrix):
        return cls(kind="user", matrix=matrix)

    @classmethod
    def from_string(cls, text: str):
        """Parse the command-line grammar.

        ``pc:auto`` and ``pc:<r>`` request principal components, ``identity``
        the identity basis, and ``file:<path>`` loads basis columns from a
        CSV file.
        """
        text = text.strip()
        if text == "identity":
            return cls.identity()
        if text.startswith("pc:"):
            arg = text[len("pc:"):]
            if arg == "auto":
                return cls.pc()
            try:
                rank = int(arg)
            except ValueError:
                raise ValueError(f"invalid pc rank {arg!r}; expected 'auto' or an integer")
            return cls.pc(rank=rank)
        if text.startswith("file:"):
            path = text[len("file:"):]
            try:
                matrix = np.loadtxt(path, delimiter=",", ndmin=2)
            except ValueError as exc:
                raise DataFormatError(f"{path}: {exc}") from exc
            return cls.user(matrix)
        raise ValueError(
            f"unrecognized projection {text!r}; expected pc:auto, pc:<r>, identity, or file:<path>"
        )


@dataclass
class KSelection:
    """Outcome of data-driven rank selection.

    ``criterion[k]`` is the penalized tail value for candidate rank k,
    k = 0 .. k_bar, and ``k_hat`` is its (smallest) minimizer.
    """

    k_hat: int
    k_bar: int
    criterion: np.ndarray
    c0: float = 2.1
    nu: float = 100.0


@dataclass
class Projection:
    """A resolved projection basis with its provenance.

    ``basis`` is p x q.  ``provenance`` records where the columns came
    from: ``pc_of_training``, ``pc_of_auxiliary``, ``pc_crossfit``,
    ``identity``, or ``user``.  ``selection`` holds the rank-selection
    record when the rank was chosen from data.
    """

    basis: np.ndarray
    provenance: str
    selection: KSelection | None = field(default=None)

    def __post_init__(self):
        self.basis = as_matrix(self.basis, "basis")

    @property
    def rank(self) -> int:
        return int(self.basis.shape[1])


def select_k(singular, n: int, p: int, c0: float = 2.1, nu: float = 100.0) -> KSelection:
    """Choose the number of components from a singular value profile.

    Minimizes ``sum_{j>k} sigma_j^2 / (n p - c0 (n + p) k)`` over
    k = 0 .. k_bar with ``k_bar = floor(nu / (2 c0 (1 + nu)) * min(n, p))``.
    Singular values beyond the profile length count as zero.  Ties go to the
    smallest k.

    Parameters
    ----------
    singular : array_like
        Nonnegative singular values sorted in non-increasing order.
    n, p : int
        Dimensions of the matrix the profile came from.
    c0, nu : float
        Penalty constant (> 0) and aspect bound (> 1).
    """
    sigma = np.asarray(singular, dtype=np.float64)
    if sigma.ndim != 1:
        raise ShapeError(f"singular must be 1-D, got ndim={sigma.ndim}")
    n = int(n)
    p = int(p)
    if n < 1 or p < 1:
        raise ValueError(f"n and p must be positive, got n={n}, p={p}")
    c0 = float(c0)
    nu = float(nu)
    if c0 <= 0.0:
        raise ValueError(f"c0 must be positive, got {c0}")
    if nu <= 1.0:
        raise ValueError(f"nu must exceed 1, got {nu}")
    if sigma.size and not np.all(np.isfinite(sigma)):
        raise ValueError("singular contains non-finite entries")
    if np.any(sigma < 0.0):
        raise ValueError("singular values must be nonnegative")
    if np.any(np.diff(sigma) > 1e-12 * (sigma[0] if sigma.size else 0.0)):
        raise ValueError("singular values must be sorted in non-increasing order")

    k_bar = int(math.floor(nu / (2.0 * c0 * (1.0 + nu)) * min(n, p)))
    s2 = sigma**2
    # suffix[k] = sum of s2[k:], so the tail past rank k; zero once exhausted.
    suffix = np.zeros(max(k_bar + 1, s2.size + 1))
    suffix[: s2.size] = np.cumsum(s2[::-1])[::-1]
    ks = np.arange(k_bar + 1)
    denom = n * p - c0 * (n + p) * ks
    # (n + p) * min(n, p) <= 2 n p and k_bar < nu * min(n, p) / (2 c0 (1 + nu))
    # together keep every denominator above n p / (1 + nu).
    assert np.all(denom > 0.0), "rank selection denominator must stay positive"
    criterion = suffix[: k_bar + 1] / denom
    k_hat = int(np.argmin(criterion))
    return KSelection(k_hat=k_hat, k_bar=k_bar, criterion=criterion, c0=c0, nu=nu)


def _pc_from_svd(svd: SvdResult, rank: int, provenance: str, selection) -> Projection:
    if rank > svd.rank:
        raise RankDeficiencyError(
            f"requested rank {rank} exceeds the achievable rank {svd.rank}"
        )
    return Projection(basis=svd.right[:, :rank], provenance=provenance, selection=selection)


def principal_component_basis(x, r: int) -> Projection:
    """Leading ``r`` right singular vectors of the column-centered matrix."""
    r = int(r)
    if r < 1:
        raise ValueError(f"r must be at least 1, got {r}")
    _, centered = center_columns(x)
    return _pc_from_svd(thin_svd(centered), r, "pc_of_training", None)


def resolve_projection(spec: ProjectionSpec, x, auxiliary=None) -> Projection:
    """Build the projection a spec describes for a training matrix.

    ``x`` is the n x p training matrix.  For pc specs the basis comes from
    ``auxiliary`` (n' x p, centered on its own means) when one is given,
    otherwise from ``x`` itself.  Data-driven selection runs on whichever
    matrix supplies the basis; a selected rank of zero is promoted to one
    with a warning so that the downstream fit always has a direction.
    """
    if not isinstance(spec, ProjectionSpec):
        raise TypeError("spec must be a ProjectionSpec")
    x = as_matrix(x, "x")
    p = x.shape[1]

    if spec.kind == "identity":
        return Projection(basis=np.eye(p), provenance="identity")
    if spec.kind == "user":
        if spec.matrix.shape[0] != p:
            raise ShapeError(
                f"user basis has {spec.matrix.shape[0]} rows but data has {p} columns"
            )
        return Projection(basis=spec.matrix, provenance="user")

    if auxiliary is not None:
        source = as_matrix(auxiliary, "auxiliary")
        if source.shape[1] != p:
            raise ShapeError(
                f"auxiliary has {source.shape[1]} columns but data has {p}"
            )
        provenance = "pc_of_auxiliary"
    else:
        source = x
        provenance = "pc_of_training"

    _, centered = center_columns(source)
    svd = thin_svd(centered)
    if spec.rank is not None:
        return _pc_from_svd(svd, spec.rank, provenance, None)

    selection = select_k(svd.singular, source.shape[0], p, spec.c0, spec.nu)
    rank = selection.k_hat
    if rank == 0:
        warnings.warn("rank selection chose 0 components; promoting to 1", stacklevel=2)
        rank = 1
    return _pc_from_svd(svd, rank, provenance, selection)
