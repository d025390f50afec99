"""Shared factories for randomized test instances."""

import numpy as np

from pclda.model import FactorModelParams


def random_orthogonal(rng, k: int) -> np.ndarray:
    """Haar-ish random orthogonal matrix via QR with a fixed sign choice."""
    q, r = np.linalg.qr(rng.standard_normal((k, k)))
    return q * np.sign(np.diag(r))


def random_spd(rng, k: int, lo: float = 0.5, hi: float = 3.0) -> np.ndarray:
    """Random symmetric positive definite matrix with eigenvalues in [lo, hi]."""
    q = random_orthogonal(rng, k)
    mat = (q * rng.uniform(lo, hi, size=k)) @ q.T
    return (mat + mat.T) / 2.0


def random_params(
    rng,
    k_max: int = 5,
    p_max: int = 12,
    equal_priors: bool = False,
) -> FactorModelParams:
    """A random valid binary factor model, small enough for dense checks."""
    k = int(rng.integers(1, k_max + 1))
    p = int(rng.integers(k, p_max + 1))
    loadings = rng.standard_normal((p, k))
    sigma_zy = random_spd(rng, k)
    noise = rng.standard_normal((p, p + 2))
    sigma_w = (noise @ noise.T) / (p + 2) + 0.2 * np.eye(p)
    sigma_w = (sigma_w + sigma_w.T) / 2.0
    alphas = rng.normal(0.0, 1.5, size=(2, k))
    if equal_priors:
        priors = np.array([0.5, 0.5])
    else:
        pi1 = float(rng.uniform(0.15, 0.85))
        priors = np.array([1.0 - pi1, pi1])
    return FactorModelParams(
        loadings=loadings,
        sigma_zy=sigma_zy,
        sigma_w=sigma_w,
        alphas=alphas,
        priors=priors,
    )


def balanced_labels(rng, n: int) -> np.ndarray:
    """Random binary labels with exactly n // 2 ones."""
    y = np.zeros(n, dtype=np.int64)
    y[rng.permutation(n)[: n // 2]] = 1
    return y
