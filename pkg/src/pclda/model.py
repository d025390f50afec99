"""Population model and oracle quantities.

The data model is a latent factor design: features X = A Z + W where Z is a
K-dimensional factor vector whose class-conditional law is Gaussian with a
shared covariance, and W is centered Gaussian noise independent of (Z, Y).
This module evaluates the population-level quantities of that model: class
separation in factor space and in feature space, the corresponding Bayes
risks, signal-to-noise diagnostics, and the oracle discriminant rules that
an observer of Z itself could use.
"""

import json
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from scipy.special import ndtr

from .errors import DataFormatError, NumericalError, RankDeficiencyError
from .numerics import as_matrix

__all__ = [
    "FactorModelParams",
    "PopulationSummary",
    "OracleRule",
    "mahalanobis_delta",
    "delta_x",
    "bayes_risk_z",
    "bayes_risk_x",
    "risk_gap",
    "snr_diagnostics",
    "SnrDiagnostics",
    "population_summary",
    "oracle_rules",
    "oracle_ls_fit",
    "save_params",
    "load_params",
]


def _cholesky(mat: np.ndarray, name: str):
    try:
        return cho_factor(mat, lower=True)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"{name} is not positive definite: {exc}") from exc


def _check_symmetric(mat: np.ndarray, name: str) -> None:
    scale = max(1.0, float(np.abs(mat).max()))
    if not np.allclose(mat, mat.T, rtol=0.0, atol=1e-12 * scale):
        raise ValueError(f"{name} must be symmetric")


@dataclass
class FactorModelParams:
    """Parameters of the latent factor classification model.

    Attributes
    ----------
    loadings : ndarray, shape (p, K)
        Factor loading matrix mapping factors to features.
    sigma_zy : ndarray, shape (K, K)
        Within-class covariance of the factors, shared across classes.
        Must be positive definite.
    sigma_w : ndarray, shape (p, p)
        Covariance of the additive feature noise, positive semi-definite.
    alphas : ndarray, shape (L, K)
        Class-conditional factor means, one row per class.
    priors : ndarray, shape (L,)
        Class probabilities, each in (0, 1), summing to one.
    """

    loadings: np.ndarray
    sigma_zy: np.ndarray
    sigma_w: np.ndarray
    alphas: np.ndarray
    priors: np.ndarray

    def __post_init__(self):
        self.loadings = as_matrix(self.loadings, "loadings")
        self.sigma_zy = as_matrix(self.sigma_zy, "sigma_zy")
        self.sigma_w = as_matrix(self.sigma_w, "sigma_w")
        self.alphas = as_matrix(self.alphas, "alphas")
        self.priors = np.asarray(self.priors, dtype=np.float64)
        p, k = self.loadings.shape
        if self.sigma_zy.shape != (k, k):
            raise ValueError(f"sigma_zy must be {k} x {k}, got {self.sigma_zy.shape}")
        if self.sigma_w.shape != (p, p):
            raise ValueError(f"sigma_w must be {p} x {p}, got {self.sigma_w.shape}")
        if self.alphas.shape[1] != k:
            raise ValueError(f"alphas must have {k} columns, got {self.alphas.shape[1]}")
        if self.priors.ndim != 1 or self.priors.shape[0] != self.alphas.shape[0]:
            raise ValueError("priors must be 1-D with one entry per class")
        if self.num_classes < 2:
            raise ValueError("at least two classes are required")
        if np.any(self.priors <= 0.0) or np.any(self.priors >= 1.0):
            raise ValueError("each prior must lie strictly between 0 and 1")
        if abs(self.priors.sum() - 1.0) > 1e-12:
            raise ValueError(f"priors must sum to 1, got {self.priors.sum()!r}")
        _check_symmetric(self.sigma_zy, "sigma_zy")
        _check_symmetric(self.sigma_w, "sigma_w")
        _cholesky(self.sigma_zy, "sigma_zy")
        svals = np.linalg.svd(self.loadings, compute_uv=False)
        if svals[-1] <= 1e-10 * svals[0]:
            raise RankDeficiencyError(
                "loadings is numerically rank deficient; it must have full column rank"
            )

    @property
    def num_features(self) -> int:
        return self.loadings.shape[0]

    @property
    def num_factors(self) -> int:
        return self.loadings.shape[1]

    @property
    def num_classes(self) -> int:
        return self.alphas.shape[0]

    def factor_cov(self) -> np.ndarray:
        """Marginal factor covariance: within-class part plus between-class spread."""
        centered = self.alphas - self.priors @ self.alphas
        return self.sigma_zy + (centered.T * self.priors) @ centered


def _require_binary(params: FactorModelParams, what: str) -> None:
    if params.num_classes != 2:
        raise ValueError(f"{what} is defined for two classes, got {params.num_classes}")


def mahalanobis_delta(alpha0, alpha1, sigma_zy) -> float:
    """Mahalanobis separation between two class means.

    Computes ``sqrt((alpha0 - alpha1)^T sigma_zy^{-1} (alpha0 - alpha1))``
    through a Cholesky solve.
    """
    alpha0 = np.asarray(alpha0, dtype=np.float64)
    alpha1 = np.asarray(alpha1, dtype=np.float64)
    if alpha0.ndim != 1 or alpha1.ndim != 1 or alpha0.shape != alpha1.shape:
        raise ValueError("alpha0 and alpha1 must be 1-D with equal length")
    sigma_zy = as_matrix(sigma_zy, "sigma_zy")
    if sigma_zy.shape != (alpha0.size, alpha0.size):
        raise ValueError("sigma_zy must be K x K for K-vector means")
    diff = alpha0 - alpha1
    factor = _cholesky(sigma_zy, "sigma_zy")
    d2 = float(diff @ cho_solve(factor, diff))
    return float(np.sqrt(max(d2, 0.0)))


def delta_x(params: FactorModelParams) -> float:
    """Feature-space analogue of the Mahalanobis separation.

    With mean gap d = alpha1 - alpha0 this is
    ``sqrt((A d)^T (A sigma_zy A^T + sigma_w)^{-1} (A d))``, the separation
    available to a classifier that observes X rather than Z.  It never
    exceeds the factor-space separation.
    """
    _require_binary(params, "delta_x")
    diff = params.alphas[1] - params.alphas[0]
    v = params.loadings @ diff
    total = params.loadings @ params.sigma_zy @ params.loadings.T + params.sigma_w
    factor = _cholesky(total, "A sigma_zy A^T + sigma_w")
    d2 = float(v @ cho_solve(factor, v))
    return float(np.sqrt(max(d2, 0.0)))


def _check_priors_pair(pi0: float, pi1: float) -> tuple[float, float]:
    pi0 = float(pi0)
    pi1 = float(pi1)
    if not (0.0 < pi0 < 1.0 and 0.0 < pi1 < 1.0):
        raise ValueError("priors must lie strictly between 0 and 1")
    if abs(pi0 + pi1 - 1.0) > 1e-12:
        raise ValueError(f"priors must sum to 1, got {pi0 + pi1!r}")
    return pi0, pi1


def bayes_risk_z(delta: float, pi0: float, pi1: float) -> float:
    """Bayes misclassification risk of the two-class Gaussian problem.

    ``1 - pi1 Phi(delta/2 + log(pi1/pi0)/delta) - pi0 Phi(delta/2 - log(pi1/pi0)/delta)``
    where Phi is the standard normal CDF.  At ``delta == 0`` the limit is
    ``min(pi0, pi1)`` (always predict the larger class), which is also the
    continuous extension of the formula.
    """
    pi0, pi1 = _check_priors_pair(pi0, pi1)
    delta = float(delta)
    if not np.isfinite(delta) or delta < 0.0:
        raise ValueError(f"delta must be a finite nonnegative number, got {delta!r}")
    if delta == 0.0:
        return min(pi0, pi1)
    shift = np.log(pi1 / pi0) / delta
    return float(1.0 - pi1 * ndtr(delta / 2.0 + shift) - pi0 * ndtr(delta / 2.0 - shift))


def bayes_risk_x(params: FactorModelParams) -> float:
    """Bayes risk of a classifier that observes the features X."""
    _require_binary(params, "bayes_risk_x")
    return bayes_risk_z(delta_x(params), params.priors[0], params.priors[1])


def risk_gap(params: FactorModelParams) -> float:
    """Excess Bayes risk from observing X instead of Z, for equal priors.

    Equals ``Phi(delta/2) - Phi(delta_x/2)``; nonnegative, and zero exactly
    when the feature noise costs nothing.  The exact identity holds for
    equal priors only, so unequal priors raise instead of silently
    approximating.
    """
    _require_binary(params, "risk_gap")
    if abs(params.priors[0] - params.priors[1]) > 1e-12:
        raise ValueError("risk_gap requires equal class priors")
    d = mahalanobis_delta(params.alphas[0], params.alphas[1], params.sigma_zy)
    r_z = bayes_risk_z(d, params.priors[0], params.priors[1])
    return bayes_risk_x(params) - r_z


@dataclass
class SnrDiagnostics:
    """Spectral signal-to-noise measures of a factor model.

    ``xi_star`` compares the weakest signal eigenvalue with the noise
    spectral norm; ``xi`` replaces the noise norm with the sample-size
    adjusted scale ``delta_w``; ``kappa`` is the condition number of the
    signal part of the feature covariance.
    """

    xi_star: float
    xi: float
    delta_w: float
    kappa: float


def _signal_eigs(loadings: np.ndarray, cov: np.ndarray, name: str) -> np.ndarray:
    # Nonzero eigenvalues of A C A^T equal those of L^T (A^T A) L with C = L L^T.
    factor = _cholesky(cov, name)
    low = np.tril(factor[0])
    small = low.T @ (loadings.T @ loadings) @ low
    return np.linalg.eigvalsh(small)


def snr_diagnostics(params: FactorModelParams, n: int) -> SnrDiagnostics:
    """Signal-to-noise diagnostics at training size ``n``.

    Raises
    ------
    ZeroDivisionError
        If the noise covariance is exactly zero.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    sig_eigs = _signal_eigs(params.loadings, params.sigma_zy, "sigma_zy")
    lam_signal = float(sig_eigs[0])
    lam1_w = float(np.linalg.eigvalsh(params.sigma_w)[-1])
    if lam1_w <= 0.0:
        raise ZeroDivisionError("noise covariance has zero spectral norm")
    delta_w = lam1_w + float(np.trace(params.sigma_w)) / n
    marg_eigs = _signal_eigs(params.loadings, params.factor_cov(), "factor covariance")
    return SnrDiagnostics(
        xi_star=lam_signal / lam1_w,
        xi=lam_signal / delta_w,
        delta_w=delta_w,
        kappa=float(marg_eigs[-1] / marg_eigs[0]),
    )


@dataclass
class PopulationSummary:
    """Population separations, Bayes risks, and SNR diagnostics."""

    delta: float
    delta_x: float
    r_z_star: float
    r_x_star: float
    xi_star: float
    xi: float
    delta_w: float
    kappa: float


def population_summary(params: FactorModelParams, n: int) -> PopulationSummary:
    """Evaluate all population quantities of a binary model at training size ``n``."""
    _require_binary(params, "population_summary")
    d = mahalanobis_delta(params.alphas[0], params.alphas[1], params.sigma_zy)
    dx = delta_x(params)
    snr = snr_diagnostics(params, n)
    return PopulationSummary(
        delta=d,
        delta_x=dx,
        r_z_star=bayes_risk_z(d, params.priors[0], params.priors[1]),
        r_x_star=bayes_risk_z(dx, params.priors[0], params.priors[1]),
        xi_star=snr.xi_star,
        xi=snr.xi,
        delta_w=snr.delta_w,
        kappa=snr.kappa,
    )


@dataclass
class OracleRule:
    """The two equivalent oracle discriminants on the factor space.

    ``eta``/``eta0`` parameterize Fisher's rule from the within-class
    covariance; ``beta``/``beta0`` the regression form built from the
    marginal covariance.  The linear parts satisfy ``eta = scale * beta``
    and the full discriminants agree up to the same positive factor, so
    both classify identically.
    """

    eta: np.ndarray
    eta0: float
    beta: np.ndarray
    beta0: float
    scale: float


def oracle_rules(params: FactorModelParams) -> OracleRule:
    """Oracle discriminant rules of a binary model; predicts 1 when the score is >= 0."""
    _require_binary(params, "oracle_rules")
    alpha0, alpha1 = params.alphas[0], params.alphas[1]
    pi0, pi1 = float(params.priors[0]), float(params.priors[1])
    diff = alpha1 - alpha0
    mid = 0.5 * (alpha0 + alpha1)
    log_odds = np.log(pi1 / pi0)

    factor_zy = _cholesky(params.sigma_zy, "sigma_zy")
    eta = cho_solve(factor_zy, diff)
    eta0 = float(-mid @ eta + log_odds)

    sigma_z = params.sigma_zy + pi0 * pi1 * np.outer(diff, diff)
    factor_z = _cholesky(sigma_z, "sigma_z")
    beta = pi0 * pi1 * cho_solve(factor_z, diff)
    beta0 = float(-mid @ beta + pi0 * pi1 * (1.0 - diff @ beta) * log_odds)

    d2 = float(diff @ eta)
    scale = (1.0 + pi0 * pi1 * d2) / (pi0 * pi1)
    return OracleRule(eta=eta, eta0=eta0, beta=beta, beta0=beta0, scale=scale)


def oracle_ls_fit(z, y):
    """Least-squares discriminant fit directly on latent coordinates.

    Equivalent to the feature-space fit with an identity basis; used as the
    infeasible benchmark that sees Z itself.
    """
    from .classifier import fit_binary
    from .projection import Projection

    z = as_matrix(z, "z")
    basis = Projection(basis=np.eye(z.shape[1]), provenance="identity")
    return fit_binary(z, y, basis)


def save_params(params: FactorModelParams, path) -> None:
    """Write model parameters to a JSON file."""
    payload = {
        "format_version": 1,
        "loadings": params.loadings.tolist(),
        "sigma_zy": params.sigma_zy.tolist(),
        "sigma_w": params.sigma_w.tolist(),
        "alphas": params.alphas.tolist(),
        "priors": params.priors.tolist(),
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh)
        fh.write("\n")


def load_params(path) -> FactorModelParams:
    """Read model parameters from a JSON file written by :func:`save_params`."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
    except json.JSONDecodeError as exc:
        raise DataFormatError(f"{path}: not valid JSON: {exc}") from exc
    if not isinstance(payload, dict):
        raise DataFormatError(f"{path}: expected a JSON object")
    missing = {"loadings", "sigma_zy", "sigma_w", "alphas", "priors"} - payload.keys()
    if missing:
        raise DataFormatError(f"{path}: missing keys {sorted(missing)}")
    try:
        return FactorModelParams(
            loadings=payload["loadings"],
            sigma_zy=payload["sigma_zy"],
            sigma_w=payload["sigma_w"],
            alphas=payload["alphas"],
            priors=payload["priors"],
        )
    except (ValueError, NumericalError) as exc:
        raise DataFormatError(f"{path}: invalid model parameters: {exc}") from exc
