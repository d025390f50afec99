"""Synthetic data generation and Monte Carlo risk experiments.

The generator draws a fresh factor model per replicate: within-class factor
covariance with Unif(1, 3) diagonal and alternating-sign geometric decay off
the diagonal, Gaussian loadings, unit-variance noise with the same
alternating decay, equal priors, and class means separated so that the
squared Mahalanobis distance scales with the signal parameter eta.

``run_grid`` sweeps one axis (training size, signal strength, or feature
dimension), runs every requested method on common replicate data, and
aggregates test errors together with the population quantities of each
replicate's model into a :class:`RiskReport`.

Seeding is hierarchical and reproducible: replicate (i, r) of a grid with
base seed s derives all of its streams from ``SeedSequence([s, i, r])``, so
results do not depend on execution order or thread count.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import toeplitz

from .errors import NumericalError, ShapeError
from .model import FactorModelParams, oracle_ls_fit, oracle_rules, population_summary
from .projection import ProjectionSpec
from .classifier import fit_binary, fit_crossfit, fit_with_auxiliary, predict
from .projection import resolve_projection

__all__ = [
    "GeneratorConfig",
    "ExperimentGrid",
    "RiskRow",
    "RiskReport",
    "METHODS",
    "gen_params",
    "sample_dataset",
    "misclassification_rate",
    "run_grid",
]

METHODS = ("pclda_k", "pclda_khat", "pclda_cf", "pclda_split", "oracle_ls", "bayes")

_SWEEPS = ("n", "eta", "p")


@dataclass
class GeneratorConfig:
    """Settings for one synthetic factor model draw.

    ``eta`` controls class separation: the class-1 factor mean is
    ``sqrt(eta / num_factors) * 1``, so eta is the squared Euclidean mean
    gap.  ``loading_sd`` is the standard deviation of the iid Gaussian
    loading entries.  ``noiseless`` replaces the feature noise covariance
    with zero.
    """

    p: int
    num_factors: int
    eta: float
    seed: object = 0
    loading_sd: float = 0.3
    noiseless: bool = False

    def __post_init__(self):
        self.p = int(self.p)
        self.num_factors = int(self.num_factors)
        self.eta = float(self.eta)
        self.loading_sd = float(self.loading_sd)
        if self.p < 1:
            raise ValueError(f"p must be at least 1, got {self.p}")
        if self.num_factors < 1:
            raise ValueError(f"num_factors must be at least 1, got {self.num_factors}")
        if not np.isfinite(self.eta) or self.eta < 0.0:
            raise ValueError(f"eta must be finite and nonnegative, got {self.eta}")
        if not np.isfinite(self.loading_sd) or self.loading_sd <= 0.0:
            raise ValueError(f"loading_sd must be positive, got {self.loading_sd}")


def _alternating_decay(size: int) -> np.ndarray:
    """Correlation pattern (-0.5)^|i - j| as a size x size matrix."""
    return toeplitz((-0.5) ** np.arange(size))


def gen_params(config: GeneratorConfig) -> FactorModelParams:
    """Draw factor model parameters.

    Draw order is fixed: first the within-class covariance diagonal
    (Unif(1, 3), one value per factor), then the loading entries
    (iid N(0, loading_sd^2), row-major).  Everything else is deterministic
    given the config.
    """
    rng = np.random.default_rng(config.seed)
    k = config.num_factors
    diag = rng.uniform(1.0, 3.0, size=k)
    sigma_zy = np.sqrt(np.outer(diag, diag)) * _alternating_decay(k)
    loadings = rng.normal(0.0, config.loading_sd, size=(config.p, k))
    if config.noiseless:
        sigma_w = np.zeros((config.p, config.p))
    else:
        sigma_w = _alternating_decay(config.p)
    alphas = np.vstack([np.zeros(k), np.full(k, np.sqrt(config.eta / k))])
    return FactorModelParams(
        loadings=loadings,
        sigma_zy=sigma_zy,
        sigma_w=sigma_w,
        alphas=alphas,
        priors=np.array([0.5, 0.5]),
    )


def sample_dataset(params: FactorModelParams, n: int, seed) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sample ``(x, y, z)`` from a factor model.

    Draw order is fixed: labels (one uniform per row, inverted through the
    prior CDF), then the factor innovations, then the noise innovations
    (skipped entirely when the noise covariance is zero).

    Returns
    -------
    x : ndarray, shape (n, p)
    y : ndarray, shape (n,)
    z : ndarray, shape (n, K)
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be at least 1, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.random(n)
    cut = np.cumsum(params.priors)[:-1]
    y = np.searchsorted(cut, u, side="right")

    try:
        chol_zy = np.linalg.cholesky(params.sigma_zy)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"sigma_zy is not positive definite: {exc}") from exc
    innov = rng.standard_normal((n, params.num_factors))
    z = params.alphas[y] + innov @ chol_zy.T

    if np.any(params.sigma_w):
        try:
            chol_w = np.linalg.cholesky(params.sigma_w)
        except np.linalg.LinAlgError as exc:
            raise NumericalError(f"sigma_w is not positive definite: {exc}") from exc
        x = z @ params.loadings.T + rng.standard_normal((n, params.num_features)) @ chol_w.T
    else:
        x = z @ params.loadings.T
    return x, y, z


def misclassification_rate(predicted, actual) -> float:
    """Fraction of positions where the label vectors disagree."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.ndim != 1 or actual.ndim != 1:
        raise ShapeError("predicted and actual must be 1-D")
    if predicted.shape != actual.shape:
        raise ShapeError(
            f"length mismatch: predicted has {predicted.shape[0]}, actual has {actual.shape[0]}"
        )
    if predicted.size < 1:
        raise ShapeError("label vectors must be nonempty")
    return float(np.mean(predicted != actual))


@dataclass
class ExperimentGrid:
    """A one-axis Monte Carlo sweep.

    ``sweep`` names the axis (``"n"``, ``"eta"``, or ``"p"``) and ``values``
    its grid.  ``n`` fixes the training size when it is not the sweep axis.
    When sweeping p with ``fix_snr_across_p``, the loading standard
    deviation is rescaled by ``sqrt(base.p / p)`` so the per-feature signal
    stays comparable across dimensions.
    """

    base: GeneratorConfig
    sweep: str
    values: tuple
    n: int | None = None
    reps: int = 100
    test_size: int = 100
    methods: tuple = ("pclda_k", "pclda_khat", "oracle_ls", "bayes")
    crossfit_folds: int = 5
    fix_snr_across_p: bool = False

    def __post_init__(self):
        if self.sweep not in _SWEEPS:
            raise ValueError(f"sweep must be one of {_SWEEPS}, got {self.sweep!r}")
        if not isinstance(self.base.seed, (int, np.integer)):
            raise ValueError("grid base seed must be an integer")
        values = tuple(self.values)
        if not values:
            raise ValueError("values must be nonempty")
        if self.sweep == "eta":
            values = tuple(float(v) for v in values)
            if any(not np.isfinite(v) or v < 0.0 for v in values):
                raise ValueError("eta values must be finite and nonnegative")
        else:
            values = tuple(int(v) for v in values)
            if any(v < 1 for v in values):
                raise ValueError(f"{self.sweep} values must be positive integers")
        self.values = values
        self.reps = int(self.reps)
        self.test_size = int(self.test_size)
        if self.reps < 1:
            raise ValueError(f"reps must be at least 1, got {self.reps}")
        if self.test_size < 1:
            raise ValueError(f"test_size must be at least 1, got {self.test_size}")
        if self.sweep == "n":
            self.n = None
        else:
            if self.n is None:
                raise ValueError(f"a fixed training size n is required when sweeping {self.sweep}")
            self.n = int(self.n)
            if self.n < 2:
                raise ValueError(f"n must be at least 2, got {self.n}")
        self.methods = tuple(self.methods)
        if not self.methods:
            raise ValueError("methods must be nonempty")
        unknown = sorted(set(self.methods) - set(METHODS))
        if unknown:
            raise ValueError(f"unknown methods {unknown}; choose from {METHODS}")
        self.crossfit_folds = int(self.crossfit_folds)
        if self.crossfit_folds < 2:
            raise ValueError(f"crossfit_folds must be at least 2, got {self.crossfit_folds}")
        if self.fix_snr_across_p and self.sweep != "p":
            raise ValueError("fix_snr_across_p applies only to p sweeps")


@dataclass
class RiskRow:
    """One (sweep value, method) cell of a risk report."""

    sweep_name: str
    sweep_value: float
    method: str
    mean_error: float
    sd_error: float
    delta2_mean: float
    r_z_star: float
    r_x_star: float
    xi_star: float
    xi: float
    kappa: float
    reps_ok: int
    reps_failed: int


_CSV_COLUMNS = (
    "sweep_name",
    "sweep_value",
    "method",
    "mean_error",
    "sd_error",
    "delta2_mean",
    "r_z_star",
    "r_x_star",
    "xi_star",
    "xi",
    "kappa",
    "reps_ok",
    "reps_failed",
)


@dataclass
class RiskReport:
    """Aggregated sweep results, one row per (sweep value, method)."""

    rows: list = field(default_factory=list)

    def row(self, sweep_value, method: str) -> RiskRow:
        for r in self.rows:
            if r.method == method and np.isclose(r.sweep_value, float(sweep_value)):
                return r
        raise KeyError(f"no row for value {sweep_value!r} and method {method!r}")

    def to_csv(self, path=None) -> str:
        def fmt(v) -> str:
            if isinstance(v, (int, np.integer)):
                return str(int(v))
            return format(float(v), ".17g")

        lines = [",".join(_CSV_COLUMNS)]
        for r in self.rows:
            lines.append(
                ",".join(
                    [
                        r.sweep_name,
                        fmt(r.sweep_value),
                        r.method,
                        fmt(r.mean_error),
                        fmt(r.sd_error),
                        fmt(r.delta2_mean),
                        fmt(r.r_z_star),
                        fmt(r.r_x_star),
                        fmt(r.xi_star),
                        fmt(r.xi),
                        fmt(r.kappa),
                        str(r.reps_ok),
                        str(r.reps_failed),
                    ]
                )
            )
        text = "\n".join(lines) + "\n"
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _value_config(grid: ExperimentGrid, value) -> tuple[GeneratorConfig, int]:
    """Generator config and training size for one sweep value."""
    base = grid.base
    if grid.sweep == "n":
        return base, int(value)
    if grid.sweep == "eta":
        return replace(base, eta=float(value)), grid.n
    sd = base.loading_sd
    if grid.fix_snr_across_p:
        sd = base.loading_sd * np.sqrt(base.p / float(value))
    return replace(base, p=int(value), loading_sd=sd), grid.n


def _run_rep(grid: ExperimentGrid, config: GeneratorConfig, n_train: int, sweep_idx: int, rep: int):
    """One replicate: draw a model and data, run every method.

    Returns the replicate's population summary and a dict mapping method to
    test error (or to the raised exception when a method fails).
    """
    root = np.random.SeedSequence([int(grid.base.seed), sweep_idx, rep])
    seed_params, seed_train, seed_test, seed_aux, seed_cf = root.spawn(5)

    params = gen_params(replace(config, seed=seed_params))
    x, y, z = sample_dataset(params, n_train, seed_train)
    x_test, y_test, z_test = sample_dataset(params, grid.test_size, seed_test)
    x_aux = None
    if "pclda_split" in grid.methods:
        x_aux, _, _ = sample_dataset(params, n_train, seed_aux)

    pop = population_summary(params, n_train)

    results = {}
    for method in grid.methods:
        try:
            if method == "pclda_k":
                proj = resolve_projection(ProjectionSpec.pc(rank=config.num_factors), x)
                pred = predict(fit_binary(x, y, proj), x_test)
            elif method == "pclda_khat":
                proj = resolve_projection(ProjectionSpec.pc(), x)
                pred = predict(fit_binary(x, y, proj), x_test)
            elif method == "pclda_cf":
                # Per-fold bases at the true rank, mirroring pclda_split: a
                # held-out fold is too small for reliable automatic selection.
                fit = fit_crossfit(
                    x,
                    y,
                    ProjectionSpec.pc(rank=config.num_factors),
                    kfolds=grid.crossfit_folds,
                    seed=seed_cf,
                )
                pred = predict(fit, x_test)
            elif method == "pclda_split":
                fit = fit_with_auxiliary(x, y, x_aux, ProjectionSpec.pc(rank=config.num_factors))
                pred = predict(fit, x_test)
            elif method == "oracle_ls":
                pred = predict(oracle_ls_fit(z, y), z_test)
            else:  # bayes
                rule = oracle_rules(params)
                pred = (z_test @ rule.eta + rule.eta0 >= 0.0).astype(np.int64)
            results[method] = misclassification_rate(pred, y_test)
        except Exception as exc:  # noqa: BLE001 - a failed rep is data, not a crash
            results[method] = exc
    return pop, results


def run_grid(grid: ExperimentGrid, threads: int = 1) -> RiskReport:
    """Run the full sweep and aggregate a :class:`RiskReport`.

    ``threads`` parallelizes over replicates; results are identical for any
    thread count because every replicate derives its randomness from the
    grid seed and its own (sweep value, replicate) indices.
    """
    threads = int(threads)
    if threads < 1:
        raise ValueError(f"threads must be at least 1, got {threads}")

    tasks = []
    for i, value in enumerate(grid.values):
        config, n_train = _value_config(grid, value)
        for r in range(grid.reps):
            tasks.append((i, r, config, n_train))

    def work(task):
        i, r, config, n_train = task
        return _run_rep(grid, config, n_train, i, r)

    if threads == 1:
        outcomes = [work(t) for t in tasks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            outcomes = list(pool.map(work, tasks))

    by_value = {}
    for (i, r, _, _), (pop, results) in zip(tasks, outcomes):
        by_value.setdefault(i, []).append((pop, results))

    report = RiskReport()
    for i, value in enumerate(grid.values):
        reps = by_value[i]
        pops = [pop for pop, _ in reps]
        delta2_mean = float(np.mean([p.delta**2 for p in pops]))
        r_z = float(np.mean([p.r_z_star for p in pops]))
        r_x = float(np.mean([p.r_x_star for p in pops]))
        xi_star = float(np.mean([p.xi_star for p in pops]))
        xi = float(np.mean([p.xi for p in pops]))
        kappa = float(np.mean([p.kappa for p in pops]))
        for method in grid.methods:
            errors = [res[method] for _, res in reps if not isinstance(res[method], Exception)]
            failed = grid.reps - len(errors)
            mean_error = float(np.mean(errors)) if errors else float("nan")
            sd_error = float(np.std(errors, ddof=1)) if len(errors) > 1 else 0.0
            report.rows.append(
                RiskRow(
                    sweep_name=grid.sweep,
                    sweep_value=float(value),
                    method=method,
                    mean_error=mean_error,
                    sd_error=sd_error,
                    delta2_mean=delta2_mean,
                    r_z_star=r_z,
                    r_x_star=r_x,
                    xi_star=xi_star,
                    xi=xi,
                    kappa=kappa,
                    reps_ok=len(errors),
                    reps_failed=failed,
                )
            )
    return report
