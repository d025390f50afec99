"""Two-step discriminant fitting on projected features.

The binary fit regresses centered labels on the projected, column-centered
training matrix and converts the coefficient vector into a discriminant
rule: score(x) = x @ theta_hat + beta0_hat, predict class 1 when the score
is nonnegative.  The intercept correction makes the rule consistent with
plug-in linear discriminant analysis under unequal priors.

Multi-class fitting runs one binary subproblem per non-baseline class and
rescales each score so the subproblem discriminants are comparable; the
predicted class maximizes the rescaled score, with the baseline pinned at
zero.
"""

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import DataFormatError, DegenerateLabelsError, ShapeError
from .numerics import as_matrix, center_columns, min_norm_lstsq
from .projection import Projection, ProjectionSpec, resolve_projection

__all__ = [
    "BinaryFit",
    "MulticlassFit",
    "fit_binary",
    "decision_value",
    "predict",
    "fit_with_auxiliary",
    "fit_crossfit",
    "fit_multiclass",
    "multiclass_scores",
    "predict_multiclass",
    "predict_multiclass_averaged",
    "save_fit",
    "load_fit",
]

_DENOM_FLOOR = 1e-8
_SCORE_CAP = 700.0


@dataclass
class BinaryFit:
    """Fitted binary discriminant rule.

    ``theta_hat`` is the coefficient vector in feature space, ``beta0_hat``
    the intercept.  ``pi_hat`` holds the empirical class frequencies and
    ``mu_hat`` the raw class means (row k for class k).
    """

    theta_hat: np.ndarray
    beta0_hat: float
    pi_hat: np.ndarray
    mu_hat: np.ndarray
    projection_provenance: str
    projection_rank: int

    @property
    def num_features(self) -> int:
        return int(self.theta_hat.shape[0])


@dataclass
class MulticlassFit:
    """Fitted multi-class rule built from per-class binary subproblems.

    Row ``l`` of ``theta_hat`` and entry ``l`` of ``beta0_hat`` come from
    the subproblem contrasting class ``l`` with the baseline class; the
    baseline rows are zero.  ``denom_hat[l]`` is the positive rescaling
    applied to subproblem ``l``'s raw score (1 for the baseline).
    """

    baseline: int
    theta_hat: np.ndarray
    beta0_hat: np.ndarray
    denom_hat: np.ndarray
    class_counts: np.ndarray
    mu_hat: np.ndarray
    projection_provenance: str
    projection_rank: int

    @property
    def num_classes(self) -> int:
        return int(self.theta_hat.shape[0])

    @property
    def num_features(self) -> int:
        return int(self.theta_hat.shape[1])


def _check_labels(y, n: int, binary: bool) -> np.ndarray:
    y = np.asarray(y)
    if y.ndim != 1:
        raise ShapeError(f"y must be 1-D, got ndim={y.ndim}")
    if y.shape[0] != n:
        raise ShapeError(f"y has length {y.shape[0]} but x has {n} rows")
    if y.dtype.kind == "f":
        if not np.all(y == np.floor(y)):
            raise ValueError("labels must be integers")
        y = y.astype(np.int64)
    elif y.dtype.kind in "iu":
        y = y.astype(np.int64)
    elif y.dtype.kind == "b":
        y = y.astype(np.int64)
    else:
        raise ValueError(f"labels must be integers, got dtype {y.dtype}")
    if y.min() < 0:
        raise ValueError("labels must be nonnegative")
    if binary:
        if y.max() > 1:
            raise ValueError("binary labels must be 0 or 1")
        if y.min() == y.max():
            raise DegenerateLabelsError("both classes must appear in y")
    else:
        present = np.unique(y)
        num_classes = int(y.max()) + 1
        if num_classes < 2:
            raise DegenerateLabelsError("at least two classes must appear in y")
        missing = sorted(set(range(num_classes)) - set(present.tolist()))
        if missing:
            raise DegenerateLabelsError(f"classes {missing} have no training rows")
    return y


def _check_basis(projection: Projection, p: int) -> None:
    if not isinstance(projection, Projection):
        raise TypeError("projection must be a Projection")
    if projection.basis.shape[0] != p:
        raise ShapeError(
            f"projection basis has {projection.basis.shape[0]} rows but data has {p} columns"
        )


def _regress_theta(x: np.ndarray, y01: np.ndarray, basis: np.ndarray) -> np.ndarray:
    # theta_hat = B (centered(X) B)^+ y; the raw labels work in place of the
    # centered ones because every column of centered(X) B is orthogonal to 1.
    _, centered = center_columns(x)
    design = centered @ basis
    w = min_norm_lstsq(design, y01.astype(np.float64))
    return basis @ w


def fit_binary(x, y, projection: Projection) -> BinaryFit:
    """Fit the binary discriminant rule on a resolved projection."""
    x = as_matrix(x, "x")
    n, p = x.shape
    y = _check_labels(y, n, binary=True)
    _check_basis(projection, p)

    theta = _regress_theta(x, y, projection.basis)

    n1 = int(y.sum())
    pi0, pi1 = (n - n1) / n, n1 / n
    mu0 = x[y == 0].mean(axis=0)
    mu1 = x[y == 1].mean(axis=0)
    diff = mu1 - mu0
    beta0 = float(
        -0.5 * (mu0 + mu1) @ theta
        + pi0 * pi1 * (1.0 - diff @ theta) * np.log(pi1 / pi0)
    )
    return BinaryFit(
        theta_hat=theta,
        beta0_hat=beta0,
        pi_hat=np.array([pi0, pi1]),
        mu_hat=np.vstack([mu0, mu1]),
        projection_provenance=projection.provenance,
        projection_rank=projection.rank,
    )


def _as_points(x, p: int) -> tuple[np.ndarray, bool]:
    arr = np.asarray(x, dtype=np.float64)
    if arr.ndim == 1:
        if arr.shape[0] != p:
            raise ShapeError(f"x has length {arr.shape[0]} but the fit expects {p} features")
        return arr[np.newaxis, :], True
    if arr.ndim == 2:
        if arr.shape[1] != p:
            raise ShapeError(f"x has {arr.shape[1]} columns but the fit expects {p} features")
        return arr, False
    raise ShapeError(f"x must be 1-D or 2-D, got ndim={arr.ndim}")


def decision_value(fit: BinaryFit, x):
    """Discriminant score ``x @ theta_hat + beta0_hat``; scalar for a single point."""
    points, single = _as_points(x, fit.num_features)
    scores = points @ fit.theta_hat + fit.beta0_hat
    return float(scores[0]) if single else scores


def predict(fit: BinaryFit, x):
    """Predicted label(s): 1 where the decision value is nonnegative, else 0."""
    scores = decision_value(fit, x)
    if np.isscalar(scores):
        return int(scores >= 0.0)
    return (scores >= 0.0).astype(np.int64)


def fit_with_auxiliary(x, y, x_tilde, spec: ProjectionSpec) -> BinaryFit:
    """Binary fit whose principal-component basis comes from an auxiliary matrix."""
    if spec.kind != "pc":
        raise ValueError("auxiliary fitting requires a pc projection spec")
    projection = resolve_projection(spec, x, auxiliary=x_tilde)
    return fit_binary(x, y, projection)


def fit_crossfit(x, y, spec: ProjectionSpec, kfolds: int = 5, seed=0) -> BinaryFit:
    """Cross-fitted binary rule.

    The rows are split into ``kfolds`` stratified folds.  Each fold serves
    once as the basis source: its principal components project the
    remaining rows, which supply the regression fit.  The per-fold
    coefficient vectors and intercepts are averaged with equal weights;
    class frequencies and means are recomputed on the full sample.
    """
    if spec.kind != "pc":
        raise ValueError("cross-fitting requires a pc projection spec")
    x = as_matrix(x, "x")
    n, _ = x.shape
    y = _check_labels(y, n, binary=True)
    kfolds = int(kfolds)
    smallest = int(min((y == 0).sum(), (y == 1).sum()))
    if not 2 <= kfolds <= smallest:
        raise ValueError(
            f"kfolds must lie in [2, {smallest}] for these class counts, got {kfolds}"
        )

    rng = np.random.default_rng(seed)
    fold_of = np.empty(n, dtype=np.int64)
    for cls in (0, 1):
        members = rng.permutation(np.flatnonzero(y == cls))
        fold_of[members] = np.arange(members.size) % kfolds

    thetas = []
    beta0s = []
    ranks = []
    for f in range(kfolds):
        hold = fold_of == f
        basis = resolve_projection(spec, x[~hold], auxiliary=x[hold])
        part = fit_binary(x[~hold], y[~hold], basis)
        thetas.append(part.theta_hat)
        beta0s.append(part.beta0_hat)
        ranks.append(basis.rank)

    n1 = int(y.sum())
    return BinaryFit(
        theta_hat=np.mean(thetas, axis=0),
        beta0_hat=float(np.mean(beta0s)),
        pi_hat=np.array([(n - n1) / n, n1 / n]),
        mu_hat=np.vstack([x[y == 0].mean(axis=0), x[y == 1].mean(axis=0)]),
        projection_provenance="pc_crossfit",
        projection_rank=int(max(ranks)),
    )


def fit_multiclass(x, y, projection: Projection, baseline: int = 0) -> MulticlassFit:
    """Fit one binary subproblem per non-baseline class.

    Subproblem ``l`` keeps only the rows labeled ``baseline`` or ``l``,
    recenters them, and fits the binary rule with indicator target
    1{label == l}.  Its score is divided by
    ``pi_b pi_l (1 - (mu_l - mu_b) @ theta_l)`` (class frequencies within
    the subproblem), which puts all subproblems on a common scale.
    Denominators below 1e-8 are clamped with a warning.
    """
    x = as_matrix(x, "x")
    n, p = x.shape
    y = _check_labels(y, n, binary=False)
    _check_basis(projection, p)
    num_classes = int(y.max()) + 1
    baseline = int(baseline)
    if not 0 <= baseline < num_classes:
        raise ValueError(f"baseline must lie in [0, {num_classes - 1}], got {baseline}")

    counts = np.bincount(y, minlength=num_classes)
    means = np.vstack([x[y == cls].mean(axis=0) for cls in range(num_classes)])

    theta = np.zeros((num_classes, p))
    beta0 = np.zeros(num_classes)
    denom = np.ones(num_classes)
    base_rows = y == baseline
    for cls in range(num_classes):
        if cls == baseline:
            continue
        rows = base_rows | (y == cls)
        indicator = (y[rows] == cls).astype(np.int64)
        theta[cls] = _regress_theta(x[rows], indicator, projection.basis)

        pair_n = counts[baseline] + counts[cls]
        pi_b = counts[baseline] / pair_n
        pi_l = counts[cls] / pair_n
        diff = means[cls] - means[baseline]
        beta0[cls] = (
            -0.5 * (means[baseline] + means[cls]) @ theta[cls]
            + pi_b * pi_l * (1.0 - diff @ theta[cls]) * np.log(pi_l / pi_b)
        )
        den = pi_b * pi_l * (1.0 - diff @ theta[cls])
        if den < _DENOM_FLOOR:
            warnings.warn(
                f"score denominator for class {cls} is {den:.3e}; clamping to {_DENOM_FLOOR}",
                stacklevel=2,
            )
            den = _DENOM_FLOOR
        denom[cls] = den

    return MulticlassFit(
        baseline=baseline,
        theta_hat=theta,
        beta0_hat=beta0,
        denom_hat=denom,
        class_counts=counts,
        mu_hat=means,
        projection_provenance=projection.provenance,
        projection_rank=projection.rank,
    )


def multiclass_scores(fit: MulticlassFit, x) -> np.ndarray:
    """Rescaled subproblem scores; the baseline class always scores zero."""
    points, single = _as_points(x, fit.num_features)
    scores = (points @ fit.theta_hat.T + fit.beta0_hat) / fit.denom_hat
    return scores[0] if single else scores


def predict_multiclass(fit: MulticlassFit, x):
    """Class with the largest rescaled score; ties go to the smallest label."""
    scores = multiclass_scores(fit, x)
    if scores.ndim == 1:
        return int(np.argmax(scores))
    return np.argmax(scores, axis=1).astype(np.int64)


def predict_multiclass_averaged(x_train, y_train, projection: Projection, x):
    """Baseline-averaged multi-class prediction.

    Fits the multi-class rule once per choice of baseline class, converts
    each rule's scores to softmax posteriors (scores capped at +-700 before
    exponentiation), and averages the posteriors over baselines.  Returns
    ``(labels, posterior)``; for a single point the label is an int and the
    posterior a length-L vector.
    """
    x_train = as_matrix(x_train, "x_train")
    y_checked = _check_labels(y_train, x_train.shape[0], binary=False)
    num_classes = int(y_checked.max()) + 1

    points, single = _as_points(x, x_train.shape[1])
    posterior = np.zeros((points.shape[0], num_classes))
    for base in range(num_classes):
        fit = fit_multiclass(x_train, y_checked, projection, baseline=base)
        scores = np.clip(multiclass_scores(fit, points), -_SCORE_CAP, _SCORE_CAP)
        weights = np.exp(scores)
        posterior += weights / weights.sum(axis=1, keepdims=True)
    posterior /= num_classes
    labels = np.argmax(posterior, axis=1).astype(np.int64)
    if single:
        return int(labels[0]), posterior[0]
    return labels, posterior


# ---------------------------------------------------------------------------
# Persistence: plain text, one "key = value" line per field, vectors as
# comma-separated 17-significant-digit floats so reloading is exact.
# ---------------------------------------------------------------------------

_FORMAT_VERSION = 1


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _fmt_vec(vec) -> str:
    return ",".join(_fmt(v) for v in np.asarray(vec, dtype=np.float64))


def save_fit(fit, path) -> None:
    """Write a fitted rule to a text file; see :func:`load_fit`."""
    lines = [f"format_version = {_FORMAT_VERSION}"]
    if isinstance(fit, BinaryFit):
        lines.append("kind = binary")
        lines.append(f"projection_provenance = {fit.projection_provenance}")
        lines.append(f"projection_rank = {fit.projection_rank}")
        lines.append(f"theta_hat = {_fmt_vec(fit.theta_hat)}")
        lines.append(f"beta0_hat = {_fmt(fit.beta0_hat)}")
        lines.append(f"pi_hat = {_fmt_vec(fit.pi_hat)}")
        lines.append(f"mu_hat_0 = {_fmt_vec(fit.mu_hat[0])}")
        lines.append(f"mu_hat_1 = {_fmt_vec(fit.mu_hat[1])}")
    elif isinstance(fit, MulticlassFit):
        lines.append("kind = multiclass")
        lines.append(f"projection_provenance = {fit.projection_provenance}")
        lines.append(f"projection_rank = {fit.projection_rank}")
        lines.append(f"num_classes = {fit.num_classes}")
        lines.append(f"baseline = {fit.baseline}")
        lines.append(f"class_counts = {','.join(str(int(c)) for c in fit.class_counts)}")
        lines.append(f"beta0_hat = {_fmt_vec(fit.beta0_hat)}")
        lines.append(f"denom_hat = {_fmt_vec(fit.denom_hat)}")
        for cls in range(fit.num_classes):
            lines.append(f"theta_hat_{cls} = {_fmt_vec(fit.theta_hat[cls])}")
        for cls in range(fit.num_classes):
            lines.append(f"mu_hat_{cls} = {_fmt_vec(fit.mu_hat[cls])}")
    else:
        raise TypeError(f"cannot save object of type {type(fit).__name__}")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")


def _parse_kv(path) -> dict[str, str]:
    fields: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            if " = " not in line:
                raise DataFormatError(f"{path}, line {lineno}: expected 'key = value'")
            key, value = line.split(" = ", 1)
            if key in fields:
                raise DataFormatError(f"{path}, line {lineno}: duplicate key {key!r}")
            fields[key] = value
    return fields


def _take(fields: dict[str, str], key: str, path) -> str:
    try:
        return fields.pop(key)
    except KeyError:
        raise DataFormatError(f"{path}: missing key {key!r}")


def _parse_vec(text: str, key: str, path) -> np.ndarray:
    try:
        return np.array([float(v) for v in text.split(",")])
    except ValueError as exc:
        raise DataFormatError(f"{path}: bad numeric value in {key!r}: {exc}") from exc


def load_fit(path):
    """Read a fitted rule written by :func:`save_fit`."""
    fields = _parse_kv(path)
    version = _take(fields, "format_version", path)
    if version != str(_FORMAT_VERSION):
        raise DataFormatError(f"{path}: unsupported format_version {version!r}")
    kind = _take(fields, "kind", path)
    try:
        provenance = _take(fields, "projection_provenance", path)
        rank = int(_take(fields, "projection_rank", path))
        if kind == "binary":
            fit = BinaryFit(
                theta_hat=_parse_vec(_take(fields, "theta_hat", path), "theta_hat", path),
                beta0_hat=float(_take(fields, "beta0_hat", path)),
                pi_hat=_parse_vec(_take(fields, "pi_hat", path), "pi_hat", path),
                mu_hat=np.vstack(
                    [
                        _parse_vec(_take(fields, "mu_hat_0", path), "mu_hat_0", path),
                        _parse_vec(_take(fields, "mu_hat_1", path), "mu_hat_1", path),
                    ]
                ),
                projection_provenance=provenance,
                projection_rank=rank,
            )
        elif kind == "multiclass":
            num_classes = int(_take(fields, "num_classes", path))
            if num_classes < 2:
                raise DataFormatError(f"{path}: num_classes must be at least 2")
            fit = MulticlassFit(
                baseline=int(_take(fields, "baseline", path)),
                theta_hat=np.vstack(
                    [
                        _parse_vec(_take(fields, f"theta_hat_{c}", path), f"theta_hat_{c}", path)
                        for c in range(num_classes)
                    ]
                ),
                beta0_hat=_parse_vec(_take(fields, "beta0_hat", path), "beta0_hat", path),
                denom_hat=_parse_vec(_take(fields, "denom_hat", path), "denom_hat", path),
                class_counts=np.array(
                    [int(c) for c in _take(fields, "class_counts", path).split(",")]
                ),
                mu_hat=np.vstack(
                    [
                        _parse_vec(_take(fields, f"mu_hat_{c}", path), f"mu_hat_{c}", path)
                        for c in range(num_classes)
                    ]
                ),
                projection_provenance=provenance,
                projection_rank=rank,
            )
        else:
            raise DataFormatError(f"{path}: unknown kind {kind!r}")
    except ValueError as exc:
        raise DataFormatError(f"{path}: {exc}") from exc
    if fields:
        raise DataFormatError(f"{path}: unexpected keys {sorted(fields)}")
    return fit
