"""Command-line interface.

Subcommands: fit, predict, select-k, diagnose, simulate.  Exit codes:
0 success, 2 usage error, 3 data or file problem, 4 numerical failure.
"""

import argparse
import csv
import sys

import numpy as np

from .classifier import (
    BinaryFit,
    decision_value,
    fit_binary,
    fit_crossfit,
    fit_multiclass,
    fit_with_auxiliary,
    load_fit,
    predict,
    predict_multiclass,
    save_fit,
)
from .errors import (
    DataFormatError,
    DegenerateLabelsError,
    NumericalError,
    RankDeficiencyError,
    ShapeError,
)
from .model import load_params, population_summary
from .numerics import center_columns, thin_svd
from .projection import ProjectionSpec, resolve_projection, select_k
from .simulation import METHODS, ExperimentGrid, GeneratorConfig, misclassification_rate, run_grid


class _UsageError(Exception):
    """Post-parse usage problem; maps to exit code 2."""


def _read_csv(path):
    """Read a numeric CSV; a non-numeric first row is treated as a header.

    Returns (header or None, n x p float array).
    """
    rows = []
    header = None
    with open(path, "r", encoding="utf-8", newline="") as fh:
        for lineno, record in enumerate(csv.reader(fh), start=1):
            if not record or (len(record) == 1 and not record[0].strip()):
                continue
            if lineno == 1:
                try:
                    rows.append([float(v) for v in record])
                except ValueError:
                    header = [v.strip() for v in record]
                continue
            try:
                rows.append([float(v) for v in record])
            except ValueError as exc:
                raise DataFormatError(f"{path}, row {lineno}: {exc}") from exc
            if len(rows[-1]) != len(rows[0]):
                raise DataFormatError(
                    f"{path}, row {lineno}: expected {len(rows[0])} columns, got {len(rows[-1])}"
                )
    if not rows:
        raise DataFormatError(f"{path}: no data rows")
    return header, np.array(rows)


def _read_labels(path, n: int) -> np.ndarray:
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                values.append(int(line))
            except ValueError as exc:
                raise DataFormatError(f"{path}, line {lineno}: expected an integer") from exc
    if len(values) != n:
        raise DataFormatError(f"{path}: {len(values)} labels for {n} data rows")
    return np.array(values, dtype=np.int64)


def _split_label_column(header, data, column: str):
    """Pull the label column out of the data matrix."""
    if header is not None and column in header:
        idx = header.index(column)
    else:
        try:
            idx = int(column)
        except ValueError:
            raise _UsageError(f"label column {column!r} not found; no matching header name")
        if not -data.shape[1] <= idx < data.shape[1]:
            raise _UsageError(f"label column index {idx} out of range for {data.shape[1]} columns")
    labels = data[:, idx]
    if not np.all(labels == np.floor(labels)):
        raise DataFormatError(f"label column {column!r} contains non-integer values")
    x = np.delete(data, idx, axis=1)
    if x.shape[1] == 0:
        raise DataFormatError("no feature columns remain after removing the label column")
    return labels.astype(np.int64), x


def _resolve_seed(args) -> int:
    if args.seed is None:
        print("seed = 0", file=sys.stderr)
        return 0
    return int(args.seed)


def _holdout_split(y: np.ndarray, fraction: float, stratified: bool, seed: int):
    n = y.shape[0]
    rng = np.random.default_rng(seed)
    if stratified:
        test_idx = []
        for cls in np.unique(y):
            members = rng.permutation(np.flatnonzero(y == cls))
            test_idx.append(members[: int(round(fraction * members.size))])
        test_idx = np.sort(np.concatenate(test_idx))
    else:
        perm = rng.permutation(n)
        test_idx = np.sort(perm[: int(round(fraction * n))])
    mask = np.zeros(n, dtype=bool)
    mask[test_idx] = True
    if mask.all() or not mask.any():
        raise _UsageError(f"holdout fraction {fraction} leaves an empty split for n={n}")
    return ~mask, mask


def _projection_spec(args) -> ProjectionSpec:
    spec = ProjectionSpec.from_string(args.projection)
    if spec.kind == "pc":
        spec = ProjectionSpec.pc(rank=spec.rank, c0=args.c0, nu=args.nu)
    return spec


def _cmd_fit(args) -> int:
    header, data = _read_csv(args.data)
    if args.labels is not None:
        y = _read_labels(args.labels, data.shape[0])
        x = data
    else:
        y, x = _split_label_column(header, data, args.label_col)
    if y.min() < 0:
        raise DataFormatError("labels must be nonnegative integers")
    num_classes = int(y.max()) + 1

    needs_seed = args.holdout is not None or args.crossfit is not None
    seed = _resolve_seed(args) if needs_seed else (args.seed or 0)

    x_fit, y_fit = x, y
    x_hold = y_hold = None
    if args.holdout is not None:
        if not 0.0 < args.holdout < 1.0:
            raise _UsageError(f"--holdout must lie in (0, 1), got {args.holdout}")
        train_mask, hold_mask = _holdout_split(y, args.holdout, args.stratified, seed)
        x_fit, y_fit = x[train_mask], y[train_mask]
        x_hold, y_hold = x[hold_mask], y[hold_mask]

    spec = _projection_spec(args)
    if args.crossfit is not None and args.auxiliary is not None:
        raise _UsageError("--crossfit and --auxiliary are mutually exclusive")

    if num_classes > 2:
        if args.crossfit is not None:
            raise _UsageError("--crossfit supports binary labels only")
        auxiliary = None
        if args.auxiliary is not None:
            _, auxiliary = _read_csv(args.auxiliary)
        projection = resolve_projection(spec, x_fit, auxiliary=auxiliary)
        fit = fit_multiclass(x_fit, y_fit, projection, baseline=args.baseline)
    elif args.crossfit is not None:
        fit = fit_crossfit(x_fit, y_fit, spec, kfolds=args.crossfit, seed=seed)
    elif args.auxiliary is not None:
        _, auxiliary = _read_csv(args.auxiliary)
        fit = fit_with_auxiliary(x_fit, y_fit, auxiliary, spec)
    else:
        projection = resolve_projection(spec, x_fit)
        fit = fit_binary(x_fit, y_fit, projection)

    save_fit(fit, args.output)
    if x_hold is not None:
        if isinstance(fit, BinaryFit):
            pred = predict(fit, x_hold)
        else:
            pred = predict_multiclass(fit, x_hold)
        err = misclassification_rate(pred, y_hold)
        print(f"holdout_error = {err:.17g}")
    return 0


def _cmd_predict(args) -> int:
    fit = load_fit(args.model)
    _, x = _read_csv(args.data)
    if isinstance(fit, BinaryFit):
        scores = decision_value(fit, x)
        labels = (scores >= 0.0).astype(np.int64)
        lines = ["label,decision_value"]
        lines += [f"{int(l)},{format(s, '.17g')}" for l, s in zip(labels, scores)]
    else:
        labels = predict_multiclass(fit, x)
        lines = ["label"] + [str(int(l)) for l in labels]
    text = "\n".join(lines) + "\n"
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def _cmd_select_k(args) -> int:
    _, x = _read_csv(args.data)
    _, centered = center_columns(x)
    svd = thin_svd(centered)
    selection = select_k(svd.singular, x.shape[0], x.shape[1], c0=args.c0, nu=args.nu)
    print(f"k_hat = {selection.k_hat}")
    print(f"k_bar = {selection.k_bar}")
    lines = ["k,criterion"]
    lines += [f"{k},{format(v, '.17g')}" for k, v in enumerate(selection.criterion)]
    text = "\n".join(lines) + "\n"
    if args.output is None:
        sys.stdout.write(text)
    else:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    return 0


def _cmd_diagnose(args) -> int:
    params = load_params(args.params)
    summary = population_summary(params, args.n)
    for name in ("delta", "delta_x", "r_z_star", "r_x_star", "xi_star", "xi", "delta_w", "kappa"):
        print(f"{name} = {format(getattr(summary, name), '.17g')}")
    return 0


def _cmd_simulate(args) -> int:
    seed = _resolve_seed(args)
    base = GeneratorConfig(
        p=args.p,
        num_factors=args.factors,
        eta=args.eta,
        seed=seed,
        loading_sd=args.loading_sd,
        noiseless=args.noiseless,
    )
    grid = ExperimentGrid(
        base=base,
        sweep=args.sweep,
        values=tuple(float(v) for v in args.values.split(",") if v.strip()),
        n=args.n,
        reps=args.reps,
        test_size=args.test_size,
        methods=tuple(m.strip() for m in args.methods.split(",") if m.strip()),
        crossfit_folds=args.crossfit_folds,
        fix_snr_across_p=args.fix_snr,
    )
    report = run_grid(grid, threads=args.threads)
    text = report.to_csv(args.output)
    if args.output is None:
        sys.stdout.write(text)
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pclda",
        description="Principal-component linear discriminant classification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    fit = sub.add_parser("fit", help="fit a discriminant rule from a CSV of features")
    fit.add_argument("--data", required=True, help="feature CSV, optional header row")
    group = fit.add_mutually_exclusive_group(required=True)
    group.add_argument("--labels", help="label file, one integer per line")
    group.add_argument("--label-col", help="label column (header name or index) inside --data")
    fit.add_argument("--projection", default="pc:auto", help="pc:auto | pc:<r> | identity | file:<path>")
    fit.add_argument("--auxiliary", help="CSV whose rows supply the pc basis")
    fit.add_argument("--crossfit", type=int, help="number of cross-fitting folds (binary only)")
    fit.add_argument("--baseline", type=int, default=0, help="baseline class for multi-class fits")
    fit.add_argument("--holdout", type=float, help="fraction of rows held out for evaluation")
    fit.add_argument("--stratified", action="store_true", help="stratify the holdout split by class")
    fit.add_argument("--seed", type=int, help="seed for any randomized step (default 0, announced)")
    fit.add_argument("--c0", type=float, default=2.1, help="rank selection penalty constant")
    fit.add_argument("--nu", type=float, default=100.0, help="rank selection aspect bound")
    fit.add_argument("--output", required=True, help="path for the fitted model file")
    fit.set_defaults(func=_cmd_fit)

    pred = sub.add_parser("predict", help="predict labels with a saved model")
    pred.add_argument("--model", required=True, help="model file written by fit")
    pred.add_argument("--data", required=True, help="feature CSV to score")
    pred.add_argument("--output", help="output CSV (stdout when omitted)")
    pred.set_defaults(func=_cmd_predict)

    sel = sub.add_parser("select-k", help="data-driven rank selection for a CSV")
    sel.add_argument("--data", required=True)
    sel.add_argument("--c0", type=float, default=2.1)
    sel.add_argument("--nu", type=float, default=100.0)
    sel.add_argument("--output", help="criterion CSV (stdout when omitted)")
    sel.set_defaults(func=_cmd_select_k)

    diag = sub.add_parser("diagnose", help="population quantities of a parameter file")
    diag.add_argument("--params", required=True, help="JSON model parameter file")
    diag.add_argument("--n", type=int, required=True, help="training size for the diagnostics")
    diag.set_defaults(func=_cmd_diagnose)

    sim = sub.add_parser("simulate", help="Monte Carlo risk sweep")
    sim.add_argument("--sweep", required=True, choices=["n", "eta", "p"])
    sim.add_argument("--values", required=True, help="comma-separated sweep values")
    sim.add_argument("--p", type=int, required=True, help="feature dimension (anchor for p sweeps)")
    sim.add_argument("--factors", type=int, required=True, help="number of latent factors")
    sim.add_argument("--eta", type=float, default=5.0, help="signal strength")
    sim.add_argument("--n", type=int, help="training size when not sweeping n")
    sim.add_argument("--reps", type=int, default=100)
    sim.add_argument("--test-size", type=int, default=100)
    sim.add_argument("--methods", default="pclda_k,pclda_khat,oracle_ls,bayes",
                     help=f"comma-separated subset of {','.join(METHODS)}")
    sim.add_argument("--seed", type=int, help="grid seed (default 0, announced)")
    sim.add_argument("--crossfit-folds", type=int, default=5)
    sim.add_argument("--fix-snr", action="store_true",
                     help="rescale loadings across a p sweep to hold the SNR profile fixed")
    sim.add_argument("--loading-sd", type=float, default=0.3)
    sim.add_argument("--noiseless", action="store_true")
    sim.add_argument("--threads", type=int, default=1)
    sim.add_argument("--output", help="report CSV (stdout when omitted)")
    sim.set_defaults(func=_cmd_simulate)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (DataFormatError, DegenerateLabelsError, ShapeError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except (NumericalError, RankDeficiencyError, ZeroDivisionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
