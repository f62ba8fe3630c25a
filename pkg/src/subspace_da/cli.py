"""Command-line interface: ``subspace-da {train,predict,benchmark,divergence,grid-search,synth}``.

Exit codes: 0 success, 2 invalid input, 1 unexpected internal error.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .baselines import represent
from .benchmark import (
    METHODS,
    DomainPair,
    FixedParams,
    fit_method,
    normalize_pair,
    predict_target,
    results_csv,
    run_benchmark,
    summary_lines,
    synthetic_pair,
)
from .data import LabeledDataset, csv_header, format_float, load_csv, load_spec, parse_spec_text, save_csv, synth_shift
from .divergence import REPRESENTATIONS, h_delta_h, h_delta_h_jcsl
from .errors import SubspaceDAError
from .jcsl import JcslHyperParams, predict_jcsl, train_jcsl
from .linalg import project
from .model_select import GRID_DIMS, GRID_VALUES, HyperGrid, grid_search_jcsl
from .persist import Normalization, load_model, load_normalization, save_model, save_normalization

DEFAULT_SPEC = """\
# default synthetic shift benchmark
classes = 3
per_class = 60
dim = 20
class_separation = 4
rotation_angle = pi/6
translation_norm = 2
noise_sigma = 1
seed = 0
"""


class UsageError(SubspaceDAError):
    pass


def _read_spec(value):
    if value == "default":
        return parse_spec_text(DEFAULT_SPEC)
    return load_spec(value)


def _require_file(path, flag):
    if path is None:
        raise UsageError(f"{flag} is required")
    if not os.path.isfile(path):
        raise UsageError(f"{flag}: file not found: {path}")
    return path


def _load_source(path) -> LabeledDataset:
    _require_file(path, "--source")
    if "label" not in csv_header(path):
        raise UsageError(f"--source: {path} has no 'label' column")
    return load_csv(path, "label")


def _load_unlabeled(path, flag):
    """Features of a CSV; a ``label`` column, if any, is returned separately."""
    _require_file(path, flag)
    if "label" in csv_header(path):
        data = load_csv(path, "label")
        raw = np.array([data.classes[k - 1] for k in data.labels])
        return data.features, raw
    return load_csv(path, None), None


def _sidecar(model_path):
    return model_path + ".norm"


def _float_list(text):
    return tuple(float(v) for v in text.split(","))


def _int_list(text):
    return tuple(int(v) for v in text.split(","))


def _add_hyper(p):
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--d", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--batch", type=int, default=10, help="mini-batch size; 0 for full batch")
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-4)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--grid", action="store_true",
                   help="select omitted hyperparameters by two-fold CV on the source")
    p.add_argument("--normalize", choices=("zscore", "l2", "none"), default="zscore")


def _fixed(args):
    defaults = FixedParams()
    return FixedParams(
        alpha=defaults.alpha if args.alpha is None else args.alpha,
        beta=defaults.beta if args.beta is None else args.beta,
        d=defaults.d if args.d is None else args.d,
        c=defaults.c if args.c is None else args.c,
        eta=args.eta,
        batch=None if args.batch == 0 else args.batch,
        max_iters=args.max_iters,
        tol=args.tol,
    )


def _grid(args, method):
    """Grid with every explicitly given hyperparameter pinned, or None."""
    if not args.grid:
        return None
    pin = lambda v, default: default if v is None else (v,)
    return HyperGrid(alphas=pin(args.alpha, GRID_VALUES), betas=pin(args.beta, GRID_VALUES),
                     cs=pin(args.c, GRID_VALUES), ds=pin(args.d, GRID_DIMS))


def _accuracy(pred, truth):
    return float(np.mean(np.asarray(pred) == np.asarray(truth)))


def _to_original(model, ids):
    classes = model.classes
    if not classes:
        return np.asarray(ids)
    return np.array([classes[k - 1] for k in ids])


# ------------------------------------------------------------------ commands


def cmd_train(args):
    if args.method not in METHODS:
        raise UsageError(f"unknown method {args.method!r}")
    source = _load_source(args.source)
    target, _ = _load_unlabeled(args.target, "--target")
    if target.shape[1] != source.dim:
        raise UsageError(f"source has {source.dim} features but target has {target.shape[1]}")
    src, xt, zscore = normalize_pair(source, target, args.normalize)
    model, desc, cv = fit_method(args.method, src, xt, seed=args.seed,
                                 grid=_grid(args, args.method), fixed=_fixed(args))
    save_model(args.out, model)
    save_normalization(_sidecar(args.out), args.normalize, zscore)
    src_acc = _accuracy(predict_target(model, src.features), src.labels)
    parts = [f"method={args.method}", desc, f"source_accuracy={src_acc:.6f}"]
    if cv is not None:
        parts.append(f"cv_accuracy={cv:.6f}")
    print(" ".join(parts))
    return 0


def _apply_saved_normalization(model_path, x):
    side = _sidecar(model_path)
    if os.path.isfile(side):
        return load_normalization(side).apply(x)
    return Normalization().apply(x)


def cmd_predict(args):
    _require_file(args.model, "--model")
    model = load_model(args.model)
    x, truth = _load_unlabeled(args.data, "--data")
    x = _apply_saved_normalization(args.model, x)
    ids = predict_target(model, x)
    pred = _to_original(model, ids)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("prediction\n")
        fh.writelines(f"{int(p)}\n" for p in pred)
    if truth is not None:
        print(f"accuracy={_accuracy(pred, truth):.6f}")
    return 0


def _pairs_from_args(args):
    if args.spec is not None:
        spec = _read_spec(args.spec)
        return lambda seed: synthetic_pair(spec, seed, args.normalize)
    source = _load_source(args.source)
    target, truth = _load_unlabeled(args.target, "--target")
    if truth is None:
        raise UsageError("--target needs a 'label' column to score a benchmark")
    src, xt, _ = normalize_pair(source, target, args.normalize)
    truth_ids = np.array([source.mapping.get(int(v), -1) for v in truth])
    pair = DomainPair(src, xt, truth_ids)
    return lambda seed: pair


def cmd_benchmark(args):
    methods = tuple(m.strip() for m in args.methods.split(",") if m.strip())
    for m in methods:
        if m not in METHODS:
            raise UsageError(f"unknown method {m!r}; choose from {', '.join(METHODS)}")
    if args.spec is None and (args.source is None or args.target is None):
        raise UsageError("give --spec, or both --source and --target")
    pair_for_seed = _pairs_from_args(args)
    grid = HyperGrid() if args.grid else None
    rows = run_benchmark(pair_for_seed, methods, range(args.seeds), grid, _fixed(args))
    table = results_csv(rows)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(table)
    else:
        sys.stdout.write(table)
    stream = sys.stdout if args.out else sys.stderr
    for line in summary_lines(rows, methods):
        print(line, file=stream)
    return 0


def _divergence_reports(args, src, xt, seed):
    rep = args.representation
    if rep == "original":
        return h_delta_h(src.features, xt, args.c_div, seed, "original")
    if rep == "jcsl":
        if args.model:
            model = load_model(args.model)
            if any(bm.v is None for bm in model.per_class):
                raise UsageError("model file carries no V matrices; retrain with this version")
        else:
            f = _fixed(args)
            model = train_jcsl(src, xt, JcslHyperParams(f.alpha, f.beta, f.d, f.eta, f.batch,
                                                        f.max_iters, f.tol, args.seed))
        return h_delta_h_jcsl(model, src.features, xt, args.c_div, seed)
    d = _fixed(args).d
    xs_repr, t = represent(rep, src, xt, d)
    return h_delta_h(xs_repr, project(xt, t), args.c_div, seed, rep)


def cmd_divergence(args):
    source = _load_source(args.source)
    target, _ = _load_unlabeled(args.target, "--target")
    if args.model:
        _require_file(args.model, "--model")
        side = _sidecar(args.model)
        norm = load_normalization(side) if os.path.isfile(side) else Normalization()
        src, xt = source.with_features(norm.apply(source.features)), norm.apply(target)
    else:
        src, xt, _ = normalize_pair(source, target, args.normalize)
    reports = [_divergence_reports(args, src, xt, seed) for seed in range(args.seeds)]
    lines = ["representation,accuracy,n_source,n_target,seed"]
    lines += [r.to_csv_row() for r in reports]
    mean = float(np.mean([r.accuracy for r in reports]))
    lines.append(f"{args.representation},{format_float(mean)},{reports[0].n_source},"
                 f"{reports[0].n_target},mean")
    text = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        print(f"{args.representation}: mean accuracy {mean:.4f} over {args.seeds} seed(s)")
    else:
        sys.stdout.write(text)
    return 0


def cmd_grid_search(args):
    source = _load_source(args.source)
    target, truth = _load_unlabeled(args.target, "--target")
    src, xt, _ = normalize_pair(source, target, args.normalize)
    grid = HyperGrid(
        alphas=_float_list(args.alphas) if args.alphas else GRID_VALUES,
        betas=_float_list(args.betas) if args.betas else GRID_VALUES,
        ds=_int_list(args.ds) if args.ds else GRID_DIMS,
    )
    f = _fixed(args)
    report = grid_search_jcsl(src, xt, grid, eta=f.eta, batch=f.batch, max_iters=f.max_iters,
                              tol=f.tol, seed=args.seed, refit=False)
    with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(report.to_csv())
    if args.scatter:
        if truth is None:
            raise UsageError("--scatter needs a 'label' column in --target (evaluation only)")
        truth_ids = np.array([src.mapping.get(int(v), -1) for v in truth])
        lines = ["alpha,beta,d,source_cv_acc,target_acc"]
        for cell in report.cells:
            p = JcslHyperParams(cell.alpha, cell.beta, cell.d, f.eta, f.batch, f.max_iters,
                                f.tol, args.seed)
            model = train_jcsl(src, xt, p)
            acc = _accuracy(predict_jcsl(model, xt), truth_ids)
            lines.append(f"{format_float(cell.alpha)},{format_float(cell.beta)},{cell.d},"
                         f"{format_float(cell.mean_accuracy)},{format_float(acc)}")
        with open(args.scatter, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    best = report.best
    dropped = f" dropped_d={','.join(map(str, report.dropped_ds))}" if report.dropped_ds else ""
    print(f"selected alpha={best.alpha:g} beta={best.beta:g} d={best.d} "
          f"cv_accuracy={best.mean_accuracy:.6f}{dropped}")
    return 0


def cmd_synth(args):
    spec = _read_spec(args.spec)
    if args.seed is not None:
        spec = spec.with_seed(args.seed)
    source, target = synth_shift(spec)
    save_csv(args.source_out, source.features, source.labels)
    save_csv(args.target_out, target.features, target.labels)
    return 0


# -------------------------------------------------------------------- parser


def build_parser():
    parser = argparse.ArgumentParser(
        prog="subspace-da",
        description="Joint subspace and max-margin learning for unsupervised domain adaptation.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a model on labeled source + unlabeled target")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--method", required=True, choices=METHODS)
    p.add_argument("--out", required=True)
    _add_hyper(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="predict labels with a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("benchmark", help="score methods over seeds on a synthetic spec or CSV pair")
    p.add_argument("--spec", help="key=value spec file, or 'default'")
    p.add_argument("--source")
    p.add_argument("--target")
    p.add_argument("--methods", default=",".join(METHODS))
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--out")
    _add_hyper(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("divergence", help="H-delta-H domain divergence of a representation")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--model")
    p.add_argument("--representation", choices=REPRESENTATIONS, default="original")
    p.add_argument("--seeds", type=int, default=1)
    p.add_argument("--c-div", type=float, default=0.1,
                   help="regularization of the domain separator")
    p.add_argument("--out")
    _add_hyper(p)
    p.set_defaults(func=cmd_divergence)

    p = sub.add_parser("grid-search", help="per-cell two-fold CV report for JCSL")
    p.add_argument("--source", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--alphas")
    p.add_argument("--betas")
    p.add_argument("--ds")
    p.add_argument("--scatter", help="also write (source_cv_acc, target_acc) per cell")
    _add_hyper(p)
    p.set_defaults(func=cmd_grid_search)

    p = sub.add_parser("synth", help="write a synthetic source/target pair as CSV")
    p.add_argument("--spec", default="default")
    p.add_argument("--seed", type=int)
    p.add_argument("--source-out", required=True)
    p.add_argument("--target-out", required=True)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except (SubspaceDAError, FileNotFoundError, IsADirectoryError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # pragma: no cover - last-resort guard
        print(f"internal error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
