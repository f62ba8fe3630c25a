"""Seeded source-to-target evaluation harness.

Each run normalises both domains with statistics fitted on the source,
strips the target labels before any method sees the target, and scores the
predictions against the held-back labels afterwards.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .baselines import fit_baseline
from .data import LabeledDataset, SyntheticShiftSpec, format_float, l2_normalize_rows, synth_shift, zscore_fit_apply
from .jcsl import JcslHyperParams, predict_jcsl, train_jcsl
from .model_select import HyperGrid, grid_search_jcsl, select_baseline

__all__ = [
    "METHODS",
    "FixedParams",
    "DomainPair",
    "BenchmarkRow",
    "normalize_pair",
    "synthetic_pair",
    "fit_method",
    "evaluate_method",
    "run_benchmark",
    "results_csv",
    "summary_lines",
    "thread_count",
]

METHODS = ("na", "pca_t", "sa", "jcsl")


@dataclass(frozen=True)
class FixedParams:
    """Hyperparameters used when a method is run without grid search."""

    alpha: float = 0.1
    beta: float = 0.1
    d: int = 10
    c: float = 0.1
    eta: float = 0.1
    batch: int | None = 10
    max_iters: int = 100
    tol: float = 1e-4


@dataclass(frozen=True)
class DomainPair:
    source: LabeledDataset
    target: np.ndarray
    target_labels: np.ndarray | None = None


@dataclass(frozen=True)
class BenchmarkRow:
    method: str
    seed: int
    accuracy: float
    params: str = ""


def thread_count() -> int:
    raw = os.environ.get("SUBSPACE_DA_THREADS", "").strip()
    try:
        return max(1, int(raw))
    except ValueError:
        return 1


def normalize_pair(source: LabeledDataset, target, how="zscore"):
    """Return normalised ``(source, target, transform_or_None)``."""
    if how == "zscore":
        xs, (xt,), transform = zscore_fit_apply(source.features, [target])
        return source.with_features(xs), xt, transform
    if how == "l2":
        return source.with_features(l2_normalize_rows(source.features)), l2_normalize_rows(target), None
    if how == "none":
        return source, np.asarray(target, dtype=np.float64), None
    raise ValueError(f"unknown normalization {how!r}")


def synthetic_pair(spec: SyntheticShiftSpec, seed=None, normalization="zscore") -> DomainPair:
    if seed is not None:
        spec = spec.with_seed(seed)
    source, target = synth_shift(spec)
    src, xt, _ = normalize_pair(source, target.features, normalization)
    return DomainPair(src, xt, target.labels)


def fit_method(method, source: LabeledDataset, target, *, seed, grid: HyperGrid | None = None,
               fixed: FixedParams = FixedParams()):
    """Train ``method`` on labeled source plus unlabeled target.

    Returns ``(model, description, source_cv_accuracy_or_None)``. The model
    exposes target prediction through :func:`predict_target`.
    """
    if method == "jcsl":
        if grid is not None:
            report = grid_search_jcsl(source, target, grid, eta=fixed.eta, batch=fixed.batch,
                                      max_iters=fixed.max_iters, tol=fixed.tol, seed=seed)
            best = report.best
            desc = f"alpha={best.alpha:g} beta={best.beta:g} d={best.d}"
            return report.model, desc, best.mean_accuracy
        p = JcslHyperParams(fixed.alpha, fixed.beta, fixed.d, fixed.eta, fixed.batch,
                            fixed.max_iters, fixed.tol, seed)
        return train_jcsl(source, target, p), f"alpha={fixed.alpha:g} beta={fixed.beta:g} d={fixed.d}", None
    if grid is not None:
        sel = select_baseline(method, source, target, ds=grid.ds, cs=grid.cs, seed=seed)
        model = fit_baseline(method, source, target, d=sel.d, c=sel.c, seed=seed)
        desc = f"c={sel.c:g}" if sel.d is None else f"c={sel.c:g} d={sel.d}"
        return model, desc, sel.cv_accuracy
    d = None if method == "na" else fixed.d
    model = fit_baseline(method, source, target, d=d, c=fixed.c, seed=seed)
    return model, (f"c={fixed.c:g}" if d is None else f"c={fixed.c:g} d={d}"), None


def predict_target(model, x):
    if hasattr(model, "per_class"):
        return predict_jcsl(model, x)
    return model.predict(x)


def evaluate_method(method, pair: DomainPair, seed, grid=None, fixed=FixedParams()) -> BenchmarkRow:
    try:
        model, desc, _ = fit_method(method, pair.source, pair.target, seed=seed, grid=grid, fixed=fixed)
    except Exception as exc:
        raise type(exc)(f"[{method}] {exc}") from exc
    acc = float(np.mean(predict_target(model, pair.target) == pair.target_labels))
    return BenchmarkRow(method, seed, acc, desc)


def run_benchmark(pair_for_seed, methods, seeds, grid=None, fixed=FixedParams(), threads=None):
    """Evaluate every ``(method, seed)``; rows come back sorted by method order then seed.

    ``pair_for_seed(seed)`` must return a :class:`DomainPair` with target
    labels for scoring.
    """
    threads = thread_count() if threads is None else threads
    pairs = {seed: pair_for_seed(seed) for seed in seeds}
    jobs = [(m, s) for m in methods for s in seeds]

    def work(job):
        m, s = job
        return evaluate_method(m, pairs[s], s, grid, fixed)

    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            rows = list(pool.map(work, jobs))
    else:
        rows = [work(j) for j in jobs]
    order = {m: i for i, m in enumerate(methods)}
    return sorted(rows, key=lambda r: (order[r.method], r.seed))


def results_csv(rows) -> str:
    lines = ["method,seed,accuracy,params"]
    for r in rows:
        lines.append(f"{r.method},{r.seed},{format_float(r.accuracy)},{r.params}")
    return "\n".join(lines) + "\n"


def summary_lines(rows, methods):
    """``method: mean ± std`` in percent, one line per method."""
    out = []
    for m in methods:
        accs = np.array([r.accuracy for r in rows if r.method == m]) * 100.0
        if accs.size:
            out.append(f"{m}: {accs.mean():.1f} ± {accs.std():.1f}")
    return out
