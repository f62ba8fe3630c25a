"""Source-only hyperparameter selection by stratified two-fold cross-validation.

Target data only ever enter as an unlabeled feature matrix (to build the
target PCA basis), so no function here can look at target labels.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .baselines import fit_baseline, represent
from .data import LabeledDataset, format_float, make_rng
from .errors import ClassTooSmall, EmptyFeasibleGrid
from .jcsl import JcslHyperParams, predict_jcsl, train_jcsl
from .linalg import as_feature_matrix, pca_basis
from .svm import predict, train_linear_svm

__all__ = [
    "GRID_VALUES",
    "GRID_DIMS",
    "HyperGrid",
    "GridCell",
    "GridSearchReport",
    "BaselineSelection",
    "stratified_two_fold",
    "feasible_dims",
    "cv_jcsl_cell",
    "grid_search_jcsl",
    "cv_svm_accuracy",
    "grid_search_svm_c",
    "select_baseline",
    "refit_baseline",
]

GRID_VALUES = (0.001, 0.01, 0.1, 1.0, 10.0)
GRID_DIMS = tuple(range(10, 101, 10))


@dataclass(frozen=True)
class HyperGrid:
    alphas: tuple = GRID_VALUES
    betas: tuple = GRID_VALUES
    cs: tuple = GRID_VALUES
    ds: tuple = GRID_DIMS

    def __post_init__(self):
        for name in ("alphas", "betas", "cs", "ds"):
            values = tuple(getattr(self, name))
            if not values:
                raise ValueError(f"{name} must be non-empty")
            if any(not v > 0 for v in values):
                raise ValueError(f"{name} must hold positive values")
            object.__setattr__(self, name, values)
        object.__setattr__(self, "ds", tuple(int(d) for d in self.ds))


@dataclass(frozen=True)
class GridCell:
    alpha: float
    beta: float
    d: int
    fold_accuracies: tuple

    @property
    def mean_accuracy(self) -> float:
        return float(np.mean(self.fold_accuracies))


@dataclass
class GridSearchReport:
    """Per-cell CV results in grid order (alpha-major, then beta, then d).

    ``fold_accuracies[0]`` is the accuracy on fold A of the model trained on
    fold B, ``fold_accuracies[1]`` the reverse.
    """

    cells: list
    selected: int
    seed: int
    dropped_ds: tuple = ()
    model: object = None
    extra: dict = field(default_factory=dict)

    @property
    def best(self) -> GridCell:
        return self.cells[self.selected]

    def to_csv(self) -> str:
        lines = ["alpha,beta,d,fold_a_acc,fold_b_acc,mean_acc,selected"]
        for i, cell in enumerate(self.cells):
            a, b = cell.fold_accuracies
            lines.append(",".join([
                format_float(cell.alpha), format_float(cell.beta), str(cell.d),
                format_float(a), format_float(b), format_float(cell.mean_accuracy),
                "1" if i == self.selected else "0",
            ]))
        return "\n".join(lines) + "\n"


def stratified_two_fold(data: LabeledDataset, seed):
    """Split every class evenly across two folds (odd counts favour fold A).

    Returns sorted index arrays ``(fold_a, fold_b)``.
    """
    rng = make_rng(seed)
    fold_a, fold_b = [], []
    for k in range(1, data.n_classes + 1):
        idx = np.flatnonzero(data.labels == k)
        if idx.size < 2:
            raise ClassTooSmall(
                f"class {data.classes[k - 1]} has {idx.size} sample(s); two-fold CV needs >= 2"
            )
        idx = idx[rng.permutation(idx.size)]
        half = (idx.size + 1) // 2
        fold_a.append(idx[:half])
        fold_b.append(idx[half:])
    return np.sort(np.concatenate(fold_a)), np.sort(np.concatenate(fold_b))


def feasible_dims(ds, n_fold_min, dim, n_target):
    """Split ``ds`` into values usable for every fold and the target, and the rest."""
    limit = min(n_fold_min - 1, dim, n_target - 1)
    keep = tuple(d for d in ds if 1 <= d <= limit)
    return keep, tuple(d for d in ds if d not in keep)


def _accuracy(pred, truth) -> float:
    return float(np.mean(pred == truth))


def cv_jcsl_cell(source, folds, target, t, params: JcslHyperParams):
    """Two-fold accuracies of one JCSL cell.

    Held-out source rows are scored exactly like target rows (through ``T``),
    but centered with the training fold's mean.
    """
    accs = []
    for held, train in (folds, folds[::-1]):
        model = train_jcsl(source.subset(train), target, params, t=t)
        pred = predict_jcsl(model, source.features[held], center=model.source_mean)
        accs.append(_accuracy(pred, source.labels[held]))
    return tuple(accs)


def grid_search_jcsl(source: LabeledDataset, target, grid: HyperGrid = HyperGrid(), *,
                     eta=0.1, batch=10, max_iters=100, tol=1e-4, seed=0,
                     refit=True) -> GridSearchReport:
    """Select ``(alpha, beta, d)`` by two-fold CV on the source.

    ``T`` is computed once per ``d`` from the full unlabeled target. With
    ``refit`` the selected cell is retrained on the whole source and stored
    in ``report.model``.
    """
    target = as_feature_matrix(target, "target")
    folds = stratified_two_fold(source, seed)
    n_fold_min = min(f.size for f in folds)
    ds, dropped = feasible_dims(grid.ds, n_fold_min, source.dim, target.shape[0])
    if not ds:
        raise EmptyFeasibleGrid(
            f"no subspace dimension in {grid.ds} is feasible "
            f"(fold size {n_fold_min}, D={source.dim}, target rows {target.shape[0]})"
        )
    bases = {d: pca_basis(target, d) for d in ds}
    cells = []
    for alpha in grid.alphas:
        for beta in grid.betas:
            for d in ds:
                p = JcslHyperParams(alpha, beta, d, eta, batch, max_iters, tol, seed)
                cells.append(GridCell(alpha, beta, d, cv_jcsl_cell(source, folds, target, bases[d], p)))
    means = [c.mean_accuracy for c in cells]
    selected = int(np.argmax(means))
    report = GridSearchReport(cells, selected, seed, dropped)
    if refit:
        best = cells[selected]
        p = JcslHyperParams(best.alpha, best.beta, best.d, eta, batch, max_iters, tol, seed)
        report.model = train_jcsl(source, target, p, t=bases[best.d])
    return report


def cv_svm_accuracy(data: LabeledDataset, c, seed, folds=None):
    """Two-fold accuracies ``(acc_on_a, acc_on_b)`` of the linear SVM."""
    if folds is None:
        folds = stratified_two_fold(data, seed)
    accs = []
    for held, train in (folds, folds[::-1]):
        model = train_linear_svm(data.subset(train), c, seed)
        accs.append(_accuracy(predict(model, data.features[held]), data.labels[held]))
    return tuple(accs)


def grid_search_svm_c(data: LabeledDataset, cs=GRID_VALUES, seed=0):
    """Return the ``c`` with the best mean two-fold accuracy (earliest on ties)."""
    folds = stratified_two_fold(data, seed)
    cs = tuple(cs)
    if len(cs) == 1:
        return cs[0]
    scores = [np.mean(cv_svm_accuracy(data, c, seed, folds)) for c in cs]
    return cs[int(np.argmax(scores))]


@dataclass(frozen=True)
class BaselineSelection:
    method: str
    d: int | None
    c: float
    cv_accuracy: float


def select_baseline(method, source: LabeledDataset, target, *, ds=GRID_DIMS, cs=GRID_VALUES,
                    seed=0) -> BaselineSelection:
    """Pick ``(d, c)`` for a baseline by two-fold CV of its source representation."""
    target = as_feature_matrix(target, "target")
    folds = stratified_two_fold(source, seed)
    if method == "na":
        candidates = [None]
    else:
        limit = min(source.n_samples - 1, source.dim, target.shape[0] - 1)
        candidates = [d for d in ds if 1 <= d <= limit]
        if not candidates:
            raise EmptyFeasibleGrid(f"no subspace dimension in {tuple(ds)} is feasible")
    best = None
    for d in candidates:
        xs, _ = represent(method, source, target, d)
        data = source.with_features(xs)
        for c in cs:
            acc = float(np.mean(cv_svm_accuracy(data, c, seed, folds)))
            if best is None or acc > best.cv_accuracy:
                best = BaselineSelection(method, d, c, acc)
    return best


def refit_baseline(selection: BaselineSelection, source, target, seed):
    return fit_baseline(selection.method, source, target, d=selection.d, c=selection.c, seed=seed)
