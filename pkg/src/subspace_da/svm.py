"""Homogeneous linear hinge-loss classifier trained by mini-batch subgradient descent.

Each one-vs-all problem minimises ``||w||^2 + c * sum_i max(0, 1 - y_i x_i.w)``
with no intercept. Mini-batches are swept through a seeded per-epoch
permutation; training stops when the relative change of ``w`` over an epoch
falls below ``tol`` or after ``max_epochs`` epochs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset, make_rng
from .errors import DimensionMismatch, SingleClassData
from .linalg import as_feature_matrix

__all__ = [
    "LinearModel",
    "binary_targets",
    "hinge_objective",
    "relative_change",
    "train_binary_svm",
    "train_linear_svm",
    "predict",
    "class_scores",
    "argmax_labels",
]

ETA = 0.1
BATCH = 10
TOL = 1e-4
MAX_EPOCHS = 200


@dataclass(frozen=True)
class LinearModel:
    """One weight row per class; ``weights[k - 1]`` scores class id ``k``."""

    weights: np.ndarray
    c: float
    epochs: tuple = ()

    @property
    def n_classes(self) -> int:
        return self.weights.shape[0]

    @property
    def dim(self) -> int:
        return self.weights.shape[1]


def binary_targets(labels, positive) -> np.ndarray:
    return np.where(np.asarray(labels) == positive, 1.0, -1.0)


def hinge_objective(w, x, y, c) -> float:
    margins = (x @ w) * y
    return float(w @ w + c * np.maximum(0.0, 1.0 - margins).sum())


def relative_change(new, old) -> float:
    step = np.linalg.norm(new - old)
    base = np.linalg.norm(old)
    if base == 0.0:
        return 0.0 if step == 0.0 else np.inf
    return float(step / base)


def train_binary_svm(x, y, c, seed, eta=ETA, batch=BATCH, tol=TOL, max_epochs=MAX_EPOCHS):
    """Train a single ``+1/-1`` problem; returns ``(w, epochs_run)``.

    The returned ``w`` is the epoch-end iterate (or the zero start) with the
    lowest full objective, so a large ``c`` that makes the constant-step
    iteration bounce can never return something worse than ``w = 0``.
    """
    n, dim = x.shape
    rng = make_rng(seed)
    w = np.zeros(dim)
    best_w, best_obj = w, hinge_objective(w, x, y, c)
    epoch = 0
    for epoch in range(1, max_epochs + 1):
        w_prev = w
        order = rng.permutation(n)
        for start in range(0, n, batch):
            idx = order[start:start + batch]
            xb, yb = x[idx], y[idx]
            active = (xb @ w) * yb < 1.0
            grad = 2.0 * w - c * (yb[active] @ xb[active])
            w = w - eta * grad
        obj = hinge_objective(w, x, y, c)
        if obj < best_obj:
            best_w, best_obj = w, obj
        if relative_change(w, w_prev) < tol:
            break
    return best_w, epoch


def train_linear_svm(data: LabeledDataset, c, seed, *, eta=ETA, batch=BATCH, tol=TOL,
                     max_epochs=MAX_EPOCHS) -> LinearModel:
    """One-vs-all training over all ``K`` classes of ``data``.

    Class ``k`` is trained with seed ``seed + k``.
    """
    if data.n_classes < 2 or np.unique(data.labels).size < 2:
        raise SingleClassData("training needs at least two classes present in the data")
    if not c > 0:
        raise ValueError("c must be positive")
    x = data.features
    weights = np.zeros((data.n_classes, data.dim))
    epochs = []
    for k in range(1, data.n_classes + 1):
        y = binary_targets(data.labels, k)
        weights[k - 1], ran = train_binary_svm(x, y, c, seed + k, eta, batch, tol, max_epochs)
        epochs.append(ran)
    return LinearModel(weights, float(c), tuple(epochs))


def argmax_labels(scores) -> np.ndarray:
    # np.argmax returns the first maximum, i.e. the lowest class id on ties.
    return np.argmax(scores, axis=1) + 1


def class_scores(model: LinearModel, x) -> np.ndarray:
    x = as_feature_matrix(x)
    if x.shape[1] != model.dim:
        raise DimensionMismatch(f"data has {x.shape[1]} columns, model expects {model.dim}")
    return x @ model.weights.T


def predict(model: LinearModel, x) -> np.ndarray:
    return argmax_labels(class_scores(model, x))
