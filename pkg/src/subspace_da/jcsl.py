"""Joint cross-domain classification and subspace learning.

For a fixed target basis ``T`` (D x d) the binary problem is

    G(V, w) = ||w||^2 + alpha ||V - T||_F^2 + beta sum_i max(0, 1 - y_i x_i^T V w)

over a source representation ``V`` (D x d) and a classifier ``w`` (d,).
It is minimised by mini-batch subgradient steps that update ``w`` and then
``V`` from subgradients evaluated at the previous iterate. Multiclass
problems use one-vs-all, and prediction scores target rows through ``T``
only: ``score_y(x) = (x - mean)^T T w_y``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .data import LabeledDataset, make_rng
from .errors import DimensionMismatch, NonBinaryLabels, SingleClassData
from .linalg import SubspaceBasis, as_feature_matrix, pca_basis
from .svm import argmax_labels, binary_targets, relative_change

__all__ = [
    "JcslHyperParams",
    "JcslBinaryModel",
    "JcslMulticlassModel",
    "jcsl_objective",
    "jcsl_subgradients",
    "train_jcsl_binary",
    "train_jcsl",
    "predict_jcsl",
    "jcsl_scores",
]


@dataclass(frozen=True)
class JcslHyperParams:
    """Trade-off weights, subspace size and optimiser settings.

    ``batch=None`` selects full-batch updates (one step per iteration).
    An iteration is one full pass over the source samples.
    """

    alpha: float
    beta: float
    d: int
    eta: float = 0.1
    batch: int | None = 10
    max_iters: int = 100
    tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if not self.eta > 0:
            raise ValueError("eta must be positive")
        if self.batch is not None and self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if int(self.d) < 1:
            raise ValueError("d must be >= 1")


@dataclass(frozen=True)
class JcslBinaryModel:
    v: np.ndarray
    w: np.ndarray
    final_objective: float
    iterations: int
    converged: bool = False
    initial_objective: float = float("nan")
    diverged: bool = False


@dataclass(frozen=True)
class JcslMulticlassModel:
    """Target basis plus one ``(V_y, w_y)`` pair per class id ``y = 1..K``.

    ``source_mean`` is the vector used to center source rows before they
    were multiplied by each ``V_y`` during training.
    """

    t: SubspaceBasis
    per_class: tuple
    alpha: float
    beta: float
    source_mean: np.ndarray = None
    classes: tuple = field(default=())

    @property
    def n_classes(self) -> int:
        return len(self.per_class)

    @property
    def weights(self) -> np.ndarray:
        return np.stack([m.w for m in self.per_class])


def _check_binary(y):
    y = np.asarray(y, dtype=np.float64).ravel()
    if not np.all((y == 1.0) | (y == -1.0)):
        raise NonBinaryLabels("labels must be +1 or -1")
    return y


def _centered(x, t, center):
    x = as_feature_matrix(x)
    if x.shape[1] != t.ambient_dim:
        raise DimensionMismatch(f"data has {x.shape[1]} columns, basis expects {t.ambient_dim}")
    return x - (t.mean if center is None else np.asarray(center, dtype=np.float64))


def _check_params(v, w, t):
    v = np.asarray(v, dtype=np.float64)
    w = np.asarray(w, dtype=np.float64).ravel()
    if v.shape != t.basis.shape:
        raise DimensionMismatch(f"V has shape {v.shape}, expected {t.basis.shape}")
    if w.shape[0] != t.d:
        raise DimensionMismatch(f"w has length {w.shape[0]}, expected {t.d}")
    return v, w


def jcsl_objective(v, w, t: SubspaceBasis, x, y, alpha, beta, center=None) -> float:
    """Full objective on ``(x, y)``; rows are centered by ``center`` (default ``t.mean``)."""
    v, w = _check_params(v, w, t)
    y = _check_binary(y)
    xc = _centered(x, t, center)
    if y.shape[0] != xc.shape[0]:
        raise DimensionMismatch("label count differs from row count")
    diff = v - t.basis
    margins = (xc @ v @ w) * y
    return float(w @ w + alpha * np.sum(diff * diff) + beta * np.maximum(0.0, 1.0 - margins).sum())


def _subgradients(v, w, tb, xc, y, alpha, beta):
    margins = (xc @ v @ w) * y
    active = margins < 1.0
    g = xc[active].T @ y[active]
    dv = 2.0 * alpha * (v - tb) - beta * np.outer(g, w)
    dw = 2.0 * w - beta * (v.T @ g)
    return dv, dw


def jcsl_subgradients(v, w, t: SubspaceBasis, x, y, alpha, beta, center=None):
    """Subgradients ``(dV, dw)`` of the objective restricted to the rows given.

    A row contributes to the loss part only when its margin is strictly below
    one; a margin of exactly one takes the zero subgradient.
    """
    v, w = _check_params(v, w, t)
    y = _check_binary(y)
    xc = _centered(x, t, center)
    if y.shape[0] != xc.shape[0]:
        raise DimensionMismatch("label count differs from row count")
    return _subgradients(v, w, t.basis, xc, y, alpha, beta)


def train_jcsl_binary(x, y, t: SubspaceBasis, p: JcslHyperParams, *, s=None,
                      center=None) -> JcslBinaryModel:
    """Alternating subgradient descent from ``V = S``, ``w = 0``.

    ``s`` is the source PCA basis (computed from ``x`` when omitted) and
    ``center`` the vector subtracted from source rows (defaults to the source
    mean). Stops when both relative changes over an iteration are below
    ``p.tol`` or after ``p.max_iters`` iterations.
    """
    x = as_feature_matrix(x)
    y = _check_binary(y)
    if np.unique(y).size < 2:
        raise SingleClassData("binary training needs both +1 and -1 samples")
    if t.d != int(p.d):
        raise DimensionMismatch(f"target basis has d={t.d}, hyperparameters say d={p.d}")
    if s is None:
        s = pca_basis(x, p.d)
    if center is None:
        center = x.mean(axis=0)
    xc = _centered(x, t, center)
    n = xc.shape[0]
    batch = n if p.batch is None else min(int(p.batch), n)
    tb = t.basis
    v = s.basis.copy()
    w = np.zeros(t.d)
    initial = jcsl_objective(v, w, t, xc, y, p.alpha, p.beta, center=np.zeros(t.ambient_dim))

    rng = make_rng(p.seed)
    converged = diverged = False
    it = 0
    with np.errstate(over="ignore", invalid="ignore"):
        for it in range(1, p.max_iters + 1):
            v_prev, w_prev = v, w
            order = rng.permutation(n) if batch < n else np.arange(n)
            for start in range(0, n, batch):
                idx = order[start:start + batch]
                dv, dw = _subgradients(v, w, tb, xc[idx], y[idx], p.alpha, p.beta)
                w = w - p.eta * dw
                v = v - p.eta * dv
            if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
                # Step size too large for this (alpha, beta): keep the last
                # finite iterate instead of returning NaNs.
                v, w = v_prev, w_prev
                diverged = True
                break
            if max(relative_change(v, v_prev), relative_change(w, w_prev)) < p.tol:
                converged = True
                break
        final = jcsl_objective(v, w, t, xc, y, p.alpha, p.beta, center=np.zeros(t.ambient_dim))
    return JcslBinaryModel(v, w, final, it, converged, initial, diverged)


def train_jcsl(source: LabeledDataset, target, p: JcslHyperParams, *, t=None) -> JcslMulticlassModel:
    """One-vs-all training; class ``y`` uses seed ``p.seed + y``.

    ``T`` is the PCA basis of the unlabeled ``target`` unless ``t`` is given.
    """
    if source.n_classes < 2 or np.unique(source.labels).size < 2:
        raise SingleClassData("training needs at least two classes present in the source")
    target = as_feature_matrix(target, "target")
    if target.shape[1] != source.dim:
        raise DimensionMismatch(
            f"source has {source.dim} features but target has {target.shape[1]}"
        )
    if t is None:
        t = pca_basis(target, p.d)
    s = pca_basis(source.features, p.d)
    center = source.features.mean(axis=0)
    models = []
    for k in range(1, source.n_classes + 1):
        y = binary_targets(source.labels, k)
        if np.unique(y).size < 2:
            raise SingleClassData(f"class {k} has no samples in the source")
        pk = JcslHyperParams(p.alpha, p.beta, p.d, p.eta, p.batch, p.max_iters, p.tol, p.seed + k)
        models.append(train_jcsl_binary(source.features, y, t, pk, s=s, center=center))
    return JcslMulticlassModel(t, tuple(models), float(p.alpha), float(p.beta), center,
                               source.classes)


def jcsl_scores(model: JcslMulticlassModel, x, center=None) -> np.ndarray:
    xc = _centered(x, model.t, center)
    return (xc @ model.t.basis) @ model.weights.T


def predict_jcsl(model: JcslMulticlassModel, x, center=None) -> np.ndarray:
    """Class ids by maximal ``(x - mean)^T T w_y``; ``V_y`` is never read.

    Rows are centered by the target mean unless ``center`` is given (pass
    ``model.source_mean`` to score held-out source rows).
    """
    return argmax_labels(jcsl_scores(model, x, center))
