"""Non-joint comparison pipelines: no adaptation (NA), target PCA (PCA_T) and
subspace alignment with PCA bases (SA).

Every pipeline ends in the same homogeneous linear SVM, so differences between
them come from the representation alone. Subspace representations center each
domain with its own mean.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import DimensionMismatch
from .linalg import SubspaceBasis, align_subspaces, as_feature_matrix, pca_basis, project
from .svm import LinearModel, predict, train_linear_svm

__all__ = [
    "LinearPipelineModel",
    "represent",
    "fit_na",
    "fit_pca_t",
    "fit_sa",
    "fit_baseline",
    "na_pipeline",
    "pca_t_pipeline",
    "sa_pipeline",
    "BASELINES",
]

BASELINES = ("na", "pca_t", "sa")


@dataclass(frozen=True)
class LinearPipelineModel:
    """A trained baseline: optional target basis followed by a linear model.

    ``basis`` is ``None`` for NA, which scores raw rows.
    """

    method: str
    classifier: LinearModel
    basis: SubspaceBasis | None = None
    classes: tuple = ()

    def transform_target(self, x):
        x = as_feature_matrix(x)
        if self.basis is None:
            if x.shape[1] != self.classifier.dim:
                raise DimensionMismatch(
                    f"data has {x.shape[1]} columns, model expects {self.classifier.dim}"
                )
            return x
        return project(x, self.basis)

    def predict(self, x):
        return predict(self.classifier, self.transform_target(x))


def _check_domains(source: LabeledDataset, target):
    target = as_feature_matrix(target, "target")
    if target.shape[1] != source.dim:
        raise DimensionMismatch(
            f"source has {source.dim} features but target has {target.shape[1]}"
        )
    return target


def represent(method, source: LabeledDataset, target, d=None):
    """Source training features and the target-side basis for ``method``.

    Returns ``(source_features, target_basis_or_None)``.
    """
    target = _check_domains(source, target)
    xs = source.features
    if method == "na":
        return xs, None
    t = pca_basis(target, d)
    source_mean = xs.mean(axis=0)
    if method == "pca_t":
        return project(xs, t.recentered(source_mean)), t
    if method == "sa":
        s = pca_basis(xs, d)
        u = align_subspaces(s, t).u
        return (xs - source_mean) @ u, t
    raise ValueError(f"unknown baseline {method!r}")


def fit_baseline(method, source: LabeledDataset, target, *, d=None, c, seed) -> LinearPipelineModel:
    xs, t = represent(method, source, target, d)
    clf = train_linear_svm(source.with_features(xs), c, seed)
    return LinearPipelineModel(method, clf, t, source.classes)


def fit_na(source, target, c, seed):
    return fit_baseline("na", source, target, c=c, seed=seed)


def fit_pca_t(source, target, d, c, seed):
    return fit_baseline("pca_t", source, target, d=d, c=c, seed=seed)


def fit_sa(source, target, d, c, seed):
    return fit_baseline("sa", source, target, d=d, c=c, seed=seed)


def na_pipeline(source, target, c, seed) -> np.ndarray:
    return fit_na(source, target, c, seed).predict(target)


def pca_t_pipeline(source, target, d, c, seed) -> np.ndarray:
    return fit_pca_t(source, target, d, c, seed).predict(target)


def sa_pipeline(source, target, d, c, seed) -> np.ndarray:
    return fit_sa(source, target, d, c, seed).predict(target)
