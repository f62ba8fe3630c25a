"""Empirical H-delta-H divergence: how well a linear classifier tells the domains apart.

Source rows are pseudo-labeled +1 and target rows -1, both domains are cut to
the same size and split into seeded halves, a homogeneous linear SVM is
trained on one half of each and its accuracy on the other halves is the
divergence proxy. 0.5 means the domains are indistinguishable.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import format_float, make_rng
from .errors import DimensionMismatch, TooFewSamples
from .linalg import as_feature_matrix, project
from .svm import train_binary_svm

__all__ = ["DivergenceReport", "h_delta_h", "h_delta_h_jcsl", "REPRESENTATIONS"]

REPRESENTATIONS = ("original", "sa", "jcsl", "pca_t")


@dataclass(frozen=True)
class DivergenceReport:
    accuracy: float
    n_source: int
    n_target: int
    representation: str = "original"
    seed: int = 0

    def to_csv_row(self) -> str:
        return f"{self.representation},{format_float(self.accuracy)},{self.n_source},{self.n_target},{self.seed}"


def h_delta_h(source_repr, target_repr, c, seed, representation="original") -> DivergenceReport:
    """Held-out accuracy of a source-vs-target linear separator.

    The larger domain is subsampled without replacement to the size of the
    smaller one, so chance level is exactly 0.5. A zero score counts as a
    target prediction.
    """
    xs = as_feature_matrix(source_repr, "source_repr")
    xt = as_feature_matrix(target_repr, "target_repr")
    if xs.shape[1] != xt.shape[1]:
        raise DimensionMismatch(
            f"source representation has {xs.shape[1]} columns, target has {xt.shape[1]}"
        )
    m = min(xs.shape[0], xt.shape[0])
    if m < 4:
        raise TooFewSamples(f"each domain needs >= 4 rows, smallest has {m}")
    rng = make_rng(seed)
    src = xs[rng.permutation(xs.shape[0])[:m]]
    tgt = xt[rng.permutation(xt.shape[0])[:m]]
    half = m // 2
    x_train = np.vstack([src[:half], tgt[:half]])
    y_train = np.concatenate([np.ones(half), -np.ones(half)])
    x_test = np.vstack([src[half:], tgt[half:]])
    y_test = np.concatenate([np.ones(m - half), -np.ones(m - half)])
    w, _ = train_binary_svm(x_train, y_train, c, seed)
    pred = np.where(x_test @ w > 0.0, 1.0, -1.0)
    return DivergenceReport(float(np.mean(pred == y_test)), m, m, representation, seed)


def h_delta_h_jcsl(model, source, target, c, seed) -> DivergenceReport:
    """Mean per-class divergence between ``(source - mean) V_y`` and projected target.

    Each one-vs-all problem uses all the data; the reported accuracy is the
    average over classes.
    """
    source = as_feature_matrix(source, "source")
    target = as_feature_matrix(target, "target")
    if source.shape[1] != model.t.ambient_dim:
        raise DimensionMismatch(
            f"source has {source.shape[1]} columns, model expects {model.t.ambient_dim}"
        )
    xt = project(target, model.t)
    xs = source - source.mean(axis=0)
    reports = [h_delta_h(xs @ bm.v, xt, c, seed, "jcsl") for bm in model.per_class]
    acc = float(np.mean([r.accuracy for r in reports]))
    return DivergenceReport(acc, reports[0].n_source, reports[0].n_target, "jcsl", seed)
