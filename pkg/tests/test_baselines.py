import numpy as np
import pytest

from subspace_da.baselines import (
    fit_baseline,
    na_pipeline,
    pca_t_pipeline,
    represent,
    sa_pipeline,
)
from subspace_da.benchmark import FixedParams, fit_method, predict_target, synthetic_pair
from subspace_da.data import LabeledDataset, SyntheticShiftSpec
from subspace_da.errors import DimensionMismatch, SingleClassData
from subspace_da.linalg import align_subspaces, pca_basis

SEEDS = range(10)


def acc(pred, truth):
    return float(np.mean(pred == truth))


@pytest.fixture(scope="module")
def pair():
    return synthetic_pair(SyntheticShiftSpec(), seed=0)


def test_na_on_copy_equals_training_accuracy(pair):
    src = pair.source
    model = fit_baseline("na", src, src.features, c=0.1, seed=0)
    assert acc(na_pipeline(src, src.features, 0.1, 0), src.labels) == acc(model.predict(src.features), src.labels)


def test_single_class_source_rejected():
    x = np.random.default_rng(0).standard_normal((10, 3))
    one = LabeledDataset(x, np.ones(10, dtype=int), 1)
    with pytest.raises(SingleClassData):
        na_pipeline(one, x, 0.1, 0)


def test_pca_t_full_dimension_matches_na(pair):
    # with shared centering a full orthonormal change of basis is invisible to the SVM
    src = pair.source
    na = na_pipeline(src, src.features, 0.1, 0)
    full = pca_t_pipeline(src, src.features, src.dim, 0.1, 0)
    assert abs(acc(na, src.labels) - acc(full, src.labels)) <= 0.01


def test_pca_t_one_dimension_shape():
    rng = np.random.default_rng(1)
    target = np.outer(rng.standard_normal(30), [1.0, 0.5, 0.0]) + 1e-3 * rng.standard_normal((30, 3))
    src = LabeledDataset(rng.standard_normal((20, 3)), np.repeat([1, 2], 10), 2)
    xs, t = represent("pca_t", src, target, 1)
    assert xs.shape == (20, 1) and t.d == 1
    assert pca_t_pipeline(src, target, 1, 0.1, 0).shape == (30,)


def test_sa_identical_domains_reduce_to_pca_t(pair):
    src = pair.source
    s = pca_basis(src.features, 5)
    r = align_subspaces(s, s)
    assert np.abs(r.u - s.basis).max() < 1e-10
    np.testing.assert_array_equal(
        sa_pipeline(src, src.features, 5, 0.1, 0), pca_t_pipeline(src, src.features, 5, 0.1, 0)
    )


def test_sa_orthogonal_subspaces_still_predict():
    rng = np.random.default_rng(2)
    scale = np.array([5.0, 0.1, 0.1])
    xs = rng.standard_normal((20, 3)) * scale
    xt = rng.standard_normal((20, 3)) * scale[[1, 0, 2]]
    src = LabeledDataset(xs, np.repeat([1, 2], 10), 2)
    u = align_subspaces(pca_basis(xs, 1), pca_basis(xt, 1)).u
    assert np.abs(u).max() < 0.1
    pred = sa_pipeline(src, xt, 1, 0.1, 0)
    assert pred.shape == (20,) and set(pred) <= {1, 2}


def test_dimension_mismatch(pair):
    with pytest.raises(DimensionMismatch):
        represent("pca_t", pair.source, pair.target[:, :5], 2)


def _median_accuracy(method, spec):
    out = []
    for seed in SEEDS:
        p = synthetic_pair(spec, seed)
        model, _, _ = fit_method(method, p.source, p.target, seed=seed, fixed=FixedParams())
        out.append(acc(predict_target(model, p.target), p.target_labels))
    return float(np.median(out))


@pytest.fixture(scope="module")
def medians():
    shift = SyntheticShiftSpec()
    same = SyntheticShiftSpec(rotation_angle=0.0, translation_norm=0.0)
    return {
        "na": _median_accuracy("na", shift),
        "pca_t": _median_accuracy("pca_t", shift),
        "sa": _median_accuracy("sa", shift),
        "jcsl": _median_accuracy("jcsl", shift),
        "na_in_domain": _median_accuracy("na", same),
    }


def test_na_suffers_from_shift(medians):
    assert medians["na"] < medians["na_in_domain"]


def test_pca_t_not_worse_than_na(medians):
    assert medians["pca_t"] >= medians["na"]


def test_sa_in_band(medians):
    assert medians["na"] - 0.05 <= medians["sa"] <= medians["jcsl"] + 1e-12
