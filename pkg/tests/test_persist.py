import numpy as np
import pytest

from subspace_da.baselines import fit_baseline
from subspace_da.benchmark import normalize_pair, predict_target
from subspace_da.data import LabeledDataset, SyntheticShiftSpec, synth_shift
from subspace_da.errors import ParseError
from subspace_da.jcsl import JcslHyperParams, train_jcsl
from subspace_da.persist import load_model, load_normalization, save_model, save_normalization


@pytest.fixture(scope="module")
def domains():
    source, target = synth_shift(SyntheticShiftSpec(per_class=15, dim=6))
    raw = LabeledDataset(source.features, source.labels, 3, (10, 20, 30))
    return raw, target.features


def test_jcsl_round_trip_bit_exact(tmp_path, domains):
    source, target = domains
    model = train_jcsl(source, target, JcslHyperParams(0.1, 0.1, 3, max_iters=10))
    path = tmp_path / "m.txt"
    save_model(path, model)
    back = load_model(path)
    assert back.t.basis.tobytes() == model.t.basis.tobytes()
    assert back.t.mean.tobytes() == model.t.mean.tobytes()
    assert back.weights.tobytes() == model.weights.tobytes()
    assert back.classes == (10, 20, 30)
    assert (back.alpha, back.beta) == (0.1, 0.1)
    for a, b in zip(model.per_class, back.per_class):
        assert a.final_objective == b.final_objective
        assert a.v.tobytes() == b.v.tobytes()
    np.testing.assert_array_equal(predict_target(back, target), predict_target(model, target))
    # saving the loaded model reproduces the file byte for byte
    save_model(tmp_path / "again.txt", back)
    assert (tmp_path / "again.txt").read_bytes() == path.read_bytes()


def test_jcsl_header_layout(tmp_path, domains):
    source, target = domains
    model = train_jcsl(source, target, JcslHyperParams(1.0, 0.01, 2, max_iters=3))
    path = tmp_path / "m.txt"
    save_model(path, model, include_v=False)
    lines = path.read_text().splitlines()
    assert lines[0] == "6,2,3,1,0.01"
    assert len(lines) == 1 + 6 + 1 + 3 + 1  # header, T, mean, w rows, labels
    assert load_model(path).per_class[0].v is None


@pytest.mark.parametrize("method,d", [("na", None), ("pca_t", 3), ("sa", 2)])
def test_linear_round_trip(tmp_path, domains, method, d):
    source, target = domains
    model = fit_baseline(method, source, target, d=d, c=0.1, seed=0)
    path = tmp_path / f"{method}.txt"
    save_model(path, model)
    back = load_model(path)
    assert back.method == method
    assert back.classifier.weights.tobytes() == model.classifier.weights.tobytes()
    np.testing.assert_array_equal(back.predict(target), model.predict(target))


@pytest.mark.parametrize("text", ["", "1,2,3\n", "2,1,2,1,1\n1\n", "2,1,2,1,1\n1\nx\n0,0\n0,0\n0,0\n",
                                  "linear,na,2,2,2\n"])
def test_malformed_model_files(tmp_path, text):
    path = tmp_path / "bad.txt"
    path.write_text(text)
    with pytest.raises(ParseError):
        load_model(path)


@pytest.mark.parametrize("how", ["zscore", "l2", "none"])
def test_normalization_sidecar_round_trip(tmp_path, domains, how):
    source, target = domains
    src, xt, tr = normalize_pair(source, target, how)
    path = tmp_path / "n.norm"
    save_normalization(path, how, tr)
    norm = load_normalization(path)
    assert norm.kind == how
    assert norm.apply(target).tobytes() == xt.tobytes()


def test_zscore_sidecar_header(tmp_path, domains):
    source, target = domains
    _, _, tr = normalize_pair(source, target, "zscore")
    path = tmp_path / "n.norm"
    save_normalization(path, "zscore", tr)
    lines = path.read_text().splitlines()
    assert "population" in lines[0]
    assert len(lines) == 1 + source.dim
