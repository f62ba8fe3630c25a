import csv
import io

import numpy as np
import pytest

from subspace_da.cli import main
from subspace_da.data import SyntheticShiftSpec, save_csv, synth_shift


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def parse_csv(text):
    rows = list(csv.reader(io.StringIO(text), strict=True))
    assert len({len(r) for r in rows}) == 1
    return rows


@pytest.fixture(scope="module")
def files(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    source, target = synth_shift(SyntheticShiftSpec(seed=0))
    save_csv(root / "s.csv", source.features, source.labels * 10)
    save_csv(root / "t.csv", target.features, target.labels * 10)
    same_s, same_t = synth_shift(SyntheticShiftSpec(seed=0, rotation_angle=0.0, translation_norm=0.0))
    save_csv(root / "same_s.csv", same_s.features, same_s.labels)
    save_csv(root / "same_t.csv", same_t.features, same_t.labels)
    (root / "noshift.spec").write_text("rotation_angle = 0\ntranslation_norm = 0\n")
    return root


def test_train_jcsl_grid_summary(capsys, files, tmp_path):
    out_model = tmp_path / "m.txt"
    code, out, _ = run(capsys, "train", "--source", files / "s.csv", "--target", files / "t.csv",
                       "--method", "jcsl", "--grid", "--d", "10", "--out", out_model)
    assert code == 0
    assert out_model.exists() and (tmp_path / "m.txt.norm").exists()
    for key in ("alpha=", "beta=", "d=10", "cv_accuracy=", "source_accuracy="):
        assert key in out


@pytest.mark.parametrize("method", ["jcsl", "na", "pca_t", "sa"])
def test_train_twice_byte_identical(capsys, files, tmp_path, method):
    paths = []
    for i in range(2):
        p = tmp_path / f"{method}{i}.txt"
        code, _, _ = run(capsys, "train", "--source", files / "s.csv", "--target", files / "t.csv",
                         "--method", method, "--out", p)
        assert code == 0
        paths.append(p)
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sa_with_too_large_d_exits_2(capsys, tmp_path):
    src = tmp_path / "tiny.csv"
    src.write_text("f0,f1,label\n1,2,1\n2,1,2\n3,3,1\n0,1,2\n")
    code, _, err = run(capsys, "train", "--source", src, "--target", src, "--method", "sa",
                       "--d", "5", "--out", tmp_path / "m")
    assert code == 2
    assert "d=5" in err and "min(n-1, D)" in err


def test_single_class_source_exits_2(capsys, tmp_path):
    src = tmp_path / "one.csv"
    src.write_text("f0,label\n1,1\n2,1\n3,1\n")
    code, _, err = run(capsys, "train", "--source", src, "--target", src, "--method", "na",
                       "--out", tmp_path / "m")
    assert code == 2 and "class" in err


def test_missing_file_and_bad_csv_exit_2(capsys, files, tmp_path):
    code, _, err = run(capsys, "train", "--source", tmp_path / "nope.csv", "--target", files / "t.csv",
                       "--method", "na", "--out", tmp_path / "m")
    assert code == 2 and "not found" in err
    bad = tmp_path / "bad.csv"
    bad.write_text("f0,f1,label\n1,2,1\n2,x,2\n")
    code, _, err = run(capsys, "train", "--source", bad, "--target", files / "t.csv",
                       "--method", "na", "--out", tmp_path / "m")
    assert code == 2 and "line 3" in err


def test_unknown_subcommand_exit_2(capsys):
    assert run(capsys, "frobnicate")[0] == 2


def test_predict_matches_training_accuracy(capsys, files, tmp_path):
    model = tmp_path / "m.txt"
    _, out, _ = run(capsys, "train", "--source", files / "s.csv", "--target", files / "t.csv",
                    "--method", "jcsl", "--out", model)
    trained = float(out.split("source_accuracy=")[1].split()[0])
    preds = []
    for i in range(2):
        p = tmp_path / f"p{i}.csv"
        code, out, _ = run(capsys, "predict", "--model", model, "--data", files / "s.csv", "--out", p)
        assert code == 0
        assert float(out.strip().split("=")[1]) == pytest.approx(trained, abs=1e-6)
        preds.append(p)
    assert preds[0].read_bytes() == preds[1].read_bytes()
    rows = parse_csv(preds[0].read_text())
    assert rows[0] == ["prediction"] and len(rows) == 181
    assert {r[0] for r in rows[1:]} <= {"10", "20", "30"}  # original label space


def test_predict_zero_weights_gives_class_one(capsys, tmp_path):
    model = tmp_path / "zero.txt"
    model.write_text("linear,na,2,2,3,1\n0,0\n0,0\n0,0\n")
    data = tmp_path / "d.csv"
    data.write_text("a,b\n1,2\n-3,4\n0,0\n")
    code, out, _ = run(capsys, "predict", "--model", model, "--data", data, "--out", tmp_path / "p.csv")
    assert code == 0 and out == ""
    assert (tmp_path / "p.csv").read_text() == "prediction\n1\n1\n1\n"


def test_predict_dimension_mismatch_exit_2(capsys, files, tmp_path):
    model = tmp_path / "zero.txt"
    model.write_text("linear,na,2,2,3,1\n0,0\n0,0\n0,0\n")
    code, _, err = run(capsys, "predict", "--model", model, "--data", files / "s.csv", "--out", tmp_path / "p")
    assert code == 2 and "columns" in err


def test_benchmark_no_shift_near_in_domain(capsys, files, tmp_path):
    out_csv = tmp_path / "b.csv"
    code, out, _ = run(capsys, "benchmark", "--spec", files / "noshift.spec", "--methods", "na",
                       "--seeds", "3", "--out", out_csv)
    assert code == 0
    rows = parse_csv(out_csv.read_text())
    assert rows[0] == ["method", "seed", "accuracy", "params"] and len(rows) == 4
    assert np.mean([float(r[2]) for r in rows[1:]]) >= 0.85
    assert out.startswith("na: ") and "±" in out


def test_benchmark_twice_identical_and_csv_pair(capsys, files, tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f"b{i}.csv"
        assert run(capsys, "benchmark", "--source", files / "s.csv", "--target", files / "t.csv",
                   "--seeds", "1", "--out", p)[0] == 0
        outs.append(p.read_bytes())
    assert outs[0] == outs[1]
    methods = [r[0] for r in parse_csv(outs[0].decode())[1:]]
    assert methods == ["na", "pca_t", "sa", "jcsl"]


def test_benchmark_threads_do_not_change_output(capsys, files, tmp_path, monkeypatch):
    argv = ["benchmark", "--spec", "default", "--methods", "na,sa", "--seeds", "3"]
    single = run(capsys, *argv, "--out", tmp_path / "a.csv")
    monkeypatch.setenv("SUBSPACE_DA_THREADS", "4")
    multi = run(capsys, *argv, "--out", tmp_path / "b.csv")
    assert single[0] == multi[0] == 0
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_benchmark_rejects_unknown_method(capsys):
    code, _, err = run(capsys, "benchmark", "--spec", "default", "--methods", "na,gfk")
    assert code == 2 and "gfk" in err


def test_divergence_no_shift_and_layout(capsys, files, tmp_path):
    p = tmp_path / "d.csv"
    code, _, _ = run(capsys, "divergence", "--source", files / "same_s.csv", "--target",
                     files / "same_t.csv", "--seeds", "10", "--out", p)
    assert code == 0
    rows = parse_csv(p.read_text())
    assert rows[0] == ["representation", "accuracy", "n_source", "n_target", "seed"]
    assert len(rows) == 12 and rows[-1][-1] == "mean"
    assert abs(float(rows[-1][1]) - 0.5) <= 0.1


def test_divergence_disjoint_domains(capsys, tmp_path):
    rng = np.random.default_rng(0)
    xs, xt = rng.standard_normal((40, 3)), rng.standard_normal((40, 3))
    xs[:, 0] = np.abs(xs[:, 0]) + 5
    xt[:, 0] = -np.abs(xt[:, 0]) - 5
    save_csv(tmp_path / "a.csv", xs, np.repeat([1, 2], 20))
    save_csv(tmp_path / "b.csv", xt)
    code, out, _ = run(capsys, "divergence", "--source", tmp_path / "a.csv", "--target",
                       tmp_path / "b.csv", "--normalize", "none")
    assert code == 0
    assert float(parse_csv(out)[-1][1]) >= 0.99


def test_divergence_jcsl_below_original(capsys, files, tmp_path):
    model = tmp_path / "m.txt"
    run(capsys, "train", "--source", files / "s.csv", "--target", files / "t.csv", "--method", "jcsl",
        "--out", model)
    accs = {}
    for rep, extra in (("original", []), ("jcsl", ["--model", model])):
        p = tmp_path / f"{rep}.csv"
        code, _, _ = run(capsys, "divergence", "--source", files / "s.csv", "--target", files / "t.csv",
                         "--representation", rep, "--seeds", "5", "--out", p, *extra)
        assert code == 0
        accs[rep] = float(parse_csv(p.read_text())[-1][1])
    assert accs["jcsl"] <= accs["original"]


def test_divergence_other_representations(capsys, files):
    for rep in ("pca_t", "sa"):
        code, out, _ = run(capsys, "divergence", "--source", files / "s.csv", "--target", files / "t.csv",
                           "--representation", rep, "--d", "5")
        assert code == 0 and parse_csv(out)[1][0] == rep


def test_grid_search_report_and_scatter(capsys, files, tmp_path):
    rep, sc = tmp_path / "g.csv", tmp_path / "s.csv"
    code, out, _ = run(capsys, "grid-search", "--source", files / "s.csv", "--target", files / "t.csv",
                       "--alphas", "0.1,1", "--betas", "0.1", "--ds", "5,10,50", "--out", rep,
                       "--scatter", sc)
    assert code == 0 and "dropped_d=50" in out
    rows = parse_csv(rep.read_text())
    assert len(rows) == 5 and sum(r[-1] == "1" for r in rows[1:]) == 1
    srows = parse_csv(sc.read_text())
    assert srows[0] == ["alpha", "beta", "d", "source_cv_acc", "target_acc"] and len(srows) == 5


def test_synth_twice_identical(capsys, tmp_path):
    for i in range(2):
        assert run(capsys, "synth", "--seed", "3", "--source-out", tmp_path / f"s{i}.csv",
                   "--target-out", tmp_path / f"t{i}.csv")[0] == 0
    assert (tmp_path / "s0.csv").read_bytes() == (tmp_path / "s1.csv").read_bytes()
    assert (tmp_path / "t0.csv").read_bytes() == (tmp_path / "t1.csv").read_bytes()
    assert len(parse_csv((tmp_path / "s0.csv").read_text())) == 181
