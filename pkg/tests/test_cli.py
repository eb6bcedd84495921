import json

import numpy as np
import pytest

from nmfpart import io
from nmfpart.cli import EXIT_INPUT, EXIT_OK, main
from nmfpart.similarity import block_similarity


@pytest.fixture
def block_psm(tmp_path):
    return io.write_matrix(tmp_path / "psm.csv", block_similarity([2, 2]))


def test_psm_example(tmp_path):
    f = tmp_path / "draws.csv"
    f.write_text("1,1,2\n1,2,2\n")
    out = tmp_path / "psm.csv"
    assert main(["psm", "--labels", str(f), "--out", str(out)]) == EXIT_OK
    np.testing.assert_array_equal(io.read_matrix(out), [[1, .5, 0], [.5, 1, .5], [0, .5, 1]])
    manifest = json.loads((tmp_path / "psm.csv.manifest.json").read_text())
    assert manifest["subcommand"] == "psm"
    assert manifest["inputs"][str(f)] == io.digest(f)


def test_psm_single_draw_gives_affinity(tmp_path):
    f = tmp_path / "one.csv"
    f.write_text("4,4,7,4\n")
    out = tmp_path / "psm.csv"
    assert main(["psm", "--labels", str(f), "--out", str(out)]) == EXIT_OK
    np.testing.assert_array_equal(io.read_matrix(out), [[1, 1, 0, 1], [1, 1, 0, 1], [0, 0, 1, 0], [1, 1, 0, 1]])


def test_psm_input_errors(tmp_path, capsys):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    assert main(["psm", "--labels", str(empty)]) == EXIT_INPUT
    assert "no draws" in capsys.readouterr().err
    ragged = tmp_path / "ragged.csv"
    ragged.write_text("1,2,3\n1,2\n")
    assert main(["psm", "--labels", str(ragged)]) == EXIT_INPUT
    assert "row 2" in capsys.readouterr().err
    bad = tmp_path / "bad.csv"
    bad.write_text("1,x,3\n")
    assert main(["psm", "--labels", str(bad)]) == EXIT_INPUT
    assert "column 2" in capsys.readouterr().err
    assert main(["psm", "--labels", str(tmp_path / "missing.csv")]) == EXIT_INPUT


def test_invalid_similarity_is_rejected(tmp_path, capsys):
    f = io.write_matrix(tmp_path / "bad.csv", np.array([[1, .9], [.1, 1]]))
    assert main(["nmf", "--psm", str(f), "--rank", "1"]) == EXIT_INPUT
    assert "(0, 1)" in capsys.readouterr().err


def test_nmf_json(block_psm, tmp_path):
    out = tmp_path / "nmf.json"
    assert main(["nmf", "--psm", str(block_psm), "--rank", "2", "--out", str(out)]) == EXIT_OK
    res = json.loads(out.read_text())
    assert res["labels"] == [1, 1, 2, 2]
    assert {"objective", "soft_matrix", "iterations", "converged", "seed", "variant"} <= set(res)
    res_off = tmp_path / "off.json"
    main(["nmf", "--psm", str(block_psm), "--rank", "2", "--variant", "offset", "--out", str(res_off)])
    assert len(json.loads(res_off.read_text())["offset"]) == 4


def test_select_report_and_replay(block_psm, tmp_path):
    rep_dir = tmp_path / "report"
    argv = ["--threads", "1", "select", "--psm", str(block_psm), "--kmin", "1", "--kmax", "4",
            "--keep-soft", "--report-dir", str(rep_dir), "--out", str(tmp_path / "sel.json")]
    assert main(argv) == EXIT_OK
    assert io.read_labels(rep_dir / "labels.csv").tolist() == [[1, 1, 2, 2]]
    soft = io.read_matrix(rep_dir / "soft.csv")
    np.testing.assert_allclose(soft.sum(axis=1), 1.0, atol=1e-12)
    curve = io.read_table(rep_dir / "penalty_curve.csv")
    assert [int(r["K"]) for r in curve] == [1, 2, 3, 4]
    assert (rep_dir / "soft_K3.csv").exists()
    manifest = json.loads((rep_dir / "manifest.json").read_text())
    assert manifest["flags"]["loss"] == "binder"

    before = {p.name: p.read_bytes() for p in rep_dir.iterdir()}
    assert main(argv) == EXIT_OK
    after = {p.name: p.read_bytes() for p in rep_dir.iterdir()}
    assert before == after


def test_select_not_converged_exit_code(tmp_path, rng):
    from conftest import random_similarity

    f = io.write_matrix(tmp_path / "r.csv", random_similarity(rng, 10))
    code = main(["select", "--psm", str(f), "--kmax", "4", "--max-iters", "2", "--starts", "1",
                 "--out", str(tmp_path / "s.json")])
    assert code == 3
    assert (tmp_path / "s.json").exists()


@pytest.mark.parametrize("method", ["minbinder", "maxpear", "minvi", "medv", "oracle"])
def test_baseline_methods(block_psm, tmp_path, method):
    out = tmp_path / f"{method}.json"
    assert main(["baseline", "--psm", str(block_psm), "--method", method, "--out", str(out)]) == EXIT_OK
    res = json.loads(out.read_text())
    assert res["labels"] == [1, 1, 2, 2]
    assert res["n_clusters"] == 2


def test_evaluate(tmp_path):
    a = io.write_labels(tmp_path / "a.csv", [1, 1, 2, 2])
    b = io.write_labels(tmp_path / "b.csv", [1, 2, 1, 2])
    out = tmp_path / "e.json"
    assert main(["evaluate", "--estimate", str(a), "--truth", str(b), "--out", str(out)]) == EXIT_OK
    res = json.loads(out.read_text())
    assert res["rand"] == pytest.approx(1 / 3)
    assert res["adjusted_rand"] == pytest.approx(-0.5)
    # column layout is accepted too
    (tmp_path / "col.csv").write_text("1\n1\n2\n2\n")
    assert main(["evaluate", "--estimate", str(tmp_path / "col.csv"), "--truth", str(a)]) == EXIT_OK


def test_timing_single_cell(tmp_path):
    out = tmp_path / "t.csv"
    assert main(["timing", "--sizes", "20", "--ranks", "2", "--iters", "5", "--repeats", "1",
                 "--out", str(out)]) == EXIT_OK
    rows = io.read_table(out)
    assert len(rows) == 1
    assert rows[0]["n"] == "20" and rows[0]["iterations"] == "5"


def test_tiny_simulate(tmp_path):
    out = tmp_path / "sim"
    argv = ["simulate", "--config", "TTT", "--reps", "1", "--burnin", "5", "--kept", "10",
            "--methods", "nmf-ls,minbinder,medv", "--kmax", "5", "--starts", "1",
            "--max-iters", "100", "--out-dir", str(out)]
    assert main(argv) == EXIT_OK
    for name in ["replications.csv", "summary.csv", "table.csv", "k_distribution.csv", "manifest.json"]:
        assert (out / name).exists()
    table = io.read_table(out / "table.csv")
    assert [r["method"] for r in table] == ["nmf-ls", "minbinder", "medv"]
    assert "a-TTT AR" in table[0]
    first = (out / "replications.csv").read_bytes()
    assert main(argv) == EXIT_OK
    assert (out / "replications.csv").read_bytes() == first


def test_csv_round_trip(tmp_path, rng):
    M = rng.random((5, 7)) * 10.0 ** rng.integers(-20, 20, size=(5, 7))
    np.testing.assert_array_equal(io.read_matrix(io.write_matrix(tmp_path / "m.csv", M)), M)
    labels = rng.integers(0, 9, size=11)
    assert io.read_partition(io.write_labels(tmp_path / "l.csv", labels)).tolist() == labels.tolist()
    rows = [{"a": 1, "b": 0.1 + 0.2, "c": "x"}]
    back = io.read_table(io.write_table(tmp_path / "t.csv", rows))
    assert float(back[0]["b"]) == 0.1 + 0.2
