import json

import numpy as np

from unitary_finsler.config import THREADS_ENV
from unitary_finsler.main import EXIT_CONFIG, EXIT_OK, main
from unitary_finsler.matrix_io import write_matrix


def test_invalid_trials_exit_with_config_code(tmp_path):
    assert main(["completion", "--trials", "0", "--out", str(tmp_path / "out.csv")]) == EXIT_CONFIG
    assert not (tmp_path / "out.csv").exists()


def test_malformed_matrix_exit_with_config_code(tmp_path, caplog):
    path = tmp_path / "bad.json"
    path.write_text('{"dim": 2, "entries": [[1, 0]]}')
    assert main(["io-check", "--matrix", str(path)]) == EXIT_CONFIG
    assert "dimension mismatch" in caplog.text
    assert "(line 1, column 23)" in caplog.text
    assert main(["lifting", "--matrix", str(path), "--trials", "1"]) == EXIT_CONFIG


def test_io_check_requires_matrix():
    assert main(["io-check"]) == EXIT_CONFIG


def test_io_check_reports_matrix_properties(tmp_path):
    matrix_path = tmp_path / "rotation.json"
    write_matrix(matrix_path, np.array([[0, -1], [1, 0]], dtype=np.complex128))
    out = tmp_path / "check.csv"
    assert main(["io-check", "--matrix", str(matrix_path), "--out", str(out)]) == EXIT_OK
    header, row = out.read_text().splitlines()
    assert header == "path,dim,operator_norm,hermitian,antihermitian,unitary"
    assert row.endswith(",2,1,false,true,true")
    summary = json.loads((tmp_path / "check.summary.json").read_text())
    assert summary["ok"] is True
    assert summary["suites"]["matrix_file"]["passed"] == 1


def test_runs_are_byte_identical_across_thread_counts(tmp_path, monkeypatch):
    outputs = []
    for threads in ("1", "3"):
        monkeypatch.setenv(THREADS_ENV, threads)
        out = tmp_path / f"run{threads}.json"
        code = main(["completion", "--trials", "3", "--dim", "3", "--seed", "11", "--format", "json", "--out", str(out)])
        assert code == EXIT_OK
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]
    document = json.loads(outputs[0])
    assert "elapsed_seconds" not in document["summary"]
    assert len(document["rows"]) == 3


def test_timing_is_opt_in(tmp_path, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "1")
    out = tmp_path / "timed.json"
    assert main(["projection", "--trials", "1", "--format", "json", "--timing", "--out", str(out)]) == EXIT_OK
    summary = json.loads(out.read_text())["summary"]
    assert summary["elapsed_seconds"] >= 0
    assert summary["config"]["timing"] is True


def test_lifting_on_matrix_file(tmp_path, monkeypatch):
    monkeypatch.setenv(THREADS_ENV, "1")
    matrix_path = tmp_path / "base.json"
    write_matrix(matrix_path, np.diag([1.0, 0.0, 0.0, 0.0]).astype(np.complex128))
    out = tmp_path / "lifting.json"
    main(["lifting", "--matrix", str(matrix_path), "--trials", "1", "--format", "json", "--out", str(out)])
    document = json.loads(out.read_text())
    assert document["summary"]["command"] == "lifting"
    assert document["rows"][0]["dim"] == 4
    assert document["rows"][0]["mode"] == "finite-rank"
