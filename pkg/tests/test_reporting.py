import json
import math

from unitary_finsler.reporting import (
    Check,
    RunSummary,
    SuiteTally,
    format_cell,
    render_csv,
    render_json,
    summary_path,
    write_outputs,
)


def _summary():
    summary = RunSummary(command="completion", config={"seed": 1}, version="0.0.0")
    summary.record([Check("parrott_bound", True, 0.5), Check("parrott_bound", False, -0.25), Check("search", True)])
    summary.skip("search")
    return summary


def test_format_cell():
    assert format_cell(None) == ""
    assert format_cell(True) == "true"
    assert format_cell(0.1) == "0.10000000000000001"
    assert format_cell(3) == "3"
    assert format_cell("operator") == "operator"


def test_suite_tally_counts():
    tally = SuiteTally("codiagonal")
    tally.record(Check("codiagonal", True, 1.0))
    tally.record(Check("codiagonal", True, 0.2))
    assert tally.is_ok
    assert tally.worst_slack == 0.2
    tally.skipped += 1
    assert tally.total == 3
    assert SuiteTally("empty").to_payload()["worst_slack"] is None


def test_run_summary_payload():
    summary = _summary()
    assert not summary.is_ok
    payload = json.loads(summary.to_json())
    assert payload["suites"]["parrott_bound"] == {"passed": 1, "failed": 1, "skipped": 0, "worst_slack": -0.25}
    assert payload["suites"]["search"]["skipped"] == 1
    assert "elapsed_seconds" not in payload
    summary.elapsed_seconds = 1.5
    assert summary.to_payload()["elapsed_seconds"] == 1.5


def test_render_csv_fills_missing_cells():
    text = render_csv(["trial", "mu", "verdict"], [{"trial": 0, "mu": 1.5}, {"trial": 1, "verdict": "convex"}])
    assert text == "trial,mu,verdict\n0,1.5,\n1,,convex\n"


def test_render_json_replaces_non_finite():
    document = json.loads(render_json(_summary(), ["trial", "mu"], [{"trial": 0, "mu": math.inf}]))
    assert document["rows"] == [{"trial": 0, "mu": None}]
    assert document["summary"]["command"] == "completion"


def test_csv_output_writes_summary_next_to_table(tmp_path):
    out = tmp_path / "runs" / "completion.csv"
    write_outputs(_summary(), ["trial"], [{"trial": 0}], str(out), "csv")
    assert out.read_text() == "trial\n0\n"
    assert summary_path(out) == tmp_path / "runs" / "completion.summary.json"
    assert json.loads(summary_path(out).read_text())["ok"] is False


def test_json_output_to_stdout(capsys):
    write_outputs(_summary(), ["trial"], [{"trial": 0}], None, "json")
    document = json.loads(capsys.readouterr().out)
    assert document["rows"] == [{"trial": 0}]
