import csv
import io
import json
import subprocess
import sys

import pytest

from maxitive.cli import main

from conftest import SCENARIOS

S1 = str(SCENARIOS / "s1.yaml")
S2 = str(SCENARIOS / "s2.yaml")
S2_THM35 = str(SCENARIOS / "s2_thm35.yaml")
S3 = str(SCENARIOS / "s3.yaml")
NOISY = str(SCENARIOS / "noisy.yaml")


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def run_json(capsys, *argv):
    code, out, err = run(capsys, *argv, "--format", "json", "--no-timestamp")
    return code, json.loads(out) if out else None, err


def test_eval_s1(capsys):
    code, doc, _ = run_json(capsys, "eval", S1, "--k", "1", "--event", "b,c")
    assert code == 0
    assert doc["results"]["E_sup"] == 2.0 and doc["results"]["Var_sup"] == 9.0
    assert doc["results"]["P"] == 0.5
    assert doc["results"]["event"] == ["b", "c"]


def test_eval_empty_event(capsys):
    code, doc, _ = run_json(capsys, "eval", S1, "--event", "")
    assert code == 0 and doc["results"]["P"] == 0.0


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", S1, "--event", "z"],
        ["eval", S1, "--k", "3"],
        ["eval", S1],
        ["eval", "/nonexistent.yaml", "--k", "1"],
        ["lln", S1],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, out, err = run(capsys, *argv)
    assert code == 2
    assert out == "" and err.startswith("maxitive ")


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["chebyshev", S1, "--r", "abc"])
    assert info.value.code == 2


def test_chebyshev_s1(capsys):
    code, doc, _ = run_json(capsys, "chebyshev", S1, "--r", "0.5,3")
    assert code == 0
    rows = doc["tables"]["chebyshev"]["rows"]
    assert rows[1] == [3.0, 0.25, 1.0, 0.75]
    for r, actual, bound, margin in rows:
        assert margin == bound - actual
    assert doc["verdicts"]["chebyshev"] == "holds"


def test_lln_s2_exit_0_and_contents(capsys):
    code, doc, _ = run_json(capsys, "lln", S2)
    assert code == 0
    assert doc["verdicts"]["hypothesis"]["satisfied"] == "yes"
    assert abs(doc["results"]["C"] - 0.5) <= 1e-12
    assert doc["verdicts"]["in_measure"]["decided"] == "holds"
    assert doc["verdicts"]["almost_everywhere"]["decided"] == "holds"
    curve = doc["tables"]["curve"]
    assert curve["columns"] == ["n", "eps", "measured", "bound", "margin"]
    assert len(curve["rows"]) == 1000
    for n, eps, measured, bound, margin in curve["rows"]:
        assert margin == bound - measured
        assert measured == (0.5 if n <= 400 else 0.0)


def test_lln_unsatisfied_series_hypothesis_needs_force(capsys):
    code, doc, _ = run_json(capsys, "lln", S2_THM35)
    assert code != 0
    assert doc["verdicts"]["hypothesis"]["satisfied"] != "yes"
    assert any("--force" in w for w in doc["warnings"])
    code, doc, _ = run_json(capsys, "lln", S2_THM35, "--force")
    assert code == 0 and doc["results"]["forced"]


def test_lln_overrides(capsys):
    code, doc, _ = run_json(capsys, "lln", S2, "--theorem", "3.3", "--psi-delta", "2", "--C", "0.5")
    assert code == 1
    assert doc["verdicts"]["hypothesis"]["first_violation"] == 2
    code, doc, _ = run_json(capsys, "lln", S2, "--theorem", "3.4", "--delta", "1", "--horizon", "200")
    assert code == 0 and doc["results"]["horizon"] == 200


def test_lln_short_horizon_series_undecided(capsys):
    # at N=2000 the last terms are still ~4e-6 of the partial sum
    code, doc, _ = run_json(capsys, "lln", S3, "--horizon", "2000")
    assert code == 1
    assert doc["verdicts"]["hypothesis"]["satisfied"] == "undecided"


def test_lln_s3_mu(capsys):
    code, doc, _ = run_json(capsys, "lln", S3)
    assert code == 0
    assert doc["results"]["mu_remark"]["mu"] == 1.0
    assert doc["verdicts"]["mean_to_mu"]["decided"] == "holds"
    assert doc["results"]["mu_gap_at_horizon"]["b"] == 1 / 10000


def test_lln_json_deterministic(capsys):
    first = run(capsys, "lln", S2, "--no-timestamp", "--format", "json")[1]
    second = run(capsys, "lln", S2, "--no-timestamp", "--format", "json")[1]
    assert first == second


def test_timestamp_present_by_default(capsys):
    _, out, _ = run(capsys, "eval", S1, "--k", "1", "--format", "json")
    assert "timestamp" in json.loads(out)


def test_csv_output(capsys):
    code, out, _ = run(capsys, "lln", S2, "--format", "csv", "--no-timestamp", "--horizon", "50")
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# command:")
    assert any(line.startswith("# scenario_digest:") for line in lines)
    body = [line for line in lines if not line.startswith("#")]
    rows = list(csv.reader(io.StringIO("\n".join(body))))
    assert rows[0] == ["table", "n", "eps", "measured", "bound", "margin"]
    curve = [r for r in rows if r[0] == "curve"]
    assert len(curve) == 50
    n, eps, measured, bound, margin = map(float, curve[0][1:])
    assert margin == bound - measured


def test_table_output(capsys):
    code, out, _ = run(capsys, "lln", S2, "--no-timestamp")
    assert code == 0
    assert "curve" in out and "hypothesis" in out


def test_converge_s2(capsys):
    code, doc, _ = run_json(capsys, "converge", S2, "--eps", "0.05", "--horizon", "1000")
    assert code == 0
    bc = doc["results"]["borel_cantelli"]["0.05"]
    assert bc["inequality_holds"] and bc["vanishes_at"] == 401
    assert doc["tables"]["limsup"]["rows"] == [[0.05, 1, "b"], [0.05, 401, ""]]
    assert doc["results"]["implication_consistent"]


def test_converge_average_and_raw(capsys):
    code, doc, _ = run_json(capsys, "converge", S3, "--sequence", "average", "--horizon", "500")
    assert code == 0 and doc["verdicts"]["almost_everywhere"]["decided"] == "holds"
    code, doc, _ = run_json(capsys, "converge", S3, "--sequence", "raw", "--limit", "0", "--horizon", "100")
    assert code == 0 and doc["verdicts"]["in_measure"]["decided"] == "fails"


def test_seed_override_changes_results(capsys):
    a = run_json(capsys, "lln", NOISY, "--horizon", "100", "--force")[1]
    b = run_json(capsys, "lln", NOISY, "--horizon", "100", "--force", "--seed", "99")[1]
    assert a["tables"]["deviation"] != b["tables"]["deviation"]
    assert a["scenario_digest"] == b["scenario_digest"]


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "maxitive", "eval", S1, "--k", "2", "--format", "json", "--no-timestamp"],
        capture_output=True,
        text=True,
        check=False,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["results"]["Var_sup"] == 8.0


def test_lln_s2_bound_curve_is_200_over_n(capsys):
    _, doc, _ = run_json(capsys, "lln", S2)
    for n, eps, measured, bound, margin in doc["tables"]["curve"]["rows"]:
        assert abs(bound - 200.0 / n) <= 1e-9 * (200.0 / n)


def test_constant_scenario_converge_and_chebyshev(capsys):
    constant = str(SCENARIOS / "constant.yaml")
    code, doc, _ = run_json(capsys, "converge", constant)
    assert code == 0
    assert all(row[2] == 0.0 and row[3] == 0.0 for row in doc["tables"]["trajectory"]["rows"])
    assert doc["verdicts"]["in_measure"]["decided"] == "holds"
    assert doc["verdicts"]["almost_everywhere"]["decided"] == "holds"
    code, doc, _ = run_json(capsys, "chebyshev", constant)
    assert code == 0
    assert all(row[1:] == [0.0, 0.0, 0.0] for row in doc["tables"]["chebyshev"]["rows"])


def test_converge_large_eps_trivially_holds(capsys):
    code, doc, _ = run_json(capsys, "converge", S2, "--eps", "10", "--horizon", "1000")
    assert code == 0
    assert all(row[2] == 0.0 for row in doc["tables"]["trajectory"]["rows"])
    assert doc["results"]["borel_cantelli"]["10.0"]["vanishes_at"] == 1
    assert doc["verdicts"]["in_measure"]["decided"] == "holds"
