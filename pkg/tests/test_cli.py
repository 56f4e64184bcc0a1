"""End-to-end command line runs: output schema, determinism, exit codes."""

import csv
import io
import json

import pytest

from localqme.cli import RESULT_COLUMNS, main


def run(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def parse_csv(text):
    comments = [line for line in text.splitlines() if line.startswith("# ")]
    body = "\n".join(line for line in text.splitlines()
                     if not line.startswith("# "))
    rows = list(csv.DictReader(io.StringIO(body)))
    return comments, rows


def write_config(tmp_path, text, name="scenario.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return str(path)


SWEEP_YAML = """\
kind: two_qubit
g: 0.05
qubits:
  - {E: 1.0, beta: 1.0, p: 0.1}
  - {E: 1.0, beta: 0.5, p: 0.1}
sweep:
  parameter: qubits[1].E
  values: [0.8, 1.0, 1.2]
"""


def test_solve_default_scenario_to_stdout(capsys):
    code, out, err = run(capsys, "solve")
    assert code == 0
    comments, rows = parse_csv(out)
    assert comments[0] == "# localqme-results v1"
    assert len(rows) == 1
    row = rows[0]
    assert list(row) == list(RESULT_COLUMNS)
    assert row["kind"] == "two_qubit"
    assert row["method"] == "exact"
    assert float(row["g"]) == 0.05
    assert float(row["detuning"]) == 0.0
    assert row["first_law_ok"] == "true"
    assert row["second_law_ok"] == "true"
    assert row["verdict"] == "consistent"
    assert float(row["exact_residual"]) <= 1e-10
    assert abs(float(row["sum_Q"])) <= 1e-12
    # refrigerator-only columns stay empty on a pair
    assert row["a3"] == "" and row["c"] == ""
    assert row["E3"] == ""


def test_solve_output_is_byte_identical_across_runs(capsys):
    _, first, _ = run(capsys, "solve")
    _, second, _ = run(capsys, "solve")
    assert first == second


def test_solve_all_methods_reports_agreement(capsys, tmp_path):
    code, out, err = run(capsys, "solve", "--method", "all",
                         "--output", str(tmp_path))
    assert code == 0
    assert "pairwise Frobenius distances" in out
    results = (tmp_path / "results.csv").read_text(encoding="utf-8")
    _, rows = parse_csv(results)
    row = rows[0]
    assert float(row["err_closed_vs_exact"]) <= 1e-12
    assert float(row["err_evolved_vs_exact"]) <= 1e-6
    # order-6 partial sum at conv ratio 0.5 is visibly truncated, not wrong
    assert 1e-6 < float(row["err_pert_vs_exact"]) < 1e-1


def test_solve_json_format(capsys):
    code, out, _ = run(capsys, "solve", "--format", "json")
    assert code == 0
    document = json.loads(out)
    assert document["format"] == "localqme-results v1"
    assert document["columns"] == list(RESULT_COLUMNS)
    assert len(document["rows"]) == 1
    assert document["rows"][0]["verdict"] == "consistent"


def test_solve_emit_states_writes_density_matrices(capsys, tmp_path):
    code, out, _ = run(capsys, "solve", "--method", "evolve", "--emit-states",
                       "--output", str(tmp_path))
    assert code == 0
    states = json.loads((tmp_path / "states.json").read_text(encoding="utf-8"))
    methods = {record["method"] for record in states["states"]}
    assert methods == {"exact", "evolved"}
    record = states["states"][0]
    assert record["dim"] == 4
    assert record["layout"] == "row-major"
    assert len(record["entries"]) == 16
    trace = sum(record["entries"][i * 4 + i][0] for i in range(4))
    assert trace == pytest.approx(1.0, abs=1e-12)


def test_emit_states_requires_output_directory(capsys):
    code, _, err = run(capsys, "solve", "--emit-states")
    assert code == 2
    assert "emit" in err


def test_solve_rejects_sweep_scenario(capsys, tmp_path):
    config = write_config(tmp_path, SWEEP_YAML)
    code, _, err = run(capsys, "solve", "--config", config)
    assert code == 2
    assert "sweep" in err


def test_sweep_runs_every_point(capsys, tmp_path):
    config = write_config(tmp_path, SWEEP_YAML)
    code, out, _ = run(capsys, "sweep", "--config", config)
    assert code == 0
    _, rows = parse_csv(out)
    assert [row["sweep_value"] for row in rows] == ["0.8", "1.0", "1.2"]
    assert [row["sweep_parameter"] for row in rows] == ["qubits[1].E"] * 3
    detunings = [float(row["detuning"]) for row in rows]
    assert detunings[0] > 0 and detunings[1] == 0 and detunings[2] < 0


def test_sweep_requires_a_sweep_block(capsys):
    code, _, err = run(capsys, "sweep")
    assert code == 2
    assert "sweep" in err


def test_config_errors_name_the_field(capsys, tmp_path):
    config = write_config(tmp_path, "kind: two_qubit\ng: 0.05\nbogus: 1\n"
                                    "qubits:\n"
                                    "  - {E: 1.0, beta: 1.0, p: 0.1}\n"
                                    "  - {E: 1.0, beta: 0.5, p: 0.1}\n")
    code, _, err = run(capsys, "solve", "--config", config)
    assert code == 2
    assert "bogus" in err
    code, _, err = run(capsys, "solve", "--config",
                       str(tmp_path / "nowhere.yaml"))
    assert code == 2


def test_solver_failure_exit_code(capsys, tmp_path):
    # t_max too small for convergence from the maximally mixed start
    config = write_config(tmp_path, """\
kind: two_qubit
g: 0.05
method: evolve
qubits:
  - {E: 1.0, beta: 1.0, p: 0.1}
  - {E: 1.0, beta: 0.5, p: 0.1}
solver: {t_max: 0.5}
""")
    code, _, err = run(capsys, "solve", "--config", config)
    assert code == 3
    assert "solver failure at point 0" in err


def test_series_constant_ratio_between_odd_terms(capsys):
    code, out, _ = run(capsys, "series", "--order", "2")
    assert code == 0
    comments, rows = parse_csv(out)
    assert comments[0] == "# localqme-series v1"
    ratio_line = next(c for c in comments if "ratio_third_to_first" in c)
    ratio = float(ratio_line.split("=")[1].split("(")[0])
    assert ratio == pytest.approx(-200.0, rel=1e-9)
    assert {row["order"] for row in rows} == {"1", "2"}
    orders = {row["order"] for row in rows}
    for order in orders:
        errs = [float(r["error"]) for r in rows if r["order"] == order]
        gs = [float(r["g"]) for r in rows if r["order"] == order]
        assert len(errs) == 4
        # error shrinks with g within each truncation order
        paired = sorted(zip(gs, errs))
        assert paired[0][1] < paired[-1][1]


def test_series_respects_sweep_over_g(capsys, tmp_path):
    config = write_config(tmp_path, """\
kind: two_qubit
g: 0.05
qubits:
  - {E: 1.0, beta: 1.0, p: 0.1}
  - {E: 1.0, beta: 0.5, p: 0.1}
sweep:
  parameter: g
  values: [0.04, 0.02]
order: 1
""")
    code, out, _ = run(capsys, "series", "--config", config)
    assert code == 0
    _, rows = parse_csv(out)
    assert [float(row["g"]) for row in rows] == [0.04, 0.02]


def test_series_json_document(capsys):
    code, out, _ = run(capsys, "series", "--order", "1", "--format", "json")
    assert code == 0
    document = json.loads(out)
    assert document["format"] == "localqme-series v1"
    assert document["ratio_third_to_first"] == pytest.approx(-200.0, rel=1e-9)
    assert document["ratio_residual"] <= 1e-12
    assert all(set(row) == {"order", "g", "error", "slope"}
               for row in document["rows"])


def test_zero_coupling_point_has_zero_currents(capsys, tmp_path):
    config = write_config(tmp_path, """\
kind: two_qubit
g: 0.0
qubits:
  - {E: 1.0, beta: 1.0, p: 0.1}
  - {E: 1.0, beta: 0.5, p: 0.1}
""")
    code, out, _ = run(capsys, "solve", "--config", config)
    assert code == 0
    _, rows = parse_csv(out)
    assert abs(float(rows[0]["Q1"])) <= 1e-15
    assert abs(float(rows[0]["Q2"])) <= 1e-15
    assert float(rows[0]["d"]) == 0.0


def test_refrigerator_row_fills_third_qubit_columns(capsys, tmp_path):
    config = write_config(tmp_path, """\
kind: refrigerator
g: 0.05
qubits:
  - {E: 1.0, T: 1.0, p: 0.1}
  - {E: 2.0, T: 2.0, p: 0.1}
  - {E: 1.0, T: 10.0, p: 0.1}
""")
    code, out, _ = run(capsys, "solve", "--config", config)
    assert code == 0
    _, rows = parse_csv(out)
    row = rows[0]
    assert float(row["E3"]) == 1.0
    assert float(row["Q1"]) == pytest.approx(-0.0001287159825897414, abs=1e-15)
    assert float(row["c"]) != 0.0
    assert row["verdict"] == "consistent"


def test_verify_subcommand_passes(capsys):
    code, out, _ = run(capsys, "verify", "--draws", "40")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[-1] == "10/10 checks passed"
    assert sum(1 for line in lines if line.startswith("[PASS]")) == 10


def test_unknown_method_override_rejected(capsys, tmp_path):
    config = write_config(tmp_path, """\
kind: custom
g: 0.05
method: exact
qubits:
  - {E: 1.0, beta: 1.0, p: 0.1}
interaction: [[0, 1], [1, 0]]
""")
    code, _, err = run(capsys, "solve", "--config", config,
                       "--method", "closed_form")
    assert code == 2
    assert "closed_form" in err
