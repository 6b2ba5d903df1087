import csv
import json

import pytest

from evonet.cli import CliError, main, parse_range
from evonet.graph import HalfEdgeGraph


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_parse_range():
    assert parse_range("1.5") == [1.5]
    assert parse_range("0.8:1.0:0.1") == [0.8, 0.9, 1.0]
    with pytest.raises(CliError):
        parse_range("1:0:0.1")
    with pytest.raises(CliError):
        parse_range("0:1:0")


def test_analytic_regular3(capsys):
    code, out, _ = run(capsys, "analytic", "--dist", "regular:3", "--rho", "1", "--lambda", "1")
    rep = json.loads(out)
    assert code == 0
    assert rep["delta"] == pytest.approx(7.0)
    assert rep["alpha_c"] == pytest.approx(3.0)
    assert rep["grid"][0]["alpha"] == pytest.approx(3.0)


def test_analytic_geometric_and_poisson(capsys):
    _, out, _ = run(capsys, "analytic", "--dist", "geometric:0.5")
    assert json.loads(out)["delta"] == pytest.approx(0.0, abs=1e-9)
    _, out, _ = run(capsys, "analytic", "--dist", "poisson:1.2", "--rho", "0.1", "--lambda", "1:2:0.5")
    rep = json.loads(out)
    assert rep["alpha_c"] == pytest.approx(0.24)
    assert rep["delta"] == pytest.approx(-0.72)
    assert len(rep["grid"]) == 3


def test_analytic_subcritical_graph_is_not_fatal(capsys):
    code, out, _ = run(capsys, "analytic", "--dist", "regular:2", "--rho", "1")
    rep = json.loads(out)
    assert code == 0 and rep["supercritical_possible"] is False and rep["lambda_c"] is None


def test_scan_single_point_single_trial(capsys, tmp_path):
    path = tmp_path / "scan.csv"
    code, _, _ = run(capsys, "scan", "--n", "200", "--trials", "1", "--lambda", "1", "--rho", "1",
                     "--out", str(path))
    rows = list(csv.reader(path.open()))
    assert code == 0
    assert rows[0] == ["param", "p_large", "p_large_se", "cond_size", "cond_size_se", "n_large",
                       "q_analytic", "nu_analytic", "notes"]
    assert len(rows) == 2


def test_scan_sweep_is_deterministic(capsys, tmp_path):
    args = ["scan", "--n", "500", "--trials", "8", "--lambda", "0.5:1.5:0.5", "--rho", "1", "--seed", "4"]
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    run(capsys, *args, "--out", str(a))
    run(capsys, *args, "--out", str(b), "--workers", "2")
    assert a.read_text() == b.read_text()
    rows = list(csv.DictReader(a.open()))
    assert [float(r["param"]) for r in rows] == [0.5, 1.0, 1.5]
    assert "lambda_c=" in rows[0]["notes"]


def test_scan_overlay_for_avosi(capsys, tmp_path):
    path = tmp_path / "s.csv"
    run(capsys, "scan", "--n", "300", "--trials", "2", "--variant", "avoSI", "--lambda", "1", "--rho", "1",
        "--out", str(path))
    row = next(csv.DictReader(path.open()))
    assert 0 < float(row["nu_analytic"]) < 1


def test_scan_jsonl_records(capsys):
    code, out, _ = run(capsys, "scan", "--n", "200", "--trials", "3", "--format", "jsonl", "--lambda", "1")
    recs = [json.loads(line) for line in out.splitlines()]
    assert code == 0 and len(recs) == 3
    assert set(recs[0]) == {"variant", "n", "lambda", "rho", "gamma", "seed", "final_size", "events", "wallclock_ms"}


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# scan settings\ndist = regular:3\nrho = 2\nlambda = 5\n")
    _, out, _ = run(capsys, "analytic", "--config", str(cfg))
    rep = json.loads(out)
    assert rep["dist"] == "regular:3" and rep["rho"] == 2.0 and rep["grid"][0]["lambda"] == 5.0
    _, out, _ = run(capsys, "analytic", "--config", str(cfg), "--rho", "3")
    assert json.loads(out)["rho"] == 3.0


def test_generate_round_trip(capsys, tmp_path):
    path = tmp_path / "g.txt"
    assert main(["generate", "--dist", "poisson:3", "--n", "100", "--seed", "2", "--out", str(path)]) == 0
    g = HalfEdgeGraph.load(path)
    assert g.n == 100


def test_simulate_outputs(capsys, tmp_path):
    path = tmp_path / "traj.csv"
    assert main(["simulate", "--n", "300", "--lambda", "1", "--rho", "1", "--out", str(path)]) == 0
    assert path.read_text().startswith("t,S,I,R,X,X_I")
    code, out, _ = run(capsys, "simulate", "--n", "300", "--trials", "2", "--format", "jsonl", "--variant",
                       "avoSI", "--dynamic", "--lambda", "1", "--rho", "1")
    assert code == 0 and len(out.splitlines()) == 2


def test_verify_percolation(capsys):
    code, out, _ = run(capsys, "verify", "percolation", "--trials", "2000", "--n", "300")
    assert code == 0
    assert out.count("[PASS]") == 3


def test_errors_exit_with_status_two(capsys):
    code, _, err = run(capsys, "analytic", "--dist", "zipf:2")
    assert code == 2 and "error" in err
    code, _, _ = run(capsys, "scan", "--variant", "evoSI", "--gamma", "1", "--n", "50", "--trials", "1")
    assert code == 2
    code, _, _ = run(capsys, "scan", "--lambda", "1:2:0.5", "--rho", "1:2:0.5")
    assert code == 2
