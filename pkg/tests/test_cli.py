from __future__ import annotations

import json

import pytest

from simplexsearch.cli import main


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def header(path):
    return path.read_text().splitlines()[0]


def test_build_second_order(tmp_path):
    assert run(tmp_path, "build", "--order", "2", "--dim", "5") == 0
    doc = json.loads((tmp_path / "lattice_r2_M5.json").read_text())
    vertices = {tuple(v) for e in doc["edges"] for v in e}
    assert len(vertices) == 150 and len(doc["edges"]) == 375


def test_build_complete_graph(tmp_path):
    assert run(tmp_path, "build", "--order", "0", "--dim", "5") == 0
    doc = json.loads((tmp_path / "lattice_r0_M5.json").read_text())
    assert len(doc["edges"]) == 15


def test_build_invalid_spec(tmp_path, capsys):
    assert run(tmp_path, "build", "--order", "2", "--dim", "3") == 2
    assert capsys.readouterr().err.startswith("InvalidSpec:")


def test_missing_settings_exit_two(tmp_path, capsys):
    assert run(tmp_path, "build", "--order", "2") == 2
    assert run(tmp_path, "gamma", "--dim", "100", "--scenario", "nope") == 2
    assert "UnknownScenario" in capsys.readouterr().err


def test_reduce_single_mark(tmp_path):
    assert run(tmp_path, "reduce", "--order", "2", "--dim", "5", "--marked", "0,0,0") == 0
    doc = json.loads((tmp_path / "partition.json").read_text())
    assert len(doc["classes"]) == 20
    rows = (tmp_path / "quotient.csv").read_text().splitlines()
    assert rows[0].startswith("# generated-by simplexsearch") and len(rows) == 22


def test_reduce_from_lattice_file(tmp_path):
    assert run(tmp_path, "build", "--order", "2", "--dim", "5") == 0
    assert run(tmp_path, "reduce", "--lattice", str(tmp_path / "lattice_r2_M5.json"), "--marked", "0,1,2") == 0
    # address (0,1,2) is the word (0,2,3): three distinct letters
    assert len(json.loads((tmp_path / "partition.json").read_text())["classes"]) == 47


def test_reduce_scenario(tmp_path):
    assert run(tmp_path, "reduce", "--dim", "5", "--scenario", "table5_d") == 0
    assert len(json.loads((tmp_path / "partition.json").read_text())["classes"]) == 11


def test_reduce_no_marks(tmp_path):
    assert run(tmp_path, "reduce", "--order", "2", "--dim", "5", "--method", "color") == 0
    assert len(json.loads((tmp_path / "partition.json").read_text())["classes"]) == 1


def test_reduce_rejects_both_mark_sources(tmp_path):
    assert run(tmp_path, "reduce", "--dim", "5", "--scenario", "single_mark_r2", "--marked", "0,0,0") == 2


def test_gamma_first_stage(tmp_path):
    assert run(tmp_path, "gamma", "--dim", "100", "--scenario", "single_mark_r2", "--stage", "1") == 0
    rep = json.loads((tmp_path / "critical_rate.json").read_text())
    assert 2.8 <= rep["gamma_c_times_M"] <= 3.2
    assert rep["stage_time"] > 0
    lines = (tmp_path / "crossing.csv").read_text().splitlines()
    assert lines[0].startswith("# generated-by") and lines[1] == "gamma,gamma_times_M,E0_blockA,E0_blockB"


def test_gamma_marked_class_o(tmp_path):
    assert run(tmp_path, "gamma", "--dim", "100", "--scenario", "marked_class_o") == 0
    rep = json.loads((tmp_path / "critical_rate.json").read_text())
    assert rep["gamma_c"] == pytest.approx(100**2, rel=0.05)


def test_gamma_bad_stage(tmp_path, capsys):
    assert run(tmp_path, "gamma", "--dim", "100", "--scenario", "single_mark_r2", "--stage", "7") == 2
    assert capsys.readouterr().err.startswith("InvalidStage:")


def test_gamma_numeric_failure_exit_one(tmp_path, capsys):
    assert run(tmp_path, "gamma", "--dim", "100", "--scenario", "single_mark_r2", "--range", "0.001", "0.01") == 1
    assert capsys.readouterr().err.startswith("NoCrossing:")


def test_run_auto_schedule(tmp_path):
    assert run(tmp_path, "run", "--dim", "100", "--scenario", "single_mark_r2", "--samples", "64") == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert len(s["stage_times"]) == 3 and len(s["stage_peaks"]) == 3
    assert s["final_probability"] == pytest.approx(0.939627, abs=1e-6)
    assert abs(s["final_norm"] - 1) < 1e-10
    assert len((tmp_path / "evolution.csv").read_text().splitlines()) == 2 + 3 * 64


def test_run_first_order(tmp_path):
    assert run(tmp_path, "run", "--dim", "100", "--scenario", "single_mark_r1", "--samples", "16") == 0
    s = json.loads((tmp_path / "summary.json").read_text())
    assert len(s["stage_times"]) == 2
    assert s["final_probability"] == pytest.approx(0.954782, abs=1e-6)


def test_run_zero_duration_echoes_initial_state(tmp_path):
    assert run(tmp_path, "run", "--dim", "5", "--scenario", "single_mark_r2", "--schedule", "0.5:0", "--samples", "2") == 0
    rows = [r for r in (tmp_path / "evolution.csv").read_text().splitlines() if not r.startswith("#")][1:]
    first, last = ([float(x) for x in r.split(",")[1:]] for r in rows)
    assert first == pytest.approx(last, abs=1e-15)
    assert json.loads((tmp_path / "summary.json").read_text())["final_probability"] == pytest.approx(1 / 150)


def test_config_file_and_flag_override(tmp_path):
    cfg = tmp_path / "exp.json"
    cfg.write_text(json.dumps({"lattice": {"order": 2, "dim": 100}, "scenario": "single_mark_r2", "stage": 2, "output_dir": str(tmp_path / "a")}))
    assert main(["gamma", "--config", str(cfg)]) == 0
    rep = json.loads((tmp_path / "a" / "critical_rate.json").read_text())
    assert rep["stage"] == 2 and 1.9 <= rep["gamma_c_times_M"] <= 2.1
    assert main(["gamma", "--config", str(cfg), "--stage", "3", "--out", str(tmp_path / "b")]) == 0
    assert json.loads((tmp_path / "b" / "critical_rate.json").read_text())["stage"] == 3


def test_outputs_are_deterministic_and_hashed(tmp_path):
    for sub in ("x", "y"):
        assert main(["reduce", "--dim", "7", "--scenario", "single_mark_r2", "--out", str(tmp_path / sub)]) == 0
    a, b = ((tmp_path / s / "quotient.csv").read_text() for s in ("x", "y"))
    assert "config-hash" in a.splitlines()[0]
    # only the output directory differs, and it is part of the hashed config
    assert a.splitlines()[1:] == b.splitlines()[1:]
    assert main(["reduce", "--dim", "7", "--scenario", "single_mark_r2", "--out", str(tmp_path / "x")]) == 0
    assert (tmp_path / "x" / "quotient.csv").read_text() == a


def test_sweep(tmp_path):
    assert run(tmp_path, "sweep", "--scenario", "single_mark_r2", "--stage", "1", "--m-values", "100,1000", "--jobs", "2") == 0
    lines = (tmp_path / "tolerance.csv").read_text().splitlines()
    assert header(tmp_path / "tolerance.csv").startswith("# generated-by")
    assert lines[1].startswith("M,gamma_c,eps_lo") and len(lines) == 4


def test_reproduce(tmp_path, capsys):
    assert run(tmp_path, "reproduce", "fig14") == 0
    out = capsys.readouterr().out
    assert out.count("PASS") == 2 and "FAIL" not in out
    assert (tmp_path / "fig14" / "summary.csv").exists()
