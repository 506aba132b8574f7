import io
import json
import subprocess
import sys
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from pqmsim import output
from pqmsim.cli import RunConfig, main, parse_config, resolve
from pqmsim.hysteresis import close_loop
from pqmsim.memristor import run_single_trace


def run(argv, env=None):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


def data_rows(path):
    with open(path) as fh:
        return [ln for ln in fh.read().splitlines() if not ln.startswith("#")]


# --- configuration ----------------------------------------------------------------

def test_parse_defaults():
    cfg, _ = parse_config(["single", "--t-int", "0.5", "--t-osc", "1.0"], environ={})
    assert (cfg.command, cfg.t_int, cfg.t_osc) == ("single", 0.5, 1.0)
    r = resolve(cfg)
    assert r.dt == pytest.approx(1e-4) and r.shots == 4092 and r.feedback_mode == "sampled"


def test_dt_and_n_steps_conflict():
    code, _, _ = run(["single", "--dt", "0.001", "--n-steps", "10"])
    assert code == 2


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"shots": 1000, "seed": 5}))
    cfg, _ = parse_config(["digital", "--config", str(path), "--shots", "4092"], environ={})
    assert cfg.shots == 4092 and cfg.seed == 5


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"shots": 1000, "colour": "blue"}))
    code, _, err = run(["digital", "--config", str(path)])
    assert code == 2
    assert "colour" in err and len(err.strip().splitlines()) == 1


def test_bad_value_and_file_conflict(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"shots": "many"}))
    assert run(["digital", "--config", str(path)])[0] == 2
    path.write_text(json.dumps({"dt": 0.01, "n_steps": 100}))
    assert run(["single", "--config", str(path)])[0] == 2
    # a flag for one of the pair replaces the file's value for the other
    cfg, _ = parse_config(["single", "--config", str(path), "--n-steps", "50"], environ={})
    assert cfg.dt is None and cfg.n_steps == 50
    path.write_text("{not json")
    assert run(["single", "--config", str(path)])[0] == 2


def test_config_round_trip():
    cfg = RunConfig(command="sweep", t_int=0.3, dt=1e-3, t_int_grid=[0.1, 0.2], csv="a.csv")
    assert RunConfig.from_json(cfg.to_json()) == cfg


def test_seed_environment_variable():
    cfg, _ = parse_config(["digital"], environ={"PQMSIM_SEED": "77"})
    assert cfg.seed == 77
    cfg, _ = parse_config(["digital", "--seed", "3"], environ={"PQMSIM_SEED": "77"})
    assert cfg.seed == 3


def test_invalid_parameters_exit_2():
    assert run(["single", "--t-int", "-1"])[0] == 2
    assert run(["pair", "--flavor", "chi"])[0] == 2
    assert run(["single", "--t-int", "0.001", "--dt", "0.01"])[0] == 2
    assert run(["frobnicate"])[0] == 2


# --- CSV -----------------------------------------------------------------------------

def test_single_csv_six_columns(tmp_path):
    path = tmp_path / "s.csv"
    code, _, _ = run(["single", "--t-int", "0.5", "--dt", "0.01", "--csv", str(path)])
    assert code == 0
    text = path.read_text()
    assert text.startswith("# config: {") and text.endswith("\n")
    rows = data_rows(path)
    assert rows[0] == "t,n_in,n_out,R,c_l1_in,c_l1_out"
    assert len(rows) == 102


def test_pair_csv_nine_columns(tmp_path):
    path = tmp_path / "p.csv"
    assert run(["pair", "--flavor", "phi-", "--t-int", "0.25", "--dt", "0.01", "--csv", str(path)])[0] == 0
    assert data_rows(path)[0].split(",") == ["t", "n_in", "n_out", "R", "R_prime",
                                              "c_l1_in", "c_l1_out", "conc_in", "conc_out"]


def test_digital_csv_deterministic(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert run(["digital", "--seed", "9", "--csv", str(p)])[0] == 0
    # the paths differ inside the header comment, the data must not
    assert data_rows(a) == data_rows(b)
    assert data_rows(a)[0] == "t,n_in,n_out,R,p_meas"
    c = tmp_path / "c.csv"
    run(["digital", "--seed", "9", "--csv", str(a)])
    run(["digital", "--seed", "9", "--csv", str(a)])
    first = a.read_bytes()
    run(["digital", "--seed", "9", "--csv", str(a)])
    assert a.read_bytes() == first
    run(["digital", "--seed", "10", "--csv", str(c)])
    assert data_rows(c) != data_rows(a)


def test_csv_round_trips_exactly(tmp_path):
    trace = run_single_trace(0.37, dt=1e-2)
    path = tmp_path / "t.csv"
    output.emit_csv(trace, path, config={"seed": 0})
    back = output.read_csv(path)
    for name in trace.columns():
        assert np.array_equal(back[name], trace.column(name))


def test_csv_unwritable_path_exit_3(tmp_path):
    code, _, err = run(["single", "--dt", "0.01", "--csv", str(tmp_path / "missing" / "x.csv")])
    assert code == 3 and "I/O" in err


def test_csv_to_stdout_when_no_output():
    code, out, _ = run(["digital", "--seed", "1"])
    assert code == 0 and out.splitlines()[1] == "t,n_in,n_out,R,p_meas"


def test_empty_records_rejected():
    with pytest.raises(output.EmptyInputError):
        output.csv_text([])


# --- SVG ------------------------------------------------------------------------------

def test_loop_svg_is_xml(tmp_path):
    th = np.linspace(0, 2 * np.pi, 1400)
    loop = close_loop(np.column_stack([np.cos(th), np.sin(2 * th)]), closure_tol=1e-6)
    path = tmp_path / "loop.svg"
    output.emit_loop_svg(loop, path, title="loop <test> & co")
    root = ET.parse(path).getroot()
    assert root.tag.endswith("svg")
    assert any(el.tag.endswith("polyline") for el in root.iter())


def test_cli_svgs_parse(tmp_path):
    for argv in (["single", "--dt", "0.001"], ["pair", "--flavor", "phi+", "--t-int", "0.25", "--dt", "0.002"],
                 ["digital", "--seed", "4"]):
        path = tmp_path / (argv[0] + ".svg")
        assert run(argv + ["--svg", str(path)])[0] == 0
        text = path.read_text()
        ET.fromstring(text)
        assert "F = " in text


def test_sweep_outputs(tmp_path):
    csv, svg = tmp_path / "s.csv", tmp_path / "s.svg"
    code, _, _ = run(["sweep", "--t-int-grid", "0.5,0.25,1.0", "--dt", "0.002",
                      "--csv", str(csv), "--svg", str(svg)])
    assert code == 0
    rows = data_rows(csv)
    assert rows[0] == "t_int,form_factor,area,perimeter,lobes"
    assert [float(r.split(",")[0]) for r in rows[1:]] == [0.5, 0.25, 1.0]
    assert float(rows[3].split(",")[1]) <= 1e-3
    root = ET.parse(svg).getroot()
    assert sum(el.tag.endswith("circle") for el in root.iter()) == 3


def test_sweep_concurrence_needs_pair():
    assert run(["sweep", "--model", "single", "--quantity", "concurrence"])[0] == 2


def test_svg_empty_input_exit_2(tmp_path):
    with pytest.raises(output.EmptyInputError):
        output.emit_svg([], [], tmp_path / "e.svg")
    with pytest.raises(output.EmptyInputError):
        output.emit_sweep_svg([], tmp_path / "e.svg")


def test_svg_unwritable_path_exit_3(tmp_path):
    assert run(["single", "--dt", "0.01", "--svg", str(tmp_path / "no" / "x.svg")])[0] == 3


# --- selftest ---------------------------------------------------------------------------

def test_selftest_passes_and_lists_every_criterion():
    code, out, _ = run(["selftest"])
    lines = out.strip().splitlines()
    assert code == 0
    assert len(lines) == 12
    assert all(" PASS " in ln for ln in lines)


def test_selftest_detects_injected_fault():
    code, out, _ = run(["selftest", "--inject-fault"])
    assert code == 1
    assert "FAIL" in out.splitlines()[0]


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "pqmsim", "single", "--dt", "0.05", "--t-int", "0.5"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "t,n_in,n_out,R,c_l1_in,c_l1_out"
