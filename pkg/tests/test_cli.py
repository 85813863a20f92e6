import csv
import io
import json
import subprocess
import sys

import numpy as np
import pytest

from extremal.cli import FAILURE_MARKER, JobConfig, grid_points, main, parse_complex_list
from extremal.errors import ConfigError

BALL = {"shape": "ball", "dim": 1, "radius": 1.0}
ANN = {"shape": "annulus", "r_in": 0.5, "r_out": 2.0}


def write(tmp_path, cfg, name="job.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    return rows[0], rows[1:]


def test_eval_ball(tmp_path, capsys):
    cfg = write(tmp_path, {"domain": BALL, "weight": "0", "z": [2.0]})
    code, out, _ = run(["eval", "--config", cfg], capsys)
    rep = json.loads(out)
    assert code == 0 and rep["sandwich_ok"]
    assert abs(rep["lower"] - np.log(2)) < 0.02 and abs(rep["poletsky_upper"] - np.log(2)) < 0.02


def test_eval_annulus_with_z_flag(tmp_path, capsys):
    cfg = write(tmp_path, {"domain": ANN, "weight": "0"})
    code, out, _ = run(["eval", "--config", cfg, "--z", "0"], capsys)
    rep = json.loads(out)
    assert code == 0
    assert rep["family_upper"] == pytest.approx(np.log(5 / 3), abs=5e-3)
    assert -0.02 <= rep["poletsky_upper"] <= 0.02


def test_fullspace_grid_is_zero(tmp_path, capsys):
    cfg = write(tmp_path, {
        "domain": {"shape": "fullspace", "dim": 1}, "weight": "0", "mode": "grid",
        "grid": {"axes": [{"coord": 1, "part": "re", "min": -2, "max": 2, "steps": 3},
                          {"coord": 1, "part": "im", "min": -1, "max": 1, "steps": 2}]},
    })
    code, out, _ = run(["grid", "--config", cfg], capsys)
    head, rows = read_csv(out)
    assert code == 0 and len(rows) == 6
    for r in rows:
        for col in ("lower", "family_upper", "poletsky_upper"):
            assert abs(float(r[head.index(col)])) <= 1e-9


def test_grid_two_steps_gives_two_rows(tmp_path, capsys):
    cfg = write(tmp_path, {"domain": BALL, "weight": "0", "mode": "grid",
                           "grid": {"axes": [{"min": 1.5, "max": 2.5, "steps": 2}]}})
    code, out, _ = run(["grid", "--config", cfg], capsys)
    head, rows = read_csv(out)
    assert code == 0 and len(rows) == 2
    assert head[:2] == ["re_z1", "im_z1"] and [float(r[0]) for r in rows] == [1.5, 2.5]


@pytest.mark.slow
def test_grid_reference_column(tmp_path, capsys):
    out_path = tmp_path / "grid.csv"
    cfg = write(tmp_path, {
        "domain": BALL, "weight": "0", "mode": "grid", "output": str(out_path),
        "reference": "max(log(abs(z1)), 0)",
        "grid": {"axes": [{"min": -3, "max": 3, "steps": 61}]},
    })
    code, _, _ = run(["grid", "--config", cfg], capsys)
    head, rows = read_csv(out_path.read_text())
    assert code == 0 and len(rows) == 61
    assert max(float(r[head.index("abs_error")]) for r in rows) <= 0.02


def test_rerun_is_byte_identical(tmp_path, capsys):
    base = {"domain": ANN, "weight": "abs(z1)", "mode": "grid", "seed": 4,
            "grid": {"axes": [{"min": 0.0, "max": 3.0, "steps": 2}]}}
    texts = []
    for k in range(2):
        p = tmp_path / f"out{k}.csv"
        cfg = write(tmp_path, dict(base, output=str(p)), f"job{k}.json")
        assert run(["grid", "--config", cfg], capsys)[0] == 0
        texts.append(p.read_bytes())
    assert texts[0] == texts[1]


@pytest.mark.parametrize(
    "cfg",
    [
        {"domain": {"shape": "hexagon"}, "weight": "0", "z": [1]},
        {"domain": BALL, "weight": "re(z1", "z": [1]},
        {"domain": BALL, "weight": "re(z2)", "z": [1]},
        {"domain": BALL, "weight": "0", "z": [1, 2]},
        {"domain": BALL, "weight": "0"},
        {"domain": BALL, "weight": "0", "solver": {"iters": 3}, "z": [1]},
        {"weight": "0", "z": [1]},
    ],
    ids=["shape", "parse", "weight-dim", "point-dim", "no-z", "solver-key", "no-domain"],
)
def test_eval_config_errors(tmp_path, capsys, cfg):
    code, _, err = run(["eval", "--config", write(tmp_path, cfg)], capsys)
    assert code == 2 and "configuration error" in err


@pytest.mark.parametrize(
    "grid",
    [{"axes": [{"coord": 2, "min": 0, "max": 1, "steps": 3}]},
     {"axes": [{"min": 0, "max": 1, "steps": 1}]},
     {"axes": [{"part": "abs", "min": 0, "max": 1, "steps": 3}]},
     {"axes": []}],
    ids=["coord", "steps", "part", "empty"],
)
def test_grid_config_errors(tmp_path, capsys, grid):
    cfg = write(tmp_path, {"domain": BALL, "weight": "0", "mode": "grid", "grid": grid})
    assert run(["grid", "--config", cfg], capsys)[0] == 2


def test_missing_and_invalid_files(tmp_path, capsys):
    assert run(["eval", "--config", str(tmp_path / "none.json")], capsys)[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["eval", "--config", str(bad)], capsys)[0] == 2


def test_budget_exhaustion_marks_csv(tmp_path, capsys):
    cfg = write(tmp_path, {"domain": ANN, "weight": "0", "mode": "grid",
                           "solver": {"max_evaluations": 5},
                           "grid": {"axes": [{"min": 0, "max": 1, "steps": 3}]}})
    code, out, _ = run(["grid", "--config", cfg], capsys)
    assert code == 1
    assert out.strip().splitlines()[-1].startswith(FAILURE_MARKER)


def test_sandwich_sweep_mode(tmp_path, capsys):
    cfg = write(tmp_path, {"domain": BALL, "weight": "0", "mode": "sandwich-sweep", "z": [[2.0], [0.5]]})
    code, out, _ = run(["grid", "--config", cfg], capsys)
    head, rows = read_csv(out)
    assert code == 0 and len(rows) == 2


def test_selftest_passes(capsys):
    code, out, _ = run(["selftest", "--seed", "0"], capsys)
    assert code == 0 and "suites passed" in out


@pytest.mark.slow
@pytest.mark.parametrize("seed", [1, 2, 3, 4, 5])
def test_selftest_seeds(capsys, seed):
    assert run(["selftest", "--seed", str(seed)], capsys)[0] == 0


def test_selftest_injected_failure(capsys):
    code, out, _ = run(["selftest", "--inject-failure", "jensen"], capsys)
    assert code == 1 and "FAIL" in out


def test_console_module_entry():
    res = subprocess.run([sys.executable, "-m", "extremal", "selftest", "--scale", "0.2"],
                         capture_output=True, text=True)
    assert res.returncode == 0


def test_parse_complex_list():
    assert parse_complex_list("1+2i, 0.5, -3j") == [1 + 2j, 0.5, -3j]
    with pytest.raises(ConfigError):
        parse_complex_list("1+2x")


def test_grid_points_row_major():
    job = JobConfig.from_dict({"domain": BALL, "weight": "0", "mode": "grid",
                              "grid": {"axes": [{"min": 0, "max": 1, "steps": 2},
                                                {"part": "im", "min": 0, "max": 1, "steps": 2}]}})
    assert grid_points(job, 1)[:, 0].tolist() == [0, 1j, 1, 1 + 1j]
