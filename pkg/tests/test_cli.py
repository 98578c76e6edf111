import csv
import json
import subprocess
import sys

import pytest

from casimir_aqft.cli import main


def write(tmp_path, cfg, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(cfg))
    return str(p)


def read_csv(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


SLAB = {"geometry": {"type": "slab", "d": 1.0}, "state": {"type": "vacuum"},
        "z_grid": {"start": 0.1, "stop": 0.9, "num": 9}}


def test_wick_square_slab_midpoint(tmp_path):
    out = tmp_path / "out"
    assert main(["--config", write(tmp_path, SLAB), "--out", str(out),
                 "--command", "wick-square"]) == 0
    rows = read_csv(out / "wick-square.csv")
    mid = [r for r in rows if float(r["z"]) == pytest.approx(0.5)][0]
    assert abs(float(mid["value"]) + 1 / 24) <= float(mid["err"])
    svg = (out / "wick-square.svg").read_text()
    assert svg.lstrip().startswith("<?xml") and "<svg" in svg


def test_stress_half_space_conformal_zero(tmp_path):
    cfg = {"geometry": {"type": "half_space"}, "z_grid": [0.25, 0.5, 1.0]}
    out = tmp_path / "o"
    assert main(["--config", write(tmp_path, cfg), "--out", str(out), "--command", "stress"]) == 0
    rows = read_csv(out / "stress.csv")
    assert len(rows) == 12
    assert all(abs(float(r["value"])) <= 1e-10 for r in rows)


def test_convergence_monotone(tmp_path):
    cfg = dict(SLAB, n_values=[1, 2, 4, 8, 16, 32, 64, 128])
    out = tmp_path / "o"
    assert main(["--config", write(tmp_path, cfg), "--out", str(out),
                 "--command", "convergence"]) == 0
    vals = [float(r["value"]) for r in read_csv(out / "convergence.csv")]
    assert all(b < a for a, b in zip(vals, vals[1:]))
    assert (out / "convergence.svg").exists()


def test_output_is_byte_reproducible(tmp_path):
    path = write(tmp_path, SLAB)
    for sub in ("a", "b"):
        assert main(["--config", path, "--out", str(tmp_path / sub), "--command", "stress"]) == 0
    for name in ("stress.csv", "stress.svg"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_csv_has_17_digits_and_err(tmp_path):
    cfg = dict(SLAB, points=[[[0.3, 0.1, -0.2, 0.25], [0.0, 0.4, 0.1, 0.7]]])
    out = tmp_path / "o"
    assert main(["--config", write(tmp_path, cfg), "--out", str(out),
                 "--command", "twopoint"]) == 0
    row = read_csv(out / "twopoint.csv")[0]
    assert float(row["value_re"]) == pytest.approx(0.0506808533475705197, rel=1e-12)
    assert len(row["value_re"].lstrip("-").replace(".", "").lstrip("0")) >= 16
    assert float(row["err"]) < 1e-12


def test_positivity_command(tmp_path):
    cfg = dict(SLAB, test_functions=[{"center": [0, 0, 0, 0.4], "radii": [0.3, 0.3, 0.3, 0.2]}])
    out = tmp_path / "o"
    assert main(["--config", write(tmp_path, cfg), "--out", str(out),
                 "--command", "positivity"]) == 0
    row = read_csv(out / "positivity.csv")[0]
    assert float(row["value"]) > 0


def test_invalid_config_names_key(tmp_path, capsys):
    bad = {"geometry": {"type": "slab", "width": 1.0}}
    assert main(["--config", write(tmp_path, bad), "--command", "wick-square"]) == 1
    assert "geometry.width" in capsys.readouterr().err
    missing = {"state": {"type": "kms"}}
    assert main(["--config", write(tmp_path, missing), "--command", "wick-square"]) == 1
    assert "state.beta" in capsys.readouterr().err
    assert main(["--config", write(tmp_path, SLAB), "--command", "nothing"]) == 1
    assert main(["--config", str(tmp_path / "absent.json"), "--command", "stress"]) == 1


def test_accuracy_error_exit_code(tmp_path):
    cfg = dict(SLAB, n_max=8, tail_tol=1e-15,
               points=[[[0.0, 0.0, 0.0, 0.5], [0.3, 0.0, 0.0, 0.4]]])
    assert main(["--config", write(tmp_path, cfg), "--out", str(tmp_path),
                 "--command", "twopoint"]) == 2


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "casimir_aqft", "--config", write(tmp_path, SLAB),
                          "--out", str(tmp_path), "--command", "wick-square"],
                         capture_output=True, text=True)
    assert res.returncode == 0
    assert res.stdout.startswith("wick-square: 9 rows")
