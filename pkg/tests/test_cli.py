import json
import os

import pytest

from conicpinch import io as cio
from conicpinch.cli import main


def run(tmp_path, *argv, name="out"):
    out = tmp_path / name
    code = main(list(argv) + ["--out", str(out)])
    return code, out


def _json(path):
    with open(path) as fh:
        return json.load(fh)


def test_classify(tmp_path, capsys):
    code, out = run(tmp_path, "classify", "--divisor", "[-0.8, -0.3, -0.3]")
    assert code == 0
    doc = _json(out / "classify.json")
    assert doc["classification"] == "supercritical"
    assert doc["schema_version"] == cio.SCHEMA_VERSION
    man = _json(out / "manifest.json")
    assert man["exit_status"] == 0 and man["outputs"] == ["classify.json"]
    assert "supercritical" in capsys.readouterr().out


def test_rho0(tmp_path):
    code, out = run(tmp_path, "rho0", "--divisor", "[-0.5]")
    assert code == 0
    assert _json(out / "rho0.json")["rho0"] == 0.25


def test_divisor_file(tmp_path):
    f = tmp_path / "d.json"
    f.write_text(json.dumps([-0.8, -0.3, -0.3]))
    code, out = run(tmp_path, "rho0", "--divisor-file", str(f))
    assert code == 0
    assert _json(out / "rho0.json")["rho0"] == pytest.approx(0.25)


@pytest.mark.parametrize("argv", [
    ["rho0", "--divisor", "[0.5]"],
    ["rho0", "--divisor", "nonsense"],
    ["football", "--alpha", "-0.6", "--beta", "-0.2"],
    ["football"],
    ["profile", "--alpha", "0", "--beta", "-0.5", "--t-step", "0"],
    ["sweep", "--divisor", "[-0.8, -0.3, -0.3]", "--deltas", "a,b"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    code, out = run(tmp_path, *argv)
    assert code == 2
    assert _json(out / "manifest.json")["exit_status"] == 2


def test_argparse_errors_exit_2(tmp_path):
    assert main(["nosuchcommand"]) == 2
    assert main([]) == 2
    assert main(["rho0", "--divisor", "[-0.5]", "--jobs", "x"]) == 2


def test_football_deterministic(tmp_path):
    argv = ["football", "--alpha", "0", "--beta", "-0.5", "--profile"]
    c1, o1 = run(tmp_path, *argv, name="a")
    c2, o2 = run(tmp_path, *argv, name="b")
    assert c1 == c2 == 0
    for name in ("football.json", "profile.csv", "profile.svg"):
        assert (o1 / name).read_bytes() == (o2 / name).read_bytes()
    doc = _json(o1 / "football.json")
    assert doc["pinching"]["rho"] == pytest.approx(0.25, abs=1e-12)
    assert doc["A_at_seam"] == pytest.approx(2 * 3.141592653589793, rel=1e-9)


def test_curvature_grid(tmp_path):
    code, out = run(tmp_path, "curvature", "--alpha", "0", "--beta", "-0.5",
                    "--grid-spacing", "0.03125", "--slack", "1e-3")
    assert code == 0


def test_curvature_coarse_grid_frozen(tmp_path):
    code, out = run(tmp_path, "curvature", "--alpha", "0", "--beta", "-0.5",
                    "--grid-spacing", "0.25", "--slack", "0")
    assert code == 0
    rho = _json(out / "curvature.json")["pinching"]["rho"]
    assert rho == pytest.approx(0.22831408095177358, rel=1e-9)


def test_verify_football(tmp_path):
    code, out = run(tmp_path, "verify", "--alpha", "-0.3", "--beta", "-0.6")
    assert code == 0
    files = os.listdir(out)
    assert "manifest.json" in files


def test_solve_and_reload(tmp_path):
    code, out = run(tmp_path, "solve", "--divisor", "[-0.5, -0.5]", "--K0", "0.25",
                    "--ds", "0.0625", "--n-theta", "16", name="s")
    assert code == 0
    grid = out / "solution.grid"
    assert grid.exists()
    code, out2 = run(tmp_path, "curvature", "--grid", str(grid), "--slack", "1e-3", name="c")
    assert code == 0


def test_solve_supercritical_is_check_failure(tmp_path):
    code, _ = run(tmp_path, "solve", "--divisor", "[-0.8, -0.3, -0.3]", "--ds", "0.0625",
                  "--n-theta", "16")
    assert code == 1


def test_solve_disk(tmp_path):
    code, out = run(tmp_path, "solve", "--disk", "--s", "-0.5", "--n-r", "64", "--n-theta", "32")
    assert code == 0


def test_config_toml_and_json(tmp_path):
    t = tmp_path / "c.toml"
    t.write_text('[football]\nalpha = -0.3\nbeta = -0.6\n')
    code, out = run(tmp_path, "football", "--config", str(t), name="t")
    assert code == 0
    assert _json(out / "manifest.json")["config"]["alpha"] == -0.3
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"alpha": -0.3, "beta": -0.6}))
    code, out = run(tmp_path, "football", "--config", str(j), "--beta", "-0.7", name="j")
    assert code == 0
    assert _json(out / "manifest.json")["config"]["beta"] == -0.7


def test_config_unknown_key(tmp_path):
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"alpha": -0.3, "bogus": 1}))
    code, _ = run(tmp_path, "football", "--config", str(j))
    assert code == 2


def test_construct(tmp_path):
    code, out = run(tmp_path, "construct", "--divisor", "[-0.5]", "--delta", "0.04")
    assert code == 0
    cert = _json(out / "certificate.json")
    assert cert["pass"] and cert["rho"] < 0.25
    assert cert["schema_version"] == cio.SCHEMA_VERSION
    for name in ("u0.grid", "u1.grid", "u2.grid", "curvature.svg"):
        assert (out / name).exists()


def test_sweep_and_converge_single_point(tmp_path):
    code, out = run(tmp_path, "sweep", "--divisor", "[-0.5]", "--deltas", "0.04,0.02")
    assert code == 0
    head, rows = cio.read_csv(out / "sweep.csv")
    assert head[0] == "param" and [r[0] for r in rows] == [0.04, 0.02]
    code, out = run(tmp_path, "converge", "--divisor", "[-0.5]", "--deltas", "0.04,0.02",
                    name="conv")
    assert code == 0
    head, rows = cio.read_csv(out / "converge.csv")
    assert rows[1][4] < rows[0][4]
    assert (out / "converge.csv").exists() and (out / "overlay.svg").exists()
