import json
import math

import numpy as np
import pytest

from fluxcirc.cli import main
from fluxcirc.model import FLUX_QUANTUM, default_physical_params


def run(*args):
    return main([str(a) for a in args])


def read_csv(path):
    lines = path.read_text().splitlines()
    header = lines[0].split(",")
    rows = [[float(v) for v in line.split(",")] for line in lines[1:]]
    return header, rows


def test_potential_grid_smoke(tmp_path):
    assert run("--out", tmp_path, "potential-grid", "--resolution", 3) == 0
    header, rows = read_csv(tmp_path / "potential_grid.csv")
    assert header == ["phi_plus", "phi_minus", "u_eff"]
    assert len(rows) == 9
    manifest = json.loads((tmp_path / "potential-grid.manifest.json").read_text())
    assert manifest["command"] == "potential-grid"
    assert str(tmp_path / "potential_grid.csv") in manifest["outputs"]
    assert manifest["parameters"]["coupler"]["frustration"] == 0.5


def test_potential_grid_zero_bias_symmetry(tmp_path):
    assert run("--out", tmp_path, "potential-grid", "--resolution", 21, "--bias", 0, 0, 0) == 0
    _, rows = read_csv(tmp_path / "potential_grid.csv")
    values = {(r[0], r[1]): r[2] for r in rows}
    for (pp, pm), u in values.items():
        assert values[(pp, -pm)] == pytest.approx(u, abs=1e-14)


def test_potential_grid_tilted_double_wells(tmp_path):
    # reference bias tilts the wells: two local minima at distinct depths
    assert run("--out", tmp_path, "potential-grid", "--resolution", 201) == 0
    _, rows = read_csv(tmp_path / "potential_grid.csv")
    n = 201
    grid = np.array([r[2] for r in rows]).reshape(n, n)
    interior = grid[1:-1, 1:-1]
    minima = (
        (interior < grid[:-2, 1:-1])
        & (interior < grid[2:, 1:-1])
        & (interior < grid[1:-1, :-2])
        & (interior < grid[1:-1, 2:])
    )
    depths = sorted(interior[minima])
    assert len(depths) >= 2
    assert depths[1] - depths[0] > 1e-3  # degeneracy is broken by the drive


def test_fig3_sweep_cli(tmp_path):
    assert run("--out", tmp_path, "fig3-sweep", "--points", 21) == 0
    header, rows = read_csv(tmp_path / "sweep.csv")
    assert header == ["u2_over_u1", "u_min", "phi_plus_min", "phi_minus_min", "u3"]
    assert len(rows) == 21
    assert rows[0][0] == -1.0 and rows[-1][0] == 0.0
    u_min = [r[1] for r in rows]
    assert all(b > a for a, b in zip(u_min, u_min[1:]))


def test_circulator_report_cli(tmp_path):
    assert run("--out", tmp_path, "circulator-report", "--f-steps", 5) == 0
    data = json.loads((tmp_path / "circulator_report.json").read_text())
    assert data["circulation"]["selected_pair"] == [1, 2]
    assert data["circulation"]["dark_port"] == 3
    assert abs(data["circulation"]["residual_current_into_dark_port"]) < 1e-8
    assert data["robustness_all_ok"]
    assert len(data["robustness"]) == 5


def test_coeffs_cli(tmp_path):
    assert run("--out", tmp_path, "coeffs", "--n", 4, "--k", 1) == 0
    data = json.loads((tmp_path / "coeffs.json").read_text())
    assert data["matrix"][0] == [0, 3, 2, 1]
    assert data["selective"] is False
    assert data["current_support_size"] > 2


def test_evolve_cli_short_run(tmp_path):
    assert (
        run(
            "--out", tmp_path, "evolve",
            "--g-over-omega", 0.02, "--t-final", 30, "--dt", 0.1,
        )
        == 0
    )
    header, rows = read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "n1", "n2", "n3", "sigma_z", "norm"]
    assert rows[0][1] == pytest.approx(1.0)  # photon starts in the source mode
    assert all(abs(r[5] - 1.0) < 1e-9 for r in rows)
    assert all(abs(r[3]) < 1e-12 for r in rows)  # dark mode stays empty


def test_route_cli(tmp_path):
    assert run(
        "--out", tmp_path, "route", "--rows", 3, "--cols", 3, "--from", 0, "--to", 20,
        "--write-lattice",
    ) == 0
    data = json.loads((tmp_path / "route.json").read_text())
    assert data["violations"] == []
    assert data["gate_count"] >= 1
    actions = [s["action"] for s in data["schedule"]]
    assert actions[:3] == ["engage", "gate", "disengage"]
    lattice = json.loads((tmp_path / "lattice.json").read_text())
    assert lattice["sites"] == 27


def test_outputs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for out in (a, b):
        assert run("--out", out, "fig3-sweep", "--points", 11) == 0
        assert run("--out", out, "coeffs", "--n", 3, "--k", 1) == 0
    assert (a / "sweep.csv").read_bytes() == (b / "sweep.csv").read_bytes()
    assert (a / "coeffs.json").read_bytes() == (b / "coeffs.json").read_bytes()
    # manifests match except for wall time
    for name in ("fig3-sweep.manifest.json", "coeffs.manifest.json"):
        ma = json.loads((a / name).read_text())
        mb = json.loads((b / name).read_text())
        ma.pop("wall_time_s"), mb.pop("wall_time_s")
        ma["outputs"] = [p.replace(str(a), "") for p in ma["outputs"]]
        mb["outputs"] = [p.replace(str(b), "") for p in mb["outputs"]]
        assert ma == mb


def test_config_error_exit_code(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{\"base_junction_energy\": 1.0}")
    assert run("--config", bad, "--out", tmp_path, "fig3-sweep") == 2
    assert run("--out", tmp_path, "potential-grid", "--resolution", 1) == 2
    assert run("--out", tmp_path, "route", "--rows", 1, "--cols", 3, "--from", 0, "--to", 8) == 2


def test_numerical_failure_exit_code(tmp_path):
    # reduce junction 1 to exactly half strength: the double well collapses
    params = default_physical_params().to_dict()
    params["squid_fluxes"] = [
        (FLUX_QUANTUM / math.pi) * math.acos(0.5),
        0.0,
        0.0,
    ]
    cfg_path = tmp_path / "collapsed.json"
    cfg_path.write_text(json.dumps(params))
    assert run("--config", cfg_path, "--out", tmp_path, "fig3-sweep", "--points", 3) == 3
