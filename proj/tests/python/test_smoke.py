import math

import numpy as np
import pytest

import fracwkb


def test_suites_and_keys():
    assert fracwkb.suite_names() == ["phase", "kernel", "dispersive", "strichartz", "nlfs", "nlfw", "audit"]
    keys = {name for name, _, _ in fracwkb.suite_keys("strichartz")}
    assert {"sigma", "p", "q", "d", "hmin", "hmax", "interval", "metric.kind", "box.length"} <= keys


def test_config_rejected_before_running():
    with pytest.raises(fracwkb.ConfigError, match="sigma"):
        fracwkb.run_suite("phase", {"sigma": 1})
    with pytest.raises(fracwkb.ConfigError, match="unknown key"):
        fracwkb.resolve_config("nlfs", {"bogus": 3})
    with pytest.raises(fracwkb.ConfigError, match="admissible"):
        fracwkb.resolve_config("strichartz", {"p": 4, "q": 4})


def test_classify_pair():
    a = fracwkb.classify_pair(2, 6, 3, 2.0)
    assert a["valid"] and a["gamma"] == 0.0 and a["total"] == 0.5
    assert not fracwkb.classify_pair(2, math.inf, 2, 2.0)["valid"]
    assert fracwkb.tile_interval(0, 2, 0.25, 2.0) == 4


def test_cutoff_and_symbol():
    v = fracwkb.cutoff(0.25, 4, 0.5, 2, np.array([1.0, 5.0, 0.3]))
    assert v[0] == 1.0 and v[1] == 0.0 and 0.0 < v[2] < 1.0
    assert fracwkb.principal_symbol(0.5, 0.0, 1.0) == pytest.approx(1.5)


def test_flat_phase_and_flow():
    for sigma in (0.5, 2.0, 3.0):
        p = fracwkb.phase(sigma, 0.0, 0.3, 0.2, 1.1)
        assert p["S"] == pytest.approx(0.2 * 1.1 + 0.3 * 1.1**sigma, abs=1e-12)
        X, Xi = fracwkb.flow(sigma, 0.0, 0.3, 0.2, 1.1)
        assert X == pytest.approx(0.2 - 0.3 * sigma * 1.1 ** (sigma - 1), abs=1e-12)
        assert Xi == 1.1


def test_propagate_single_mode():
    n, L = 64, 2 * math.pi
    x = -L / 2 + L * np.arange(n) / n
    u = np.exp(3j * x)
    v = fracwkb.propagate(u, L, 2.0, 0.4)
    assert np.max(np.abs(v - np.exp(1j * 0.4 * 9) * u)) < 1e-12


def test_nlfs_conserves_mass():
    n, L = 32, 2 * math.pi
    x = -L / 2 + L * np.arange(n) / n
    u0 = 0.6 + 0.3 * np.cos(x) + 0.2j * np.sin(2 * x)
    out = fracwkb.solve_nlfs(u0, L, T=0.5)
    mass = out["monitors"][:, 1]
    assert np.max(np.abs(mass - mass[0])) < 1e-10
    assert out["final"].shape == (n,)


def test_phase_suite_report(tmp_path):
    r = fracwkb.run_suite("phase", {"t.steps": 10}, str(tmp_path / "a"))
    assert r["passed"]
    assert ("HJ residual max", "0 (exact)") in r["facts"]
    table = r["tables"]["phase"]
    assert table["columns"] == ["t", "x", "xi", "S", "residual"]
    assert table["data"].shape[1] == 5
    assert "HJ residual max = 0 (exact)" in (tmp_path / "a" / "phase_report.txt").read_text()


def test_outputs_are_deterministic(tmp_path):
    cfg = {"data.kind": "random", "seed": 7, "T": 0.2, "picard.T": 0.1, "continuation.T": 0}
    fracwkb.run_suite("nlfs", cfg, str(tmp_path / "a"))
    fracwkb.run_suite("nlfs", cfg, str(tmp_path / "b"))
    for name in ("nlfs_monitors.csv", "nlfs_final_state.csv", "nlfs_picard.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
