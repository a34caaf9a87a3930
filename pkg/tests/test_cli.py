import json
import subprocess
import sys

import numpy as np
import pytest

from pendulum_eigen.cli import EXIT_CONFIG, EXIT_OK, EXIT_SINGULAR, dumps, main, parse_params


def run(tmp_path, *args):
    return main(list(args) + ["--out", str(tmp_path)])


def load(tmp_path, name):
    return json.loads((tmp_path / name).read_text())


def test_solve_sech_well(tmp_path):
    assert run(tmp_path, "solve", "--potential", "sech_well", "--param", "lam=0.8") == EXIT_OK
    rep = load(tmp_path, "spectrum.json")
    (lv,) = rep["levels"]
    assert abs(lv["E"] - 0.64) < 1e-8 and lv["nodes"] == 0 and lv["jump"] == 1
    header = (tmp_path / "eigenfunction_0.csv").read_text().splitlines()[0]
    assert header == "x,psi,alpha,log_rho"


def test_solve_constant_is_empty(tmp_path):
    assert run(tmp_path, "solve", "--potential", "constant") == EXIT_OK
    assert load(tmp_path, "spectrum.json")["levels"] == []


def test_solve_harmonic(tmp_path):
    assert run(tmp_path, "solve", "--potential", "linear_harmonic", "--lambda-max", "3.1") == 0
    E = [lv["E"] for lv in load(tmp_path, "spectrum.json")["levels"]]
    assert np.max(np.abs(np.array(E) - [0, 2, 4, 6, 8])) < 1e-8


@pytest.mark.parametrize("name,params,step", [("sech_well", ["lam=0.8"], 0.8),
                                              ("eq10_example", [], 2 ** -0.5),
                                              ("constant", [], None)])
def test_winding_scan(tmp_path, name, params, step):
    args = ["winding-scan", "--potential", name]
    for p in params:
        args += ["--param", p]
    assert run(tmp_path, *args) == EXIT_OK
    lines = (tmp_path / "winding_scan.csv").read_text().splitlines()
    assert lines[0] == "lambda,W,count" and len(lines) == 201
    data = np.loadtxt(tmp_path / "winding_scan.csv", delimiter=",", skiprows=1)
    lam, count = data[:, 0], data[:, 2]
    if step is None:
        assert np.all(count == 0)
    else:
        assert np.all(np.diff(count) >= 0) and count[-1] - count[0] == 1
        jump = np.argmax(count > 0)
        assert lam[jump - 1] < step < lam[jump]


def test_count(tmp_path):
    assert run(tmp_path, "count", "--potential", "eq14_generated") == EXIT_OK
    assert load(tmp_path, "count.json")["bound_states"] == 1


@pytest.mark.parametrize("args,key,value", [
    (["--curve", "eq10"], "target_E", 0.5),
    (["--curve", "sech", "--param", "lam=0.5"], "target_E", 0.25),
    (["--curve", "eq14"], "bound_states", 1),
])
def test_construct(tmp_path, args, key, value):
    assert run(tmp_path, "construct", *args) == EXIT_OK
    ver = load(tmp_path, "construct.json")["verification"]
    assert ver["passed"] and abs(ver[key] - value) < 1e-12
    assert (tmp_path / "constructed.csv").read_text().startswith("x,A,V,V_partner\n")


def test_construct_eq10_matches_closed_form_potential(tmp_path):
    from conftest import eq11_potential
    run(tmp_path, "construct", "--curve", "eq10")
    data = np.loadtxt(tmp_path / "constructed.csv", delimiter=",", skiprows=1)
    inner = np.abs(data[:, 0]) < 8
    assert np.max(np.abs(data[inner, 2] - eq11_potential(data[inner, 0]))) < 1e-9


def test_singular_construction_exit_code(tmp_path):
    assert run(tmp_path, "construct", "--curve", "cos_squared", "--param", "lam=1") == EXIT_SINGULAR


def test_zs_check(tmp_path):
    assert run(tmp_path, "zs-check", "--potential", "sech_well", "--param", "lam=0.8") == 0
    assert load(tmp_path, "zs_check.json")["passed"]


def test_oracle(tmp_path):
    assert run(tmp_path, "oracle", "--potential", "linear_harmonic", "--M", "4000") == 0
    levels = load(tmp_path, "oracle.json")["levels"]
    assert [lv["nodes"] for lv in levels] == [0, 1, 2, 3, 4]
    assert max(abs(lv["E"] - 2 * i) for i, lv in enumerate(levels)) < 1e-3


@pytest.mark.parametrize("args", [
    ["solve"],
    ["solve", "--potential", "nonexistent"],
    ["solve", "--potential", "sech_well", "--param", "lam=1.3"],
    ["solve", "--potential", "linear_harmonic"],
    ["solve", "--potential", "constant", "--tol", "-1"],
    ["solve", "--potential", "constant", "--L", "0"],
    ["construct"],
])
def test_config_errors(tmp_path, args):
    assert run(tmp_path, *args) == EXIT_CONFIG


def test_config_file_and_overrides(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"potential": "sech_well", "params": {"lam": 0.3}, "tol": 1e-9}))
    assert run(tmp_path, "solve", "--config", str(cfg), "--param", "lam=0.5") == 0
    rep = load(tmp_path, "spectrum.json")
    assert rep["params"] == {"lam": 0.5} and rep["tol"] == 1e-9
    assert abs(rep["levels"][0]["E"] - 0.25) < 1e-8
    cfg.write_text(json.dumps({"potentail": "x"}))
    assert run(tmp_path, "solve", "--config", str(cfg)) == EXIT_CONFIG


def test_reports_are_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        main(["solve", "--potential", "eq10_example", "--out", str(d)])
    assert (a / "spectrum.json").read_bytes() == (b / "spectrum.json").read_bytes()
    assert (a / "eigenfunction_0.csv").read_bytes() == (b / "eigenfunction_0.csv").read_bytes()


def test_float_format():
    assert dumps({"x": 0.1, "n": [1, 2.5], "ok": True}) == (
        '{\n  "x": 0.10000000000000001,\n  "n": [\n    1,\n    2.5\n  ],\n  "ok": true\n}\n')
    assert parse_params(["lam=0.5", "name=abc"]) == {"lam": 0.5, "name": "abc"}


def test_verify_empty_selection_passes_with_warning(tmp_path):
    cfg = tmp_path / "empty.json"
    cfg.write_text('{"catalog": []}')
    assert run(tmp_path, "verify", "--config", str(cfg)) == EXIT_OK
    rep = load(tmp_path, "verify.json")
    assert rep["passed"] and rep["warnings"]


def test_verify_coarse_tolerance_fails_residuals(tmp_path):
    cfg = tmp_path / "coarse.json"
    cfg.write_text(json.dumps({"catalog": [{"potential": "eq10_example"},
                                           {"potential": "linear_harmonic",
                                            "lambda_max": 3.1}]}))
    assert run(tmp_path, "verify", "--config", str(cfg), "--tol", "1e-2") != EXIT_OK
    rep = load(tmp_path, "verify.json")
    for entry in rep["entries"]:
        assert entry["suites"]["monotonicity"]["passed"]
        assert not entry["suites"]["residual"]["passed"]


def test_verify_full_catalog(tmp_path):
    assert run(tmp_path, "verify") == EXIT_OK
    rep = load(tmp_path, "verify.json")
    assert len(rep["entries"]) == 5 and rep["passed"]


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "pendulum_eigen", "count", "--potential",
                          "sech_well", "--param", "lam=0.5", "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0 and out.stdout.strip() == "1"
