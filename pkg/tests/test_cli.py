from __future__ import annotations

import csv
import json
import subprocess
import sys
from dataclasses import replace

import pytest

from thinlayer import checks, cli


@pytest.fixture(autouse=True)
def workdir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    return tmp_path


def run(*argv):
    return cli.main(list(argv) + ["--quiet"])


def read_csv(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def load(path):
    with open(path) as fh:
        return json.load(fh)


# ------------------------------------------------------------ curvature


@pytest.mark.parametrize("surface,params,at,want", [
    ("catenary", ["a=1"], "0,0", -0.125),
    ("sphere", ["R=1"], "0.5,0.5", 0.0),
    ("paraboloid", ["a=1"], "1,0", -0.015625),
])
def test_curvature_examples(surface, params, at, want):
    args = ["curvature", "--surface", surface, "--at", at, "--out", "c"]
    for p in params:
        args += ["--param", p]
    assert run(*args) == 0
    rows = read_csv("c.csv")
    assert rows[0] == ["u1", "u2", "k1", "k2", "K", "KG", "vs_coeff"]
    assert float(rows[1][6]) == pytest.approx(want, abs=1e-14)
    summary = load("c.summary.json")
    assert summary["points"][0]["vs_coeff"] == pytest.approx(want, abs=1e-14)
    assert list(summary["points"][0]) == rows[0]


def test_curvature_grid_and_fd():
    assert run("curvature", "--surface", "cylinder", "--param", "R=2", "--grid", "3", "--fd", "--out", "c") == 0
    rows = read_csv("c.csv")[1:]
    assert len(rows) == 9
    for r in rows:
        assert float(r[6]) == pytest.approx(-1 / 32, rel=1e-6)


def test_curvature_spec_file():
    with open("s.json", "w") as fh:
        json.dump({"kind": "monge-cartesian", "params": {"eps": 0.2}, "expression": "eps*x*y"}, fh)
    assert run("curvature", "--spec", "s.json", "--at", "0,0", "--out", "c") == 0
    # H = eps x y at the origin: k = +-eps, V = -eps^2/2
    assert float(read_csv("c.csv")[1][6]) == pytest.approx(-0.02, rel=1e-12)
    man = load("c.manifest.json")
    assert man["spec"]["expression"] == "eps*x*y"
    assert any("unary minus" in d for d in man["deviations"])


def test_curvature_polar_expression():
    assert run("curvature", "--surface", "monge-polar", "--expr", "rho^2/2", "--param", "rho_max=2",
               "--at", "1,0", "--out", "c") == 0
    assert float(read_csv("c.csv")[1][6]) == pytest.approx(-0.015625, rel=1e-12)


@pytest.mark.parametrize("argv", [
    ["--surface", "klein-bottle"],
    ["--surface", "torus", "--param", "R=2"],
    ["--surface", "sphere", "--param", "R=-1"],
    ["--surface", "sphere", "--param", "R"],
    ["--surface", "sphere", "--param", "R=abc"],
    ["--surface", "monge-cartesian"],
    ["--surface", "monge-cartesian", "--expr", "x+"],
    ["--surface", "monge-cartesian", "--expr", "x + q"],
    ["--surface", "sphere", "--param", "R=1", "--param", "Q=2"],
    ["--spec", "missing.json"],
    [],
])
def test_curvature_spec_errors(argv):
    assert run("curvature", *argv, "--at", "0.1,0.1") == 2


def test_curvature_bad_point_syntax():
    assert run("curvature", "--surface", "plane", "--at", "1;2") == 2


def test_curvature_singular_point():
    assert run("curvature", "--surface", "paraboloid", "--param", "a=1", "--at", "0,0") == 3
    assert run("curvature", "--surface", "sphere", "--param", "R=1", "--at", "0,1") == 3
    assert run("curvature", "--surface", "plane", "--at", "5,0") == 3


def test_manifest_contents():
    assert run("curvature", "--surface", "sphere", "--param", "R=2", "--at", "1,1", "--out", "m") == 0
    man = load("m.manifest.json")
    for key in ("command", "argv", "spec", "grid", "solver", "versions", "backend", "deviations"):
        assert key in man
    assert man["command"] == "curvature"
    assert man["spec"] == {"kind": "sphere", "params": {"R": 2.0}, "expression": None}
    assert "numpy" in man["versions"] and "thinlayer" in man["versions"]
    assert load("m.summary.json")["manifest"] == "m.manifest.json"


def test_csv_is_crlf_with_header():
    run("curvature", "--surface", "plane", "--at", "0.1,0.2", "--out", "c")
    with open("c.csv", "rb") as fh:
        raw = fh.read()
    assert raw.startswith(b"u1,u2,k1")
    assert raw.count(b"\r\n") == 2


def test_potential_map(workdir):
    assert run("potential-map", "--surface", "torus", "--param", "R=2", "--param", "r=0.5",
               "--grid", "6", "--plot-stub", "--out", "pm") == 0
    rows = read_csv("pm.csv")
    assert rows[0] == ["u1", "u2", "x", "y", "z", "vs_coeff"]
    assert len(rows) == 37
    assert all(float(r[5]) <= 0 for r in rows[1:])
    assert (workdir / "pm.plot.py").exists()
    assert load("pm.summary.json")["samples"] == 36


# ---------------------------------------------------------------- solve


def test_solve_catenary(workdir):
    assert run("solve", "catenary", "--a", "1", "--out", "s") == 0
    summary = load("s.summary.json")
    assert len(summary["bound_states"]) == 1
    state = summary["bound_states"][0]
    assert state["energy"] == pytest.approx(-0.02892460, abs=1e-7)
    assert state["node_count"] == 0
    assert state["residual"] <= 1e-7
    assert state["normalization"]["window_q10"] == pytest.approx(6.7406, abs=0.01)
    assert summary["count_negative"] == 1
    rows = read_csv("s.csv")
    assert rows[0] == ["coordinate", "psi", "potential"]
    assert float(rows[1][2]) < 0


def test_solve_paraboloid_ground():
    assert run("solve", "paraboloid", "--a", "1", "--l", "0", "--finest", "0.01", "--out", "s") == 0
    summary = load("s.summary.json")
    assert len(summary["bound_states"]) == 1
    state = summary["bound_states"][0]
    assert state["energy"] == pytest.approx(-0.0113978, abs=1e-6)
    assert set(state["normalization"]) == {"rho2", "surface", "flat"}
    assert state["decay_prefactor"]["status"] == "ok"
    # the long-range tail supports further shallow states; they are listed separately
    assert summary["further_states"]
    assert summary["further_states"][0]["domain_stable"]
    man = load("s.manifest.json")
    assert any("rho^2/(2a)" in d for d in man["deviations"])


def test_solve_paraboloid_unbound_channel():
    assert run("solve", "paraboloid", "--a", "1", "--l", "1", "--finest", "0.01", "--out", "s") == 0
    summary = load("s.summary.json")
    assert summary["bound_states"] == []
    assert summary["count_negative"] == 0
    assert read_csv("s.csv")[0] == ["coordinate", "psi", "potential"]


def test_solve_not_converged_still_writes(workdir):
    assert run("solve", "catenary", "--half-width", "40", "--finest", "0.02", "--tol", "1e-16",
               "--out", "s") == 4
    summary = load("s.summary.json")
    assert summary["converged"] is False
    assert summary["bound_states"][0]["converged"] is False
    assert (workdir / "s.csv").exists() and (workdir / "s.manifest.json").exists()


def test_solve_custom_problem(workdir):
    with open("ho.json", "w") as fh:
        json.dump({"name": "ho", "p": "1", "q": "x^2", "w": "1", "domain": [-8, 8],
                   "bc": ["dirichlet", "dirichlet"]}, fh)
    assert run("solve", "ho.json", "--states", "3", "--threshold", "10", "--finest", "0.01",
               "--export-problem", "ho.export.json", "--out", "s") == 0
    summary = load("s.summary.json")
    energies = [b["energy"] for b in summary["bound_states"]]
    assert energies == pytest.approx([1.0, 3.0, 5.0], abs=1e-7)
    assert [b["node_count"] for b in summary["bound_states"]] == [0, 1, 2]
    assert read_csv("s.csv")[0] == ["coordinate", "psi", "psi_1", "psi_2", "potential"]
    doc = load("ho.export.json")
    assert doc["name"] == "ho" and len(doc["nodes"]) == len(doc["q"])


@pytest.mark.parametrize("body", [
    {"p": "1", "q": "x^2", "w": "1"},
    {"p": "1", "q": "x^", "w": "1", "domain": [0, 1]},
    {"p": "1", "q": "z", "w": "1", "domain": [0, 1]},
    {"p": "1", "q": "0", "w": "1", "domain": [0, 1], "bc": ["sticky", "dirichlet"]},
])
def test_solve_bad_problem_file(body):
    with open("bad.json", "w") as fh:
        json.dump(body, fh)
    assert run("solve", "bad.json") == 2


def test_solve_unknown_target():
    assert run("solve", "hyperboloid") == 2
    assert run("solve", "catenary", "--a", "0") == 2
    assert run("solve", "paraboloid", "--measure", "cubit") == 2


def test_solve_is_reproducible(workdir):
    run("solve", "catenary", "--half-width", "40", "--finest", "0.01", "--out", "r1")
    run("solve", "catenary", "--half-width", "40", "--finest", "0.01", "--out", "r2")
    assert (workdir / "r1.csv").read_bytes() == (workdir / "r2.csv").read_bytes()
    s1, s2 = load("r1.summary.json"), load("r2.summary.json")
    assert s1["bound_states"] == s2["bound_states"]


# ----------------------------------------------------------------- scan


def test_scan_catenary_is_a_free():
    assert run("scan", "catenary", "--values", "4,1,2", "--finest", "0.02", "--fixed", "half_width=40",
               "--out", "sc") == 0
    rows = read_csv("sc.csv")
    assert rows[0] == ["a", "energy", "scaled_energy", "count_negative", "residual", "status"]
    assert [float(r[0]) for r in rows[1:]] == [1.0, 2.0, 4.0]
    assert len({r[1] for r in rows[1:]}) == 1
    assert all(r[5] == "ok" for r in rows[1:])


def test_scan_paraboloid_scaling():
    assert run("scan", "paraboloid", "--range", "1:2:2", "--finest", "0.02", "--out", "sc") == 0
    rows = read_csv("sc.csv")[1:]
    e1, e2 = float(rows[0][1]), float(rows[1][1])
    assert e2 == pytest.approx(e1 / 4, rel=1e-6)


def test_scan_parallel_matches_serial(workdir):
    base = ["scan", "catenary", "--values", "1,2,3", "--finest", "0.02", "--fixed", "half_width=30"]
    assert run(*base, "--out", "serial") == 0
    assert run(*base, "--jobs", "3", "--out", "par") == 0
    assert (workdir / "serial.csv").read_bytes() == (workdir / "par.csv").read_bytes()


def test_scan_records_row_failures():
    assert run("scan", "catenary", "--values=-1,1", "--finest", "0.02", "--fixed", "half_width=30",
               "--out", "sc") == 0
    rows = read_csv("sc.csv")[1:]
    assert rows[0][5].startswith("error")
    assert rows[1][5] == "ok"


@pytest.mark.parametrize("argv", [
    ["--values", ""], ["--values", "1"], ["--range", "1:2:1"], ["--range", "1:2:0"], ["--range", "x"],
    [], ["--values", "1,nan"], ["--param", "R", "--values", "1,2"],
])
def test_scan_bad_ranges(argv):
    assert run("scan", "catenary", *argv) == 2


def test_argparse_errors_return_code():
    assert run("solve") == 2
    assert run("frobnicate") == 2


# ---------------------------------------------------------------- check


def test_check_passes():
    assert run("check", "--out", "chk") == 0
    report = load("chk.summary.json")
    assert report["passed"] is True
    names = {s["name"]: s for s in report["suites"]}
    assert names["detg-factorization"]["worst"] <= 1e-8
    assert all(s["samples"] > 0 for s in report["suites"])
    assert report["total_seconds"] < 60


def test_check_selected_suite():
    assert run("check", "--suite", "monge-metric-det", "--out", "chk") == 0
    assert [s["name"] for s in load("chk.summary.json")["suites"]] == ["monge-metric-det"]
    assert run("check", "--suite", "nonsense") == 2


def test_check_failure_exit_code(monkeypatch):
    real = checks.run_checks

    def broken(names=None, forms_transform=None, backend=None):
        flip = lambda f: replace(f, k=-f.k, k_mixed=-f.k_mixed)  # noqa: E731
        return real(["weingarten-analytic"], forms_transform=flip)

    monkeypatch.setattr(checks, "run_checks", broken)
    assert run("check", "--out", "chk") == 5
    assert load("chk.summary.json")["suites"][0]["passed"] is False


def test_mutated_curvature_fails_weingarten_suite():
    flip = lambda f: replace(f, k=-f.k, k_mixed=-f.k_mixed)  # noqa: E731
    assert not checks.weingarten_suite(True, flip).passed
    assert not checks.weingarten_suite(False, flip).passed
    assert checks.weingarten_suite(True).passed


def test_console_script_entry():
    out = subprocess.run([sys.executable, "-m", "thinlayer.cli", "--help"], capture_output=True, text=True)
    assert out.returncode == 0
    for verb in ("curvature", "potential-map", "solve", "scan", "check"):
        assert verb in out.stdout
