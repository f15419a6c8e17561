import json

import numpy as np
import pytest
from sklearn.base import clone

from savmag import GroundStateSolver
from savmag.bench import format_table, load_reference_energy, relative_error
from savmag.cli import main
from savmag.io import read_trace

SMALL = ["--set", "grid.nx=10", "--set", "grid.ny=5", "--set", "run.dt=1e-12", "--set", "run.T=2e-11",
         "--set", "run.stride=5"]


def test_cli_run(tmp_path, capsys):
    rc = main(["run", "--config", "scenarios/diamond.cfg", "--set", f"output.dir={tmp_path}",
               "--set", "output.name=d"] + SMALL)
    assert rc == 0
    out = capsys.readouterr().out
    assert "energy_density_Kd" in out
    tr = read_trace(tmp_path / "d_trace.csv")
    assert tr["step"][-1] == 20
    summary = json.loads((tmp_path / "d_summary.json").read_text())
    assert summary["config"]["run.dt"] == 1e-12
    assert load_reference_energy(tmp_path / "d_summary.json") == pytest.approx(tr["normalized_total"][-1])
    assert load_reference_energy(tmp_path / "d_trace.csv") == pytest.approx(tr["normalized_total"][-1])


def test_cli_compare(tmp_path, capsys):
    for name, dt in (("a", "1e-12"), ("b", "5e-13")):
        assert main(["run", "--config", "scenarios/diamond.cfg", "--set", f"output.dir={tmp_path}",
                     "--set", f"output.name={name}"] + SMALL + ["--set", f"run.dt={dt}"]) == 0
    ref, test = str(tmp_path / "a_trace.csv"), str(tmp_path / "b_trace.csv")
    assert main(["compare", "--ref", ref, "--test", test, "--tol", "0.5"]) == 0
    assert main(["compare", "--ref", ref, "--test", ref]) == 0
    assert main(["compare", "--ref", ref, "--test", test, "--tol", "1e-15"]) == 1
    assert "relative error" in capsys.readouterr().out


def test_cli_bench(tmp_path, capsys):
    out = tmp_path / "bench.json"
    rc = main(["bench", "--config", "scenarios/diamond.cfg", "--schemes", "sav2,fep", "--dts", "1e-12",
               "--ref-energy", "1.0", "--tol", "1e6", "--output", str(out)] + SMALL)
    assert rc == 0
    table = capsys.readouterr().out
    assert "sav2" in table and "fep" in table
    entries = json.loads(out.read_text())
    assert len(entries) == 2 and all(e["ok"] for e in entries)


def test_cli_errors(capsys):
    assert main(["run", "--config", "nope.cfg"]) == 2
    assert main(["run", "--config", "scenarios/diamond.cfg", "--set", "run.scheme=rk4"]) == 2
    with pytest.raises(SystemExit):
        main(["frobnicate"])


def test_format_table_marks_failures():
    from savmag.bench import BenchEntry

    entries = [BenchEntry("fep", 1e-12, 1.0, 2.0, 1.0, False), BenchEntry("sav1", 1e-12, 0.5, 1.0, 0.0, True)]
    text = format_table(entries)
    assert "FAIL" in text and "0.50" in text
    assert relative_error(1.01, 1.0) == pytest.approx(0.01)


def small_solver(**kw):
    base = dict(shape=(10, 5, 1), dt=1e-12, T=2e-11)
    base.update(kw)
    return GroundStateSolver(**base)


def test_estimator_params_roundtrip():
    est = small_solver(scheme="sav1")
    params = est.get_params()
    assert params["scheme"] == "sav1" and params["shape"] == (10, 5, 1)
    other = clone(est).set_params(dt=5e-13)
    assert other.dt == 5e-13 and est.dt == 1e-12


def test_estimator_fit_transform(rng):
    est = small_solver()
    X = rng.normal(size=(50, 3))
    Y = est.fit_transform(X)
    assert Y.shape == (50, 3)
    np.testing.assert_allclose(np.linalg.norm(Y, axis=1), 1.0, atol=1e-12)
    assert est.n_steps_ == 20 and np.isfinite(est.energy_)
    np.testing.assert_allclose(est.transform(X), Y, rtol=1e-12)
    assert est.score(X) == pytest.approx(-est.energy_)


def test_estimator_validation(rng):
    from sklearn.exceptions import NotFittedError

    est = small_solver()
    with pytest.raises(NotFittedError):
        est.transform(rng.normal(size=(50, 3)))
    with pytest.raises(ValueError):
        est.fit(rng.normal(size=(49, 3)))
    with pytest.raises(ValueError):
        est.fit(np.zeros((50, 3)))
    with pytest.raises(ValueError):
        small_solver(scheme="rk4").fit(rng.normal(size=(50, 3)))
