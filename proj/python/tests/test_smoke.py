import json

import numpy as np
import pytest

import ehtk


def test_ground_state_and_entropy():
    model = ehtk.SpinModel(4, 1.0, 1.0)
    energy, psi = ehtk.ground_state(model)
    h = model.hamiltonian()
    assert np.isclose(np.vdot(psi, h @ psi).real, energy)
    assert np.isclose(energy, np.linalg.eigvalsh(h)[0])
    rho = ehtk.reduced_density_matrix(psi, [1, 2])
    assert np.isclose(np.trace(rho).real, 1.0)
    s = ehtk.vn_entropy(rho)
    w = np.linalg.eigvalsh(rho)
    w = w[w > 1e-14]
    assert np.isclose(s, -(w * np.log(w)).sum())
    assert np.isclose(ehtk.uhlmann_fidelity(rho, rho), 1.0)


def test_sample_and_fit_round_trip():
    model = ehtk.SpinModel(6, 1.0, 1.0)
    _, psi = ehtk.ground_state(model)
    text = ehtk.sample(psi, [2, 3], shots=2000, seed=3)
    header = json.loads(text.splitlines()[0])
    assert header["register"] == [2, 3]
    assert len(text.splitlines()) == 1 + 9
    assert ehtk.sample(psi, [2, 3], shots=2000, seed=3) == text

    fit = ehtk.fit(text, "local-links", a=[2, 3])
    assert fit["geometry"] == [2, 3]
    assert len(fit["beta"]) == 1
    rho_fit = ehtk.fitted_rho(fit)
    rho = ehtk.reduced_density_matrix(psi, [2, 3])
    assert ehtk.uhlmann_fidelity(rho_fit, rho) > 0.99


def test_state_files(tmp_path):
    psi = np.array([0.6, 0.8j, 0, 0])
    path = str(tmp_path / "s.bin")
    ehtk.write_state(path, psi)
    assert (tmp_path / "s.bin").read_bytes()[:9] == b"EHTSTATE1"
    assert np.array_equal(ehtk.read_state(path), psi)
    with pytest.raises(ValueError):
        ehtk.write_state(path, np.array([1.0, 1.0]))


def test_config_errors():
    with pytest.raises(ehtk.ValidationError):
        ehtk.normalize_config({"model": {"n": 4}, "fit": {"sizes": [2]}, "bogus": 1})
    cfg = ehtk.normalize_config({"name": "x", "model": {"n": 6}, "fit": {"sizes": [2]}})
    assert ehtk.normalize_config(cfg) == cfg


def test_minimal_pipeline_is_reproducible(tmp_path):
    cfg = ehtk.preset("minimal")[0]
    m1 = ehtk.run_pipeline(cfg, str(tmp_path / "a"))
    m2 = ehtk.run_pipeline(cfg, str(tmp_path / "b"))
    assert m1 == m2
    assert (tmp_path / "a" / "manifest.json").read_bytes() == (tmp_path / "b" / "manifest.json").read_bytes()
    assert "fits/fit_0.json" in m1["files"]
