import json
import math
import os
from pathlib import Path

import numpy as np
import pytest

import esvm

SOURCE_DIR = Path(os.environ.get("ESVM_SOURCE_DIR", Path(__file__).resolve().parents[2]))


def numpy_spectral_variance(x, bn):
    x = np.asarray(x, dtype=float)
    n = len(x)
    c = x - x.mean()
    total = c @ c / n
    for s in range(1, bn):
        u = s / bn
        w = 1.0 if u <= 0.5 else 2.0 * (1.0 - u)
        total += 2.0 * w * (c[:-s] @ c[s:]) / n
    return total


def test_kernel_and_truncation():
    assert esvm.trapezoid_kernel(0.0) == 1.0
    assert esvm.trapezoid_kernel(0.75) == pytest.approx(0.5)
    assert esvm.default_truncation(100000) == 47
    with pytest.raises(esvm.ConfigError):
        esvm.trapezoid_kernel(1.5)


def test_spectral_variance_matches_numpy():
    rng = np.random.default_rng(0)
    x = rng.standard_normal(500)
    for bn in (1, 7, 60, 500):
        assert esvm.spectral_variance(x, bn) == pytest.approx(numpy_spectral_variance(x, bn), rel=1e-12)
    a = esvm.spectral_operator_dense(64, 7)
    z = rng.standard_normal(64)
    assert esvm.spectral_variance(z, 7) == pytest.approx(z @ a @ z, rel=1e-10)
    assert esvm.sample_autocovariance([1.0, 2.0, 3.0], 2) == pytest.approx(-1.0 / 3.0)
    assert esvm.empirical_variance([1.0, 2.0, 3.0]) == pytest.approx(1.0)


def test_degenerate_inputs_raise():
    with pytest.raises(esvm.ConfigError, match="truncation exceeds sample size"):
        esvm.spectral_variance([1.0, 2.0, 3.0], 4)
    with pytest.raises(esvm.NumericError, match="degenerate series"):
        esvm.autocorrelation([1.0, 1.0, 1.0], 1)


def test_target_and_sampler():
    target = esvm.make_target({"kind": "gmm", "rho": 0.5, "mu": [0.5, 0.5], "sigma": [[1, 0], [0, 1]]})
    assert target.dim == 2
    assert target.exact_moments["second_moment[0]"] == pytest.approx(1.25)
    x = np.array([0.3, -0.7])
    h = 1e-6
    fd = [(target.potential(x + h * e) - target.potential(x - h * e)) / (2 * h) for e in np.eye(2)]
    np.testing.assert_allclose(target.gradient(x), fd, rtol=1e-7)

    states, rate = esvm.sample_chain(target, "MALA", 1.0, 2000, seed=3)
    again, _ = esvm.sample_chain(target, "MALA", 1.0, 2000, seed=3)
    assert states.shape == (2000, 2)
    assert 0.3 < rate < 1.0
    np.testing.assert_array_equal(states, again)


def test_ar1_reference():
    x, v_inf = esvm.ar1_reference(0.5, 100000, 2019)
    assert v_inf == pytest.approx(4.0)
    bn = math.ceil(2 * math.log(len(x)) / math.log(2))
    assert esvm.spectral_variance(x, bn) == pytest.approx(4.0, rel=0.1)


def test_fit_reduces_variance():
    target = esvm.make_target({"kind": "gaussian", "d": 2})
    states, _ = esvm.sample_chain(target, "ULA", 0.1, 5000, seed=1)
    f = states[:, 0] ** 2
    for criterion in ("ESVM", "EVM"):
        res = esvm.fit(target, states, f, family="second_order", criterion=criterion, bn=20)
        assert res["objective_at_theta"] < 1e-3 * res["objective_at_zero"]
        g = esvm.stein_values("second_order", res["theta"], states, states)
        assert np.var(f - g) < 1e-3 * np.var(f)


def test_run_experiment_and_emit(tmp_path):
    config = json.loads((SOURCE_DIR / "configs" / "gmm_identity_x1sq_mala.json").read_text())
    config.update(n_burn=500, n_train=3000, n_test=3000, n_test_chains=3)
    report = esvm.run_experiment(config)
    assert report["schema_version"] == 1
    assert [m["label"] for m in report["methods"]] == ["ESVM", "EVM"]
    assert len(report["methods"][0]["vrf"]) == 3
    assert report["methods"][0]["mean_vrf"] > 10
    paths = esvm.emit_report(report, tmp_path)
    assert {Path(p).name for p in paths} == {"report.json", "vrf.csv", "boxplot.csv"}
    rows = (tmp_path / "vrf.csv").read_text().strip().splitlines()
    assert len(rows) == 1 + 2 * 3

    again = esvm.run_experiment(config)
    for key in ("spectral_vanilla", "vanilla_averages", "methods"):
        assert again[key] == report[key]


def test_bad_config_raises():
    with pytest.raises(esvm.ConfigError):
        esvm.run_experiment({"target": {"kind": "gaussian", "d": 2}, "sampler": {"kind": "HMC", "gamma": 0.1}})
    normalized = esvm.normalize_config({"target": {"kind": "gaussian", "d": 2}, "sampler": {"kind": "ULA", "gamma": 0.1}})
    assert normalized["methods"] == ["ESVM", "EVM"]
