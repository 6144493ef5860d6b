import json
import math

import numpy as np
import pytest

import oseen_rotor as orr


def test_version_and_params():
    assert orr.__version__ == "0.1.0"
    p = orr.FlowParams(2.0, 0.5)
    assert (p.tau, p.rho) == (2.0, 0.5)
    with pytest.raises(orr.DomainError):
        orr.FlowParams(-1.0, 1.0)


def test_lambda_limit_at_origin():
    k0 = (4 * math.pi) ** -1.5
    lam = orr.lambda_tensor(np.array([1e-4, 0, 0]), 1.0)
    assert np.allclose(lam, 2 / 3 * k0 * np.eye(3), atol=1e-9)


def test_z_derivative_matches_finite_difference():
    y = np.array([3.0, 1.0, -0.5])
    z = np.zeros(3)
    h = 1e-3
    plus, _ = orr.z_tensor(y + [0, h, 0], z, rel_tol=1e-11, abs_tol=1e-15)
    minus, _ = orr.z_tensor(y - [0, h, 0], z, rel_tol=1e-11, abs_tol=1e-15)
    d, err = orr.z_derivative(y, z, alpha=(0, 1, 0), rel_tol=1e-11, abs_tol=1e-15)
    assert err >= 0
    assert np.linalg.norm(d - (plus - minus) / (2 * h)) <= 1e-5 * np.linalg.norm(d)


def test_singular_point_raises():
    with pytest.raises(orr.SingularPointError):
        orr.z_tensor(np.ones(3), np.ones(3))


def test_difference_vanishes_for_zero_source():
    d, _ = orr.z_difference(np.array([10.0, 2.0, 0.0]), np.zeros(3))
    assert np.all(d == 0)


def test_exponents_and_gamma_table():
    e = orr.predict_exponents(2, 2, 2, 2)
    assert (e["e"], e["f"], e["log_power"]) == (2.0, 2.0, 1)
    assert orr.gamma_case(2.0) == (1.5, 1.5, 1)
    assert orr.gamma_case(1.0) == (0.5, 1.0, 0)
    with pytest.raises(orr.DomainError):
        orr.gamma_case(0.2)


def test_convolution_is_reproducible():
    a = orr.convolve_numeric(2, 2, 2, 2, np.array([10.0, 0, 0]), budget=8192, seed=3)
    b = orr.convolve_numeric(2, 2, 2, 2, np.array([10.0, 0, 0]), budget=8192, seed=3)
    assert a == b and a[1] < 0.1 * a[0]


def test_synthetic_coefficients_and_leading_term():
    c = orr.synthetic_coefficients(include_nonlinear=False)
    assert c["flux"] == pytest.approx(-0.2 * 4 * math.pi, rel=1e-10)
    v, err = orr.leading_term(np.array([20.0, 0, 0]), c["beta"], c["flux"])
    assert v.shape == (3,) and np.all(np.isfinite(v)) and err >= 0


def test_cli_in_process():
    code, out, _ = orr.run_cli(["conv-exponents", "2", "2", "3/2", "2"])
    assert code == 0
    rec = json.loads(out)["records"][0]
    assert rec["e_exact"] == "3/2"
    code, _, err = orr.run_cli(["eval", "kernel", "--point", "1,2,3", "--t", "0"])
    assert code == 2 and "domain error" in err
