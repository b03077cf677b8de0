import math

import numpy as np
import pytest

import ned_lab


def test_gallery_names():
    assert "barreira" in ned_lab.gallery_names()


def test_barreira_norm_and_dual():
    p = ned_lab.gallery_process("barreira", {"a": 1.0, "b": 2.0})
    assert p.dimension == 1
    assert p.operator_norm(math.pi, 0.0) == pytest.approx(8.069951757030459923920503e-5, rel=1e-12)
    assert p.dual().operator_norm(math.pi, 0.0) == pytest.approx(12391.64780791669748150654, rel=1e-12)


def test_certificate_check_and_conversion():
    p = ned_lab.gallery_process("barreira")
    cert = {"kind": "II", "domain": "plus", "M": math.exp(2), "stable": {"alpha": 3, "delta": 2},
            "unstable": None, "projection": "zero"}
    rep = ned_lab.check_certificate(p, cert, horizon=20, step=0.25)
    assert rep["max_violation"] <= 1e-9
    back = ned_lab.convert_halfline(ned_lab.convert_halfline(cert))
    assert back["stable"] == cert["stable"] and back["kind"] == "II"


def test_robustness_oracle():
    r = ned_lab.robustness_constants(1, 1, 0.2, 0.1)
    assert r["omega_tilde"] == pytest.approx(0.74963323143579375334, rel=1e-12)
    assert r["M_hat"] == pytest.approx(1.2578970837203820426, rel=1e-12)
    assert r["w_sign_flipped"] > 0


def test_planted_matrix_and_errors():
    V = np.array([[1.0, 0.3], [0.0, 1.0]])
    p = ned_lab.planted_process("full", V, [0.0], [[-2.0, -2.0], [1.0, 1.0]], [False, True])
    S = p.matrix(1.0, 0.0)
    expected = V @ np.diag([math.exp(-2), math.exp(1)]) @ np.linalg.inv(V)
    assert np.allclose(S, expected, rtol=1e-13)
    with pytest.raises(ned_lab.ArgumentError):
        ned_lab.gallery_process("nope")


def test_laplacian_spectrum():
    ev = ned_lab.discrete_laplacian_eigenvalues(3)
    assert ev[0] == pytest.approx(-9.3725830020304792192, rel=1e-12)
    assert ned_lab.dirichlet_eigenvalue(2, 3) == pytest.approx(-32, rel=1e-12)
