import math

import numpy as np
import pytest

from conftest import random_dataset
from fncreg.lasso import fit_lasso
from fncreg.model import Dataset
from fncreg.nodewise import default_lambda_node, nodewise_regression, true_row_support


def orthogonal_columns(rng, n, p):
    q, _ = np.linalg.qr(rng.standard_normal((n, p)))
    return q * rng.uniform(1, 3, size=p) * np.sqrt(n)


def test_orthogonal_columns_diagonal(rng):
    x = orthogonal_columns(rng, 30, 5)
    d = Dataset(x, np.zeros(30))
    nw = nodewise_regression(d, 0.1)
    assert np.all(nw.gamma == 0)
    norms = (x**2).sum(axis=0)
    np.testing.assert_allclose(nw.tau_sq, norms / 30, rtol=1e-12)
    np.testing.assert_allclose(nw.theta_hat, np.diag(30 / norms), atol=1e-12)


def test_per_column_oracle(rng):
    d = random_dataset(rng, 25, 3)
    lam = 0.05
    nw = nodewise_regression(d, lam, tol=1e-12)
    for j in range(3):
        rest = [k for k in range(3) if k != j]
        ref = fit_lasso(Dataset(d.x[:, rest], d.x[:, j]), lam, tol=1e-12)
        np.testing.assert_allclose(nw.gamma[j], ref.beta_hat, atol=1e-10)
        assert nw.tau_sq[j] == pytest.approx(ref.objective, abs=1e-10)


def test_duplicate_columns_limit(rng):
    x = rng.standard_normal((40, 4))
    x[:, 1] = x[:, 0]
    lam = 1e-3
    nw = nodewise_regression(Dataset(x, np.zeros(40)), lam, tol=1e-12)
    # gamma picks up the twin almost fully: tau^2 = (1 - lam/s11)^2 ... -> 2 lam s11/s11 as lam -> 0
    s11 = x[:, 0] @ x[:, 0] / 40
    expect = 2 * lam - lam**2 / s11
    assert nw.tau_sq[0] == pytest.approx(expect, rel=1e-6)
    assert nw.tau_sq[0] == pytest.approx(2 * lam, rel=0.01)
    assert np.all(np.isfinite(nw.theta_hat))


def test_assembly_identity(rng):
    d = random_dataset(rng, 40, 7)
    nw = nodewise_regression(d)
    nw.validate()
    p = d.p
    for j in range(p):
        row = np.zeros(p)
        row[j] = 1.0
        row[[k for k in range(p) if k != j]] = -nw.gamma[j]
        np.testing.assert_allclose(nw.theta_hat[j], row / nw.tau_sq[j], rtol=0, atol=1e-14)
    assert np.all(np.diag(nw.theta_hat) > 0)
    np.testing.assert_allclose(np.diag(nw.theta_hat), 1 / nw.tau_sq)


def test_not_symmetrized():
    rng = np.random.default_rng(5)
    d = random_dataset(rng, 30, 6)
    t = nodewise_regression(d, 0.05).theta_hat
    assert not np.allclose(t, t.T)


def test_default_lambda_node():
    assert default_lambda_node(50, 50, 1.0) == pytest.approx(math.sqrt(math.log(50) / 50))
    assert default_lambda_node(150, 200, 2.0) == pytest.approx(2 * math.sqrt(math.log(200) / 150), rel=1e-15)
    # hand value quoted as 0.37584; the exact figure is 0.375884
    assert default_lambda_node(150, 200, 2.0) == pytest.approx(0.37584, abs=1e-4)
    with pytest.raises(ValueError):
        default_lambda_node(150, 200, 0.0)
    with pytest.raises(ValueError):
        default_lambda_node(150, 200, -1.0)


def test_rejects_nonpositive_lambda(rng):
    d = random_dataset(rng, 20, 4)
    with pytest.raises(ValueError):
        nodewise_regression(d, [0.1, 0.1, 0.0, 0.1])


def test_consistency_identity_covariance():
    rng = np.random.default_rng(77)
    errs = []
    for n in (200, 2000):
        x = rng.standard_normal((n, 20))
        nw = nodewise_regression(Dataset(x, np.zeros(n)))
        errs.append(np.abs(nw.theta_hat - np.eye(20)).max())
    assert errs[1] < errs[0]


def test_true_row_support():
    prec = np.array([[1, 0.3, 0], [0.3, 1, 0.2], [0, 0.2, 1.0]])
    assert true_row_support(prec).tolist() == [1, 2, 1]
