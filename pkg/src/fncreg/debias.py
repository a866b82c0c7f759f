"""Debiased Lasso estimate, its covariance surrogate and z-statistics."""

from __future__ import annotations

import math
from typing import Optional, Union

import numpy as np

from .model import Dataset, DebiasedFit, DecompositionCheck, LassoFit, NodewiseResult


class DegenerateSigmaError(ValueError):
    pass


def _theta(nodewise) -> np.ndarray:
    return nodewise.theta_hat if isinstance(nodewise, NodewiseResult) else np.asarray(nodewise, dtype=float)


def _beta(fit) -> np.ndarray:
    return fit.beta_hat if isinstance(fit, LassoFit) else np.asarray(fit, dtype=float)


def debias(fit: LassoFit, nodewise: NodewiseResult, data: Dataset) -> np.ndarray:
    """One-step correction ``b = beta_hat + Theta X^T (y - X beta_hat) / n``.

    ``fit`` and ``nodewise`` may also be plain arrays (coefficients and a
    p x p precision estimate).
    """
    beta, theta = _beta(fit), _theta(nodewise)
    if beta.shape != (data.p,) or theta.shape != (data.p, data.p):
        raise ValueError("coefficient or precision dimensions do not match the data")
    resid = data.y - data.x @ beta
    return beta + theta @ (data.x.T @ resid) / data.n


def omega_hat(nodewise: NodewiseResult, data: Dataset) -> np.ndarray:
    theta = _theta(nodewise)
    if theta.shape != (data.p, data.p):
        raise ValueError("precision estimate does not match the data dimension")
    tx = theta @ data.x.T
    om = tx @ tx.T / data.n
    return (om + om.T) / 2


def estimate_sigma(data: Dataset, fit: LassoFit) -> float:
    """Degrees-of-freedom corrected residual scale ``||y - X b||^2 / (n - |supp b|)``."""
    beta = _beta(fit)
    df = data.n - np.count_nonzero(beta)
    if df <= 0:
        raise DegenerateSigmaError(f"{np.count_nonzero(beta)} nonzero coefficients leave no residual degrees of freedom")
    r = data.y - data.x @ beta
    sigma = math.sqrt(r @ r / df)
    if sigma == 0:
        raise DegenerateSigmaError("residuals are identically zero; sigma would be 0")
    return sigma


def standardize(b_hat: np.ndarray, omega: np.ndarray, sigma: float, n: int) -> np.ndarray:
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    d = np.diag(omega)
    if np.any(~(d > 0)):
        bad = np.flatnonzero(~(d > 0))
        raise ValueError(f"non-positive diagonal of omega at columns {bad[:10].tolist()}")
    return math.sqrt(n) * np.asarray(b_hat) / (sigma * np.sqrt(d))


def debiased_fit(
    data: Dataset,
    fit: LassoFit,
    nodewise: NodewiseResult,
    sigma: Union[str, float] = "estimate",
) -> DebiasedFit:
    """Full standardization chain from a Lasso fit and a precision estimate."""
    b = debias(fit, nodewise, data)
    om = omega_hat(nodewise, data)
    if isinstance(sigma, str):
        if sigma not in ("estimate", "auto"):
            raise ValueError(f"sigma must be a positive number or 'estimate', got {sigma!r}")
        sig, source = estimate_sigma(data, fit), "estimated"
    else:
        sig, source = float(sigma), "provided"
    z = standardize(b, om, sig, data.n)
    return DebiasedFit(b, om, sig, z, data.n, source)


def decompose(
    fit: LassoFit,
    nodewise: NodewiseResult,
    data: Dataset,
    beta: np.ndarray,
    noise: np.ndarray,
    sigma: float,
    omega: Optional[np.ndarray] = None,
) -> DecompositionCheck:
    """Split ``sqrt(n)(b_hat - beta)`` into its Gaussian and bias parts.

    Needs the true coefficients and the realized noise vector, so it only
    applies to simulated data.
    """
    theta = _theta(nodewise)
    n, p = data.n, data.p
    beta = np.asarray(beta, dtype=float)
    sigma_hat_mat = data.x.T @ data.x / n
    w = theta @ (data.x.T @ np.asarray(noise)) / math.sqrt(n)
    delta = math.sqrt(n) * (theta @ sigma_hat_mat - np.eye(p)) @ (_beta(fit) - beta)
    om = omega_hat(theta, data) if omega is None else omega
    scale = sigma * np.sqrt(np.diag(om))
    return DecompositionCheck(w, delta, w / scale, delta / scale, math.sqrt(n) * beta / scale)
