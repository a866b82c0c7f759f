"""Precision-matrix estimate from nodewise Lasso regressions."""

from __future__ import annotations

import math
from typing import Optional, Sequence, Union

import numpy as np

from .lasso import DEFAULT_MAX_ITER, DEFAULT_TOL, _fit_gram
from .model import Dataset, NodewiseResult

DEFAULT_KAPPA = 2.0


class DegenerateColumnError(ValueError):
    pass


def default_lambda_node(n: int, p: int, kappa: float = DEFAULT_KAPPA) -> float:
    """Common nodewise tuning level ``kappa * sqrt(log p / n)``."""
    if kappa <= 0:
        raise ValueError(f"kappa must be positive, got {kappa}")
    if n < 2 or p < 2:
        raise ValueError("need n >= 2 and p >= 2")
    return kappa * math.sqrt(math.log(p) / n)


def nodewise_regression(
    data: Dataset,
    lambda_node: Union[None, float, Sequence[float]] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    kappa: float = DEFAULT_KAPPA,
) -> NodewiseResult:
    """Regress every column on the others and assemble ``theta_hat``.

    Row j of the result is ``(e_j - gamma_j) / tau_j^2`` where ``gamma_j`` is
    the Lasso fit of column j on the remaining columns (placed back at their
    original positions) and ``tau_j^2`` is that fit's objective value.  The
    matrix is left unsymmetrized.

    ``lambda_node`` may be a scalar, a length-p sequence, or None for
    :func:`default_lambda_node` with the given ``kappa``.
    """
    x, n, p = data.x, data.n, data.p
    if lambda_node is None:
        lams = np.full(p, default_lambda_node(n, p, kappa))
    else:
        lams = np.broadcast_to(np.asarray(lambda_node, dtype=float), (p,)).copy()
    if np.any(~(lams > 0)):
        raise ValueError("every nodewise lambda must be positive")

    G = x.T @ x / n
    gamma_full = np.zeros((p, p))
    tau_sq = np.empty(p)
    for j in range(p):
        col = G[:, j].copy()
        g, _, _, _ = _fit_gram(G, col, G[j, j], lams[j], tol, max_iter, skip=j)
        g[j] = 0.0
        r = x[:, j] - x @ g
        tau_sq[j] = r @ r / n + 2 * lams[j] * np.abs(g).sum()
        if not tau_sq[j] > 0:
            raise DegenerateColumnError(f"column {j}: tau^2 = {tau_sq[j]!r} is not positive")
        gamma_full[j] = g

    theta = -gamma_full
    np.fill_diagonal(theta, 1.0)
    theta /= tau_sq[:, None]
    mask = ~np.eye(p, dtype=bool)
    gamma = gamma_full[mask].reshape(p, p - 1)
    return NodewiseResult(theta, tau_sq, gamma, lams)


def true_row_support(precision: np.ndarray, atol: float = 0.0) -> np.ndarray:
    """Off-diagonal support size of each row of a population precision matrix."""
    off = np.abs(precision) > atol
    np.fill_diagonal(off, False)
    return off.sum(axis=1)
