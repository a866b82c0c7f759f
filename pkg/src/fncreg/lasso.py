"""Cyclic coordinate descent for the Lasso.

The objective is ``||y - X b||^2 / n + 2 * lam * ||b||_1`` with no intercept.
"""

from __future__ import annotations

import math
import warnings
from typing import Optional, Sequence

import numpy as np

from . import _cd
from .model import Dataset, LassoFit

GRAM_MAX_P = 2000
DEFAULT_TOL = 1e-7
DEFAULT_MAX_ITER = 10_000
# out-of-fold error is insensitive to sub-1e-5 coordinate changes
CV_TOL = 1e-5


class ConvergenceWarning(UserWarning):
    pass


def _fit_gram(G, c, yy, lam, tol, max_iter, beta0=None, skip=-1, track=False):
    b = np.zeros(G.shape[0]) if beta0 is None else np.array(beta0, dtype=float)
    b, sweeps, conv, hist = _cd.cd_gram(G, c, yy, float(lam), b, skip, float(tol), int(max_iter), track)
    return b, int(sweeps), bool(conv), hist


def fit_lasso(
    data: Dataset,
    lam: float,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
    beta0: Optional[np.ndarray] = None,
    track_objective: bool = False,
) -> LassoFit:
    """Fit the Lasso at a fixed ``lam`` by cyclic coordinate descent.

    Coordinates are visited in index order starting from zero (or ``beta0``).
    Iteration stops once a full sweep moves no coordinate by more than ``tol``
    and the KKT residual is at most ``tol``.  The Gram matrix is cached when
    ``p <= 2000``; otherwise residuals are updated in place.

    A non-converged fit is returned with ``converged=False`` after a
    :class:`ConvergenceWarning`.
    """
    lam = float(lam)
    if not lam >= 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    if tol <= 0 or max_iter < 1:
        raise ValueError("tol must be positive and max_iter at least 1")
    x, y, n = data.x, data.y, data.n
    if data.p <= GRAM_MAX_P:
        G = x.T @ x / n
        c = x.T @ y / n
        b, sweeps, conv, hist = _fit_gram(G, c, y @ y / n, lam, tol, max_iter, beta0, track=track_objective)
    else:
        b = np.zeros(data.p) if beta0 is None else np.array(beta0, dtype=float)
        b, sweeps, conv, hist = _cd.cd_residual(
            np.asfortranarray(x), y.copy(), lam, b, float(tol), int(max_iter), track_objective
        )
        sweeps, conv = int(sweeps), bool(conv)
    if not conv:
        warnings.warn(f"coordinate descent did not converge in {max_iter} sweeps", ConvergenceWarning)
    return _make_fit(x, y, b, lam, sweeps, conv, hist if track_objective else None)


def _make_fit(x, y, b, lam, sweeps, conv, hist=None) -> LassoFit:
    from .model import kkt_residual

    r = y - x @ b
    obj = float(r @ r / x.shape[0] + 2 * lam * np.abs(b).sum())
    return LassoFit(b, lam, obj, sweeps, conv, kkt_residual(x, y, b, lam), hist)


def lambda_max(data: Dataset) -> float:
    """Smallest ``lam`` at which the zero vector solves the problem."""
    return float(np.abs(data.x.T @ data.y).max() / data.n)


def default_lambda(n: int, p: int, sigma: float) -> float:
    """Theory-level tuning ``8 * sigma * sqrt(log p / n)``."""
    if n < 2 or p < 2:
        raise ValueError("need n >= 2 and p >= 2")
    if sigma < 0:
        raise ValueError(f"sigma must be nonnegative, got {sigma}")
    if sigma == 0:
        warnings.warn("sigma = 0 gives lambda = 0 (unpenalized fit)")
    return 8.0 * sigma * math.sqrt(math.log(p) / n)


def make_lambda_grid(data: Dataset, num: int = 100, ratio: Optional[float] = None) -> np.ndarray:
    """Log-spaced descending grid from ``lambda_max`` down to ``ratio * lambda_max``."""
    if ratio is None:
        ratio = 0.01 if data.p > data.n else 1e-4
    top = lambda_max(data)
    if top <= 0:
        return np.array([1.0])
    return np.geomspace(top, top * ratio, num)


def select_lambda_cv(
    data: Dataset,
    folds: int = 10,
    lambda_grid: Optional[Sequence[float]] = None,
    seed: int = 0,
    tol: float = CV_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> float:
    """K-fold cross-validated ``lam`` minimizing mean out-of-fold squared error.

    The default grid is :func:`make_lambda_grid` with its floor chosen from the
    smallest training fold rather than the full sample size.
    Fold labels come from a seeded permutation, so the result is a function of
    ``(data, folds, grid, seed)`` only.  The grid is deduplicated and sorted in
    descending order; ties in CV error go to the larger value.
    """
    n = data.n
    if folds < 2 or folds > n:
        raise ValueError(f"folds must lie in [2, n={n}], got {folds}")
    if lambda_grid is None:
        # the deep grid only pays off when every training fold is overdetermined
        ntr = n - math.ceil(n / folds)
        grid = make_lambda_grid(data, ratio=0.01 if data.p >= ntr else 1e-4)
    else:
        grid = np.asarray(lambda_grid, dtype=float)
    if grid.size == 0:
        raise ValueError("lambda grid is empty")
    if np.any(~(grid > 0)):
        raise ValueError("lambda grid entries must be positive")
    grid = np.unique(grid)[::-1]
    if grid.size == 1:
        return float(grid[0])

    rng = np.random.default_rng(seed)
    labels = rng.permutation(np.arange(n) % folds)
    x, y = data.x, data.y
    sse = np.zeros(grid.size)
    for k in range(folds):
        test = labels == k
        xtr, ytr = x[~test], y[~test]
        ntr = xtr.shape[0]
        G = xtr.T @ xtr / ntr
        c = xtr.T @ ytr / ntr
        yy = ytr @ ytr / ntr
        b = np.zeros(data.p)
        for i, lam in enumerate(grid):
            # warm start along the path; each fit still meets the stopping rule
            b, _, _, _ = _fit_gram(G, c, yy, lam, tol, max_iter, b)
            resid = y[test] - x[test] @ b
            sse[i] += resid @ resid
    mse = sse / n
    # argmin returns the first minimizer, i.e. the largest lambda among ties
    return float(grid[int(np.argmin(mse))])
