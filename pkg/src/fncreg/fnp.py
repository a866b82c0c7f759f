"""False negative proportion estimation and adaptive thresholding.

The pipeline ranks predictors by ``|z_j|``, estimates the number of relevant
predictors with a modified MR proportion estimator whose bounding value is
calibrated by simulating the global null, and then picks the largest order
statistic at which the estimated FNP is at most the requested level.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, replace
from typing import Optional, Union

import numpy as np
from scipy.special import erfcx, ndtr

from .debias import debias, debiased_fit, standardize
from .lasso import DEFAULT_MAX_ITER, DEFAULT_TOL, default_lambda, fit_lasso, select_lambda_cv
from .model import (
    Dataset,
    DebiasedFit,
    Diagnostics,
    FnpCurve,
    LassoFit,
    NodewiseResult,
    NullCalibration,
    SelectionResult,
    SignalEstimate,
    round_half_up,
)
from .nodewise import DEFAULT_KAPPA, nodewise_regression

log = logging.getLogger(__name__)

SIGMA_BAR_SQ_FLOOR = 1e-24
PI_DENOM_FLOOR = 1e-12
CALIBRATION_MODES = ("fast_gaussian", "full_pipeline")


class DegenerateStatisticError(ValueError):
    """Every candidate threshold in a supremum statistic was degenerate."""


class StageError(RuntimeError):
    """A pipeline stage failed; ``stage`` names it."""

    def __init__(self, stage: str, cause: BaseException):
        super().__init__(f"{stage}: {cause}")
        self.stage = stage
        self.cause = cause


# -- tail helpers -----------------------------------------------------------


def _two_prod(a, b):
    """``a * b`` as an unevaluated sum ``hi + lo`` (Dekker)."""
    hi = a * b
    ca = 134217729.0 * a
    ah = ca - (ca - a)
    al = a - ah
    cb = 134217729.0 * b
    bh = cb - (cb - b)
    bl = b - bh
    return hi, ((ah * bh - hi) + ah * bl + al * bh) + al * bl


def norm_sf(t):
    """Upper standard-normal tail ``S(t) = Phi(-t)``, relative error near 1e-16.

    For ``t >= 1`` uses ``erfcx(t / sqrt 2) exp(-t^2 / 2) / 2`` with ``t^2``
    carried in double-double, which avoids the roughly ``t^2 * eps`` error of
    ``erfc`` on a rounded argument.
    """
    t = np.asarray(t, dtype=float)
    hi, lo = _two_prod(t, t)
    with np.errstate(under="ignore", invalid="ignore"):
        tail = 0.5 * erfcx(t / math.sqrt(2)) * np.exp(-hi / 2) * (1 - lo / 2)
    out = np.where(t < 1, ndtr(-t), tail)
    return out if out.ndim else float(out)


def sigma_bar(t):
    """``sqrt(2 S(t) (1 - 2 S(t)))`` with ``S`` the upper normal tail."""
    s = norm_sf(t)
    return np.sqrt(2 * s * (1 - 2 * s))


def descending_order(z: np.ndarray) -> np.ndarray:
    """Indices sorting ``|z|`` descending, ties by ascending index."""
    z = np.asarray(z, dtype=float)
    return np.lexsort((np.arange(z.size), -np.abs(z)))


def middle_ranks(p: int) -> np.ndarray:
    """1-based ranks ``j`` with ``1 < j < p/2``."""
    return np.arange(2, (p + 1) // 2)


# -- counting and the FNP estimate --------------------------------------------


def count_r(z: np.ndarray, t: float) -> int:
    """Number of statistics with ``|z_j| > t``."""
    return int(np.count_nonzero(np.abs(np.asarray(z, dtype=float)) > t))


def fnp_hat(r: int, p: int, s_hat: int, t: float, clamp: bool = True) -> float:
    """Estimated FNP ``1 - (r - 2 (p - s_hat) Phi(-t)) / s_hat``.

    Clamped to [0, 1] unless ``clamp`` is False.
    """
    if s_hat < 1:
        raise ValueError("s_hat must be at least 1; the estimate is undefined at s_hat = 0")
    if not 0 <= r <= p:
        raise ValueError(f"r must lie in [0, p], got r={r}, p={p}")
    raw = 1.0 - (r - 2.0 * (p - s_hat) * norm_sf(t)) / s_hat
    return min(1.0, max(0.0, raw)) if clamp else raw


def fnp_curve(z: np.ndarray, s_hat: int) -> FnpCurve:
    """Estimated FNP at each of the p order statistics of ``|z|``."""
    if s_hat < 1:
        raise ValueError("s_hat must be at least 1")
    z = np.asarray(z, dtype=float)
    p = z.size
    order = descending_order(z)
    t = np.abs(z)[order]
    # R(t) with strict inequality, valid under ties
    r = p - np.searchsorted(t[::-1], t, side="right")
    raw = 1.0 - (r - 2.0 * (p - s_hat) * norm_sf(t)) / s_hat
    return FnpCurve(t, r, np.clip(raw, 0.0, 1.0), raw, int(s_hat), p, order)


def threshold_select(curve: FnpCurve, epsilon: float) -> SelectionResult:
    """Largest order statistic with estimated FNP at most ``epsilon``.

    Selects every predictor with ``|z_j| >= t_star``.  When no order statistic
    qualifies the selection is empty, ``t_star`` is infinite and the result is
    flagged ``no_qualifying_threshold``.
    """
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    ok = curve.fnp_hat <= epsilon
    if not ok.any():
        return SelectionResult(epsilon, math.inf, (), curve.s_hat, curve, no_qualifying_threshold=True)
    t_star = float(curve.thresholds[ok].max())
    selected = curve.order[curve.thresholds >= t_star]
    return SelectionResult(epsilon, t_star, tuple(selected), curve.s_hat, curve)


# -- null supremum statistics -----------------------------------------------


def _v_rows(abs_sorted: np.ndarray) -> np.ndarray:
    """Order-statistic supremum statistic for each row of descending ``|z|``."""
    p = abs_sorted.shape[1]
    j = middle_ranks(p)
    if j.size == 0:
        return np.full(abs_sorted.shape[0], -np.inf)
    a = abs_sorted[:, j - 1]
    s = norm_sf(a)
    var = 2 * s * (1 - 2 * s)
    ok = var >= SIGMA_BAR_SQ_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (j / p - 2 * s) / np.sqrt(var)
    h = np.where(ok, h, -np.inf)
    return h.max(axis=1)


def v_statistic(z_null: np.ndarray) -> float:
    """Supremum over middle ranks of the standardized exceedance deviation.

    For ranks ``1 < j < p/2`` of the descending ``|z|``, evaluates
    ``(j/p - 2 S(|z_(j)|)) / sigma_bar(|z_(j)|)`` and returns the maximum,
    skipping ranks where ``sigma_bar`` vanishes.
    """
    z = np.asarray(z_null, dtype=float)
    if z.ndim != 1 or z.size < 4:
        raise ValueError("need a vector of at least 4 statistics")
    v = _v_rows(np.abs(z)[descending_order(z)][None, :])[0]
    if not np.isfinite(v):
        raise DegenerateStatisticError("sigma_bar vanishes at every evaluated rank")
    return float(v)


def grid_points(p: int, tau0: float, tau1: float) -> np.ndarray:
    """Integers in ``[sqrt(tau0 log p), sqrt(tau1 log p)]``."""
    if not 0 < tau0 < tau1:
        raise ValueError(f"need 0 < tau0 < tau1, got tau0={tau0}, tau1={tau1}")
    lo, hi = math.sqrt(tau0 * math.log(p)), math.sqrt(tau1 * math.log(p))
    grid = np.arange(math.ceil(lo), math.floor(hi) + 1, dtype=float)
    grid = grid[grid > 0]
    if grid.size == 0:
        raise ValueError(f"no positive integer in [{lo:.4f}, {hi:.4f}]; widen (tau0, tau1)")
    return grid


def _v_star_rows(abs_z: np.ndarray, grid: np.ndarray) -> np.ndarray:
    p = abs_z.shape[1]
    frac = (abs_z[:, :, None] > grid[None, None, :]).sum(axis=1) / p
    s = norm_sf(grid)
    var = 2 * s * (1 - 2 * s)
    ok = var >= SIGMA_BAR_SQ_FLOOR
    with np.errstate(divide="ignore", invalid="ignore"):
        h = (frac - 2 * s) / np.sqrt(var)
    return np.where(ok[None, :], h, -np.inf).max(axis=1)


def v_star_statistic(z_null: np.ndarray, grid: np.ndarray) -> float:
    """Discretized supremum statistic over the integer grid ``grid``."""
    z = np.abs(np.asarray(z_null, dtype=float))
    v = _v_star_rows(z[None, :], np.asarray(grid, dtype=float))[0]
    if not np.isfinite(v):
        raise DegenerateStatisticError("sigma_bar vanishes at every grid point")
    return float(v)


def default_alpha(p: int) -> float:
    return 1.0 / math.sqrt(math.log(p))


def _gaussian_factor(omega: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh((omega + omega.T) / 2)
    return vecs * np.sqrt(np.clip(vals, 0.0, None))


def replicate_streams(seed, reps: int):
    """Independent per-replicate Philox generators split from ``seed``."""
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return [np.random.Generator(np.random.Philox(child)) for child in ss.spawn(reps)]


def null_statistics(
    data: Dataset,
    omega: np.ndarray,
    sigma: float,
    reps: int,
    mode: str = "fast_gaussian",
    seed=0,
    *,
    theta: Optional[np.ndarray] = None,
    lam: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> np.ndarray:
    """``reps x p`` standardized statistics simulated under the global null.

    See :func:`calibrate_null` for the two modes.
    """
    p = data.p
    omega = np.asarray(omega, dtype=float)
    streams = replicate_streams(seed, reps)

    if mode == "fast_gaussian":
        factor = _gaussian_factor(omega)
        g = np.stack([rng.standard_normal(p) for rng in streams])
        w = sigma * (g @ factor.T)
        z_null = w / (sigma * np.sqrt(np.diag(omega)))
    else:
        if theta is None or lam is None:
            raise ValueError("full_pipeline mode needs theta and lam")
        z_null = np.empty((reps, p))
        for i, rng in enumerate(streams):
            null = Dataset(data.x, sigma * rng.standard_normal(data.n))
            fit = fit_lasso(null, lam, tol, max_iter)
            z_null[i] = standardize(debias(fit, theta, null), omega, sigma, data.n)

    return z_null


def calibrate_null(
    data: Dataset,
    omega: np.ndarray,
    sigma: float,
    reps: int = 1000,
    alpha_p: Optional[float] = None,
    mode: str = "fast_gaussian",
    seed=0,
    *,
    grid: Optional[np.ndarray] = None,
    theta: Optional[np.ndarray] = None,
    lam: Optional[float] = None,
    tol: float = DEFAULT_TOL,
    max_iter: int = DEFAULT_MAX_ITER,
) -> NullCalibration:
    """Monte-Carlo bounding value for the proportion estimator.

    ``fast_gaussian`` draws the Gaussian component ``w ~ N(0, sigma^2 omega)``
    given the observed design and standardizes it by ``sigma sqrt(omega_jj)``.
    ``full_pipeline`` simulates ``y = eps`` with ``eps ~ N(0, sigma^2 I)`` on
    the fixed design and reruns Lasso (at ``lam``), debiasing (with ``theta``)
    and standardization for every replicate.

    Each replicate has its own generator split from ``seed``, so the output
    does not depend on how replicates are batched.  ``c_tilde`` is the
    empirical ``1 - alpha_p`` quantile of the replicate statistics; when
    ``grid`` is given the discretized statistic and ``c_star`` are computed
    from the same draws.
    """
    p = data.p
    if reps < 100:
        raise ValueError(f"reps must be at least 100, got {reps}")
    if mode not in CALIBRATION_MODES:
        raise ValueError(f"mode must be one of {CALIBRATION_MODES}, got {mode!r}")
    alpha = default_alpha(p) if alpha_p is None else float(alpha_p)
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha_p must lie in (0, 1], got {alpha}")
    if not sigma > 0:
        raise ValueError(f"sigma must be positive, got {sigma}")
    z_null = null_statistics(data, omega, sigma, reps, mode, seed, theta=theta, lam=lam, tol=tol, max_iter=max_iter)
    abs_z = np.abs(z_null)
    samples = _v_rows(-np.sort(-abs_z, axis=1))
    bad = ~np.isfinite(samples)
    n_bad = int(bad.sum())
    if n_bad > 0.01 * reps:
        warnings.warn(f"{n_bad} of {reps} null replicates were degenerate")
    c_tilde = float(np.quantile(samples, 1 - alpha))
    if not np.isfinite(c_tilde):
        raise DegenerateStatisticError("calibration quantile is not finite; too many degenerate replicates")

    c_star = star = None
    if grid is not None:
        grid = np.asarray(grid, dtype=float)
        star = _v_star_rows(abs_z, grid)
        c_star = float(np.quantile(star, 1 - alpha))
    return NullCalibration(c_tilde, alpha, reps, samples, mode, grid, c_star, star, n_bad)


# -- proportion estimators --------------------------------------------------


def estimate_pi_orderstat(z: np.ndarray, c_tilde: float) -> SignalEstimate:
    """Proportion of relevant predictors from the ordered statistics.

    Maximizes ``(j/p - 2 S(a_j) - c sigma_bar(a_j)) / (1 - 2 S(a_j))`` over
    middle ranks, with ``a_j = |z_(j)|``; ranks whose denominator is below
    1e-12 are skipped.  The estimate is clamped to [0, 1] and ``s_hat`` is
    its rounded multiple of p.
    """
    z = np.asarray(z, dtype=float)
    p = z.size
    if p < 4:
        raise ValueError("need at least 4 statistics")
    a = np.sort(np.abs(z))[::-1]
    j = middle_ranks(p)
    aj = a[j - 1]
    s = norm_sf(aj)
    den = 1 - 2 * s
    ok = den >= PI_DENOM_FLOOR
    if not ok.any():
        return SignalEstimate(0.0, 0.0, 0, "mr_orderstat", degenerate=True)
    num = j / p - 2 * s - c_tilde * np.sqrt(2 * s * (1 - 2 * s))
    raw = float((num[ok] / den[ok]).max())
    return _signal(raw, p, "mr_orderstat")


def _signal(raw: float, p: int, kind: str) -> SignalEstimate:
    pi = max(0.0, min(1.0, raw))
    return SignalEstimate(raw, pi, round_half_up(pi * p), kind)


def estimate_pi_discretized(z: np.ndarray, c_star: float, tau0: float, tau1: float) -> SignalEstimate:
    """Proportion estimate restricted to the integer thresholds of :func:`grid_points`."""
    z = np.abs(np.asarray(z, dtype=float))
    p = z.size
    grid = grid_points(p, tau0, tau1)
    frac = (z[:, None] > grid[None, :]).sum(axis=0) / p
    s = norm_sf(grid)
    den = 1 - 2 * s
    ok = den >= PI_DENOM_FLOOR
    if not ok.any():
        return SignalEstimate(0.0, 0.0, 0, "mr_discretized", degenerate=True)
    num = frac - 2 * s - c_star * np.sqrt(2 * s * (1 - 2 * s))
    return _signal(float((num[ok] / den[ok]).max()), p, "mr_discretized")


# -- diagnostics --------------------------------------------------------------


def diagnostics(
    n: int,
    p: int,
    s: int,
    s_max: int,
    beta: Optional[np.ndarray] = None,
    sigma: Optional[float] = None,
    precision: Optional[np.ndarray] = None,
) -> Diagnostics:
    """Sparsity exponent, dependence exponents and the effect-size threshold.

    ``mu_min`` is filled in only when the true ``beta``, ``sigma`` and
    population ``precision`` are all supplied.
    """
    if not 1 <= s < p:
        raise ValueError(f"need 1 <= s < p, got s={s}, p={p}")
    if s_max < 0:
        raise ValueError("s_max must be nonnegative")
    logp = math.log(p)
    eta = 1 - math.log(s) / logp
    ratio = math.inf if s_max == 0 else math.log(n / s_max) / (2 * logp)
    g1 = 2 * eta - min(1.0, ratio)
    g2 = 2 - 2 * eta - math.log(n) / (2 * logp)
    g = max(g1, g2)
    mu_thr = math.sqrt(2 * g * logp) if g > 0 else 0.0
    mu_min = None
    if beta is not None and sigma is not None and precision is not None:
        beta = np.asarray(beta, dtype=float)
        idx = np.flatnonzero(beta)
        diag = np.diag(np.asarray(precision, dtype=float))[idx]
        mu_min = float(np.min(math.sqrt(n) * np.abs(beta[idx]) / (sigma * np.sqrt(diag)))) if idx.size else 0.0
    rate = (s_max / n) ** 0.25 * logp
    return Diagnostics(eta, g1, g2, g, mu_thr, int(s_max), mu_min, rate)


# -- the full procedure -------------------------------------------------------


@dataclass(frozen=True)
class FncRegConfig:
    """Settings for :func:`run_fnc_reg`.

    ``lam`` is ``"cv"`` (cross-validated), ``"theory"`` (needs a numeric
    ``sigma``) or a fixed positive value.  ``sigma`` is a known noise level or
    ``"estimate"``.
    """

    lam: Union[str, float] = "cv"
    cv_folds: int = 10
    kappa: float = DEFAULT_KAPPA
    lambda_node: Optional[float] = None
    sigma: Union[str, float] = "estimate"
    reps: int = 1000
    alpha_p: Optional[float] = None
    calibration: str = "fast_gaussian"
    estimator: str = "orderstat"
    tau0: float = 0.1
    tau1: float = 4.0
    standardize: bool = False
    seed: int = 0
    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER

    def validate(self) -> None:
        if isinstance(self.lam, str):
            if self.lam not in ("cv", "theory"):
                raise ValueError(f"lam must be 'cv', 'theory' or a number, got {self.lam!r}")
            if self.lam == "theory" and isinstance(self.sigma, str):
                raise ValueError("lam='theory' requires a numeric sigma")
        elif not self.lam >= 0:
            raise ValueError(f"lam must be nonnegative, got {self.lam}")
        if isinstance(self.sigma, str):
            if self.sigma not in ("estimate", "auto"):
                raise ValueError(f"sigma must be a positive number or 'estimate', got {self.sigma!r}")
        elif not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.calibration not in CALIBRATION_MODES:
            raise ValueError(f"calibration must be one of {CALIBRATION_MODES}")
        if self.estimator not in ("orderstat", "discretized"):
            raise ValueError("estimator must be 'orderstat' or 'discretized'")
        if self.reps < 100:
            raise ValueError("reps must be at least 100")


@dataclass(frozen=True, eq=False)
class FncRegFit:
    """Everything computed by the procedure up to the choice of ``epsilon``."""

    data: Dataset
    config: FncRegConfig
    lasso: LassoFit
    nodewise: NodewiseResult
    debiased: DebiasedFit
    calibration: NullCalibration
    signal: SignalEstimate
    curve: Optional[FnpCurve]

    @property
    def z(self) -> np.ndarray:
        return self.debiased.z

    @property
    def s_hat(self) -> int:
        return self.signal.s_hat

    def diagnostics(self) -> Optional[Diagnostics]:
        """Diagnostics with s and s_max replaced by their estimates."""
        p = self.data.p
        if not 1 <= self.s_hat < p:
            return None
        return diagnostics(self.data.n, p, self.s_hat, int(self.nodewise.row_support.max()))

    def select(self, epsilon: float) -> SelectionResult:
        if not 0 < epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
        c = self.calibration.c_star if self.config.estimator == "discretized" else self.calibration.c_tilde
        extra = dict(c_tilde=c, pi_hat=self.signal.pi_hat, diagnostics=self.diagnostics())
        if self.curve is None:
            return SelectionResult(epsilon, math.inf, (), 0, None, no_signal=True, **extra)
        return replace(threshold_select(self.curve, epsilon), **extra)


def _stage(name, fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except (ValueError, ArithmeticError, np.linalg.LinAlgError) as exc:
        raise StageError(name, exc) from exc


def run_fnc_reg(data: Dataset, config: Optional[FncRegConfig] = None) -> FncRegFit:
    """Run every step of the procedure that does not depend on ``epsilon``.

    Lasso fit, nodewise precision estimate, debiasing and standardization,
    null calibration of the bounding value, proportion estimate and the
    estimated-FNP curve over the order statistics.
    """
    cfg = config or FncRegConfig()
    _stage("config", cfg.validate)
    if cfg.standardize:
        data = data.standardized()
    n, p = data.n, data.p
    cv_seed, cal_seed = np.random.SeedSequence(cfg.seed).spawn(2)

    if cfg.lam == "cv":
        lam = _stage("lasso", select_lambda_cv, data, cfg.cv_folds, None, cv_seed)
    elif cfg.lam == "theory":
        lam = default_lambda(n, p, float(cfg.sigma))
    else:
        lam = float(cfg.lam)
    fit = _stage("lasso", fit_lasso, data, lam, cfg.tol, cfg.max_iter)
    nw = _stage("nodewise", nodewise_regression, data, cfg.lambda_node, cfg.tol, cfg.max_iter, cfg.kappa)
    deb = _stage("debias", debiased_fit, data, fit, nw, cfg.sigma)

    grid = None
    if cfg.estimator == "discretized":
        grid = _stage("calibration", grid_points, p, cfg.tau0, cfg.tau1)
    cal = _stage(
        "calibration",
        calibrate_null,
        data,
        deb.omega_hat,
        deb.sigma_hat,
        cfg.reps,
        cfg.alpha_p,
        cfg.calibration,
        cal_seed,
        grid=grid,
        theta=nw.theta_hat,
        lam=lam,
        tol=cfg.tol,
        max_iter=cfg.max_iter,
    )
    if cfg.estimator == "discretized":
        sig = _stage("proportion", estimate_pi_discretized, deb.z, cal.c_star, cfg.tau0, cfg.tau1)
    else:
        sig = _stage("proportion", estimate_pi_orderstat, deb.z, cal.c_tilde)
    log.debug("lambda=%.4g sigma=%.4g c=%.4g s_hat=%d", lam, deb.sigma_hat, cal.c_tilde, sig.s_hat)
    curve = fnp_curve(deb.z, sig.s_hat) if sig.s_hat >= 1 else None
    return FncRegFit(data, cfg, fit, nw, deb, cal, sig, curve)


def fnc_reg(data: Dataset, epsilon: float, config: Optional[FncRegConfig] = None) -> SelectionResult:
    """Smallest predictor set whose estimated FNP is at most ``epsilon``."""
    if not 0 < epsilon <= 1:
        raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}")
    return run_fnc_reg(data, config).select(epsilon)
