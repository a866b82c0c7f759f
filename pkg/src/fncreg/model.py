"""Domain types shared across the package.

Every type is an immutable dataclass holding read-only numpy arrays and
carries a ``validate`` method that checks its invariants and raises
:class:`ValidationError` on the first violation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np


class ValidationError(ValueError):
    """An object violates one of its documented invariants."""


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


def _check(cond: bool, msg: str) -> None:
    if not cond:
        raise ValidationError(msg)


@dataclass(frozen=True, eq=False)
class Dataset:
    """Design matrix ``x`` (n x p) and response ``y`` (n,)."""

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "y", _frozen(self.y))
        self.validate()

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def p(self) -> int:
        return self.x.shape[1]

    def validate(self) -> None:
        _check(self.x.ndim == 2, f"x must be 2-D, got shape {self.x.shape}")
        _check(self.y.ndim == 1, f"y must be 1-D, got shape {self.y.shape}")
        _check(
            self.x.shape[0] == self.y.shape[0],
            f"dimension mismatch: x has {self.x.shape[0]} rows, y has {self.y.shape[0]}",
        )
        _check(self.n >= 2 and self.p >= 2, f"need n >= 2 and p >= 2, got n={self.n}, p={self.p}")
        _check(bool(np.all(np.isfinite(self.x))), "x contains non-finite entries")
        _check(bool(np.all(np.isfinite(self.y))), "y contains non-finite entries")

    def standardized(self) -> "Dataset":
        """Columns rescaled to unit empirical second moment (no centering)."""
        scale = np.sqrt(np.mean(self.x**2, axis=0))
        scale[scale == 0] = 1.0
        return Dataset(self.x / scale, self.y)


@dataclass(frozen=True, eq=False)
class GroundTruth:
    beta: np.ndarray
    sigma: float

    def __post_init__(self):
        object.__setattr__(self, "beta", _frozen(self.beta))
        self.validate()

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.beta))

    @property
    def s(self) -> int:
        return len(self.support)

    @property
    def p(self) -> int:
        return self.beta.shape[0]

    def validate(self) -> None:
        _check(self.beta.ndim == 1, "beta must be 1-D")
        _check(self.sigma >= 0 and math.isfinite(self.sigma), f"sigma must be finite and >= 0, got {self.sigma}")
        _check(self.s <= self.p, "support larger than p")


@dataclass(frozen=True, eq=False)
class LassoFit:
    beta_hat: np.ndarray
    lam: float
    objective: float
    iterations: int
    converged: bool = True
    kkt_residual: float = 0.0
    history: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "beta_hat", _frozen(self.beta_hat))
        if self.history is not None:
            object.__setattr__(self, "history", _frozen(self.history))

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.beta_hat))

    def validate(self, data: Dataset, tol: float = 1e-7) -> None:
        x, y, n = data.x, data.y, data.n
        b = self.beta_hat
        _check(b.shape == (data.p,), "beta_hat has wrong length")
        _check(self.lam >= 0, "lambda must be nonnegative")
        r = y - x @ b
        obj = r @ r / n + 2 * self.lam * np.abs(b).sum()
        _check(
            abs(obj - self.objective) <= 1e-10 * max(1.0, abs(obj)),
            f"stored objective {self.objective} differs from recomputed {obj}",
        )
        kkt = kkt_residual(x, y, b, self.lam)
        _check(kkt <= tol, f"KKT residual {kkt:.3e} exceeds tolerance {tol:.1e}")


def kkt_residual(x: np.ndarray, y: np.ndarray, beta: np.ndarray, lam: float) -> float:
    """Largest violation of the subgradient conditions of the Lasso objective."""
    g = x.T @ (y - x @ beta) / x.shape[0]
    active = beta != 0
    viol = np.where(active, np.abs(g - lam * np.sign(beta)), np.maximum(np.abs(g) - lam, 0.0))
    return float(viol.max()) if viol.size else 0.0


@dataclass(frozen=True, eq=False)
class NodewiseResult:
    """Nodewise-regression precision estimate.

    ``gamma[j]`` holds the p - 1 coefficients of column j regressed on the
    remaining columns, in the original column order with j removed.
    """

    theta_hat: np.ndarray
    tau_sq: np.ndarray
    gamma: np.ndarray
    lambda_node: np.ndarray

    def __post_init__(self):
        for name in ("theta_hat", "tau_sq", "gamma", "lambda_node"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def p(self) -> int:
        return self.theta_hat.shape[0]

    @property
    def row_support(self) -> np.ndarray:
        return np.count_nonzero(self.gamma, axis=1)

    def validate(self) -> None:
        p = self.p
        _check(self.theta_hat.shape == (p, p), "theta_hat must be square")
        _check(self.gamma.shape == (p, p - 1), "gamma must be p x (p-1)")
        _check(bool(np.all(self.tau_sq > 0)), "every tau_j^2 must be positive")
        for j in range(p):
            row = np.insert(-self.gamma[j], j, 1.0) / self.tau_sq[j]
            _check(
                np.allclose(self.theta_hat[j], row, rtol=1e-12, atol=1e-12),
                f"row {j} of theta_hat does not match its nodewise fit",
            )


@dataclass(frozen=True, eq=False)
class DebiasedFit:
    b_hat: np.ndarray
    omega_hat: np.ndarray
    sigma_hat: float
    z: np.ndarray
    n: int
    sigma_source: str = "provided"

    def __post_init__(self):
        for name in ("b_hat", "omega_hat", "z"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    def validate(self) -> None:
        om = self.omega_hat
        _check(self.sigma_source in ("provided", "estimated"), f"bad sigma_source {self.sigma_source!r}")
        _check(np.abs(om - om.T).max() <= 1e-10, "omega_hat is not symmetric")
        d = np.diag(om)
        _check(bool(np.all(d > 0)), "omega_hat has a non-positive diagonal entry")
        expect = math.sqrt(self.n) * self.b_hat / (self.sigma_hat * np.sqrt(d))
        _check(
            np.allclose(self.z, expect, rtol=1e-12, atol=1e-12),
            "z is not the standardized debiased estimate",
        )


@dataclass(frozen=True, eq=False)
class DecompositionCheck:
    """Gaussian part ``w``, bias part ``delta`` and their standardized forms."""

    w: np.ndarray
    delta: np.ndarray
    w_prime: np.ndarray
    delta_prime: np.ndarray
    mu: np.ndarray

    def __post_init__(self):
        for name in ("w", "delta", "w_prime", "delta_prime", "mu"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    def validate(self, b_hat: np.ndarray, beta: np.ndarray, n: int, atol: float = 1e-8) -> None:
        lhs = math.sqrt(n) * (np.asarray(b_hat) - np.asarray(beta))
        err = np.abs(lhs - (self.w - self.delta)).max()
        _check(err <= atol, f"sqrt(n)(b - beta) != w - delta (max error {err:.3e})")


@dataclass(frozen=True, eq=False)
class NullCalibration:
    c_tilde: float
    alpha: float
    reps: int
    samples: np.ndarray
    mode: str
    grid: Optional[np.ndarray] = None
    c_star: Optional[float] = None
    star_samples: Optional[np.ndarray] = None
    degenerate: int = 0

    def __post_init__(self):
        object.__setattr__(self, "samples", _frozen(self.samples))
        for name in ("grid", "star_samples"):
            if getattr(self, name) is not None:
                object.__setattr__(self, name, _frozen(getattr(self, name)))

    def validate(self) -> None:
        _check(self.mode in ("fast_gaussian", "full_pipeline"), f"bad mode {self.mode!r}")
        _check(self.samples.shape == (self.reps,), "samples length must equal reps")
        q = float(np.quantile(self.samples, 1 - self.alpha))
        _check(q == self.c_tilde, "c_tilde is not the (1 - alpha) quantile of samples")
        if self.c_star is not None:
            _check(self.grid is not None and self.star_samples is not None, "c_star needs grid and samples")
            _check(float(np.quantile(self.star_samples, 1 - self.alpha)) == self.c_star, "bad c_star")


@dataclass(frozen=True)
class SignalEstimate:
    pi_raw: float
    pi_hat: float
    s_hat: int
    estimator_kind: str
    degenerate: bool = False

    def validate(self, p: int) -> None:
        _check(self.estimator_kind in ("mr_orderstat", "mr_discretized"), "bad estimator_kind")
        _check(self.pi_hat == max(0.0, min(1.0, self.pi_raw)), "pi_hat is not the clamped pi_raw")
        _check(self.s_hat == round_half_up(self.pi_hat * p), "s_hat != round(pi_hat * p)")


def round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


@dataclass(frozen=True, eq=False)
class FnpCurve:
    """Estimated FNP evaluated at the descending order statistics of ``|z|``.

    ``order[k]`` is the column whose ``|z|`` equals ``thresholds[k]``.
    """

    thresholds: np.ndarray
    r_counts: np.ndarray
    fnp_hat: np.ndarray
    fnp_raw: np.ndarray
    s_hat: int
    p: int
    order: Optional[np.ndarray] = None

    def __post_init__(self):
        if self.order is not None:
            object.__setattr__(self, "order", _frozen(self.order, dtype=np.int64))
        object.__setattr__(self, "thresholds", _frozen(self.thresholds))
        object.__setattr__(self, "r_counts", _frozen(self.r_counts, dtype=np.int64))
        object.__setattr__(self, "fnp_hat", _frozen(self.fnp_hat))
        object.__setattr__(self, "fnp_raw", _frozen(self.fnp_raw))

    def validate(self) -> None:
        from scipy.special import ndtr

        t, r = self.thresholds, self.r_counts
        _check(t.shape == r.shape == self.fnp_hat.shape == self.fnp_raw.shape, "curve arrays differ in length")
        _check(bool(np.all(np.diff(t) <= 0)), "thresholds must be descending")
        _check(bool(np.all(np.diff(r) >= 0)), "r_counts must be nondecreasing")
        _check(self.s_hat >= 1, "curve needs s_hat >= 1")
        raw = 1 - (r - 2 * (self.p - self.s_hat) * ndtr(-t)) / self.s_hat
        _check(np.allclose(self.fnp_raw, raw, rtol=0, atol=1e-12), "fnp_raw inconsistent with counts")
        _check(np.allclose(self.fnp_hat, np.clip(raw, 0, 1), rtol=0, atol=1e-12), "fnp_hat inconsistent")


@dataclass(frozen=True)
class Diagnostics:
    eta: float
    gamma1: float
    gamma2: float
    gamma_star: float
    mu_threshold: float
    s_max: int
    mu_min: Optional[float] = None
    bounding_rate: Optional[float] = None

    def validate(self) -> None:
        _check(self.gamma_star == max(self.gamma1, self.gamma2), "gamma_star != max(gamma1, gamma2)")
        _check(self.mu_min is None or self.mu_min >= 0, "mu_min must be nonnegative")


@dataclass(frozen=True, eq=False)
class SelectionResult:
    """Outcome of thresholding the estimated-FNP curve at level ``epsilon``.

    ``selected`` holds 0-based column indices in increasing order.  ``t_star``
    is ``math.inf`` when nothing was selected, flagged either by
    ``no_qualifying_threshold`` or by ``no_signal`` (estimated s of zero).
    """

    epsilon: float
    t_star: float
    selected: Tuple[int, ...]
    s_hat: int
    curve: Optional[FnpCurve] = None
    no_qualifying_threshold: bool = False
    no_signal: bool = False
    c_tilde: Optional[float] = None
    pi_hat: Optional[float] = None
    diagnostics: Optional[Diagnostics] = None

    def __post_init__(self):
        object.__setattr__(self, "selected", tuple(sorted(int(j) for j in self.selected)))

    def validate(self, z: Optional[np.ndarray] = None) -> None:
        _check(0 < self.epsilon <= 1, f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.curve is not None:
            self.curve.validate()
            ok = self.curve.thresholds[self.curve.fnp_hat <= self.epsilon]
            if ok.size:
                _check(self.t_star == float(ok.max()), "t_star is not the largest qualifying threshold")
            else:
                _check(math.isinf(self.t_star) and not self.selected, "empty qualifying set must select nothing")
        if math.isinf(self.t_star):
            _check(not self.selected, "infinite threshold with a nonempty selection")
        if z is not None:
            expect = tuple(int(j) for j in np.flatnonzero(np.abs(z) >= self.t_star))
            _check(self.selected == expect, "selected != {j : |z_j| >= t_star}")


@dataclass(frozen=True)
class EvaluationMetrics:
    tp: int
    fp: int
    fn: int
    fnp: float
    fdp: float
    f_measure: float
    s: int
    n_selected: int
    null_signal: bool = False

    def validate(self) -> None:
        _check(min(self.tp, self.fp, self.fn) >= 0, "negative count")
        _check(self.tp + self.fn == self.s, "tp + fn != s")
        _check(self.tp + self.fp == self.n_selected, "tp + fp != |selected|")
        for name in ("fdp",) + (() if self.null_signal else ("fnp", "f_measure")):
            v = getattr(self, name)
            _check(0 <= v <= 1, f"{name}={v} outside [0, 1]")
