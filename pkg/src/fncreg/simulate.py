"""Synthetic scenarios: random sparse precision graphs, Gaussian designs, sparse signals.

Randomness comes from Philox generators keyed by ``numpy.random.SeedSequence``.
:func:`replicate_seed` derives a per-replicate sequence from
``(master_seed, scenario key, replicate index)``, so a replicate's draws do not
depend on which worker runs it or on what other scenarios exist.
"""

from __future__ import annotations

import zlib
from dataclasses import asdict, dataclass
from typing import Tuple

import numpy as np

from .model import Dataset, GroundTruth

PD_FLOOR = 0.05


def rng_from(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    ss = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class ScenarioConfig:
    n: int = 150
    p: int = 200
    s: int = 10
    theta: float = 0.02
    beta1: float = 0.5
    sigma: float = 1.0
    epsilon: float = 0.1
    replicates: int = 100
    master_seed: int = 0

    def __post_init__(self):
        if min(self.n, self.p) < 1 or self.s < 0:
            raise ValueError("n and p must be positive and s nonnegative")
        if self.s > self.p:
            raise ValueError(f"s={self.s} exceeds p={self.p}")
        if not 0 <= self.theta <= 1:
            raise ValueError(f"theta must lie in [0, 1], got {self.theta}")
        if self.sigma < 0:
            raise ValueError("sigma must be nonnegative")
        if not 0 < self.epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {self.epsilon}")
        if self.replicates < 1:
            raise ValueError("replicates must be at least 1")
        if self.s > 0 and self.beta1 == 0:
            raise ValueError("beta1 = 0 with s > 0 leaves the support empty")

    def key(self) -> str:
        """Identifier of the data-generating process (excludes epsilon and counts)."""
        return f"n={self.n},p={self.p},s={self.s},theta={self.theta!r},beta1={self.beta1!r},sigma={self.sigma!r}"

    def to_dict(self) -> dict:
        return asdict(self)


def replicate_seed(master_seed: int, scenario_key: str, index: int) -> np.random.SeedSequence:
    tag = zlib.crc32(scenario_key.encode("utf-8"))
    return np.random.SeedSequence(entropy=master_seed, spawn_key=(tag, index))


def gen_precision_er(
    p: int,
    theta: float,
    mag_lo: float = 0.4,
    mag_hi: float = 0.8,
    seed=0,
    random_sign: bool = False,
) -> Tuple[np.ndarray, int]:
    """Erdos-Renyi sparse precision matrix with unit diagonal.

    Each pair ``i < j`` is an edge with probability ``theta`` and gets a
    magnitude from Uniform[mag_lo, mag_hi] (sign flipped at random when
    ``random_sign``).  The matrix is shifted by a multiple of the identity and
    rescaled to unit diagonal so its smallest eigenvalue is at least 0.05.
    Returns the matrix and its largest off-diagonal row support.
    """
    if not 0 <= theta <= 1:
        raise ValueError(f"theta must lie in [0, 1], got {theta}")
    if not 0 < mag_lo <= mag_hi:
        raise ValueError("need 0 < mag_lo <= mag_hi")
    rng = rng_from(seed)
    iu = np.triu_indices(p, 1)
    edges = rng.random(iu[0].size) < theta
    mags = rng.uniform(mag_lo, mag_hi, size=iu[0].size)
    if random_sign:
        mags *= rng.choice([-1.0, 1.0], size=mags.size)
    upper = np.zeros((p, p))
    upper[iu] = np.where(edges, mags, 0.0)
    prec = upper + upper.T + np.eye(p)
    lam_min = np.linalg.eigvalsh(prec)[0]
    # unit diagonal before the shift, so rescaling divides every eigenvalue by 1 + zeta
    zeta = max(0.0, (PD_FLOOR - lam_min) / (1 - PD_FLOOR))
    if zeta > 0:
        prec = (prec + zeta * np.eye(p)) / (1 + zeta)
    support = (prec != 0).sum(axis=1) - 1
    return prec, int(support.max()) if p else 0


def gen_design(n: int, precision: np.ndarray, seed=0) -> np.ndarray:
    """Rows i.i.d. Gaussian with covariance ``inv(precision)``."""
    precision = np.asarray(precision, dtype=float)
    if not np.allclose(precision, precision.T):
        raise ValueError("precision must be symmetric")
    try:
        cov = np.linalg.inv(precision)
        chol = np.linalg.cholesky((cov + cov.T) / 2)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"precision is not positive definite: {exc}") from exc
    rng = rng_from(seed)
    return rng.standard_normal((n, precision.shape[0])) @ chol.T


def make_beta(p: int, s: int, beta1: float, sigma: float = 1.0) -> GroundTruth:
    """First ``s`` coefficients equal to ``beta1``, the rest zero."""
    if not 0 <= s <= p:
        raise ValueError(f"need 0 <= s <= p, got s={s}, p={p}")
    if s > 0 and beta1 == 0:
        raise ValueError("beta1 = 0 with s > 0 leaves the support empty")
    beta = np.zeros(p)
    beta[:s] = beta1
    return GroundTruth(beta, sigma)


def gen_response(x: np.ndarray, beta: np.ndarray, sigma: float, seed=0) -> Tuple[np.ndarray, np.ndarray]:
    """``y = x beta + sigma g`` with standard normal ``g``; returns ``(y, noise)``."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    x = np.asarray(x, dtype=float)
    beta = np.asarray(beta, dtype=float)
    if x.shape[1] != beta.shape[0]:
        raise ValueError("x and beta dimensions disagree")
    noise = sigma * rng_from(seed).standard_normal(x.shape[0])
    return x @ beta + noise, noise


@dataclass(frozen=True, eq=False)
class SimulatedReplicate:
    data: Dataset
    truth: GroundTruth
    precision: np.ndarray
    s_max: int
    noise: np.ndarray


def simulate_replicate(cfg: ScenarioConfig, index: int = 0, seed=None) -> SimulatedReplicate:
    """Draw one replicate of a scenario.

    The same precision graph, design and noise streams are used for a given
    ``(master_seed, scenario key, index)``.
    """
    ss = replicate_seed(cfg.master_seed, cfg.key(), index) if seed is None else np.random.SeedSequence(seed)
    s_prec, s_x, s_y = ss.spawn(3)
    prec, s_max = gen_precision_er(cfg.p, cfg.theta, seed=s_prec)
    x = gen_design(cfg.n, prec, s_x)
    truth = make_beta(cfg.p, cfg.s, cfg.beta1, cfg.sigma)
    y, noise = gen_response(x, truth.beta, cfg.sigma, s_y)
    return SimulatedReplicate(Dataset(x, y), truth, prec, s_max, noise)
