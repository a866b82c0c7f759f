"""Replicated simulation runs and the summary tables built from them.

One replicate draws a scenario, runs the procedure once, and evaluates the
selection at several control levels plus the cross-validated Lasso support.
Outcomes are cached per scenario so tables sharing a scenario reuse the fits.
"""

from __future__ import annotations

import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .debias import estimate_sigma
from .fnp import FncRegConfig, calibrate_null, run_fnc_reg
from .metrics import MetricsSummary, aggregate, evaluate
from .model import EvaluationMetrics
from .simulate import ScenarioConfig, replicate_seed, simulate_replicate

TABLE1_BETAS = (0.2, 0.3, 0.4, 0.5)
TABLE2_BETAS = (0.3, 0.5, 0.7)
TABLE2_EPSILONS = (0.1, 0.2, 0.3)
SHAT_BETAS = (0.2, 0.3, 0.4, 0.5)
SHAT_NS = (100, 150)
KNOCKOFF_NOTE = "Knockoff comparator omitted (external method, not implemented)"


@dataclass(frozen=True)
class ReplicateOutcome:
    index: int
    s: int
    s_hat: int
    s_max: int
    c_tilde: float
    lam: float
    sigma_hat: float
    fnc: Tuple[Tuple[float, EvaluationMetrics], ...]
    lasso: EvaluationMetrics

    def at(self, epsilon: float) -> EvaluationMetrics:
        for eps, m in self.fnc:
            if math.isclose(eps, epsilon):
                return m
        raise KeyError(f"no result at epsilon={epsilon}")


def run_replicate(
    scenario: ScenarioConfig,
    index: int,
    epsilons: Sequence[float],
    config: Optional[FncRegConfig] = None,
    known_sigma: bool = True,
) -> ReplicateOutcome:
    """Simulate replicate ``index`` of ``scenario`` and evaluate every ``epsilon``.

    ``sigma_hat`` records the residual-based noise estimate even when the
    procedure itself is given the true noise level.
    """
    rep = simulate_replicate(scenario, index)
    cfg = config or FncRegConfig()
    seed = int(replicate_seed(scenario.master_seed, scenario.key(), index).spawn(4)[3].generate_state(1)[0])
    cfg = replace(cfg, seed=seed, sigma=scenario.sigma if known_sigma else cfg.sigma)
    fit = run_fnc_reg(rep.data, cfg)
    fnc = tuple((float(e), evaluate(fit.select(e).selected, rep.truth)) for e in epsilons)
    return ReplicateOutcome(
        index,
        rep.truth.s,
        fit.s_hat,
        rep.s_max,
        fit.calibration.c_tilde,
        fit.lasso.lam,
        estimate_sigma(rep.data, fit.lasso),
        fnc,
        evaluate(fit.lasso.support, rep.truth),
    )


def _run_job(args):
    return run_replicate(*args)


class Bench:
    """Cached replicate runner.

    ``workers > 1`` distributes replicates over processes; results are
    ordered by replicate index and each replicate's randomness is keyed by
    its index, so outputs do not depend on the worker count.
    """

    def __init__(
        self,
        config: Optional[FncRegConfig] = None,
        epsilons: Sequence[float] = TABLE2_EPSILONS,
        workers: int = 1,
        known_sigma: bool = True,
        progress: bool = False,
    ):
        self.config = config or FncRegConfig()
        self.epsilons = tuple(float(e) for e in epsilons)
        self.workers = max(1, int(workers))
        self.known_sigma = known_sigma
        self.progress = progress
        self._cache: Dict[Tuple, List[ReplicateOutcome]] = {}

    def outcomes(self, scenario: ScenarioConfig) -> List[ReplicateOutcome]:
        eps = tuple(sorted(set(self.epsilons) | {scenario.epsilon}))
        key = (scenario.key(), scenario.master_seed, scenario.replicates, eps)
        if key in self._cache:
            return self._cache[key]
        jobs = [(scenario, i, eps, self.config, self.known_sigma) for i in range(scenario.replicates)]
        out: List[ReplicateOutcome] = []
        if self.workers == 1:
            for i, job in enumerate(jobs):
                out.append(_run_job(job))
                self._tick(scenario, i + 1)
        else:
            with ProcessPoolExecutor(self.workers) as ex:
                for i, res in enumerate(ex.map(_run_job, jobs)):
                    out.append(res)
                    self._tick(scenario, i + 1)
        self._cache[key] = out
        return out

    def _tick(self, scenario, done):
        if self.progress and (done % 10 == 0 or done == scenario.replicates):
            print(f"[{scenario.key()}] {done}/{scenario.replicates}", file=sys.stderr, flush=True)

    def summaries(self, scenario: ScenarioConfig, epsilon: float) -> Tuple[MetricsSummary, MetricsSummary]:
        outs = self.outcomes(scenario)
        meta = {"beta1": scenario.beta1, "n": scenario.n, "p": scenario.p, "s": scenario.s}
        fnc = aggregate([o.at(epsilon) for o in outs], epsilon, f"FNC-Reg {scenario.key()}", meta)
        las = aggregate([o.lasso for o in outs], epsilon, f"Lasso-CV {scenario.key()}", meta)
        return fnc, las

    def table1(self, base: ScenarioConfig, betas: Sequence[float] = TABLE1_BETAS) -> List[dict]:
        """Mean (sd) of FNP, FDP and F-measure for each signal magnitude."""
        rows = []
        for b in betas:
            sc = replace(base, beta1=b)
            for method, summ in zip(("FNC-Reg", "Lasso-CV"), self.summaries(sc, base.epsilon)):
                rows.append(
                    {
                        "beta1": b,
                        "method": method,
                        "fnp_mean": summ.mean["fnp"],
                        "fnp_sd": summ.sd["fnp"],
                        "fdp_mean": summ.mean["fdp"],
                        "fdp_sd": summ.sd["fdp"],
                        "f_mean": summ.mean["f_measure"],
                        "f_sd": summ.sd["f_measure"],
                        "replicates": len(summ.rows),
                    }
                )
        return rows

    def table2(
        self,
        base: ScenarioConfig,
        betas: Sequence[float] = TABLE2_BETAS,
        epsilons: Sequence[float] = TABLE2_EPSILONS,
    ) -> List[dict]:
        """Frequency of ``FNP <= epsilon`` and mean FDP over a (beta1, epsilon) grid."""
        rows = []
        for b in betas:
            for e in epsilons:
                summ, _ = self.summaries(replace(base, beta1=b, epsilon=e), e)
                rows.append(
                    {
                        "beta1": b,
                        "epsilon": e,
                        "freq_fnp_le_eps": summ.freq_fnp_le,
                        "fdp_mean": summ.mean["fdp"],
                        "replicates": len(summ.rows),
                    }
                )
        return rows

    def shat(
        self,
        base: ScenarioConfig,
        betas: Sequence[float] = SHAT_BETAS,
        ns: Sequence[int] = SHAT_NS,
    ) -> List[dict]:
        """Per-replicate ``s_hat / s``, one row per (n, beta1, replicate)."""
        rows = []
        for n in ns:
            for b in betas:
                for o in self.outcomes(replace(base, n=n, beta1=b)):
                    rows.append(
                        {"n": n, "beta1": b, "replicate": o.index, "s_hat": o.s_hat, "s": o.s, "ratio": o.s_hat / o.s}
                    )
        return rows


def shat_stats(rows: Sequence[dict], n: int, beta1: float) -> Tuple[float, float]:
    """Median and interquartile range of ``s_hat / s`` for one cell of the shat table."""
    r = np.array([row["ratio"] for row in rows if row["n"] == n and math.isclose(row["beta1"], beta1)])
    q1, med, q3 = np.percentile(r, [25, 50, 75])
    return float(med), float(q3 - q1)


def calibration_crosscheck(
    scenario: ScenarioConfig,
    index: int = 0,
    reps: int = 1000,
    config: Optional[FncRegConfig] = None,
) -> Dict[str, float]:
    """Bounding value from both calibration modes on one replicate.

    Both modes see the same design, precision estimate, Lasso level and seed,
    so the gap between them measures the effect of the bias term that the
    Gaussian shortcut ignores.
    """
    rep = simulate_replicate(scenario, index)
    cfg = replace(config or FncRegConfig(), sigma=scenario.sigma, reps=reps)
    fit = run_fnc_reg(rep.data, cfg)
    full = calibrate_null(
        rep.data,
        fit.debiased.omega_hat,
        fit.debiased.sigma_hat,
        reps,
        cfg.alpha_p,
        "full_pipeline",
        cfg.seed,
        theta=fit.nodewise.theta_hat,
        lam=fit.lasso.lam,
    )
    fast = calibrate_null(rep.data, fit.debiased.omega_hat, fit.debiased.sigma_hat, reps, cfg.alpha_p, "fast_gaussian", cfg.seed)
    return {"c_fast": fast.c_tilde, "c_full": full.c_tilde, "lam": fit.lasso.lam, "reps": reps}
