"""Realized error rates of a selection against known ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, Optional, Sequence, Tuple

from .model import EvaluationMetrics, GroundTruth

SUMMARY_FIELDS = ("tp", "fp", "fn", "n_selected", "fnp", "fdp", "f_measure")


def evaluate(selected: Iterable[int], truth: GroundTruth) -> EvaluationMetrics:
    """Counts, FNP, FDP and F-measure of ``selected`` (0-based indices).

    FDP is 0 for an empty selection and the F-measure is 0 when both of its
    terms vanish.  With no true signal the FNP and F-measure are undefined
    and the record is marked ``null_signal`` with NaN in those fields.
    """
    sel = set(int(j) for j in selected)
    if any(j < 0 or j >= truth.p for j in sel):
        raise ValueError("selected index outside [0, p)")
    support = set(truth.support)
    s = len(support)
    tp = len(sel & support)
    fp = len(sel) - tp
    fn = s - tp
    fdp = fp / len(sel) if sel else 0.0
    if s == 0:
        return EvaluationMetrics(tp, fp, fn, math.nan, fdp, math.nan, 0, len(sel), null_signal=True)
    fnp = fn / s
    a, b = 1 - fnp, 1 - fdp
    f = 2 * a * b / (a + b) if a + b > 0 else 0.0
    return EvaluationMetrics(tp, fp, fn, fnp, fdp, f, s, len(sel))


def _mean_sd(values: Sequence[float]) -> Tuple[float, float]:
    vals = [float(v) for v in values if not math.isnan(v)]
    if not vals:
        return math.nan, math.nan
    # fsum is exactly rounded, so the summary does not depend on replicate order
    m = math.fsum(vals) / len(vals)
    if len(vals) == 1:
        return m, 0.0
    return m, math.sqrt(math.fsum((v - m) ** 2 for v in vals) / (len(vals) - 1))


@dataclass(frozen=True)
class MetricsSummary:
    """Per-replicate rows plus mean and sample standard deviation of each field.

    ``freq_fnp_le`` is the relative frequency of ``fnp <= epsilon`` when an
    ``epsilon`` was supplied.
    """

    rows: Tuple[EvaluationMetrics, ...]
    mean: Dict[str, float]
    sd: Dict[str, float]
    epsilon: Optional[float] = None
    freq_fnp_le: Optional[float] = None
    label: str = ""
    meta: Dict[str, float] = field(default_factory=dict)


def aggregate(
    metrics: Sequence[EvaluationMetrics],
    epsilon: Optional[float] = None,
    label: str = "",
    meta: Optional[Dict[str, float]] = None,
) -> MetricsSummary:
    rows = tuple(metrics)
    if not rows:
        raise ValueError("cannot aggregate an empty sequence")
    mean, sd = {}, {}
    for name in SUMMARY_FIELDS:
        mean[name], sd[name] = _mean_sd([getattr(r, name) for r in rows])
    freq = None
    if epsilon is not None:
        defined = [r for r in rows if not r.null_signal]
        freq = sum(r.fnp <= epsilon for r in defined) / len(defined) if defined else math.nan
    return MetricsSummary(rows, mean, sd, epsilon, freq, label, dict(meta or {}))
