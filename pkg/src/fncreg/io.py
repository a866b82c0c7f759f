"""CSV ingestion and JSON result documents.

Result documents are UTF-8 JSON objects with a ``schema`` version and a
``kind`` tag.  Non-finite reals are written as the strings ``"inf"`` /
``"-inf"`` or as ``null`` for NaN, so the files are strict JSON.  Column
indices in documents are 1-based.  See FORMATS.md for the field lists.
"""

from __future__ import annotations

import csv
import json
import math
import os
from dataclasses import asdict
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Union

import numpy as np

from .metrics import MetricsSummary
from .model import Dataset, Diagnostics, EvaluationMetrics, FnpCurve, GroundTruth, SelectionResult

SCHEMA = "fncreg.result/1"
PathLike = Union[str, os.PathLike]


class DatasetError(ValueError):
    """Malformed CSV input."""


class ResultIOError(OSError):
    pass


# -- CSV ----------------------------------------------------------------------


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_matrix(path: PathLike) -> np.ndarray:
    """Numeric CSV as a 2-D float array.

    A first row with no numeric cell is taken as a header and skipped.
    Errors name the 1-based file row and column of the offending cell.
    """
    path = Path(path)
    try:
        with path.open(newline="", encoding="utf-8") as fh:
            rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise DatasetError(f"{path}: file is empty")
    start = 0
    if not any(_is_number(c.strip()) for c in rows[0]):
        start = 1
        if len(rows) == 1:
            raise DatasetError(f"{path}: header row but no data")
    width = len(rows[start])
    out = np.empty((len(rows) - start, width))
    for i, row in enumerate(rows[start:]):
        lineno = i + start + 1
        if len(row) != width:
            raise DatasetError(f"{path}: row {lineno} has {len(row)} columns, expected {width}")
        for k, cell in enumerate(row):
            try:
                out[i, k] = float(cell.strip())
            except ValueError:
                raise DatasetError(f"{path}: non-numeric value {cell!r} at row {lineno}, column {k + 1}") from None
    return out


def load_dataset(path_x: PathLike, path_y: PathLike, standardize: bool = False) -> Dataset:
    """Dataset from a design CSV and a single-column response CSV."""
    x = read_matrix(path_x)
    y = read_matrix(path_y)
    if y.shape[1] != 1:
        raise DatasetError(f"{path_y}: response file must have a single column, found {y.shape[1]}")
    if x.shape[0] != y.shape[0]:
        raise DatasetError(f"dimension mismatch: {path_x} has {x.shape[0]} rows, {path_y} has {y.shape[0]}")
    try:
        data = Dataset(x, y[:, 0])
    except ValueError as exc:
        raise DatasetError(str(exc)) from exc
    return data.standardized() if standardize else data


def write_matrix(path: PathLike, a: np.ndarray) -> None:
    a = np.asarray(a, dtype=float)
    if a.ndim == 1:
        a = a[:, None]
    try:
        np.savetxt(path, a, delimiter=",", fmt="%.17g")
    except OSError as exc:
        raise ResultIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_table(path: PathLike, rows: Sequence[Dict], comments: Iterable[str] = ()) -> None:
    """Header-row CSV; ``comments`` become leading ``#`` lines."""
    if not rows:
        raise ValueError("no rows to write")
    fields = list(rows[0])
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            for c in comments:
                fh.write(f"# {c}\n")
            w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for r in rows:
                w.writerow({k: _cell(v) for k, v in r.items()})
    except OSError as exc:
        raise ResultIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def _cell(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def read_table(path: PathLike) -> List[Dict]:
    """Inverse of :func:`write_table`; numeric cells come back as int or float."""
    with open(path, newline="", encoding="utf-8") as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    out = []
    for r in csv.DictReader(lines):
        out.append({k: _parse_cell(v) for k, v in r.items()})
    return out


def _parse_cell(v: str):
    try:
        return int(v)
    except ValueError:
        pass
    try:
        return float(v)
    except ValueError:
        return v


# -- JSON documents -----------------------------------------------------------


def _enc(x: float):
    x = float(x)
    if math.isnan(x):
        return None
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _dec(v) -> float:
    if v is None:
        return math.nan
    return float(v)


def _dec_meta(v):
    if v is None or v in ("inf", "-inf"):
        return _dec(v)
    return v


def _enc_opt(x):
    return None if x is None else _enc(x)


def _dec_opt(v):
    return None if v is None else _dec(v)


def _curve_doc(c: FnpCurve) -> dict:
    return {
        "p": c.p,
        "s_hat": c.s_hat,
        "order": None if c.order is None else [int(j) + 1 for j in c.order],
        "thresholds": [_enc(t) for t in c.thresholds],
        "r_counts": [int(r) for r in c.r_counts],
        "fnp_hat": [_enc(v) for v in c.fnp_hat],
        "fnp_raw": [_enc(v) for v in c.fnp_raw],
    }


def _curve_obj(d: dict) -> FnpCurve:
    order = None if d["order"] is None else np.array(d["order"], dtype=np.int64) - 1
    return FnpCurve(
        np.array([_dec(t) for t in d["thresholds"]]),
        np.array(d["r_counts"], dtype=np.int64),
        np.array([_dec(v) for v in d["fnp_hat"]]),
        np.array([_dec(v) for v in d["fnp_raw"]]),
        int(d["s_hat"]),
        int(d["p"]),
        order,
    )


def _diag_doc(g: Diagnostics) -> dict:
    return {k: (v if isinstance(v, int) or v is None else _enc(v)) for k, v in asdict(g).items()}


def _diag_obj(d: dict) -> Diagnostics:
    return Diagnostics(
        **{k: (int(v) if k == "s_max" else _dec_opt(v)) for k, v in d.items()}
    )


def _metrics_doc(m: EvaluationMetrics) -> dict:
    d = asdict(m)
    for k in ("fnp", "fdp", "f_measure"):
        d[k] = _enc(d[k])
    return d


def _metrics_obj(d: dict) -> EvaluationMetrics:
    d = dict(d)
    for k in ("fnp", "fdp", "f_measure"):
        d[k] = _dec(d[k])
    return EvaluationMetrics(**d)


def to_document(obj) -> dict:
    if isinstance(obj, SelectionResult):
        return {
            "schema": SCHEMA,
            "kind": "selection",
            "epsilon": _enc(obj.epsilon),
            "t_star": "infinite" if math.isinf(obj.t_star) else _enc(obj.t_star),
            "selected": [j + 1 for j in obj.selected],
            "s_hat": obj.s_hat,
            "no_qualifying_threshold": obj.no_qualifying_threshold,
            "no_signal": obj.no_signal,
            "c_tilde": _enc_opt(obj.c_tilde),
            "pi_hat": _enc_opt(obj.pi_hat),
            "diagnostics": None if obj.diagnostics is None else _diag_doc(obj.diagnostics),
            "curve": None if obj.curve is None else _curve_doc(obj.curve),
        }
    if isinstance(obj, MetricsSummary):
        return {
            "schema": SCHEMA,
            "kind": "metrics_summary",
            "label": obj.label,
            "epsilon": _enc_opt(obj.epsilon),
            "freq_fnp_le": _enc_opt(obj.freq_fnp_le),
            "mean": {k: _enc(v) for k, v in obj.mean.items()},
            "sd": {k: _enc(v) for k, v in obj.sd.items()},
            "meta": {k: _enc(v) if isinstance(v, float) else v for k, v in obj.meta.items()},
            "rows": [_metrics_doc(r) for r in obj.rows],
        }
    if isinstance(obj, EvaluationMetrics):
        return {"schema": SCHEMA, "kind": "evaluation", **_metrics_doc(obj)}
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def from_document(doc: dict):
    if doc.get("schema") != SCHEMA:
        raise ValueError(f"unsupported schema {doc.get('schema')!r}, expected {SCHEMA!r}")
    kind = doc.get("kind")
    if kind == "selection":
        t = doc["t_star"]
        return SelectionResult(
            _dec(doc["epsilon"]),
            math.inf if t == "infinite" else _dec(t),
            tuple(j - 1 for j in doc["selected"]),
            int(doc["s_hat"]),
            None if doc["curve"] is None else _curve_obj(doc["curve"]),
            bool(doc["no_qualifying_threshold"]),
            bool(doc["no_signal"]),
            _dec_opt(doc["c_tilde"]),
            _dec_opt(doc["pi_hat"]),
            None if doc["diagnostics"] is None else _diag_obj(doc["diagnostics"]),
        )
    if kind == "metrics_summary":
        return MetricsSummary(
            tuple(_metrics_obj(r) for r in doc["rows"]),
            {k: _dec(v) for k, v in doc["mean"].items()},
            {k: _dec(v) for k, v in doc["sd"].items()},
            _dec_opt(doc["epsilon"]),
            _dec_opt(doc["freq_fnp_le"]),
            doc["label"],
            {k: _dec_meta(v) for k, v in doc["meta"].items()},
        )
    if kind == "evaluation":
        body = {k: v for k, v in doc.items() if k not in ("schema", "kind")}
        return _metrics_obj(body)
    raise ValueError(f"unknown document kind {kind!r}")


def dumps(obj) -> str:
    doc = obj if isinstance(obj, dict) else to_document(obj)
    return json.dumps(doc, indent=1, sort_keys=True, allow_nan=False) + "\n"


def save_result(obj, path: PathLike) -> None:
    """Write ``obj`` (a selection, evaluation or summary, or a ready dict) as JSON."""
    text = dumps(obj)
    try:
        Path(path).write_text(text, encoding="utf-8")
    except OSError as exc:
        raise ResultIOError(f"cannot write {path}: {exc.strerror or exc}") from exc


def load_result(path: PathLike):
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ResultIOError(f"cannot read {path}: {exc.strerror or exc}") from exc
    return from_document(doc)


def truth_document(truth: GroundTruth, s_max: int, scenario: Optional[dict] = None) -> dict:
    return {
        "schema": SCHEMA,
        "kind": "truth",
        "beta": [float(b) for b in truth.beta],
        "support": [j + 1 for j in truth.support],
        "s": truth.s,
        "sigma": truth.sigma,
        "s_max": int(s_max),
        "scenario": scenario or {},
    }
