"""Command-line entry points: ``select``, ``simulate`` and ``bench``.

Exit codes are 0 on success, 2 for usage or input validation errors and 1 for
failures while running.  Progress and errors go to standard error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import io
from .bench import KNOCKOFF_NOTE, SHAT_BETAS, SHAT_NS, TABLE1_BETAS, TABLE2_BETAS, TABLE2_EPSILONS, Bench
from .fnp import FncRegConfig, StageError, run_fnc_reg
from .model import ValidationError
from .simulate import ScenarioConfig, simulate_replicate

EXIT_OK, EXIT_RUNTIME, EXIT_USAGE = 0, 1, 2


def _epsilon(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1], got {v}")
    return v


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _sigma(text: str):
    if text in ("auto", "estimate"):
        return "estimate"
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'auto', got {text!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _lam(text: str):
    if text in ("cv", "theory"):
        return text
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'cv', 'theory' or a number, got {text!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {v}")
    return v


def _floats(text: str):
    try:
        return tuple(float(t) for t in text.split(",") if t.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="fncreg", description="Variable selection with false negative control.")
    ap.add_argument("--quiet", action="store_true", help="print nothing on standard output")
    sub = ap.add_subparsers(dest="command", required=True)

    sel = sub.add_parser("select", help="select predictors on a CSV dataset")
    sel.add_argument("--x", required=True, type=Path, help="design matrix CSV (n rows, p columns)")
    sel.add_argument("--y", required=True, type=Path, help="response CSV (single column)")
    sel.add_argument("--epsilon", required=True, type=_epsilon, help="FNP control level in (0, 1]")
    sel.add_argument("--sigma", default="estimate", type=_sigma, help="noise sd or 'auto' (default auto)")
    sel.add_argument("--reps-null", default=1000, type=_positive_int, help="null calibration replicates")
    sel.add_argument("--calib", default="fast", choices=("fast", "full"), help="calibration mode")
    sel.add_argument("--lam", default="cv", type=_lam, help="Lasso level: cv, theory or a number")
    sel.add_argument("--kappa", default=2.0, type=float, help="nodewise tuning constant")
    sel.add_argument("--standardize", action="store_true", help="rescale columns to unit second moment")
    sel.add_argument("--seed", default=0, type=int)
    sel.add_argument("--out", type=Path, help="result document path (default: standard output)")

    sim = sub.add_parser("simulate", help="write one simulated dataset")
    sim.add_argument("--n", required=True, type=_positive_int)
    sim.add_argument("--p", required=True, type=_positive_int)
    sim.add_argument("--s", required=True, type=int)
    sim.add_argument("--theta", required=True, type=float)
    sim.add_argument("--beta1", required=True, type=float)
    sim.add_argument("--sigma", default=1.0, type=float)
    sim.add_argument("--seed", default=0, type=int)
    sim.add_argument("--out-dir", required=True, type=Path)

    b = sub.add_parser("bench", help="reproduce the simulation tables")
    b.add_argument("--table", required=True, choices=("1", "2", "shat"))
    b.add_argument("--replicates", default=100, type=_positive_int)
    b.add_argument("--seed", default=0, type=int)
    b.add_argument("--workers", default=1, type=_positive_int)
    b.add_argument("--reps-null", default=1000, type=_positive_int)
    b.add_argument("--n", type=_positive_int, help="override the sample size (table 1 and 2)")
    b.add_argument("--p", default=200, type=_positive_int)
    b.add_argument("--s", default=10, type=int)
    b.add_argument("--theta", default=0.02, type=float)
    b.add_argument("--sigma", default=1.0, type=float)
    b.add_argument("--epsilon", default=0.1, type=_epsilon, help="control level for table 1")
    b.add_argument("--betas", type=_floats, help="comma-separated signal magnitudes")
    b.add_argument("--epsilons", type=_floats, help="comma-separated control levels (table 2)")
    b.add_argument("--out-dir", default=Path("."), type=Path)
    return ap


def _status(args, msg: str) -> None:
    if not args.quiet:
        print(msg)


def cmd_select(args) -> int:
    try:
        data = io.load_dataset(args.x, args.y)
        cfg = FncRegConfig(
            lam=args.lam,
            kappa=args.kappa,
            sigma=args.sigma,
            reps=args.reps_null,
            calibration="fast_gaussian" if args.calib == "fast" else "full_pipeline",
            standardize=args.standardize,
            seed=args.seed,
        )
        cfg.validate()
    except (io.DatasetError, ValidationError, ValueError) as exc:
        print(f"fncreg select: input: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(f"fncreg select: n={data.n} p={data.p} epsilon={args.epsilon}", file=sys.stderr)
    try:
        result = run_fnc_reg(data, cfg).select(args.epsilon)
    except StageError as exc:
        print(f"fncreg select: stage {exc.stage}: {exc.cause}", file=sys.stderr)
        return EXIT_RUNTIME
    text = io.dumps(result)
    if args.out is None:
        if not args.quiet:
            sys.stdout.write(text)
        return EXIT_OK
    try:
        io.save_result(result, args.out)
    except OSError as exc:
        print(f"fncreg select: output: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _status(args, f"selected {len(result.selected)} of {data.p} predictors; wrote {args.out}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        sc = ScenarioConfig(
            n=args.n, p=args.p, s=args.s, theta=args.theta, beta1=args.beta1, sigma=args.sigma, master_seed=args.seed
        )
    except ValueError as exc:
        print(f"fncreg simulate: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        rep = simulate_replicate(sc, 0)
        out = args.out_dir
        out.mkdir(parents=True, exist_ok=True)
        io.write_matrix(out / "x.csv", rep.data.x)
        io.write_matrix(out / "y.csv", rep.data.y)
        io.write_matrix(out / "beta.csv", rep.truth.beta)
        io.write_matrix(out / "precision.csv", rep.precision)
        io.save_result(io.truth_document(rep.truth, rep.s_max, sc.to_dict()), out / "truth.json")
    except (OSError, ValueError) as exc:
        print(f"fncreg simulate: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _status(args, f"wrote 5 files to {out}")
    return EXIT_OK


def cmd_bench(args) -> int:
    try:
        base = ScenarioConfig(
            n=args.n or 150,
            p=args.p,
            s=args.s,
            theta=args.theta,
            sigma=args.sigma,
            epsilon=args.epsilon,
            replicates=args.replicates,
            master_seed=args.seed,
        )
        if base.s < 1:
            raise ValueError("bench scenarios need s >= 1")
    except ValueError as exc:
        print(f"fncreg bench: {exc}", file=sys.stderr)
        return EXIT_USAGE
    epsilons = args.epsilons or TABLE2_EPSILONS
    bench = Bench(FncRegConfig(reps=args.reps_null), epsilons=epsilons, workers=args.workers, progress=True)
    comments = [f"replicates={args.replicates} seed={args.seed} p={base.p} s={base.s} theta={base.theta}"]
    try:
        if args.table == "1":
            rows = bench.table1(base, args.betas or TABLE1_BETAS)
            comments.append(KNOCKOFF_NOTE)
            name = "table1.csv"
        elif args.table == "2":
            rows = bench.table2(base, args.betas or TABLE2_BETAS, epsilons)
            name = "table2.csv"
        else:
            ns = (args.n,) if args.n else SHAT_NS
            rows = bench.shat(base, args.betas or SHAT_BETAS, ns)
            name = "shat.csv"
        args.out_dir.mkdir(parents=True, exist_ok=True)
        io.write_table(args.out_dir / name, rows, comments)
    except (OSError, StageError) as exc:
        print(f"fncreg bench: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _status(args, f"wrote {args.out_dir / name} ({len(rows)} rows)")
    return EXIT_OK


COMMANDS = {"select": cmd_select, "simulate": cmd_simulate, "bench": cmd_bench}


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    return COMMANDS[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
