"""Command-line interface.

Subcommands: ``gen`` writes a simulated dataset, ``fit`` estimates the
transformation and boundary for a CSV dataset, ``table`` re-runs a
published Monte Carlo table and ``transform`` evaluates a transformation.

Exit codes: 0 on success, 1 on data or runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from . import reference
from .boundary import Design
from .experiments import (
    UndefinedCorrelationError,
    boundary_columns,
    correlations,
    reproduce_table,
)
from .mdist import Criterion, CriterionProfile, CriterionSpec, EstimationError, minimize_theta
from .simgen import CsvFormatError, GenerationError, ScenarioSpec, dataset_to_csv, make_dataset, read_csv
from .transform import DEFAULT_BOXES, Family, TransformError, TransformSpec

SEED_ENV = "BOUNDREG_SEED"
DEFAULT_SEED = 42
BOUNDARY_GRID = 201


class UsageError(Exception):
    pass


def _int_at_least(lo):
    def parse(text):
        try:
            v = int(text)
        except ValueError:
            raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}, got {v}")
        return v
    return parse


def _finite_float(text):
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise argparse.ArgumentTypeError(f"expected a finite number, got {text!r}")
    return v


def _positive_float(text):
    v = _finite_float(text)
    if v <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {v}")
    return v


def _seed(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer seed, got {text!r}") from None
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _threads(text):
    if text == "auto":
        return "auto"
    return _int_at_least(1)(text)


def _family(text):
    try:
        return Family.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown family {text!r}") from None


def _criterion(text):
    try:
        return Criterion.parse(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"unknown criterion {text!r}") from None


def _default_seed() -> int:
    raw = os.environ.get(SEED_ENV)
    if raw is None or raw == "":
        return DEFAULT_SEED
    try:
        return _seed(raw)
    except argparse.ArgumentTypeError as exc:
        raise UsageError(f"{SEED_ENV}: {exc}") from None


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="boundreg", description="Transformation boundary regression.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="simulate a dataset as x,y CSV")
    g.add_argument("--model", type=int, choices=[1, 2, 3, 4], default=1)
    g.add_argument("--n", type=_int_at_least(2), default=100)
    g.add_argument("--theta0", type=_finite_float, default=0.5)
    g.add_argument("--design", choices=[d.value for d in Design], default=Design.FIXED.value)
    g.add_argument("--seed", type=_seed, default=None, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
    g.add_argument("--out", help="output file (default: stdout)")

    f = sub.add_parser("fit", help="estimate the transformation for a CSV dataset")
    f.add_argument("--data", required=True, help="x,y CSV file, '-' for stdin")
    f.add_argument("--family", type=_family, default=Family.YEO_JOHNSON)
    f.add_argument("--criterion", type=_criterion, default=Criterion.TCM)
    f.add_argument("--bn", type=_positive_float, help="window half-width (default n^(-1/3))")
    f.add_argument("--an", type=_positive_float, help="smoothing bandwidth (default bn/2)")
    f.add_argument("--theta-min", type=_finite_float)
    f.add_argument("--theta-max", type=_finite_float)
    f.add_argument("--theta2-min", type=_finite_float, help="second parameter, sinh-arcsinh only")
    f.add_argument("--theta2-max", type=_finite_float)
    f.add_argument("--method", choices=["auto", "brent", "grid"], default="auto")
    f.add_argument("--y-grid", choices=["residuals", "uniform"], default="residuals")
    f.add_argument("--raw", action="store_true", help="use the unsmoothed boundary for residuals")
    f.add_argument("--design", choices=[d.value for d in Design], default=Design.RANDOM.value)
    f.add_argument("--emit-boundary", metavar="FILE",
                   help=f"write x, local max and smoothed boundary on a {BOUNDARY_GRID}-point grid")

    t = sub.add_parser("table", help="re-run a published simulation table")
    t.add_argument("--table", required=True, choices=list(reference.TABLE_IDS))
    t.add_argument("--reps", type=_int_at_least(0), default=1000)
    t.add_argument("--threads", type=_threads, default=1)
    t.add_argument("--seed", type=_seed, default=None, help=f"default: ${SEED_ENV} or {DEFAULT_SEED}")
    t.add_argument("--format", choices=["text", "csv"], default="text")
    t.add_argument("--method", choices=["auto", "brent", "grid"], default="auto")
    t.add_argument("--y-grid", choices=["residuals", "uniform"], default="residuals")
    t.add_argument("--quiet", action="store_true", help="no progress on stderr")

    tr = sub.add_parser("transform", help="evaluate a transformation")
    tr.add_argument("--family", type=_family, default=Family.YEO_JOHNSON)
    tr.add_argument("--theta", type=_finite_float, action="append", default=[],
                    help="parameter value; repeat for multi-parameter families")
    tr.add_argument("--inverse", action="store_true")
    tr.add_argument("--range", action="store_true", help="print the image interval instead")
    tr.add_argument("values", nargs="*", type=_finite_float)
    return p


def _box(args, family: Family):
    default = DEFAULT_BOXES[family]
    box = []
    pairs = [(args.theta_min, args.theta_max), (args.theta2_min, args.theta2_max)]
    for k, (lo, hi) in enumerate(pairs):
        if k >= family.n_params:
            if lo is not None or hi is not None:
                raise UsageError(f"{family.value} has only {family.n_params} parameter(s)")
            continue
        lo = default[k][0] if lo is None else lo
        hi = default[k][1] if hi is None else hi
        if lo > hi:
            raise UsageError(f"empty parameter interval [{lo}, {hi}]")
        box.append((lo, hi))
    return box


def _summary(res: np.ndarray) -> dict:
    return {
        "min": float(res.min()),
        "max": float(res.max()),
        "mean": float(res.mean()),
        "median": float(np.median(res)),
        "sd": float(res.std()),
        "n_positive": int(np.count_nonzero(res > 0)),
    }


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


def cmd_gen(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    try:
        spec = ScenarioSpec.for_model(args.model, theta0=args.theta0, n=args.n,
                                      design=args.design, seed=seed)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    text = dataset_to_csv(make_dataset(spec))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_fit(args) -> int:
    family = args.family
    box = _box(args, family)
    if args.data == "-":
        data = read_csv(sys.stdin, args.design)
    else:
        data = read_csv(args.data, args.design)
    n = len(data)
    bn = n ** (-1.0 / 3.0) if args.bn is None else args.bn
    an = bn / 2 if args.an is None else args.an
    spec = CriterionSpec(kind=args.criterion, y_grid=args.y_grid)
    profile = CriterionProfile(data, family, bn, an, spec, use_raw=args.raw)
    est = minimize_theta(data, family, box, bn, an, spec, method=args.method,
                         use_raw=args.raw, profile=profile)
    res = profile.residuals(est.theta_hat)
    try:
        cors = dict(zip(("pearson", "kendall", "spearman"), correlations(data.x, res)))
    except UndefinedCorrelationError:
        cors = dict.fromkeys(("pearson", "kendall", "spearman"))
    theta_hat = est.theta if family.n_params == 1 else list(est.theta_hat)
    out = {
        "theta_hat": theta_hat,
        "criterion": args.criterion.value,
        "criterion_value": est.criterion_value,
        "n": n,
        "bn": bn,
        "an": an,
        "family": family.value,
        "correlations": cors,
        "residual_summary": _summary(res),
    }
    if args.emit_boundary:
        xs, raw, smooth = boundary_columns(data, family, est.theta_hat, bn, an, BOUNDARY_GRID)
        with open(args.emit_boundary, "w", newline="") as fh:
            fh.write("x,local_max,smoothed\n")
            for row in zip(xs, raw, smooth):
                fh.write(",".join(f"{v:.17g}" for v in row) + "\n")
    sys.stdout.write(json.dumps(_json_safe(out), indent=2) + "\n")
    return 0


def _progress_printer(table_id):
    last = [-1]

    def progress(done, total):
        decile = 10 * done // total
        if decile != last[0]:
            last[0] = decile
            print(f"table {table_id}: {done}/{total} replications", file=sys.stderr, flush=True)
    return progress


def cmd_table(args) -> int:
    seed = _default_seed() if args.seed is None else args.seed
    progress = None if args.quiet or not args.reps else _progress_printer(args.table)
    report = reproduce_table(args.table, args.reps, master_seed=seed, threads=args.threads,
                             method=args.method, y_grid=args.y_grid, progress=progress)
    sys.stdout.write(report.to_csv() if args.format == "csv" else report.to_text())
    return 0


def cmd_transform(args) -> int:
    try:
        spec = TransformSpec(args.family, tuple(args.theta))
    except TransformError as exc:
        raise UsageError(str(exc)) from None
    if args.range:
        lo, hi = spec.image()
        sys.stdout.write(f"{lo:.17g},{hi:.17g}\n")
        return 0
    if not args.values:
        raise UsageError("no values given")
    vals = np.asarray(args.values, dtype=float)
    out = spec.inverse(vals) if args.inverse else spec.forward(vals)
    sys.stdout.write("".join(f"{v:.17g}\n" for v in np.atleast_1d(out)))
    return 0


COMMANDS = {"gen": cmd_gen, "fit": cmd_fit, "table": cmd_table, "transform": cmd_transform}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.error(str(exc))
    except (CsvFormatError, GenerationError, EstimationError, TransformError, ValueError, OSError) as exc:
        print(f"boundreg {args.command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
