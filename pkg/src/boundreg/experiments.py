"""Monte Carlo harness for the transformation-parameter estimators.

Replication ``r`` draws its data from the stream seeded by
``derive_seed(master_seed, r)``, so results do not depend on how
replications are spread over worker processes. Aggregation always folds in
replication order.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import stats

from . import reference
from .boundary import Design, local_constant_fit
from .mdist import CriterionProfile, CriterionSpec, EstimationError, minimize_theta
from .simgen import GenerationError, ScenarioSpec, derive_seed, make_dataset, regression_value
from .transform import Family, TransformError, TransformSpec

__all__ = [
    "McConfig",
    "McCell",
    "McSummary",
    "CorrelationReport",
    "TableReport",
    "UndefinedCorrelationError",
    "bandwidths",
    "correlations",
    "run_mc",
    "correlation_report",
    "reproduce_table",
]

log = logging.getLogger(__name__)

# a cell with more failed replications than this share is flagged invalid
MAX_FAILURE_RATE = 0.05


class UndefinedCorrelationError(ValueError):
    pass


def bandwidths(n: int, a_divisor: float = 2.0) -> tuple[float, float]:
    """``b = n^(-1/3)`` and ``a = b / a_divisor``."""
    b = n ** (-1.0 / 3.0)
    return b, b / a_divisor


def correlations(x, r) -> tuple[float, float, float]:
    """Pearson, Kendall tau-b and Spearman coefficients of ``x`` and ``r``."""
    x = np.asarray(x, dtype=float)
    r = np.asarray(r, dtype=float)
    if x.size != r.size or x.size < 2:
        raise ValueError("need two sequences of equal length >= 2")
    for name, v in (("x", x), ("r", r)):
        if np.all(v == v[0]):
            raise UndefinedCorrelationError(f"{name} is constant; correlation undefined")
    pearson = float(stats.pearsonr(x, r).statistic)
    kendall = float(stats.kendalltau(x, r, variant="b").statistic)
    spearman = float(stats.spearmanr(x, r).statistic)
    return pearson, kendall, spearman


@dataclass(frozen=True)
class McConfig:
    """One Monte Carlo study over a grid of theta0 and n values."""

    model: int = 1
    n_values: tuple = (100,)
    theta0_values: tuple = (0.0, 0.5, 1.0, 1.5, 2.0)
    reps: int = 1000
    criteria: tuple = ("TKS", "TCM", "TKSCM", "TCMKS")
    a_divisor: float = 2.0
    design: Design = Design.FIXED
    theta_box: tuple = (-0.5, 2.5)
    master_seed: int = 42
    method: str = "auto"
    y_grid: str = "residuals"

    def __post_init__(self):
        if self.reps < 1:
            raise ValueError("reps must be at least 1")
        if not self.criteria:
            raise ValueError("at least one criterion is required")
        for c in self.criteria:
            CriterionSpec(c)
        object.__setattr__(self, "design", Design(self.design))

    @property
    def a_rule(self) -> str:
        return f"b/{self.a_divisor:g}"


@dataclass
class McCell:
    model: int
    n: int
    a_rule: str
    criterion: str
    theta0: float
    estimates: np.ndarray = field(repr=False)
    failures: int

    @property
    def reps_used(self) -> int:
        return int(self.estimates.size)

    @property
    def mean(self) -> float:
        return float(self.estimates.mean()) if self.estimates.size else math.nan

    @property
    def median(self) -> float:
        return float(np.median(self.estimates)) if self.estimates.size else math.nan

    @property
    def mise(self) -> float:
        """Mean squared error of the estimates around ``theta0``."""
        if not self.estimates.size:
            return math.nan
        return float(np.mean((self.estimates - self.theta0) ** 2))

    @property
    def valid(self) -> bool:
        total = self.failures + self.reps_used
        return total > 0 and self.failures <= MAX_FAILURE_RATE * total


@dataclass
class McSummary:
    config: McConfig
    cells: list

    def cell(self, n, theta0, criterion) -> McCell:
        for c in self.cells:
            if c.n == n and c.theta0 == theta0 and c.criterion == criterion:
                return c
        raise KeyError((n, theta0, criterion))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "n", "a_rule", "criterion", "theta0", "mean", "median", "mise", "failures"])
        for c in self.cells:
            w.writerow([c.model, c.n, c.a_rule, c.criterion, _g17(c.theta0),
                        _g17(c.mean), _g17(c.median), _g17(c.mise), c.failures])
        return buf.getvalue()


def _g17(v) -> str:
    return f"{v:.17g}"


def _g6(v) -> str:
    return "nan" if v is None or (isinstance(v, float) and math.isnan(v)) else f"{v:.6g}"


def _estimate_all(data, criteria, b, a, box, method, y_grid):
    profile = CriterionProfile(data, Family.YEO_JOHNSON, b, a, CriterionSpec(y_grid=y_grid))
    out = []
    for crit in criteria:
        try:
            est = minimize_theta(data, Family.YEO_JOHNSON, [box], b, a,
                                 CriterionSpec(crit, y_grid=y_grid), method=method, profile=profile)
            out.append(est.theta)
        except EstimationError:
            out.append(math.nan)
    return out, profile


def _mc_replication(job):
    model, n, theta0, a_div, design, seed, criteria, box, method, y_grid = job
    b, a = bandwidths(n, a_div)
    try:
        data = make_dataset(ScenarioSpec.for_model(model, theta0=theta0, n=n, design=design, seed=seed))
    except GenerationError:
        return [math.nan] * len(criteria)
    return _estimate_all(data, criteria, b, a, box, method, y_grid)[0]


def _run_jobs(fn, jobs: list, threads: int, progress: Callable | None = None) -> list:
    threads = _resolve_threads(threads)
    results = []
    if threads <= 1:
        for i, job in enumerate(jobs):
            results.append(fn(job))
            if progress:
                progress(i + 1, len(jobs))
        return results
    chunk = max(1, len(jobs) // (threads * 8))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        for i, res in enumerate(pool.map(fn, jobs, chunksize=chunk)):
            results.append(res)
            if progress:
                progress(i + 1, len(jobs))
    return results


def _resolve_threads(threads) -> int:
    if threads in (None, "auto", 0):
        return os.cpu_count() or 1
    return max(1, int(threads))


def run_mc(config: McConfig, threads=1, progress: Callable | None = None) -> McSummary:
    """Run every (n, theta0) cell of ``config`` for all criteria.

    Failed replications (generation errors, no finite criterion) are
    counted per cell and excluded from mean, median and MISE.
    """
    jobs, keys = [], []
    for n in config.n_values:
        for theta0 in config.theta0_values:
            for r in range(config.reps):
                jobs.append((config.model, int(n), float(theta0), config.a_divisor, config.design,
                             derive_seed(config.master_seed, r), tuple(config.criteria),
                             tuple(config.theta_box), config.method, config.y_grid))
                keys.append((int(n), float(theta0)))
    results = _run_jobs(_mc_replication, jobs, threads, progress)
    grouped: dict = {}
    for key, res in zip(keys, results):
        grouped.setdefault(key, []).append(res)
    cells = []
    for (n, theta0), rows in grouped.items():
        arr = np.array(rows, dtype=float).reshape(len(rows), len(config.criteria))
        for k, crit in enumerate(config.criteria):
            col = arr[:, k]
            ok = np.isfinite(col)
            cell = McCell(config.model, n, config.a_rule, str(crit), theta0, col[ok], int((~ok).sum()))
            if not cell.valid:
                log.warning("cell n=%d theta0=%g %s has %d failures", n, theta0, crit, cell.failures)
            cells.append(cell)
    return McSummary(config, cells)


@dataclass
class CorrelationReport:
    """Replication-averaged correlations between covariates and residuals."""

    model: int
    n: int
    theta0: float
    rows: dict
    counts: dict

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["row", "pearson", "kendall", "spearman", "reps_used"])
        for name, vals in self.rows.items():
            w.writerow([name, *(_g17(v) for v in vals), self.counts[name]])
        return buf.getvalue()


COR_ERRORS = ("true-boundary", "residuals")


def _cor_replication(job):
    model, n, theta0, a_div, design, seed, criteria, box, method, y_grid, errors = job
    b, a = bandwidths(n, a_div)
    out = {}
    spec = ScenarioSpec.for_model(model, theta0=theta0, n=n, design=design, seed=seed)
    try:
        data = make_dataset(spec)
    except GenerationError:
        return out
    estimates, profile = _estimate_all(data, criteria, b, a, box, method, y_grid)

    def cor(values):
        try:
            return correlations(data.x, values)
        except UndefinedCorrelationError:
            return None

    if errors == "residuals":
        def at(prof, theta):
            try:
                return cor(prof.residuals(theta))
            except TransformError:
                return None

        out["original"] = at(CriterionProfile(data, Family.IDENTITY, b, a), ())
        out["true"] = at(profile, (theta0,))
        for crit, th in zip(criteria, estimates):
            out[str(crit)] = None if math.isnan(th) else at(profile, (th,))
        return out

    # boundary of the untransformed responses implied by the true model
    y_edge = TransformSpec.yeo_johnson(theta0).inverse(regression_value(spec.regression, data.x))

    def gap(theta):
        t = TransformSpec.yeo_johnson(theta)
        try:
            return cor(t.forward(data.y) - t.forward(y_edge))
        except TransformError:
            return None

    out["original"] = cor(data.y - y_edge)
    out["true"] = gap(theta0)
    for crit, th in zip(criteria, estimates):
        out[str(crit)] = None if math.isnan(th) else gap(th)
    return out


def correlation_report(model: int, n: int = 100, theta0: float = 0.5, reps: int = 1000, *,
                       a_divisor: float = 2.0, criteria: Sequence[str] = reference.CRITERIA,
                       design=Design.FIXED, master_seed: int = 42, theta_box=(-0.5, 2.5),
                       method: str = "auto", y_grid: str = "residuals",
                       errors: str = "true-boundary", threads=1,
                       progress: Callable | None = None) -> CorrelationReport:
    """Average correlations of x with the errors of the untransformed data,
    of the data transformed with the true parameter and with each estimate.

    With ``errors="true-boundary"`` the error of a transformed response is
    its distance below the transformed true boundary
    ``Lambda_theta(Lambda_theta0^{-1}(h0(x)))``. With ``errors="residuals"``
    it is the residual from the smoothed boundary estimate, the identity
    transformation serving for the untransformed row.
    """
    if errors not in COR_ERRORS:
        raise ValueError(f"errors must be one of {COR_ERRORS}, got {errors!r}")
    jobs = [(model, n, theta0, a_divisor, Design(design), derive_seed(master_seed, r),
             tuple(criteria), tuple(theta_box), method, y_grid, errors) for r in range(reps)]
    results = _run_jobs(_cor_replication, jobs, threads, progress)
    names = ["original", "true", *map(str, criteria)]
    rows, counts = {}, {}
    for name in names:
        vals = [res[name] for res in results if res.get(name) is not None]
        counts[name] = len(vals)
        rows[name] = tuple(np.mean(vals, axis=0)) if vals else (math.nan,) * 3
    return CorrelationReport(model, n, theta0, rows, counts)


@dataclass
class TableReport:
    """Published values next to reproduced values for one table."""

    table_id: str
    header: list
    rows: list
    reps: int

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.header)
        for row in self.rows:
            w.writerow([_g17(v) if isinstance(v, float) else ("NA" if v is None else v) for v in row])
        return buf.getvalue()

    def to_text(self) -> str:
        cells = [[str(h) for h in self.header]]
        for row in self.rows:
            cells.append([_g6(v) if isinstance(v, float) else ("N/A" if v is None else str(v)) for v in row])
        widths = [max(len(r[k]) for r in cells) for k in range(len(self.header))]
        lines = [f"Table {self.table_id} (reps={self.reps})"]
        for i, r in enumerate(cells):
            lines.append("  ".join(c.rjust(wd) for c, wd in zip(r, widths)))
            if i == 0:
                lines.append("  ".join("-" * wd for wd in widths))
        return "\n".join(lines) + "\n"


def _dev(published, value):
    if value is None or math.isnan(value):
        return None
    return abs(value - published)


def reproduce_table(table_id, reps: int, *, master_seed: int = 42, threads=1,
                    method: str = "auto", y_grid: str = "residuals",
                    progress: Callable | None = None) -> TableReport:
    """Re-run a published table; ``reps=0`` lists the published values only."""
    table_id = str(table_id).lower()
    if table_id not in reference.TABLE_IDS:
        raise ValueError(f"unknown table {table_id!r}; expected one of {', '.join(reference.TABLE_IDS)}")
    if reps < 0:
        raise ValueError("reps must be nonnegative")
    if table_id in reference.COR_TABLES:
        model, published = reference.COR_TABLES[table_id]
        report = None
        if reps:
            report = correlation_report(model, 100, 0.5, reps, master_seed=master_seed,
                                        threads=threads, method=method, y_grid=y_grid,
                                        progress=progress)
        header = ["row", "coefficient", "published", "reproduced", "abs_dev"]
        rows = []
        for name in reference.COR_ROWS:
            for k, coef in enumerate(("pearson", "kendall", "spearman")):
                val = float(report.rows[name][k]) if report else None
                rows.append([name, coef, published[name][k], val, _dev(published[name][k], val)])
        return TableReport(table_id, header, rows, reps)

    model, a_div = reference.TABLE_SETTINGS[table_id]
    published = reference.TABLES[table_id]
    summary = None
    if reps:
        config = McConfig(model=model, n_values=reference.N_VALUES,
                          theta0_values=reference.THETA0_VALUES, reps=reps,
                          criteria=reference.CRITERIA, a_divisor=a_div,
                          master_seed=master_seed, method=method, y_grid=y_grid)
        summary = run_mc(config, threads=threads, progress=progress)
    header = ["n", "theta0", "criterion", "stat", "published", "reproduced", "abs_dev"]
    rows = []
    for n in reference.N_VALUES:
        for theta0 in reference.THETA0_VALUES:
            for crit in reference.CRITERIA:
                cell = summary.cell(n, theta0, crit) if summary else None
                for k, stat in enumerate(("mean", "median", "mise")):
                    val = getattr(cell, stat) if cell else None
                    p = published[n, theta0, crit][k]
                    rows.append([n, theta0, crit, stat, p, val, _dev(p, val)])
    return TableReport(table_id, header, rows, reps)


def boundary_columns(data, family, theta, b, a, grid_size: int = 201):
    """Plottable columns: x grid, raw and smoothed boundary estimates."""
    spec = TransformSpec(family, theta)
    fit = local_constant_fit(data, spec, b, a)
    xs = np.linspace(0.0, 1.0, grid_size)
    return xs, fit.evaluate(xs), fit.smooth(a).evaluate(xs)

