"""Synthetic boundary-regression data.

Responses are generated as ``Y = Lambda_theta0^{-1}(h0(x) + eps)`` with
nonpositive errors, so ``Lambda_theta0(Y)`` lies below the curve ``h0``.
"""

from __future__ import annotations

import csv
import enum
import io
import math
from dataclasses import dataclass

import numpy as np

from .boundary import Dataset, Design
from .transform import TransformSpec, yj_range

__all__ = [
    "Regression",
    "ErrorLaw",
    "MODELS",
    "ScenarioSpec",
    "GenerationError",
    "regression_value",
    "sample_errors",
    "fixed_design",
    "make_rng",
    "derive_seed",
    "make_dataset",
    "dataset_to_csv",
    "write_csv",
    "read_csv",
    "CsvFormatError",
]

MAX_REDRAWS = 100


class GenerationError(RuntimeError):
    pass


class Regression(str, enum.Enum):
    PARABOLA = "parabola"
    SINE_LINEAR = "sine-linear"


class ErrorLaw(str, enum.Enum):
    WEIBULL_NEG = "weibull"  # -eps ~ Weibull(scale 1, shape 3)
    EXP_NEG = "exp"  # -eps ~ Exp(rate 3)


# simulation models 1..4 of the study
MODELS = {
    1: (Regression.PARABOLA, ErrorLaw.WEIBULL_NEG),
    2: (Regression.PARABOLA, ErrorLaw.EXP_NEG),
    3: (Regression.SINE_LINEAR, ErrorLaw.WEIBULL_NEG),
    4: (Regression.SINE_LINEAR, ErrorLaw.EXP_NEG),
}


def regression_value(kind, x):
    """Boundary curve ``h0`` of the simulation models."""
    kind = Regression(kind)
    x = np.asarray(x, dtype=float)
    if kind is Regression.PARABOLA:
        out = 10.0 * (x - 0.5) ** 2
    else:
        out = 0.5 * np.sin(2 * np.pi * x) + 4.0 * x
    return float(out) if out.ndim == 0 else out


def _errors_from_uniform(kind: ErrorLaw, u: np.ndarray) -> np.ndarray:
    # u in (0, 1]
    if kind is ErrorLaw.WEIBULL_NEG:
        return -np.cbrt(-np.log(u))
    return np.log(u) / 3.0


def sample_errors(kind, n: int, rng: np.random.Generator) -> np.ndarray:
    """``n`` nonpositive errors by inversion of uniform draws."""
    if n < 1:
        raise ValueError("n must be positive")
    return _errors_from_uniform(ErrorLaw(kind), 1.0 - rng.random(n))


def fixed_design(n: int) -> np.ndarray:
    """Equidistant interior design ``i / (n + 1)``, ``i = 1..n``."""
    return np.arange(1, n + 1) / (n + 1)


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream for a 64-bit seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def derive_seed(master_seed: int, *keys: int) -> int:
    """64-bit stream seed hashed from a master seed and integer keys."""
    ss = np.random.SeedSequence([int(master_seed), *(int(k) for k in keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


@dataclass(frozen=True)
class ScenarioSpec:
    regression: Regression = Regression.PARABOLA
    error: ErrorLaw = ErrorLaw.WEIBULL_NEG
    theta0: float = 0.5
    n: int = 100
    design: Design = Design.FIXED
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "regression", Regression(self.regression))
        object.__setattr__(self, "error", ErrorLaw(self.error))
        object.__setattr__(self, "design", Design(self.design))
        if int(self.n) < 2:
            raise ValueError("n must be at least 2")
        if not -0.5 <= float(self.theta0) <= 2.5:
            raise ValueError("theta0 must lie in [-0.5, 2.5]")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @classmethod
    def for_model(cls, model: int, **kwargs) -> "ScenarioSpec":
        try:
            regression, error = MODELS[int(model)]
        except KeyError:
            raise ValueError(f"unknown model {model}; expected one of 1..4") from None
        return cls(regression, error, **kwargs)

    @property
    def model(self) -> int:
        return next(k for k, v in MODELS.items() if v == (self.regression, self.error))


def make_dataset(spec: ScenarioSpec) -> Dataset:
    """Draw one dataset; identical specs give identical data.

    Errors whose boundary value falls outside the image of the
    transformation (possible only for ``theta0`` outside ``[0, 2]``) are
    redrawn up to ``MAX_REDRAWS`` times.
    """
    rng = make_rng(spec.seed)
    n = spec.n
    if spec.design is Design.FIXED:
        x = fixed_design(n)
    else:
        x = np.sort(rng.random(n))
    h = regression_value(spec.regression, x)
    eps = sample_errors(spec.error, n, rng)
    lower, upper = yj_range(spec.theta0)
    z = h + eps
    bad = np.flatnonzero((z <= lower) | (z >= upper))
    for i in bad:
        for _ in range(MAX_REDRAWS):
            eps[i] = sample_errors(spec.error, 1, rng)[0]
            z[i] = h[i] + eps[i]
            if lower < z[i] < upper:
                break
        else:
            raise GenerationError(
                f"sample {i}: h0(x)+eps stays outside ({lower}, {upper}) after {MAX_REDRAWS} redraws"
            )
    y = TransformSpec.yeo_johnson(spec.theta0).inverse(z)
    return Dataset(x, y, spec.design)


def dataset_to_csv(data: Dataset) -> str:
    buf = io.StringIO()
    buf.write("x,y\n")
    for xv, yv in zip(data.x, data.y):
        buf.write(f"{xv:.17g},{yv:.17g}\n")
    return buf.getvalue()


def write_csv(data: Dataset, path) -> None:
    with open(path, "w", newline="") as fh:
        fh.write(dataset_to_csv(data))


class CsvFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def read_csv(source, design=Design.RANDOM) -> Dataset:
    """Parse an ``x,y`` CSV (path or file object) into a sorted dataset."""
    if isinstance(source, (str, bytes)) or hasattr(source, "__fspath__"):
        with open(source, newline="") as fh:
            return read_csv(fh, design)
    reader = csv.reader(source)
    header = next(reader, None)
    if header is None or [h.strip().lower() for h in header] != ["x", "y"]:
        raise CsvFormatError(1, "expected header 'x,y'")
    xs, ys = [], []
    for lineno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 2:
            raise CsvFormatError(lineno, f"expected 2 fields, got {len(row)}")
        try:
            xv, yv = float(row[0]), float(row[1])
        except ValueError:
            raise CsvFormatError(lineno, f"non-numeric value in {row!r}") from None
        if not (math.isfinite(xv) and math.isfinite(yv)):
            raise CsvFormatError(lineno, "non-finite value")
        if not 0.0 <= xv <= 1.0:
            raise CsvFormatError(lineno, f"x={xv} outside [0, 1]")
        xs.append(xv)
        ys.append(yv)
    if not xs:
        raise CsvFormatError(2, "no data rows")
    return Dataset.from_unsorted(xs, ys, design)
