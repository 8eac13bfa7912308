"""Boundary curve estimation.

The local-constant estimator takes, at each point, the maximum transformed
response among observations whose covariate lies within ``b`` of it. The
smoothed estimator averages those knot maxima with Epanechnikov weights of
bandwidth ``a``.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .transform import TransformSpec

__all__ = [
    "Design",
    "Sample",
    "Dataset",
    "BoundaryFit",
    "SmoothedBoundary",
    "epanechnikov",
    "window_argmax",
    "kernel_weights",
    "local_constant_fit",
    "smooth_fit",
]


class Design(str, enum.Enum):
    RANDOM = "random"
    FIXED = "fixed"


class Sample(NamedTuple):
    x: float
    y: float


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Covariate/response pairs sorted by covariate.

    Use :meth:`from_unsorted` when the input order is arbitrary; the
    constructor itself only validates.
    """

    x: np.ndarray
    y: np.ndarray
    design: Design = Design.RANDOM

    def __post_init__(self):
        x, y = _frozen(self.x), _frozen(self.y)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "design", Design(self.design))
        if x.ndim != 1 or x.shape != y.shape:
            raise ValueError("x and y must be 1-d arrays of equal length")
        if x.size == 0:
            raise ValueError("dataset is empty")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise ValueError("dataset contains non-finite values")
        if x[0] < 0 or x[-1] > 1:
            raise ValueError("covariates must lie in [0, 1]")
        dx = np.diff(x)
        if np.any(dx < 0):
            raise ValueError("dataset must be sorted by x")
        if self.design is Design.FIXED:
            if np.any(dx <= 0) or x[0] <= 0 or x[-1] >= 1:
                raise ValueError("fixed design needs 0 < x_1 < ... < x_n < 1")

    @classmethod
    def from_unsorted(cls, x, y, design=Design.RANDOM) -> "Dataset":
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        order = np.argsort(x, kind="stable")
        return cls(x[order], y[order], design)

    def __len__(self):
        return self.x.size

    def __iter__(self):
        return (Sample(float(a), float(b)) for a, b in zip(self.x, self.y))

    @property
    def samples(self) -> list[Sample]:
        return list(self)


def epanechnikov(u):
    """Epanechnikov kernel ``0.75 (1 - u^2)`` on ``[-1, 1]``."""
    u = np.asarray(u, dtype=float)
    out = np.where(np.abs(u) <= 1.0, 0.75 * (1.0 - u * u), 0.0)
    return float(out) if out.ndim == 0 else out


def window_argmax(x: np.ndarray, values: np.ndarray, b: float) -> np.ndarray:
    """Index of the maximum of ``values`` over ``{j : |x_j - x_i| <= b}`` for each i.

    ``x`` must be sorted. The windows are contiguous and both ends move
    monotonically, so a monotone deque gives every maximum in O(n).
    Ties resolve to the smallest index.
    """
    n = x.size
    out = np.empty(n, dtype=np.intp)
    q: deque[int] = deque()
    lo = 0
    hi = 0  # next index not yet pushed
    for i in range(n):
        xi = x[i]
        while hi < n and abs(x[hi] - xi) <= b:
            v = values[hi]
            while q and values[q[-1]] < v:
                q.pop()
            q.append(hi)
            hi += 1
        while abs(x[lo] - xi) > b:
            lo += 1
        while q[0] < lo:
            q.popleft()
        out[i] = q[0]
    return out


def _window_slice(knots: np.ndarray, x: float, h: float) -> slice:
    # candidate range padded against rounding in x -/+ h, trimmed by the exact predicate
    pad = 4 * np.spacing(abs(x) + h + 1.0)
    lo = int(np.searchsorted(knots, x - h - pad, side="left"))
    hi = int(np.searchsorted(knots, x + h + pad, side="right"))
    while lo < hi and abs(knots[lo] - x) > h:
        lo += 1
    while hi > lo and abs(knots[hi - 1] - x) > h:
        hi -= 1
    return slice(lo, hi)


def _nearest(knots: np.ndarray, x: float) -> int:
    j = int(np.searchsorted(knots, x))
    if j == 0:
        return 0
    if j == knots.size:
        return knots.size - 1
    return j - 1 if abs(x - knots[j - 1]) <= abs(knots[j] - x) else j


def kernel_weights(knots: np.ndarray, a: float):
    """Epanechnikov weight matrix ``K((x_i - x_j)/a)`` and its row sums."""
    w = epanechnikov((knots[:, None] - knots[None, :]) / a)
    return w, w.sum(axis=1)


def _smooth_values(weights: np.ndarray, wsum: np.ndarray, raw: np.ndarray) -> np.ndarray:
    # explicit reduction instead of BLAS gemv keeps results independent of thread count
    return (weights * raw[None, :]).sum(axis=1) / wsum


@dataclass(frozen=True, eq=False)
class BoundaryFit:
    """Local-constant boundary estimate.

    Attributes
    ----------
    knots : ndarray
        The dataset covariates.
    raw_values : ndarray
        Windowed maxima of ``transformed_y`` at the knots.
    bandwidth_b, bandwidth_a : float
        Window half-width and the default smoothing bandwidth.
    transformed_y : ndarray
    argmax : ndarray
        Index attaining each window maximum.
    """

    knots: np.ndarray
    raw_values: np.ndarray
    bandwidth_b: float
    bandwidth_a: float
    transformed_y: np.ndarray
    argmax: np.ndarray

    def evaluate(self, x, return_flags: bool = False):
        """Windowed maximum at arbitrary points.

        Points whose window holds no knot take the nearest knot's
        transformed response; ``return_flags`` reports where that happened.
        """
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        empty = np.zeros(xs.shape, dtype=bool)
        for k, xv in enumerate(xs):
            sl = _window_slice(self.knots, xv, self.bandwidth_b)
            if sl.start < sl.stop:
                out[k] = self.transformed_y[sl].max()
            else:
                out[k] = self.transformed_y[_nearest(self.knots, xv)]
                empty[k] = True
        if np.ndim(x) == 0:
            out, empty = float(out[0]), bool(empty[0])
        return (out, empty) if return_flags else out

    __call__ = evaluate

    def at_knots(self) -> np.ndarray:
        return self.raw_values

    def smooth(self, a: float | None = None) -> "SmoothedBoundary":
        return smooth_fit(self, self.bandwidth_a if a is None else a)


@dataclass(frozen=True, eq=False)
class SmoothedBoundary:
    """Nadaraya-Watson average of the knot maxima with bandwidth ``a``."""

    knots: np.ndarray
    raw_values: np.ndarray
    bandwidth_a: float
    knot_values: np.ndarray

    def evaluate(self, x, return_flags: bool = False):
        xs = np.atleast_1d(np.asarray(x, dtype=float))
        out = np.empty_like(xs)
        empty = np.zeros(xs.shape, dtype=bool)
        a = self.bandwidth_a
        for k, xv in enumerate(xs):
            sl = _window_slice(self.knots, xv, a)
            w = epanechnikov((xv - self.knots[sl]) / a)
            total = w.sum() if sl.start < sl.stop else 0.0
            if total > 0:
                out[k] = (w * self.raw_values[sl]).sum() / total
            else:
                out[k] = self.raw_values[_nearest(self.knots, xv)]
                empty[k] = True
        if np.ndim(x) == 0:
            out, empty = float(out[0]), bool(empty[0])
        return (out, empty) if return_flags else out

    __call__ = evaluate

    def at_knots(self) -> np.ndarray:
        return self.knot_values


def local_constant_fit(data: Dataset, transform: TransformSpec, b: float, a: float | None = None) -> BoundaryFit:
    """Windowed-maximum boundary estimate of the transformed responses."""
    if len(data) == 0:
        raise ValueError("dataset is empty")
    if not b > 0:
        raise ValueError(f"bandwidth b must be positive, got {b}")
    a = b / 2 if a is None else a
    if not a > 0:
        raise ValueError(f"bandwidth a must be positive, got {a}")
    t = _frozen(transform.forward(data.y))
    idx = window_argmax(data.x, t, b)
    idx.flags.writeable = False
    return BoundaryFit(data.x, _frozen(t[idx]), float(b), float(a), t, idx)


def smooth_fit(fit: BoundaryFit, a: float) -> SmoothedBoundary:
    """Kernel-smooth the knot maxima of ``fit`` with bandwidth ``a``.

    A knot always has positive weight on itself, so knot values are always
    defined.
    """
    if not a > 0:
        raise ValueError(f"bandwidth a must be positive, got {a}")
    w, wsum = kernel_weights(fit.knots, a)
    vals = _smooth_values(w, wsum, fit.raw_values)
    return SmoothedBoundary(fit.knots, fit.raw_values, float(a), _frozen(vals))
