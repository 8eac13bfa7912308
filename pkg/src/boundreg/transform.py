"""Parametric families of strictly increasing response transformations.

Every family member maps 0 to 0 and is strictly increasing. The Yeo-Johnson
family is bijective on the real line only for ``0 <= theta <= 2``; outside
that interval the inverse is defined on an open half-line and
:func:`yj_inverse` raises :class:`TransformRangeError` beyond it.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Family",
    "TransformSpec",
    "TransformError",
    "TransformDomainError",
    "TransformRangeError",
    "TransformParameterError",
    "yj_forward",
    "yj_inverse",
    "yj_range",
    "sas_forward",
    "sas_inverse",
    "DEFAULT_BOXES",
]

# below this distance from 0 (resp. 2) the explicit log branch is used
_BRANCH_EPS = 1e-8


class TransformError(ValueError):
    """Base class for transformation failures."""


class TransformDomainError(TransformError):
    """Raised for non-finite inputs."""


class TransformRangeError(TransformError):
    """Raised when an inverse is requested outside the image of the map."""

    def __init__(self, message, interval):
        super().__init__(message)
        self.interval = interval


class TransformParameterError(TransformError):
    """Raised for parameters outside a family's admissible set."""


class Family(str, enum.Enum):
    YEO_JOHNSON = "yeo-johnson"
    SINH_ARCSINH = "sinh-arcsinh"
    IDENTITY = "identity"

    @property
    def n_params(self) -> int:
        return {"yeo-johnson": 1, "sinh-arcsinh": 2, "identity": 0}[self.value]

    @classmethod
    def parse(cls, name: str) -> "Family":
        aliases = {"yj": cls.YEO_JOHNSON, "sas": cls.SINH_ARCSINH, "id": cls.IDENTITY}
        key = name.strip().lower().replace("_", "-")
        if key in aliases:
            return aliases[key]
        return cls(key)


# default parameter boxes used by the estimator
DEFAULT_BOXES = {
    Family.YEO_JOHNSON: ((-0.5, 2.5),),
    Family.SINH_ARCSINH: ((0.2, 5.0), (-2.0, 2.0)),
    Family.IDENTITY: (),
}


def _check_finite(*arrays):
    for a in arrays:
        if not np.all(np.isfinite(a)):
            raise TransformDomainError("non-finite input to transformation")


def _yj_forward(theta: float, y: np.ndarray) -> np.ndarray:
    if theta == 1.0:
        return y.copy()  # exact identity; the generic branches are off by an ulp
    out = np.empty_like(y)
    pos = y >= 0
    yp = y[pos]
    if abs(theta) < _BRANCH_EPS:
        out[pos] = np.log1p(yp)
    else:
        out[pos] = np.expm1(theta * np.log1p(yp)) / theta
    yn = y[~pos]
    lam = 2.0 - theta
    if abs(lam) < _BRANCH_EPS:
        out[~pos] = -np.log1p(-yn)
    else:
        out[~pos] = -np.expm1(lam * np.log1p(-yn)) / lam
    return out


def yj_range(theta: float) -> tuple[float, float]:
    """Open interval ``(lower, upper)`` forming the image of the Yeo-Johnson map."""
    lower = -1.0 / (theta - 2.0) if theta - 2.0 >= _BRANCH_EPS else -math.inf
    upper = -1.0 / theta if theta <= -_BRANCH_EPS else math.inf
    return lower, upper


def _yj_inverse(theta: float, z: np.ndarray) -> np.ndarray:
    lower, upper = yj_range(theta)
    bad = (z <= lower) | (z >= upper)
    if np.any(bad):
        raise TransformRangeError(
            f"value {z[bad][0]!r} outside the range ({lower}, {upper}) of the "
            f"Yeo-Johnson map with theta={theta}",
            (lower, upper),
        )
    if theta == 1.0:
        return z.copy()
    out = np.empty_like(z)
    pos = z >= 0
    zp = z[pos]
    if abs(theta) < _BRANCH_EPS:
        out[pos] = np.expm1(zp)
    else:
        out[pos] = np.expm1(np.log1p(theta * zp) / theta)
    zn = z[~pos]
    lam = 2.0 - theta
    if abs(lam) < _BRANCH_EPS:
        out[~pos] = -np.expm1(-zn)
    else:
        out[~pos] = -np.expm1(np.log1p(-lam * zn) / lam)
    return out


def _as_float_array(v):
    arr = np.asarray(v, dtype=float)
    return arr, arr.ndim == 0


def yj_forward(theta, y):
    """Yeo-Johnson transform of ``y`` (scalar or array)."""
    theta = float(theta)
    arr, scalar = _as_float_array(y)
    _check_finite(theta, arr)
    out = _yj_forward(theta, np.atleast_1d(arr))
    return float(out[0]) if scalar else out.reshape(arr.shape)


def yj_inverse(theta, z):
    """Inverse Yeo-Johnson transform.

    Raises
    ------
    TransformRangeError
        If some ``z`` lies outside the image of the map; the admissible open
        interval is attached as ``interval``.
    """
    theta = float(theta)
    arr, scalar = _as_float_array(z)
    _check_finite(theta, arr)
    out = _yj_inverse(theta, np.atleast_1d(arr))
    return float(out[0]) if scalar else out.reshape(arr.shape)


def _check_sas(theta1):
    if not theta1 > 0:
        raise TransformParameterError(f"sinh-arcsinh tailweight must be > 0, got {theta1}")


def sas_forward(theta1, theta2, y):
    """Sinh-arcsinh transform shifted so that 0 maps to 0."""
    theta1, theta2 = float(theta1), float(theta2)
    _check_sas(theta1)
    arr, scalar = _as_float_array(y)
    _check_finite(theta1, theta2, arr)
    out = np.sinh(theta1 * np.arcsinh(arr) - theta2) + math.sinh(theta2)
    return float(out) if scalar else out


def sas_inverse(theta1, theta2, z):
    theta1, theta2 = float(theta1), float(theta2)
    _check_sas(theta1)
    arr, scalar = _as_float_array(z)
    _check_finite(theta1, theta2, arr)
    out = np.sinh((np.arcsinh(arr - math.sinh(theta2)) + theta2) / theta1)
    return float(out) if scalar else out


@dataclass(frozen=True)
class TransformSpec:
    """A family member ``Lambda_theta``.

    Parameters
    ----------
    family : Family or str
    params : sequence of float
        One value for Yeo-Johnson, ``(tailweight, skewness)`` for
        sinh-arcsinh, nothing for the identity.
    """

    family: Family
    params: tuple = field(default=())

    def __post_init__(self):
        family = self.family if isinstance(self.family, Family) else Family.parse(self.family)
        object.__setattr__(self, "family", family)
        params = tuple(float(p) for p in np.atleast_1d(self.params)) if np.size(self.params) else ()
        object.__setattr__(self, "params", params)
        if len(params) != family.n_params:
            raise TransformParameterError(
                f"{family.value} takes {family.n_params} parameter(s), got {len(params)}"
            )
        if not all(math.isfinite(p) for p in params):
            raise TransformParameterError("parameters must be finite")
        if family is Family.SINH_ARCSINH:
            _check_sas(params[0])

    @classmethod
    def yeo_johnson(cls, theta: float) -> "TransformSpec":
        return cls(Family.YEO_JOHNSON, (theta,))

    @classmethod
    def identity(cls) -> "TransformSpec":
        return cls(Family.IDENTITY, ())

    def forward(self, y):
        if self.family is Family.YEO_JOHNSON:
            return yj_forward(self.params[0], y)
        if self.family is Family.SINH_ARCSINH:
            return sas_forward(self.params[0], self.params[1], y)
        arr, scalar = _as_float_array(y)
        _check_finite(arr)
        return float(arr) if scalar else arr.copy()

    def inverse(self, z):
        if self.family is Family.YEO_JOHNSON:
            return yj_inverse(self.params[0], z)
        if self.family is Family.SINH_ARCSINH:
            return sas_inverse(self.params[0], self.params[1], z)
        arr, scalar = _as_float_array(z)
        _check_finite(arr)
        return float(arr) if scalar else arr.copy()

    def image(self) -> tuple[float, float]:
        """Open interval covered by the map."""
        if self.family is Family.YEO_JOHNSON:
            return yj_range(self.params[0])
        return -math.inf, math.inf

    __call__ = forward
