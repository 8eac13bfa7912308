import math

import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from boundreg.transform import (
    Family,
    TransformDomainError,
    TransformParameterError,
    TransformRangeError,
    TransformSpec,
    sas_forward,
    sas_inverse,
    yj_forward,
    yj_inverse,
    yj_range,
)

thetas = st.floats(-0.5, 2.5)
ys = st.floats(-50, 50, allow_nan=False)


def test_identity_at_one():
    assert yj_forward(1.0, 5.0) == 5.0
    assert yj_forward(1.0, -3.0) == -3.0
    assert yj_inverse(1.0, -3.0) == -3.0


@pytest.mark.parametrize("theta", [-0.5, 0.0, 1e-9, 0.5, 1.0, 2.0, 2.0 - 1e-9, 2.5])
def test_zero_is_fixed(theta):
    assert yj_forward(theta, 0.0) == 0.0
    assert yj_inverse(theta, 0.0) == 0.0


def test_log_branches():
    assert yj_forward(2.0, -0.5) == pytest.approx(-math.log(1.5), rel=1e-15)
    assert yj_forward(0.0, math.e - 1) == pytest.approx(1.0, rel=1e-15)
    assert yj_inverse(2.0, -math.log(1.5)) == pytest.approx(-0.5, rel=1e-14)


def test_round_trip_example():
    assert yj_inverse(0.5, yj_forward(0.5, 2.7)) == pytest.approx(2.7, rel=1e-14)


def test_power_branches_by_hand():
    # theta=0.5, y=3: ((1+3)^0.5 - 1)/0.5 = 2
    assert yj_forward(0.5, 3.0) == pytest.approx(2.0, rel=1e-15)
    # theta=0.5, y=-3: -((1+3)^1.5 - 1)/1.5 = -14/3
    assert yj_forward(0.5, -3.0) == pytest.approx(-14 / 3, rel=1e-15)


def test_array_and_scalar_types():
    out = yj_forward(0.5, np.array([[0.0, 1.0], [-1.0, 2.0]]))
    assert out.shape == (2, 2)
    assert isinstance(yj_forward(0.5, 1.0), float)


@pytest.mark.parametrize("y", [0.5, 5.0, 50.0])
def test_continuity_at_zero(y):
    assert abs(yj_forward(1e-9, y) - yj_forward(0.0, y)) < 1e-6


@pytest.mark.parametrize("y", [-0.5, -5.0, -50.0])
def test_continuity_at_two(y):
    assert abs(yj_forward(2.0 - 1e-9, y) - yj_forward(2.0, y)) < 1e-6
    assert abs(yj_forward(2.0 + 1e-9, y) - yj_forward(2.0, y)) < 1e-6


@given(thetas, ys, ys)
def test_strictly_increasing(theta, y1, y2):
    assume(y1 < y2 and y2 - y1 > 1e-9 * max(1.0, abs(y1)))
    assert yj_forward(theta, y1) < yj_forward(theta, y2)


@given(thetas, ys)
def test_inverse_after_forward(theta, y):
    back = yj_inverse(theta, yj_forward(theta, y))
    assert abs(back - y) <= 1e-10 * max(1.0, abs(y))


@given(st.floats(0.0, 2.0), st.floats(-20, 20))
def test_forward_after_inverse(theta, z):
    y = yj_inverse(theta, z)
    assume(math.isfinite(y))
    assert abs(yj_forward(theta, y) - z) <= 1e-10 * max(1.0, abs(z))


@given(thetas, st.floats(-5, 5))
def test_image_contains_forward_values(theta, y):
    lo, hi = yj_range(theta)
    assert lo < yj_forward(theta, y) < hi


def test_finite_difference_in_theta_is_bounded():
    grid = np.linspace(-0.5, 2.5, 601)
    for y in (-5.0, -0.3, 0.2, 4.0):
        vals = np.array([yj_forward(t, y) for t in grid])
        slope = np.abs(np.diff(vals)) / np.diff(grid)
        assert np.all(np.isfinite(slope)) and slope.max() < 100


def test_range_error_reports_interval():
    with pytest.raises(TransformRangeError) as err:
        yj_inverse(2.5, -2.0)
    assert err.value.interval == (-2.0, math.inf)
    with pytest.raises(TransformRangeError) as err:
        yj_inverse(-0.5, 3.0)
    assert err.value.interval == (-math.inf, 2.0)


def test_non_finite_input():
    with pytest.raises(TransformDomainError):
        yj_forward(0.5, math.nan)
    with pytest.raises(TransformDomainError):
        yj_forward(math.inf, 1.0)
    with pytest.raises(TransformDomainError):
        sas_forward(1.0, 0.0, np.array([1.0, math.inf]))


def test_sinh_arcsinh_examples():
    assert sas_forward(1.0, 0.0, 7.0) == pytest.approx(7.0, rel=1e-15)
    assert sas_forward(2.0, 0.0, 1.0) == pytest.approx(2 * math.sqrt(2), rel=1e-14)
    assert sas_forward(0.7, -1.3, 0.0) == 0.0
    with pytest.raises(TransformParameterError):
        sas_forward(0.0, 0.0, 1.0)


@given(st.floats(0.2, 5), st.floats(-2, 2), st.floats(-20, 20))
def test_sinh_arcsinh_round_trip(t1, t2, y):
    back = sas_inverse(t1, t2, sas_forward(t1, t2, y))
    assert abs(back - y) <= 1e-8 * max(1.0, abs(y))


def test_spec_dispatch_and_validation():
    spec = TransformSpec("yj", 0.5)
    assert spec.family is Family.YEO_JOHNSON and spec.params == (0.5,)
    assert spec(3.0) == pytest.approx(2.0)
    assert spec.inverse(spec(1.25)) == pytest.approx(1.25)
    assert TransformSpec.identity().forward(-2.0) == -2.0
    assert TransformSpec("sas", (1.0, 0.0)).image() == (-math.inf, math.inf)
    with pytest.raises(TransformParameterError):
        TransformSpec("yj", (0.5, 1.0))
    with pytest.raises(TransformParameterError):
        TransformSpec("sas", (-1.0, 0.0))
    with pytest.raises(ValueError):
        Family.parse("box-cox")
