import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from arqddf.curves import (
    DomainError,
    PiecewiseCurve,
    frac_piece,
    linear_piece,
    pointwise_min,
)


def tent():
    return PiecewiseCurve([linear_piece(0, 1, 2, -1), linear_piece(1, 2, Fraction(3, 2), Fraction(-1, 2))], curve_id="t")


def test_breakpoints_and_json():
    c = tent()
    assert c.breakpoints() == [(0, 2), (1, 1), (2, Fraction(1, 2))]
    pts = json.loads(PiecewiseCurve([linear_piece(0, 1, 2, -1)]).to_json())
    assert pts == [[0.0, 2.0], [1.0, 1.0]]


def test_discontinuity_rejected():
    with pytest.raises(Exception):
        PiecewiseCurve([linear_piece(0, 1, 2, -1), linear_piece(1, 2, 5, -2)])


def test_negative_rejected():
    with pytest.raises(ValueError):
        PiecewiseCurve([linear_piece(0, 2, 1, -1)])


def test_open_right_end():
    c = PiecewiseCurve([linear_piece(0, 1, 1, -1)], closed_right=False)
    assert c(Fraction(1, 2)) == Fraction(1, 2)
    with pytest.raises(DomainError):
        c(1)
    with pytest.raises(DomainError):
        c(1.0)
    with pytest.raises(DomainError):
        c(-0.1)


def test_exact_and_float_agree():
    c = PiecewiseCurve([linear_piece(0, Fraction(1, 2), 2, -2),
                        frac_piece(Fraction(1, 2), Fraction(9, 10), 1, -1, 0, 1)])
    for x in [Fraction(k, 20) for k in range(19)]:
        assert float(c(x)) == pytest.approx(c(float(x)), abs=1e-15)


def test_degenerate_fraction_collapses():
    # 2r / (4r) with a removable 0/0 at r = 0
    p = frac_piece(0, 1, 0, 2, 0, 4)
    assert p.is_linear and p.value(0) == Fraction(1, 2)


def test_stretch():
    c = tent().stretched(2)
    assert c.hi == 4 and c(2) == 1 and c(3.0) == pytest.approx(0.75)


def test_pointwise_min_crossing():
    a = PiecewiseCurve([linear_piece(0, 2, 2, -1)])
    b = PiecewiseCurve([linear_piece(0, Fraction(3, 2), 3, -2)])
    env = pointwise_min([a, b])
    assert env.hi == Fraction(3, 2)
    assert Fraction(1) in env.interior_breakpoints()
    assert env(Fraction(1, 2)) == Fraction(3, 2) and env(Fraction(5, 4)) == Fraction(1, 2)


@given(st.fractions(min_value=0, max_value=2))
def test_pointwise_min_is_min(x):
    a = PiecewiseCurve([linear_piece(0, 2, 2, -1)])
    b = PiecewiseCurve([linear_piece(0, 1, 3, -2), linear_piece(1, 2, 2, -1)])
    assert pointwise_min([a, b])(x) == min(a(x), b(x))


def test_grid_respects_domain():
    c = PiecewiseCurve([linear_piece(0, 1, 1, -1)], closed_right=False)
    g = c.grid(0.25)
    assert g == [0.0, 0.25, 0.5, 0.75]
