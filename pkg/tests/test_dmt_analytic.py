from fractions import Fraction as Fr

import numpy as np
import pytest
from hypothesis import given, strategies as st

from arqddf import dmt_analytic as dm
from arqddf.curves import DomainError


def interp_oracle(m, n, r):
    """Straight-line interpolation through (k, (m-k)(n-k)), built independently."""
    ks = np.arange(min(m, n) + 1)
    return float(np.interp(r, ks, (m - ks) * (n - ks)))


def f_scan_oracle(inner, outer, lo, n=200001):
    """Brute-force min over a dense f grid of inner(f) + outer(f)."""
    fs = np.linspace(lo, 1.0, n)
    return min(float(inner(f)) + float(outer(f)) for f in fs[:: max(1, n // 4001)])


# --- worked examples ---------------------------------------------------------

@pytest.mark.parametrize("m,n,r,want", [(2, 1, 0, 2), (2, 2, 1, 1), (1, 3, 0.5, 1.5)])
def test_mimo_dmt_examples(m, n, r, want):
    assert dm.mimo_dmt(m, n, r) == pytest.approx(want, abs=1e-12)
    assert interp_oracle(m, n, r) == pytest.approx(want, abs=1e-12)


@given(st.sampled_from([(1, 1), (1, 2), (2, 1), (2, 2), (1, 3), (3, 1), (2, 3), (3, 3)]),
       st.floats(0, 1))
def test_mimo_dmt_matches_interpolation(mn, u):
    m, n = mn
    r = u * min(m, n)
    assert dm.mimo_dmt(m, n, r) == pytest.approx(interp_oracle(m, n, r), abs=1e-12)


def test_mimo_dmt_domain():
    with pytest.raises(DomainError):
        dm.mimo_dmt(2, 2, 2.01)
    with pytest.raises(DomainError):
        dm.mimo_dmt(2, 2, -0.1)


@pytest.mark.parametrize("m,n,re,L,want", [(2, 1, 1, 2, 1), (2, 2, 0, 4, 4), (1, 3, 1.5, 3, 1.5)])
def test_arq_mimo_examples(m, n, re, L, want):
    assert dm.arq_mimo_dmt(m, n, re, L) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("r,want", [(0, 2), (0.25, 1.5), (0.5, 1), (0.75, 1 / 3)])
def test_ddf_relay(r, want):
    assert dm.ddf_relay_dmt(r) == pytest.approx(want, abs=1e-12)


def test_ddf_relay_domain():
    with pytest.raises(DomainError):
        dm.ddf_relay_dmt(1)


@pytest.mark.parametrize("re,L,want", [(0, 2, 2), (0.5, 2, 1.5), (0.9, 3, 1.4)])
def test_relay_arq(re, L, want):
    assert dm.relay_arq_dmt(re, L) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("args", [(1, 2), (0.5, 1)])
def test_relay_arq_domain(args):
    with pytest.raises(DomainError):
        dm.relay_arq_dmt(*args)


@pytest.mark.parametrize("r,want", [(0, 2), (Fr(1, 2), Fr(3, 2)), (1, 0)])
def test_mar_upper(r, want):
    assert dm.mar_upper(r) == want


@pytest.mark.parametrize("r,want", [(Fr(1, 2), Fr(3, 2)), (Fr(2, 3), 1), (0.8, 0.5)])
def test_ddf_mar_lower(r, want):
    assert dm.ddf_mar_lower(r) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("re,L,want", [(0, 2, 2), (0.5, 2, 1.75), (0.99, 2, 1.505)])
def test_mar_arq(re, L, want):
    assert dm.mar_arq_dmt(re, L) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("re,L,want", [(0, 2, 3), (Fr(2, 3), 1, 2), (1, 2, Fr(9, 4))])
def test_cvma_upper(re, L, want):
    # the r_e = 1, L = 2 value is 3(1 - 1/4) = 2.25 (the 2x2 term), below 4 - 3/2
    assert dm.cvma_upper(re, L) == want


def test_cvma_upper_mincut_oracle():
    for L in (1, 2, 3):
        for re in np.linspace(0, 1.99, 60):
            want = min(interp_oracle(2, 2, re / L), interp_oracle(1, 3, re / (2 * L)))
            assert dm.cvma_upper(float(re), L) == pytest.approx(want, abs=1e-12)


def test_cvma_upper_domain():
    with pytest.raises(DomainError):
        dm.cvma_upper(2, 2)


@pytest.mark.parametrize("re,want", [(1, 2), (Fr(4, 3), Fr(4, 3)), (0, 3)])
def test_cvma_two_rounds(re, want):
    assert dm.cvma_ddf_lower_two_rounds(re) == want


def test_cvma_two_rounds_domain():
    with pytest.raises(DomainError):
        dm.cvma_ddf_lower_two_rounds(2)


@pytest.mark.parametrize("re,L,want", [(1, 2, 2), (1, 8, Fr(11, 4))])
def test_cvma_general(re, L, want):
    assert dm.cvma_ddf_lower_general(re, L) == want


def test_cvma_general_limit():
    assert dm.cvma_ddf_lower_general(1.9, 10**6) == pytest.approx(3, abs=1e-5)
    # within 1e-6 once 2 r_e / L <= 1e-6
    L = 2 * int(np.ceil(1.9 / 1e-6))
    assert 3 - dm.cvma_ddf_lower_general(1.9, L) <= 1e-6 + 1e-12


@pytest.mark.parametrize("args", [(1, 3), (2, 2), (0.5, 0)])
def test_cvma_general_domain(args):
    with pytest.raises(DomainError):
        dm.cvma_ddf_lower_general(*args)


@given(st.floats(0, 1.99), st.integers(1, 200))
def test_cvma_general_nondecreasing_in_L(re, k):
    a = dm.cvma_ddf_lower_general(re, 2 * k)
    b = dm.cvma_ddf_lower_general(re, 2 * k + 2)
    assert b >= a - 1e-12
    assert a >= 3 - 3 * (2 * re / (2 * k)) - 1e-12


def test_lambda_examples():
    assert dm.lambda_type1(0.25, 0.4) == pytest.approx(1.6, abs=1e-12)
    assert dm.lambda_type12(0.9, 0.5) == pytest.approx(1 / 0.9, abs=1e-12)
    assert dm.lambda_sources(1, Fr(1, 2)) == Fr(3, 4)


def test_lambda_sources_domain():
    with pytest.raises(DomainError):
        dm.lambda_sources(0.3, 0.5)
    with pytest.raises(DomainError):
        dm.lambda_type1(1.2, 0.5)


@pytest.mark.parametrize("fn,r,want", [
    (dm.d_type1, Fr(1, 2), Fr(3, 2)),
    (dm.d_type1, 1, Fr(1, 2)),
    (dm.d_type1, 0.6, 1.25),
    (dm.d_type12, Fr(2, 3), 1),
    (dm.d_inferior, 1, 2),
    (dm.d_inferior, 1.5, 10 / 7),
    (dm.d_superior_jointinferior, Fr(4, 3), Fr(4, 3)),
    (dm.d_superior_jointsuperior, Fr(1, 2), Fr(7, 2)),
])
def test_outage_exponent_examples(fn, r, want):
    assert fn(r) == pytest.approx(want, abs=1e-12)


@pytest.mark.parametrize("r", [0.1, 0.3, 0.55, 0.62, 0.7, 0.85, 0.97])
def test_mar_exponents_vs_f_scan(r):
    d1 = f_scan_oracle(dm.lambda_type1_curve(r), dm.lambda_sources_curve(r), r)
    d12 = f_scan_oracle(dm.lambda_type12_curve(r), dm.lambda_sources_curve(r), r)
    assert dm.d_type1(r) == pytest.approx(d1, abs=2e-3)
    assert dm.d_type12(r) == pytest.approx(d12, abs=2e-3)
    assert dm.d_type1(r) <= d1 + 1e-12 and dm.d_type12(r) <= d12 + 1e-12


@pytest.mark.parametrize("r1", [0.2, 0.7, 1.2, 1.5, 1.8])
def test_inferior_vs_f_scan(r1):
    want = f_scan_oracle(dm.lambda_cvma_inferior_curve(r1), dm.lambda_cvma_listen_curve(r1), r1 / 2)
    assert dm.d_inferior(r1) == pytest.approx(want, abs=2e-3)
    assert dm.d_inferior(r1) <= want + 1e-12


@pytest.mark.parametrize("r", [1e-14, 3e-16, 5e-324])
def test_self_checks_near_zero_rate(r):
    # ratio pieces with a pole just outside the domain must not lose precision
    assert dm.d_inferior(r) == pytest.approx(3, abs=1e-12)
    assert dm.d_type1(r) == pytest.approx(2, abs=1e-12)
    assert dm.d_type12(r) == pytest.approx(3, abs=1e-12)


def test_ddf_mar_lower_is_min_of_types():
    for r in np.linspace(0, 1, 101):
        assert dm.ddf_mar_lower(float(r)) == pytest.approx(
            min(dm.d_type1(float(r)), dm.d_type12(float(r))), abs=1e-12)


# --- invariants ------------------------------------------------------------

CURVES = [
    ("mar_upper", 1), ("ddf_mar_lower", 1), ("ddf_relay", 1), ("relay_arq", 2), ("mar_arq", 3),
    ("cvma_upper", 2), ("cvma_lower_L2", 1), ("cvma_lower_general", 6), ("d_type1", 1),
    ("d_type12", 1), ("d_inferior", 1), ("d_sji", 1), ("d_sjs", 1),
]


@pytest.mark.parametrize("cid,L", CURVES)
def test_curves_nonincreasing_continuous(cid, L):
    c = dm.curve_by_id(cid, L)
    xs = c.grid(1e-3)
    ys = np.array([c(x) for x in xs], dtype=float)
    assert np.all(np.diff(ys) <= 1e-12)
    # continuity: no jump larger than slope bound times the step
    assert np.max(np.abs(np.diff(ys))) < 0.02
    assert np.all(ys >= 0)


def test_lower_below_upper():
    for r in np.linspace(0, 1, 1001):
        assert dm.ddf_mar_lower(float(r)) <= dm.mar_upper(float(r)) + 1e-12
    for r in np.linspace(0, 1.999, 1000):
        assert dm.cvma_ddf_lower_two_rounds(float(r)) <= dm.cvma_upper(float(r), 2) + 1e-12


def test_mar_optimality_window():
    for k in range(0, 201):
        r = Fr(k, 300)  # [0, 2/3]
        assert dm.ddf_mar_lower(r) == dm.mar_upper(r)
    for r in np.linspace(2 / 3 + 1e-3, 1 - 1e-3, 50):
        assert dm.ddf_mar_lower(float(r)) < dm.mar_upper(float(r))


@pytest.mark.parametrize("L", [2, 3, 4])
def test_mar_arq_consistency(L):
    for k in range(100):
        re = Fr(k, 100)
        d = dm.mar_arq_dmt(re, L)
        assert d == dm.ddf_mar_lower(re / L) == dm.mar_mincut_curve(L)(re) == 2 - re / L


def test_endpoints():
    for fn in (dm.mar_upper, dm.ddf_mar_lower):
        assert fn(0) == 2
    assert dm.mar_arq_dmt(0, 3) == 2
    assert dm.cvma_upper(0, 1) == 3 and dm.cvma_ddf_lower_two_rounds(0) == 3
    assert dm.cvma_ddf_lower_general(0, 4) == 3


def test_unknown_curve():
    with pytest.raises(KeyError):
        dm.curve_by_id("nope")
