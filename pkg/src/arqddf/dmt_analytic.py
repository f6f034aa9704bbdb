"""Closed-form diversity-multiplexing tradeoff curves for ARQ-DDF protocols.

Each ``*_curve`` function builds a :class:`PiecewiseCurve`; the matching
scalar function evaluates it and cross-checks the result against the
alternative route the formula was derived from (min-cut terms, outage
compositions).  Arguments given as ``Fraction`` are evaluated exactly.

Channels covered: the half-duplex relay channel, the two-user multiple
access relay (MAR) channel, and the cooperative vector multiple access
(CVMA) channel with a two-antenna destination.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .curves import (
    ConsistencyError,
    DomainError,
    Number,
    PiecewiseCurve,
    as_fraction,
    check_close,
    frac_piece,
    linear_piece,
    pointwise_min,
)

F = Fraction
HALF = F(1, 2)
TWO_THIRDS = F(2, 3)
FOUR_THIRDS = F(4, 3)


def _check_L(L: int, minimum: int = 1) -> None:
    if int(L) != L or L < minimum:
        raise DomainError(f"L must be an integer >= {minimum}, got {L}")


def _check_range(x: Number, lo: Number, hi: Number, closed_right: bool, name: str) -> None:
    ok = lo <= x <= hi if closed_right else lo <= x < hi
    if not ok:
        bracket = "]" if closed_right else ")"
        raise DomainError(f"{name}={x} outside [{lo}, {hi}{bracket}")


# ---------------------------------------------------------------------------
# MIMO building blocks
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def mimo_dmt_curve(m: int, n: int) -> PiecewiseCurve:
    """Optimal m x n MIMO tradeoff: linear interpolation of (k, (m-k)(n-k))."""
    if m not in (1, 2, 3) or n not in (1, 2, 3):
        raise DomainError(f"antenna counts must be in {{1,2,3}}, got {m}x{n}")
    kmax = min(m, n)
    pieces = []
    for k in range(kmax):
        d0 = (m - k) * (n - k)
        d1 = (m - k - 1) * (n - k - 1)
        slope = d1 - d0
        pieces.append(linear_piece(k, k + 1, d0 - slope * k, slope))
    return PiecewiseCurve(pieces, True, f"mimo_{m}x{n}")


def mimo_dmt(m: int, n: int, r: Number):
    return mimo_dmt_curve(m, n)(r)


@lru_cache(maxsize=None)
def arq_mimo_dmt_curve(m: int, n: int, L: int) -> PiecewiseCurve:
    """Long-term static ARQ MIMO tradeoff: d(r_e) = d_mxn(r_e / L)."""
    _check_L(L)
    return mimo_dmt_curve(m, n).stretched(L, f"arq_mimo_{m}x{n}_L{L}")


def arq_mimo_dmt(m: int, n: int, r_e: Number, L: int):
    _check_L(L)
    return arq_mimo_dmt_curve(m, n, L)(r_e)


# ---------------------------------------------------------------------------
# Relay channel
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def ddf_relay_curve() -> PiecewiseCurve:
    """DDF relay tradeoff without ARQ.

    The branch (1-r)/r for r > 1/2 comes from the original DDF analysis,
    which the ARQ results only use as a named input.
    """
    return PiecewiseCurve([
        linear_piece(0, HALF, 2, -2),
        frac_piece(HALF, 1, 1, -1, 0, 1),
    ], closed_right=False, curve_id="ddf_relay")


def ddf_relay_dmt(r: Number):
    return ddf_relay_curve()(r)


@lru_cache(maxsize=None)
def relay_arq_curve(L: int) -> PiecewiseCurve:
    _check_L(L, 2)
    return PiecewiseCurve([linear_piece(0, 1, 2, F(-2, L))], False, f"relay_arq_L{L}")


def relay_arq_dmt(r_e: Number, L: int):
    """2(1 - r_e/L) for 0 <= r_e < 1 and L >= 2."""
    _check_L(L, 2)
    d = relay_arq_curve(L)(r_e)
    # achievability route: DDF relay at r_e/L; converse route: 2x1 / 1x2 ARQ MIMO
    check_close(d, ddf_relay_dmt(_div(r_e, L)), "relay ARQ vs DDF at r_e/L")
    check_close(d, min(arq_mimo_dmt(2, 1, r_e, L), arq_mimo_dmt(1, 2, r_e, L)),
                "relay ARQ vs min-cut bound")
    return d


def _div(x: Number, L: int):
    if isinstance(x, (Fraction, int)):
        return F(x) / L
    return x / L


# ---------------------------------------------------------------------------
# MAR channel
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def mar_upper_curve() -> PiecewiseCurve:
    return PiecewiseCurve([
        linear_piece(0, HALF, 2, -1),
        linear_piece(HALF, 1, 3, -3),
    ], True, "mar_upper", "upper bound")


@lru_cache(maxsize=None)
def mar_mincut_curve(L: int = 1) -> PiecewiseCurve:
    """min{d_3x1, d_2x2, d_2x1(./2), d_1x2(./2)} with ARQ scaling by L."""
    terms = [
        arq_mimo_dmt_curve(3, 1, L),
        arq_mimo_dmt_curve(2, 2, L),
        arq_mimo_dmt_curve(2, 1, 2 * L),
        arq_mimo_dmt_curve(1, 2, 2 * L),
    ]
    return pointwise_min(terms, f"mar_mincut_L{L}")


def mar_upper(r: Number):
    d = mar_upper_curve()(r)
    check_close(d, mar_mincut_curve(1)(r), "MAR upper bound vs min-cut terms")
    return d


@lru_cache(maxsize=None)
def ddf_mar_lower_curve() -> PiecewiseCurve:
    return PiecewiseCurve([
        linear_piece(0, HALF, 2, -1),
        linear_piece(HALF, TWO_THIRDS, 3, -3),
        frac_piece(TWO_THIRDS, 1, 2, -2, 0, 1),
    ], True, "ddf_mar_lower", "lower bound")


def ddf_mar_lower(r: Number):
    """Achievable DDF diversity in the MAR channel (a lower bound)."""
    d = ddf_mar_lower_curve()(r)
    check_close(d, min(d_type1(r), d_type12(r)), "DDF-MAR vs min of type-I exponents")
    return d


@lru_cache(maxsize=None)
def mar_arq_curve(L: int) -> PiecewiseCurve:
    _check_L(L, 2)
    return PiecewiseCurve([linear_piece(0, 1, 2, F(-1, L))], False, f"mar_arq_L{L}")


def mar_arq_dmt(r_e: Number, L: int):
    """2 - r_e/L for 0 <= r_e < 1 and L >= 2."""
    _check_L(L, 2)
    d = mar_arq_curve(L)(r_e)
    check_close(d, ddf_mar_lower(_div(r_e, L)), "MAR ARQ vs DDF-MAR at r_e/L")
    check_close(d, mar_mincut_curve(L)(r_e), "MAR ARQ vs ARQ min-cut bound")
    return d


# ---------------------------------------------------------------------------
# CVMA channel
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def cvma_mincut_curve(L: int) -> PiecewiseCurve:
    """min{d_2x2(r_e, L), d_1x3(r_e/2, L)} on [0, 2)."""
    _check_L(L)
    env = pointwise_min([arq_mimo_dmt_curve(2, 2, L), arq_mimo_dmt_curve(1, 3, 2 * L)],
                        f"cvma_upper_L{L}")
    return env.restricted(2, closed_right=False)


def cvma_upper(r_e: Number, L: int):
    """Upper bound on the CVMA tradeoff with L rounds.

    For r_e <= L this equals min{3(1 - r_e/(2L)), 4 - 3 r_e/L}; for L = 1 and
    r_e > 1 the 2x2 term leaves its first linear piece and only the min-cut
    form is valid, so the min-cut form is what gets returned.
    """
    _check_L(L)
    _check_range(r_e, 0, 2, False, "r_e")
    d = cvma_mincut_curve(L)(r_e)
    if r_e <= L:
        if isinstance(r_e, (Fraction, int)):
            closed = min(3 * (1 - F(r_e) / (2 * L)), 4 - 3 * F(r_e) / L)
        else:
            closed = min(3 * (1 - r_e / (2 * L)), 4 - 3 * r_e / L)
        check_close(d, closed, "CVMA upper bound closed form vs min-cut")
    return d


@lru_cache(maxsize=None)
def cvma_lower_two_rounds_curve() -> PiecewiseCurve:
    return PiecewiseCurve([
        linear_piece(0, 1, 3, -1),
        linear_piece(1, FOUR_THIRDS, 4, -2),
        linear_piece(FOUR_THIRDS, 2, 2, -HALF),
    ], False, "cvma_ddf_lower_L2", "lower bound")


def cvma_ddf_lower_two_rounds(r_e: Number):
    """Achievable ARQ-DDF diversity in the CVMA channel with L = 2."""
    d = cvma_lower_two_rounds_curve()(r_e)
    check_close(d, min(d_inferior(r_e), d_superior_joint(r_e)),
                "CVMA lower bound vs min{d_i, d_s,j}")
    return d


@lru_cache(maxsize=None)
def cvma_lower_general_curve(L: int) -> PiecewiseCurve:
    _check_L(L, 2)
    if L % 2:
        raise DomainError(f"L must be even, got {L}")
    return cvma_lower_two_rounds_curve().stretched(F(L, 2), f"cvma_ddf_lower_L{L}")


def cvma_ddf_lower_general(r_e: Number, L: int):
    """L-round bound obtained from the two-round curve at rate 2 r_e / L (L even)."""
    _check_L(L, 2)
    if L % 2:
        raise DomainError(f"L must be even, got {L}")
    x = F(2 * F(r_e), L) if isinstance(r_e, (Fraction, int)) else 2 * r_e / L
    if not 0 <= x < 2:
        raise DomainError(f"2 r_e / L = {x} outside [0, 2)")
    return cvma_ddf_lower_two_rounds(x)


# ---------------------------------------------------------------------------
# MAR outage exponents: lambda functions of the listening fraction f
# ---------------------------------------------------------------------------

def _param(r: Number, lo: Number, hi: Number, name: str = "r") -> Fraction:
    _check_range(r, lo, hi, True, name)
    return as_fraction(r)


def lambda_type1_curve(r: Number) -> PiecewiseCurve:
    """inf (v1+v2+vr) over the type-{1} outage set, as a function of f."""
    r = _param(r, 0, 1)
    return PiecewiseCurve([
        linear_piece(0, HALF, 2 - r, 0),
        # 2 - r/(2(1-f)) = (4 - r - 4f) / (2 - 2f)
        frac_piece(HALF, 1 - r / 2, 4 - r, -4, 2, -2),
        frac_piece(1 - r / 2, 1, 2 - r, 0, 0, 2),
    ], True, "lambda_type1")


def lambda_type12_curve(r: Number) -> PiecewiseCurve:
    """inf (v1+v2+vr) over the type-{1,2} outage set, as a function of f."""
    r = _param(r, 0, 1)
    if r < F(1, 3):
        pieces = [
            linear_piece(0, TWO_THIRDS, 3 * (1 - r), 0),
            # 3 - r/(1-f) = (3 - r - 3f) / (1 - f)
            frac_piece(TWO_THIRDS, 1 - r, 3 - r, -3, 1, -1),
            frac_piece(1 - r, 1, 2 * (1 - r), 0, 0, 1),
        ]
    else:
        pieces = [
            linear_piece(0, TWO_THIRDS, 3 * (1 - r), 0),
            frac_piece(TWO_THIRDS, 1, 2 * (1 - r), 0, 0, 1),
        ]
    return PiecewiseCurve(pieces, True, "lambda_type12")


def lambda_sources_curve(r: Number) -> PiecewiseCurve:
    """inf (u1+u2) compatible with listening fraction f (defined for f >= r > 0)."""
    r = _param(r, 0, 1)
    if r == 0:
        raise DomainError("lambda_sources needs r > 0 (f is pinned to 0 at r = 0)")
    return PiecewiseCurve([
        frac_piece(r, min(3 * r / 2, F(1)), -2 * r, 2, 0, 1),
        frac_piece(min(3 * r / 2, F(1)), 1, -r, 2, 0, 2),
    ], True, "lambda_sources")


def lambda_type1(f: Number, r: Number):
    return lambda_type1_curve(r)(f)


def lambda_type12(f: Number, r: Number):
    return lambda_type12_curve(r)(f)


def lambda_sources(f: Number, r: Number):
    return lambda_sources_curve(r)(f)


@lru_cache(maxsize=None)
def d_type1_curve() -> PiecewiseCurve:
    return PiecewiseCurve([
        linear_piece(0, HALF, 2, -1),
        frac_piece(HALF, TWO_THIRDS, 4, -5, 2, -2),
        frac_piece(TWO_THIRDS, 1, 2, -1, 0, 2),
    ], True, "d_type1")


@lru_cache(maxsize=None)
def d_type12_curve() -> PiecewiseCurve:
    return PiecewiseCurve([
        linear_piece(0, TWO_THIRDS, 3, -3),
        frac_piece(TWO_THIRDS, 1, 2, -2, 0, 1),
    ], True, "d_type12")


def _check_over_f(d, r: Number, curve: PiecewiseCurve, inner, listen, f_lo, what: str) -> None:
    """Compare ``d`` with inf over f of inner(f) + listen(f) away from breakpoints."""
    if any(r == x for x, _ in curve.breakpoints()):
        return
    from .outage_optimizer.fsearch import infimum_over_f

    r = float(r)
    numeric = infimum_over_f(inner(r), listen(r), (float(f_lo(r)), 1.0))
    check_close(d, numeric, what, tol=1e-9)


def d_type1(r: Number, check: bool = True):
    d = d_type1_curve()(r)
    if check:
        _check_over_f(d, r, d_type1_curve(), lambda_type1_curve, lambda_sources_curve,
                      lambda x: x, "d_type1 vs inf over f")
    return d


def d_type12(r: Number, check: bool = True):
    d = d_type12_curve()(r)
    if check:
        _check_over_f(d, r, d_type12_curve(), lambda_type12_curve, lambda_sources_curve,
                      lambda x: x, "d_type12 vs inf over f")
    return d


# ---------------------------------------------------------------------------
# CVMA outage exponents
# ---------------------------------------------------------------------------

def lambda_cvma_inferior_curve(r1: Number) -> PiecewiseCurve:
    """inf (v_ss+v_si+v_is+v_ii) over the inferior-user outage set vs f."""
    r1 = _param(r1, 0, 2, "r1")
    return PiecewiseCurve([
        # 4 - r1/(1-f) = (4 - r1 - 4f) / (1 - f)
        frac_piece(0, 1 - r1 / 2, 4 - r1, -4, 1, -1),
        frac_piece(1 - r1 / 2, 1, 4 - r1, 0, 1, 1),
    ], True, "lambda_cvma_inferior")


def lambda_cvma_listen_curve(r1: Number) -> PiecewiseCurve:
    """inf u compatible with the helper's listening fraction f (f >= r1/2)."""
    r1 = _param(r1, 0, 2, "r1")
    if r1 == 0:
        raise DomainError("lambda_cvma_listen needs r1 > 0")
    return PiecewiseCurve([frac_piece(r1 / 2, 1, -r1, 2, 0, 2)], True, "lambda_cvma_listen")


def lambda_cvma_inferior(f: Number, r1: Number):
    return lambda_cvma_inferior_curve(r1)(f)


def lambda_cvma_listen(f: Number, r1: Number):
    return lambda_cvma_listen_curve(r1)(f)


@lru_cache(maxsize=None)
def d_inferior_curve() -> PiecewiseCurve:
    return PiecewiseCurve([
        linear_piece(0, 1, 3, -1),
        frac_piece(1, 2, 8, -2, 2, 1),
    ], True, "d_inferior")


@lru_cache(maxsize=None)
def d_superior_jointinferior_curve() -> PiecewiseCurve:
    return PiecewiseCurve([
        linear_piece(0, FOUR_THIRDS, 4, -2),
        linear_piece(FOUR_THIRDS, 2, 2, -HALF),
    ], True, "d_sji")


@lru_cache(maxsize=None)
def d_superior_jointsuperior_curve() -> PiecewiseCurve:
    return PiecewiseCurve([linear_piece(0, 2, 4, -1)], True, "d_sjs")


def d_inferior(r1: Number, check: bool = True):
    d = d_inferior_curve()(r1)
    if check:
        _check_over_f(d, r1, d_inferior_curve(), lambda_cvma_inferior_curve,
                      lambda_cvma_listen_curve, lambda x: x / 2, "d_inferior vs inf over f")
    return d


def d_superior_jointinferior(r1: Number):
    return d_superior_jointinferior_curve()(r1)


def d_superior_jointsuperior(r1: Number):
    return d_superior_jointsuperior_curve()(r1)


def d_superior_joint(r1: Number):
    """min{d_2x2(r1/2), d_s,ji(r1), d_s,js(r1)}, which collapses to d_s,ji."""
    both = mimo_dmt(2, 2, _div(r1, 2))
    d = min(both, d_superior_jointinferior(r1), d_superior_jointsuperior(r1))
    check_close(d, d_superior_jointinferior(r1), "joint-error composite collapses to d_s,ji")
    return d


CURVE_BUILDERS = {
    "mar_upper": lambda L: mar_upper_curve(),
    "ddf_mar_lower": lambda L: ddf_mar_lower_curve(),
    "ddf_relay": lambda L: ddf_relay_curve(),
    "relay_arq": relay_arq_curve,
    "mar_arq": mar_arq_curve,
    "cvma_upper": cvma_mincut_curve,
    "cvma_lower_L2": lambda L: cvma_lower_two_rounds_curve(),
    "cvma_lower_general": cvma_lower_general_curve,
    "d_type1": lambda L: d_type1_curve(),
    "d_type12": lambda L: d_type12_curve(),
    "d_inferior": lambda L: d_inferior_curve(),
    "d_sji": lambda L: d_superior_jointinferior_curve(),
    "d_sjs": lambda L: d_superior_jointsuperior_curve(),
}
"""Curve ids accepted by the exporter.  Builders take the ARQ round count L."""


def curve_by_id(curve_id: str, L: int = 1) -> PiecewiseCurve:
    try:
        builder = CURVE_BUILDERS[curve_id]
    except KeyError:
        raise KeyError(f"unknown curve id {curve_id!r}; known: {sorted(CURVE_BUILDERS)}") from None
    return builder(L)
