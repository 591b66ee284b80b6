from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from momloc.errors import InvalidArgumentError, MalformedExpressionError, PoleError
from momloc.symkernel import (Polynomial, RationalExpr, Symbol, degree_in, is_zero, normalize,
                              parse_expr, poly_gcd, substitute, swap_pair)

VARS = ("x", "y", "z")

small = st.fractions(min_value=-5, max_value=5, max_denominator=7)


@st.composite
def polys(draw, max_terms=4, max_exp=3):
    n = draw(st.integers(0, max_terms))
    out = Polynomial.const(0)
    for _ in range(n):
        c = draw(small)
        mono = Polynomial.const(c)
        for v in VARS:
            mono = mono * Polynomial.var(v, draw(st.integers(0, max_exp)))
        out = out + mono
    return out


@st.composite
def points(draw):
    return {v: draw(small) for v in VARS}


def nonzero_at(p, pt):
    return p.evaluate(pt) != 0


# evaluation at a point is a ring homomorphism: a naive Fraction evaluation of
# the operands is the oracle for every kernel operation

@given(polys(), polys(), polys(), points())
def test_ring_axioms(a, b, c, pt):
    ev = lambda p: p.evaluate(pt)
    assert ev(a + b) == ev(a) + ev(b)
    assert ev(a * b) == ev(a) * ev(b)
    assert a + b == b + a and a * b == b * a
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a - a == Polynomial.const(0)
    assert a * Polynomial.const(1) == a


@given(polys(3, 2), polys(3, 2), polys(2, 2), points())
def test_rational_field_ops_match_evaluation(a, b, c, pt):
    if b.is_zero() or c.is_zero() or not nonzero_at(b, pt) or not nonzero_at(c, pt):
        return
    x = RationalExpr(a, b)
    y = RationalExpr(c, b * c + Polynomial.const(1)) if nonzero_at(b * c + Polynomial.const(1), pt) \
        else RationalExpr(c, Polynomial.const(2))
    assert (x + y).evaluate(pt) == x.evaluate(pt) + y.evaluate(pt)
    assert (x * y).evaluate(pt) == x.evaluate(pt) * y.evaluate(pt)
    assert x - x == RationalExpr.const(0)
    if not a.is_zero() and nonzero_at(a, pt):
        assert (x / x) == RationalExpr.const(1)


@given(polys(3, 2), polys(3, 2), polys(2, 2))
def test_gcd_divides_and_recovers_common_factor(a, b, c):
    if c.is_zero() or (a.is_zero() and b.is_zero()):
        return
    g = poly_gcd(a * c, b * c)
    assert (a * c).exact_div(g) * g == a * c
    assert (b * c).exact_div(g) * g == b * c
    # c divides the gcd
    assert g.exact_div(c.monic()) * c.monic() == g


@given(polys(3, 2), polys(3, 2))
def test_canonical_form_is_unique(a, b):
    if b.is_zero():
        return
    k = Polynomial.var("x") + Polynomial.const(3)
    assert RationalExpr(a * k, b * k) == RationalExpr(a, b)
    assert hash(RationalExpr(a * k, b * k)) == hash(RationalExpr(a, b))


@given(polys(), points())
def test_swap_is_involution(a, pt):
    e = RationalExpr(a, Polynomial.var("x") ** 2 + Polynomial.const(1))
    s = swap_pair(e, [("x", "y")])
    assert swap_pair(s, [("x", "y")]) == e
    swapped_pt = dict(pt, x=pt["y"], y=pt["x"])
    assert s.evaluate(pt) == e.evaluate(swapped_pt)


def test_difference_of_squares():
    x, y = Polynomial.var("x"), Polynomial.var("y")
    r = RationalExpr(x ** 2 - y ** 2, x - y)
    assert r == RationalExpr(x + y)
    assert r.is_polynomial()


def test_expansion_identity_is_zero():
    assert is_zero(parse_expr("(x+y)**2 - x**2 - 2*x*y - y**2"))


def test_normalize_and_str_roundtrip():
    e = parse_expr("1/(2*x) - 1/(2*y)")
    assert normalize(e) == e
    assert parse_expr(str(e)) == e


def test_parse_rejects_garbage():
    with pytest.raises(MalformedExpressionError):
        parse_expr("x +* y")
    with pytest.raises(MalformedExpressionError):
        parse_expr("sqrt(x)")


def test_substitute_simultaneous():
    e = parse_expr("x - y")
    assert substitute(e, {"x": "y", "y": "x"}) == parse_expr("y - x")
    assert substitute(parse_expr("1/(x - 1)"), {"x": "y**2"}) == parse_expr("1/(y**2 - 1)")


def test_substitute_pole():
    with pytest.raises(PoleError):
        substitute(parse_expr("1/(x - y)"), {"x": "y"})


def test_evaluate_pole_reports_denominator():
    with pytest.raises(PoleError) as ei:
        parse_expr("1/(x - 2)").evaluate({"x": 2})
    assert ei.value.denominator == parse_expr("x - 2").num


def test_swap_pair_overlap_rejected():
    with pytest.raises(InvalidArgumentError):
        swap_pair(parse_expr("x"), [("x", "y"), ("y", "z")])


def test_degree_in():
    assert degree_in(parse_expr("x**3*y + z"), ["x"]) == 3
    assert degree_in(parse_expr("1/x"), ["x"]) is None
    assert degree_in(parse_expr("x/z"), ["x"]) == 1
    assert degree_in(parse_expr("0"), ["x"]) == 0


def test_symbol_kinds():
    assert Symbol("w1_0", "energy").name == "w1_0"
    with pytest.raises(InvalidArgumentError):
        Symbol("q", "velocity")


def test_evaluate_array_matches_exact():
    e = parse_expr("(x**2 + 3*y)/(x - y + 7)")
    rng = np.random.default_rng(1)
    for _ in range(20):
        xv, yv = (Fraction(int(v), 4) for v in rng.integers(-12, 12, 2))
        exact = e.evaluate({"x": xv, "y": yv})
        approx = e.evaluate_array({"x": np.array([float(xv)]), "y": np.array([float(yv)])})
        assert approx[0] == pytest.approx(float(exact), rel=1e-12)
