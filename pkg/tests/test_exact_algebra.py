from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from crlab import GaussianRational, PointAssignment, Poly, PolySyntaxError, parse_poly
from crlab.poly import RationalExpr, divide_exact, real_var, z, zbar

from conftest import HEIS, power_source


# -- parser ---------------------------------------------------------------------

def test_parse_monomial():
    p = parse_poly("z1*conj(z1)")
    assert p == Poly.var(z(1)) * Poly.var(zbar(1))


def test_parse_power_source():
    rho = parse_poly("-(z2-conj(z2))/(2*i) + (z1*conj(z1))^2")
    assert rho == power_source(2).defining[0]
    assert rho.conj() == rho


def test_reject_fractional_exponent():
    with pytest.raises(PolySyntaxError, match="non-integer exponent") as info:
        parse_poly("z1^(1/2)")
    assert info.value.line == 1 and info.value.column >= 3


@pytest.mark.parametrize("text", ["z1 +", "conj(", "z0", "q1", "(z1", "z1 / z2", "2 ** 3"])
def test_syntax_errors_carry_position(text):
    with pytest.raises(PolySyntaxError) as info:
        parse_poly(text)
    assert info.value.line >= 1 and info.value.column >= 1


def test_error_position_on_second_line():
    with pytest.raises(PolySyntaxError) as info:
        parse_poly("z1 +\n  ?")
    assert (info.value.line, info.value.column) == (2, 3)


@pytest.mark.parametrize("text", [HEIS, "3/4*z1^2*conj(z2) - i*s1*t + u", "(1+i)^3*w2", "-z1 + 5"])
def test_print_parse_roundtrip(text):
    p = parse_poly(text)
    assert parse_poly(str(p)) == p


def test_canonical_print_is_deterministic():
    a = parse_poly("conj(z1) + z1^2 + z1")
    b = parse_poly("z1 + z1^2 + conj(z1)")
    assert str(a) == str(b)


# -- derivatives, evaluation, conjugation ------------------------------------------

def test_wirtinger_examples():
    assert parse_poly("z1*conj(z1)").derive(zbar(1)) == Poly.var(z(1))
    assert parse_poly("-(z2-conj(z2))/(2*i)").derive(z(2)) == Poly.const(GaussianRational(0, Fraction(1, 2)))
    assert parse_poly("7 + 3*i").derive(z(1)).is_zero()


def test_evaluate_examples(heis):
    p = parse_poly("z1*conj(z1)")
    assert p.evaluate(PointAssignment({z(1): GaussianRational(1, 1)})) == 2
    assert heis.defining[0].evaluate(PointAssignment({z(1): 0, z(2): 0})) == 0
    assert parse_poly("(z1*conj(z1))^2").evaluate(PointAssignment({z(1): Fraction(1, 2)})) == Fraction(1, 16)


def test_evaluate_unassigned():
    with pytest.raises(KeyError):
        parse_poly("z1*z2").evaluate(PointAssignment({z(1): 1}))


def test_conj_examples():
    assert parse_poly("z1^2").conj() == parse_poly("conj(z1)^2")
    assert parse_poly("i*z1*conj(z2)").conj() == parse_poly("-i*conj(z1)*z2")


def test_real_variable_rejects_complex_value():
    with pytest.raises(ValueError):
        PointAssignment({real_var("u", 1): GaussianRational(0, 1)})


def test_divide_exact():
    a = parse_poly("z1^2 - conj(z1)^2")
    d = parse_poly("z1 + conj(z1)")
    assert divide_exact(a, d) == parse_poly("z1 - conj(z1)")
    with pytest.raises(ValueError):
        divide_exact(parse_poly("z1 + 1"), parse_poly("z1 - 1"))


def test_rational_expr_equality():
    a = RationalExpr(parse_poly("2*z1"), parse_poly("2*z2"))
    b = RationalExpr(parse_poly("z1"), parse_poly("z2"))
    assert a.equals(b)


# -- properties -------------------------------------------------------------------

VARS = [z(1), zbar(1), z(2), zbar(2), real_var("s", 1)]
small = st.fractions(min_value=-5, max_value=5, max_denominator=4)
gauss = st.builds(GaussianRational, small, small)


@st.composite
def polys(draw, max_terms=4):
    out = Poly.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        term = Poly.const(draw(gauss))
        for v in VARS:
            e = draw(st.integers(0, 2))
            if e:
                term = term * Poly.var(v) ** e
        out = out + term
    return out


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), polys())
def test_ring_axioms(a, b, c):
    assert (a + b) + c == a + (b + c)
    assert (a * b) * c == a * (b * c)
    assert a * (b + c) == a * b + a * c
    assert a + b == b + a and a * b == b * a
    assert a - a == Poly.zero()


@settings(max_examples=60, deadline=None)
@given(polys(), st.sampled_from(VARS), st.sampled_from(VARS))
def test_derivatives_commute(p, u, v):
    assert p.derive(u).derive(v) == p.derive(v).derive(u)


@settings(max_examples=60, deadline=None)
@given(polys(), polys(), st.sampled_from(VARS))
def test_product_rule(a, b, v):
    assert (a * b).derive(v) == a.derive(v) * b + a * b.derive(v)


@settings(max_examples=60, deadline=None)
@given(polys(), st.sampled_from([1, 2]))
def test_conj_commutes_with_derivative(p, j):
    assert p.derive(z(j)).conj() == p.conj().derive(zbar(j))
    assert p.conj().conj() == p


@settings(max_examples=60, deadline=None)
@given(polys(), gauss, gauss, small)
def test_evaluate_respects_conjugation(p, a, b, s):
    at = PointAssignment({z(1): a, z(2): b, real_var("s", 1): s})
    assert p.conj().evaluate(at) == p.evaluate(at).conjugate()


@settings(max_examples=40, deadline=None)
@given(polys())
def test_roundtrip_property(p):
    assert parse_poly(str(p)) == p


@settings(max_examples=40, deadline=None)
@given(gauss, gauss)
def test_gaussian_field_axioms(a, b):
    assert (a * b).conjugate() == a.conjugate() * b.conjugate()
    if b != 0:
        assert (a / b) * b == a
