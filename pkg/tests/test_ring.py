from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from jacobi.errors import ParseError, TruncationOverflow, UnknownVariable
from jacobi.ring import (SuperPoly, TruncationPolicy, degree_decompose, from_json, mul, parse,
                         partial_theta, partial_u, partial_zeta, power, substitute, to_json, to_text,
                         total_derivative, truncate)

from strategies import densities, monomials


def test_parse_examples():
    P = parse("1/2 * t[1,0] * t[1,1]")
    assert P == mul(SuperPoly.theta(1, 0), SuperPoly.theta(1, 1)) * Fraction(1, 2)
    assert parse("u[1]^(3/2)") == SuperPoly.u(1, 0, exp=Fraction(3, 2))
    assert not parse("t[1]*t[1]").terms


def test_parse_errors():
    with pytest.raises(ParseError) as exc:
        parse("u[1,")
    assert "column" in str(exc.value)
    with pytest.raises(UnknownVariable):
        parse("w[1]")


def test_total_derivative_of_zeta():
    assert total_derivative(parse("z")) == -parse("u[1,1]*t[1]")
    assert total_derivative(parse("z", 2), 2) == -parse("u[1,1]*t[1] + u[2,1]*t[2]", 2)


def test_derivative_operator_in_grammar():
    assert parse("d(u[1]^2)") == parse("2*u[1]*u[1,1]")


def test_fractional_powers():
    f = parse("u[1]^(1/2)")
    assert mul(f, f) == parse("u[1]")
    assert power(parse("u[1]^2"), Fraction(-1, 2)) == parse("u[1]^(-1)")


def test_series_power_needs_policy():
    with pytest.raises(TruncationOverflow):
        power(parse("u[1] + u[1,1]"), Fraction(1, 2))
    r = power(parse("u[1] + u[1,1]"), Fraction(1, 2), TruncationPolicy(3))
    assert truncate(mul(r, r), 3) == parse("u[1] + u[1,1]")


def test_truncation_and_degrees():
    f = parse("u[1] + u[1,1] + u[1,2]*t[1,1]")
    assert f.degrees() == [0, 1, 3]
    assert truncate(f, 1) == parse("u[1] + u[1,1]")
    assert sum((c for _, c in degree_decompose(f)), SuperPoly()) == f


def test_substitute_chain_rule():
    f = parse("u[1,1]^2")
    img = substitute(f, {1: parse("u[1]^2")})
    assert img == parse("4*u[1]^2*u[1,1]^2")


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_odd_supercommutativity(data):
    n = data.draw(st.integers(1, 3))
    p, q = data.draw(st.integers(0, 3)), data.draw(st.integers(0, 3))
    a = data.draw(monomials(n, 4, p, zeta=True))
    b = data.draw(monomials(n, 4, q, zeta=True))
    assert mul(a, b) == mul(b, a) * (-1) ** (p * q)


@settings(max_examples=60, deadline=None)
@given(densities(max_degree=4, p=1, zeta=True), densities(max_degree=4, p=2, zeta=True))
def test_total_derivative_is_even_derivation(f, g):
    n = max(f.n, g.n)
    lhs = total_derivative(mul(f, g), n)
    rhs = mul(total_derivative(f, n), g) + mul(f, total_derivative(g, n))
    assert lhs == rhs


@settings(max_examples=60, deadline=None)
@given(densities(max_degree=4, p=3, zeta=True, n_max=2))
def test_odd_partials_anticommute(f):
    n = f.n
    a = lambda h: partial_theta(h, 1, 0)
    b = lambda h: partial_theta(h, n, 1)
    assert a(b(f)) == -b(a(f))
    assert a(partial_zeta(f)) == -partial_zeta(a(f))
    assert partial_u(a(f), 1, 0) == a(partial_u(f, 1, 0))


@settings(max_examples=80, deadline=None)
@given(densities(max_degree=5, p=2, zeta=True))
def test_print_parse_round_trip(f):
    assert parse(to_text(f), f.n) == f
    assert from_json(to_json(f), f.n) == f


def test_canonical_text_is_stable():
    text = to_text(parse("t[1,1]*t[1]*u[1,1] + z*t[1]"))
    assert text == to_text(parse(text))
    assert text.index("z") < text.index("t[1,0]")
