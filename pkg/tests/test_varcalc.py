import pytest
from hypothesis import given, settings, strategies as st

from jacobi.errors import NotExact
from jacobi.ring import SuperPoly, parse, total_derivative
from jacobi.varcalc import (Functional, galilean, homotopy_reconstruct, invert_total_derivative,
                            is_total_derivative, local_normal_form, locality_witness,
                            variational_derivative, zero_test, zero_test_report)

from identities import first_identities, second_identities
from strategies import brute_force_is_zero, densities


@settings(max_examples=40)
@given(densities(max_degree=5, max_terms=2), st.data())
def test_operator_identities(f, data):
    g = data.draw(densities(n=f.n, max_degree=3, max_terms=2))
    assert first_identities(f, g, f.n, alphas=(1,), ss=(0, 1)) == []
    assert second_identities(f, f.n, ts=(0, 1)) == []


def test_variational_derivative_kdv_density():
    f = parse("u[1]^3 + 1/2*u[1,1]^2")
    assert variational_derivative(f, 1) == parse("3*u[1]^2 - u[1,2]")


def test_galilean_example_is_zero():
    r = zero_test_report(parse("u[1,1]*t[1]"))
    assert r.is_zero and r.constant == 1
    assert zero_test(galilean(3), 3)


def test_nonzero_examples():
    assert not zero_test(parse("u[1,1]*t[1,1]"))
    assert not zero_test(parse("u[1]"))
    assert not zero_test(parse("t[1]*t[1,1]"))
    assert not zero_test(parse("z*t[1]"))
    # zeta theta^1 = d(zeta theta) + u_x theta theta
    assert zero_test(parse("z*t[1,1]"))


@settings(max_examples=60)
@given(densities(max_degree=4, p=2, zeta=True, n_max=2))
def test_total_derivatives_are_zero(f):
    assert zero_test(total_derivative(f, f.n), f.n)


@settings(max_examples=40)
@given(st.data())
def test_zero_test_agrees_with_linear_algebra(data):
    n = data.draw(st.integers(1, 2))
    p = data.draw(st.integers(0, 2))
    P = data.draw(densities(n=n, max_degree=4, p=p, zeta=True))
    if data.draw(st.booleans()):
        P = total_derivative(data.draw(densities(n=n, max_degree=3, p=p, zeta=True)), n)
    assert zero_test(P, n) == brute_force_is_zero(P, n)


@settings(max_examples=40)
@given(densities(max_degree=4, p=1, zeta=True, n_max=2), st.data())
def test_equivalence_is_additive(f, data):
    g = data.draw(densities(n=f.n, max_degree=4, p=1, zeta=True))
    n = f.n
    if zero_test(f - g, n):
        assert zero_test(g - f, n)
    assert zero_test((f + total_derivative(g, n)) - f, n)


def test_invert_total_derivative():
    f = parse("u[1]^2*u[1,2] + 2*u[1]*u[1,1]^2")
    assert total_derivative(invert_total_derivative(f)) == f
    assert is_total_derivative(parse("u[1,1]*u[1,2]"))
    with pytest.raises(NotExact):
        invert_total_derivative(parse("u[1]*u[1,2]^2"))


@settings(max_examples=40)
@given(densities(max_degree=4, max_terms=3, n_max=3))
def test_homotopy_inverts_variational_derivative(f):
    n = f.n
    f = f - SuperPoly.const(f.constant_term(), n)
    grads = [variational_derivative(f, i, n) for i in range(1, n + 1)]
    H = homotopy_reconstruct(grads, n)
    assert zero_test(H - f, n)


def test_locality_witness():
    w = locality_witness(parse("z*u[1,1]*t[1]*t[1,1]"))
    assert not w.local
    P = parse("z*u[1,1]*t[1] + z*u[1]*t[1,1] + t[1]*t[1,1]")
    w = locality_witness(P)
    assert w.local and not w.density.has_zeta()
    assert zero_test(w.density - P)


def test_local_normal_form_of_bivector():
    P = parse("1/2*t[1]*t[1,1]")
    assert local_normal_form(P) == P
    Q = P + total_derivative(parse("u[1]*t[1]*t[1,1]"))
    assert local_normal_form(Q) == P


def test_functional_equality():
    assert Functional(parse("u[1]*u[1,2]")) == Functional(parse("-u[1,1]^2"))
    assert Functional(parse("u[1]*u[1,2]")) != Functional(parse("u[1,1]^2"))
