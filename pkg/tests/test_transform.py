import pytest
from hypothesis import given, settings, strategies as st

from jacobi.bracket import evaluate, sn_bracket
from jacobi.errors import NonInvertibleRho, SingularJacobian, TruncationOverflow
from jacobi.ring import (SuperPoly, TruncationPolicy, mul, parse, partial_theta, partial_u, power,
                         substitute, substitute_jets, total_derivative, truncate)
from jacobi.transform import (MiuraMap, ReciprocalMap, exp_derivation, exp_series, flow_rho,
                              miura_second_kind, miura_transform, miura_transform_functional,
                              reciprocal_functional, reciprocal_second_kind, reciprocal_transform)
from jacobi.varcalc import zero_test

from strategies import densities

Q1 = parse("1/2*u[1]*t[1]*t[1,1] - 1/8*t[1]*t[1,3]")

# ubar^2 = u^2 + u^1_xx with the exact inverse
SHEAR = MiuraMap({1: parse("u[1]", 2), 2: parse("u[2] + u[1,2]", 2)}, 2,
                 inverse={1: parse("u[1]", 2), 2: parse("u[2] - u[1,2]", 2)})


def upto(P, D):
    return all(zero_test(P.degree_part(d), P.n) for d in range(D + 1))


def miura_defect(P, m, fb, gb, policy=None):
    """P-bar(fbar, gbar) against P(f, g) with f = fbar(ubar(u)), pulled back."""
    n = m.n
    Pbar = miura_transform(P, m, policy)
    f, g = (substitute(h, m.images, policy, n) for h in (fb, gb))
    lhs = evaluate(Pbar, [fb, gb], n)
    rhs = miura_transform_functional(evaluate(P, [f, g], n), m, policy)
    out = lhs - rhs
    return truncate(out, policy.max_degree) if policy else out


@pytest.mark.parametrize("P", ["u[1,1]*z*t[1]", "z*t[2,1]", "u[2]*z*t[1]", "t[1]*t[2,1]",
                               "1/2*u[1]*t[1]*t[2,1] + u[2,1]*z*t[2]"])
def test_miura_defining_property_exact_inverse(P):
    P = parse(P, 2)
    d = miura_defect(P, SHEAR, parse("u[1]^2*u[2]", 2), parse("u[2]^3 + u[1]*u[2,1]^2", 2))
    assert zero_test(d, 2)


@pytest.mark.parametrize("image", ["u[1] + u[1,2]", "u[1] + u[1,1]^2", "u[1]^(-1)",
                                   "1/4*u[1]^(-1) + 1/4*u[1,2]*u[1]^(-1) - 3/16*u[1,1]^2*u[1]^(-2)"])
@pytest.mark.parametrize("P", ["u[1,1]*z*t[1]", "u[1]*z*t[1,1]", "1/2*u[1]*t[1]*t[1,1]"])
def test_miura_defining_property_series(image, P):
    D = 5
    pol = TruncationPolicy(D)
    d = miura_defect(parse(P), MiuraMap({1: parse(image)}), parse("u[1]^2"), parse("u[1]^3"), pol)
    assert upto(d, D)


def test_miura_first_kind_scalar():
    # g-bar = (d ubar / du)^2 = 4u^2 = 4 ubar, written in the new variable
    m = MiuraMap({1: parse("u[1]^2")})
    img = miura_transform(parse("1/2*t[1]*t[1,1]"), m)
    assert zero_test(img - parse("2*u[1]*t[1]*t[1,1]"))
    assert m.kind == "first"


def test_singular_miura_map():
    with pytest.raises(SingularJacobian):
        MiuraMap({1: parse("u[1,1]")})


@settings(max_examples=15)
@given(st.data())
def test_miura_preserves_brackets(data):
    P = data.draw(densities(n=2, max_degree=2, p=2, zeta=True, max_terms=2))
    Q = data.draw(densities(n=2, max_degree=2, p=data.draw(st.integers(0, 2)), zeta=True, max_terms=2))
    lhs = miura_transform(sn_bracket(P, Q, 2), SHEAR)
    rhs = sn_bracket(miura_transform(P, SHEAR), miura_transform(Q, SHEAR), 2)
    assert zero_test(lhs - rhs, 2)


def test_miura_functoriality():
    other = MiuraMap({1: parse("u[1] + u[2]^2", 2), 2: parse("u[2]", 2)}, 2,
                     inverse={1: parse("u[1] - u[2]^2", 2), 2: parse("u[2]", 2)})
    images = {i: substitute(other.images[i], SHEAR.images, None, 2) for i in (1, 2)}
    inverse = {i: substitute(SHEAR.inverse[i], other.inverse, None, 2) for i in (1, 2)}
    both = MiuraMap(images, 2, inverse=inverse)
    P = parse("1/2*u[1]*t[1]*t[2,1] + u[2]*z*t[1] + t[1]*t[1,1]", 2)
    step = miura_transform(miura_transform(P, SHEAR), other)
    assert zero_test(step - miura_transform(P, both), 2)


def test_miura_second_kind_dual_paths():
    pol = TruncationPolicy(5)
    X = parse("u[1,2]*t[1]")
    m = MiuraMap({1: exp_derivation(X, parse("u[1]"), pol)})
    for P in (Q1, parse("u[1,1]*z*t[1] + 1/2*u[1]*t[1]*t[1,1]")):
        a = miura_second_kind(P, X, pol)
        b = truncate(miura_transform(P, m, pol), 5)
        assert upto(a - b, 5)


def test_commuting_generators_compose():
    pol = TruncationPolicy(6)
    X1, X2 = parse("u[1,2]*t[1]"), parse("u[1,4]*t[1]")
    assert zero_test(sn_bracket(X1, X2))
    step = miura_second_kind(miura_second_kind(Q1, X2, pol), X1, pol)
    assert upto(step - miura_second_kind(Q1, X1 + X2, pol), 6)


def test_second_kind_needs_policy():
    with pytest.raises(TruncationOverflow):
        miura_second_kind(Q1, parse("u[1,2]*t[1]"), None)


# ---------------------------------------------------------------- reciprocal

def x_jets_of_tilde(rho, order, pol):
    """x-jets of the old variable in terms of tilde derivatives d/dx~ = rho^{-1} d/dx."""
    inv = power(rho, -1, pol)
    J = {(1, 0): parse("u[1]")}
    for s in range(1, order + 1):
        J[(1, s)] = truncate(mul(inv, total_derivative(J[(1, s - 1)], 1)), pol.max_degree)
    return J


@pytest.mark.parametrize("rho", ["u[1]^(1/2)", "u[1]^2", "u[1] + u[1,1]^2"])
def test_reciprocal_defining_property(rho):
    D = 6
    pol = TruncationPolicy(D)
    rho = parse(rho)
    r = ReciprocalMap(rho)
    F = [parse("u[1]^3"), parse("u[1]*u[1,1]^2")]
    for P in (Q1, parse("1/2*u[1]*t[1]*t[1,1]")):
        lhs = evaluate(reciprocal_transform(P, r, pol), F)
        Jx = x_jets_of_tilde(rho, 6, pol)
        G = [truncate(mul(rho, substitute_jets(f, lambda i, s: Jx[(i, s)], pol)), D) for f in F]
        rhs = reciprocal_functional(evaluate(P, G), r, pol)
        assert upto(truncate(lhs - rhs, D), D)


def test_reciprocal_round_trip():
    r = ReciprocalMap(parse("u[1]^2"))
    back = ReciprocalMap(parse("u[1]^(-2)"))
    for P in (Q1, parse("u[1,1]*z*t[1]"), parse("u[1]^3 + u[1,1]^2")):
        assert zero_test(reciprocal_transform(reciprocal_transform(P, r), back) - P)
    f = parse("u[1]*u[1,1]^2")
    assert reciprocal_functional(reciprocal_functional(f, r), back) == f


def test_reciprocal_preserves_brackets():
    D = 5
    pol = TruncationPolicy(D)
    r = ReciprocalMap(parse("u[1]^(1/2) + u[1,1]^2"))
    P, Q = Q1, parse("u[1]^2*t[1]*t[1,1] + u[1]*u[1,1]*z*t[1]")
    lhs = truncate(reciprocal_transform(sn_bracket(P, Q), r, pol), D)
    rhs = truncate(sn_bracket(reciprocal_transform(P, r, pol), reciprocal_transform(Q, r, pol)), D)
    assert upto(lhs - rhs, D)


@settings(max_examples=25)
@given(st.data())
def test_degree_zero_conformal_change(data):
    n = data.draw(st.integers(1, 3))
    P = data.draw(densities(n=n, max_degree=0, p=2, zeta=False, max_terms=3))
    X = data.draw(densities(n=n, max_degree=0, p=1, zeta=False, max_terms=2))
    rho = parse(data.draw(st.sampled_from(["u[1]^2", "u[1]^(-1)", "3*u[1]"])), n)
    img = reciprocal_transform(P + parse("z", n) * X, ReciprocalMap(rho, n))
    # alpha~ = rho alpha, X~ = rho X + alpha^{ij} d_j rho
    alpha_d_rho = SuperPoly({}, n)
    for j in range(1, n + 1):
        # theta_i alpha^{ij} d_j rho = -partial_{theta_j}(P) d_j rho
        alpha_d_rho = alpha_d_rho - mul(partial_theta(P, j, 0), partial_u(rho, j, 0))
    expected = mul(rho, P) + parse("z", n) * (mul(rho, X) + alpha_d_rho)
    assert zero_test(img - expected, n)


def test_non_invertible_rho():
    with pytest.raises(NonInvertibleRho):
        ReciprocalMap(parse("u[1] + u[1]^2"))


def test_reciprocal_second_kind_dual_paths():
    D = 6
    pol = TruncationPolicy(D)
    for f in ("u[1,1]^2", "u[1]*u[1,2]", "u[1,1]"):
        f = parse(f)
        a = reciprocal_second_kind(Q1, f, pol)
        b = truncate(reciprocal_transform(Q1, ReciprocalMap(flow_rho(f, pol)), pol), D)
        assert upto(a - b, D)


def test_flow_rho_is_exp_for_point_free_jets():
    pol = TruncationPolicy(6)
    f = parse("u[1,1]")
    # f depends on jets, so rho differs from e^f beyond the first order
    assert truncate(flow_rho(f, pol) - exp_series(f, pol), 1) == SuperPoly()
    assert flow_rho(f, pol) != exp_series(f, pol)


@pytest.mark.parametrize("f", ["u[2]^2", "u[2]*u[1]^2", "u[2,1]^2*u[1]"])
def test_energy_under_miura_map(f):
    # E(f) = E-bar(f) + sum u^{i,a} (-d)^s (d ubar^j / d u^{i,s+a}) delta-bar_j f
    from jacobi.varcalc import energy, variational_derivative
    n = 2
    f = parse(f, n)
    fbar = substitute(f, SHEAR.inverse, None, n)
    Ebar = substitute(energy(fbar, n), SHEAR.images, None, n)
    dbar = [substitute(variational_derivative(fbar, j, n), SHEAR.images, None, n) for j in (1, 2)]
    corr = SuperPoly({}, n)
    for i in (1, 2):
        for j in (1, 2):
            for a in range(1, 4):
                for s in range(4):
                    t = mul(partial_u(SHEAR.images[j], i, s + a), dbar[j - 1])
                    for _ in range(s):
                        t = -total_derivative(t, n)
                    corr = corr + mul(SuperPoly.u(i, a, n), t)
    assert zero_test(energy(f, n) - Ebar - corr, n)
