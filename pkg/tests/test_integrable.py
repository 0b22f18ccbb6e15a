import pytest

from jacobi.bracket import evaluate, sn_bracket
from jacobi.errors import NonLocalInput, NotHydrodynamic
from jacobi.integrable import (Hierarchy, constant_metric, hamiltonian_flow, lenard_step,
                               verify_involution)
from jacobi.ring import parse
from jacobi.varcalc import Functional, flow_components, zero_test
from jacobi.catalog import conservation_flux

H0 = parse("1/2*u[1]^2")


@pytest.fixture(scope="module")
def hierarchy(kdv):
    return Hierarchy.generate(kdv["Q0"], kdv["Q1"], H0, 3)


def test_first_lenard_step(kdv):
    H1 = lenard_step(kdv["Q0"], kdv["Q1"], H0)
    assert Functional(H1) == Functional(parse("1/4*u[1]^3 - 1/8*u[1]*u[1,2]"))


def test_each_step_satisfies_recursion(kdv, hierarchy):
    hs = hierarchy.hamiltonians
    assert len(hs) == 4
    for k in range(3):
        assert zero_test(sn_bracket(kdv["Q0"], hs[k + 1]) - sn_bracket(kdv["Q1"], hs[k]))


def test_involution(hierarchy):
    rep = verify_involution(hierarchy)
    assert rep, rep.failures


def test_kdv_flow(hierarchy):
    # [Q0, H1] = (-3/2 u u_x + 1/4 u_xxx) theta, the KdV equation up to scaling of t
    X = hierarchy.flows[0]
    assert flow_components(X) == [parse("-3/2*u[1]*u[1,1] + 1/4*u[1,3]")]


def test_flow_of_kdv_hamiltonian(kdv):
    X = hamiltonian_flow(kdv["Q0"], parse("u[1]^3 + 1/2*u[1,1]^2")).normal_form
    assert X == parse("-6*u[1]*u[1,1]*t[1] + u[1,3]*t[1]")


def test_flux_of_conserved_density(kdv):
    X = hamiltonian_flow(kdv["Q0"], parse("u[1]^3 + 1/2*u[1,1]^2")).normal_form
    flux = conservation_flux(X, parse("u[1]^2"))
    # the flow above is u_t = -(6 u u_x - u_xxx), so the flux is minus 4u^3 - 2uu_xx + u_x^2
    assert flux == parse("-4*u[1]^3 + 2*u[1]*u[1,2] - u[1,1]^2")


def test_locality_of_flows_of_nonlocal_structure(kdv):
    # Q3 carries a structure flow; Hamiltonians it preserves give local flows
    assert hamiltonian_flow(kdv["Q3"], parse("u[1]^2")).local
    f = hamiltonian_flow(kdv["Q3"], parse("u[1]^3"))
    assert not f.local
    with pytest.raises(NonLocalInput):
        f.components()


def test_casimir_of_constant_structure(kdv):
    assert zero_test(hamiltonian_flow(kdv["Q0"], parse("u[1]")).density)
    assert not zero_test(evaluate(kdv["Q1"], [parse("u[1]^2"), parse("u[1]^3")]))


def test_constant_metric(kdv):
    assert constant_metric(kdv["Q0"])[0, 0] == 1
    with pytest.raises(NotHydrodynamic):
        constant_metric(kdv["Q1"])


def test_hierarchy_json(hierarchy):
    data = hierarchy.to_json()
    assert data["n"] == 1 and len(data["hamiltonians"]) == 4 and len(data["flows"]) == 3
