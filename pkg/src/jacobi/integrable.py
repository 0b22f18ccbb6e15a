"""Hamiltonian flows and the Lenard-Magri recursion for bi-Jacobi structures."""
from __future__ import annotations

from dataclasses import dataclass, field

from .bracket import evaluate, sn_bracket
from .errors import NonLocalInput, NotExact, NotHydrodynamic
from .ring import SuperPoly, add_all, mul, partial_theta, to_text
from .varcalc import (Functional, density_of, flow_components, homotopy_reconstruct,
                      invert_total_derivative, locality_witness, zero_test)


@dataclass
class Flow:
    """[P, H] together with its locality verdict and canonical local density."""
    density: SuperPoly
    local: bool
    normal_form: SuperPoly | None = None

    def components(self, n=None):
        if self.normal_form is None:
            raise NonLocalInput("flow is not local")
        return flow_components(self.normal_form, n)


def hamiltonian_flow(P, H, n=None) -> Flow:
    """[P, H]; local iff the structure flow of P preserves H."""
    P, H = density_of(P), density_of(H)
    n = max(n or 1, P.n, H.n)
    X = sn_bracket(P, H, n)
    if not X.terms:
        return Flow(X, True, X)
    w = locality_witness(X, n)
    return Flow(X, w.local, w.density if w.local else None)


def constant_metric(P, n=None):
    """eta^{ij} for P = 1/2 theta_i eta^{ij} theta_j^1 (P given by any local density)."""
    from .geometry import extract_hydro
    P = density_of(P)
    n = max(n or 1, P.n)
    h = extract_hydro(P, n)
    if any(x.free_symbols for x in h.g) or not h.V.is_zero_matrix:
        raise NotHydrodynamic("first structure must have a constant metric and no structure flow")
    if not zero_test(P - _constant_density(h.g, n), n):
        raise NotHydrodynamic("first structure has higher-order terms")
    return h.g


def _constant_density(eta, n):
    from fractions import Fraction
    parts = []
    for i in range(n):
        for j in range(n):
            if eta[i, j] != 0:
                parts.append(mul(SuperPoly.theta(i + 1, 0, n), SuperPoly.theta(j + 1, 1, n))
                             * (Fraction(int(eta[i, j].p), int(eta[i, j].q)) / 2))
    return add_all(parts, n)


def lenard_step(P, Q, H, n=None) -> SuperPoly:
    """H' with [P, H'] = [Q, H] for P = 1/2 theta_i eta^{ij} theta_j^1.

    [P, F] ~ -eta^{ij} d(delta_j F) theta_i, so delta_j H' is recovered by
    inverting d on -eta_{ji} X^i and then reconstructed by the homotopy
    formula.  The additive Casimir is fixed to zero.
    """
    P, Q, H = density_of(P), density_of(Q), density_of(H)
    n = max(n or 1, P.n, Q.n, H.n)
    eta = constant_metric(P, n)
    flow = hamiltonian_flow(Q, H, n)
    if not flow.local:
        raise NonLocalInput("[Q, H] is not local")
    X = flow.components(n)
    eta_inv = eta.inv()
    grads = []
    for j in range(n):
        rhs = add_all([X[i] * -_frac(eta_inv[j, i]) for i in range(n) if eta_inv[j, i] != 0], n)
        grads.append(invert_total_derivative(rhs, n) if rhs.terms else SuperPoly({}, n))
    Hn = homotopy_reconstruct(grads, n)
    if not zero_test(sn_bracket(P, Hn, n) - flow.density, n):
        raise NotExact("recursion step failed verification")
    return Hn


def _frac(x):
    from fractions import Fraction
    return Fraction(int(x.p), int(x.q))


@dataclass
class Hierarchy:
    P: SuperPoly
    Q: SuperPoly
    hamiltonians: list = field(default_factory=list)
    flows: list = field(default_factory=list)
    n: int = 1

    @classmethod
    def generate(cls, P, Q, H0, steps, n=None):
        P, Q, H0 = density_of(P), density_of(Q), density_of(H0)
        n = max(n or 1, P.n, Q.n, H0.n)
        hs = [H0]
        for _ in range(steps):
            hs.append(lenard_step(P, Q, hs[-1], n))
        flows = [hamiltonian_flow(P, h, n).normal_form for h in hs[1:]]
        return cls(P, Q, hs, flows, n)

    def to_json(self):
        return {"n": self.n,
                "hamiltonians": [to_text(h) for h in self.hamiltonians],
                "flows": [[to_text(c) for c in flow_components(f, self.n)] for f in self.flows]}


@dataclass
class InvolutionReport:
    ok: bool
    failures: list

    def __bool__(self):
        return self.ok


def verify_involution(h: Hierarchy) -> InvolutionReport:
    """P(H_k, H_l) = Q(H_k, H_l) = 0, [X_k, X_l] = 0 and each recursion step."""
    n = h.n
    fails = []
    hs = h.hamiltonians
    for k in range(len(hs) - 1):
        if not zero_test(sn_bracket(h.P, hs[k + 1], n) - sn_bracket(h.Q, hs[k], n), n):
            fails.append(("recursion", k))
    for k in range(len(hs)):
        for l in range(k + 1, len(hs)):
            for name, S in (("P", h.P), ("Q", h.Q)):
                if not zero_test(evaluate(S, [hs[k], hs[l]], n), n):
                    fails.append((name, k, l))
    for k in range(len(h.flows)):
        for l in range(k + 1, len(h.flows)):
            if not zero_test(sn_bracket(h.flows[k], h.flows[l], n), n):
                fails.append(("flows", k + 1, l + 1))
    return InvolutionReport(not fails, fails)
