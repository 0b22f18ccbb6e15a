"""Hydrodynamic-type structures: metrics, curvature, locality and charges.

Tensors live in sympy as rational functions of the base coordinates
u1..un (symbol ``u{i}`` stands for u^{i,0}).  Upper indices come first in
the nested lists: ``gamma[i][j][k]`` is Gamma^{ij}_k and ``V[i, k]`` is V^i_k.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from itertools import product

import sympy as sp
from gmpy2 import mpq

from .bracket import sn_bracket, split_zeta
from .errors import (DegenerateMetric, MissingCoordinates, NonConstantCharge, NonLocalInput,
                     NotConserved, NotExact, NotHydrodynamic, NotRepresentable, NotSemisimple)
from .ring import (SuperPoly, TruncationPolicy, add_all, mul, partial_theta, partial_u,
                   partial_zeta, truncate)
from .varcalc import (LocalityWitness, density_of, invert_total_derivative, local_normal_form,
                      locality_witness, odd_variational_derivative, zero_test, zero_test_report)


# ---------------------------------------------------------------- conversion

def coords(n):
    return sp.symbols(" ".join(f"u{i}" for i in range(1, n + 1)), positive=True, seq=True)


def _q(c):
    c = mpq(c)
    return sp.Rational(int(c.numerator), int(c.denominator))


def to_sympy(f: SuperPoly, n=None):
    """A super-degree 0, jet-free polynomial as a sympy expression."""
    n = max(n or 1, f.n)
    us = coords(n)
    out = sp.Integer(0)
    for (ev, od), c in f.terms.items():
        if od:
            raise NotRepresentable("odd variables have no sympy image")
        term = _q(c)
        for (i, s), e in ev:
            if s != 0:
                raise NotRepresentable(f"jet variable u[{i},{s}] in a point function")
            term *= us[i - 1] ** sp.Rational(Fraction(e).numerator, Fraction(e).denominator)
        out += term
    return out


def from_sympy(expr, n) -> SuperPoly:
    """Inverse of to_sympy; only sums of monomials with rational exponents."""
    us = coords(n)
    index = {u: i + 1 for i, u in enumerate(us)}
    expr = sp.expand(sp.sympify(expr))
    terms = {}
    for t in sp.Add.make_args(expr):
        if t == 0:
            continue
        coeff, rest = t.as_coeff_Mul()
        if not coeff.is_Rational:
            raise NotRepresentable(f"coefficient {coeff} is not rational")
        ev = []
        for fct in sp.Mul.make_args(rest):
            if fct == 1:
                continue
            base, e = fct.as_base_exp()
            if base not in index or not e.is_Rational:
                raise NotRepresentable(f"factor {fct} is not a monomial")
            ev.append(((index[base], 0), Fraction(int(e.p), int(e.q))))
        ev.sort()
        mono = (tuple((k, int(e) if e.denominator == 1 else e) for k, e in ev), ())
        terms[mono] = terms.get(mono, mpq(0)) + mpq(int(coeff.p), int(coeff.q))
    return SuperPoly.from_terms(terms.items(), n)


def _simp(x):
    return sp.simplify(sp.cancel(sp.together(x)))


def _is_zero(x):
    return _simp(x) == 0


# ---------------------------------------------------------------- structures

@dataclass
class HydroStructure:
    """P0 = 1/2 (g^{ij} th_i th_j' + Gamma^{ij}_k u^{k,1} th_i th_j), X = V^i_k u^{k,1} th_i."""
    n: int
    g: sp.Matrix
    gamma: list
    V: sp.Matrix = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        self.g = sp.Matrix(self.g)
        if self.V is None:
            self.V = sp.zeros(self.n, self.n)
        self.V = sp.Matrix(self.V)
        if self.g.shape != (self.n, self.n) or self.V.shape != (self.n, self.n):
            raise ValueError("tensor shapes do not match n")

    @property
    def u(self):
        return coords(self.n)

    def skew_condition(self) -> bool:
        """g symmetric and Gamma^{ij}_k + Gamma^{ji}_k = dg^{ij}/du^k."""
        n, u = self.n, self.u
        if not all(_is_zero(self.g[i, j] - self.g[j, i]) for i in range(n) for j in range(n)):
            return False
        return all(_is_zero(self.gamma[i][j][k] + self.gamma[j][i][k] - sp.diff(self.g[i, j], u[k]))
                   for i, j, k in product(range(n), repeat=3))

    @cached_property
    def g_lower(self):
        det = _simp(self.g.det())
        if det == 0:
            raise DegenerateMetric("det g^{ij} vanishes identically")
        return self.g.inv().applyfunc(_simp)

    @cached_property
    def christoffel(self):
        """Gamma^j_{kl} = -g_{ki} Gamma^{ij}_l read off the structure; [j][k][l]."""
        n, gl = self.n, self.g_lower
        return [[[_simp(-sum(gl[k, i] * self.gamma[i][j][l] for i in range(n)))
                  for l in range(n)] for k in range(n)] for j in range(n)]

    @cached_property
    def levi_civita(self):
        """Christoffel symbols of g_{ij}; [i][k][l] = Gamma^i_{kl}."""
        n, u, gl, g = self.n, self.u, self.g_lower, self.g
        out = [[[None] * n for _ in range(n)] for _ in range(n)]
        for i, k, l in product(range(n), repeat=3):
            out[i][k][l] = _simp(sum(g[i, m] * (sp.diff(gl[m, k], u[l]) + sp.diff(gl[m, l], u[k])
                                                 - sp.diff(gl[k, l], u[m])) for m in range(n)) / 2)
        return out

    @cached_property
    def V_lower(self):
        return (self.g_lower * self.V).applyfunc(_simp)

    def covariant_hessian(self, f):
        """nabla_k nabla_l f (lower indices)."""
        n, u, G = self.n, self.u, self.levi_civita
        return sp.Matrix(n, n, lambda k, l: _simp(sp.diff(f, u[k], u[l])
                                                   - sum(G[m][k][l] * sp.diff(f, u[m]) for m in range(n))))

    def sq_gradient(self, f):
        n, u = self.n, self.u
        return _simp(sum(self.g[i, j] * sp.diff(f, u[i]) * sp.diff(f, u[j])
                         for i in range(n) for j in range(n)))

    def to_json(self):
        n = self.n
        return {"n": n,
                "g": [[str(self.g[i, j]) for j in range(n)] for i in range(n)],
                "gamma": [[[str(self.gamma[i][j][k]) for k in range(n)] for j in range(n)] for i in range(n)],
                "V": [[str(self.V[i, k]) for k in range(n)] for i in range(n)]}

    @classmethod
    def from_json(cls, data):
        n = int(data["n"])
        loc = {f"u{i}": s for i, s in enumerate(coords(n), 1)}
        conv = lambda s: sp.sympify(s, locals=loc)
        g = sp.Matrix([[conv(x) for x in row] for row in data["g"]])
        gamma = [[[conv(x) for x in r2] for r2 in r1] for r1 in data["gamma"]]
        V = sp.Matrix([[conv(x) for x in row] for row in data["V"]]) if "V" in data else None
        return cls(n, g, gamma, V)


def levi_civita_structure(g, V=None) -> HydroStructure:
    """Hydrodynamic structure whose Gamma^{ij}_k comes from the Levi-Civita connection of g."""
    g = sp.Matrix(g)
    n = g.shape[0]
    h = HydroStructure(n, g, [[[0] * n for _ in range(n)] for _ in range(n)], V)
    G = h.levi_civita
    gamma = [[[_simp(-sum(g[i, s] * G[j][s][k] for s in range(n))) for k in range(n)]
              for j in range(n)] for i in range(n)]
    return HydroStructure(n, g, gamma, V)


# ---------------------------------------------------------------- extraction

def _hydro_parts(P, n=None):
    P = density_of(P)
    n = max(n or 1, P.n)
    if P.super_degree() != 2:
        raise NotHydrodynamic("a bivector is required")
    P0, X = split_zeta(P, n)
    if P0.degree_part(0).terms and not zero_test(P0.degree_part(0), n):
        raise NotHydrodynamic("nonzero degree-zero part")
    if X.degree_part(0).terms:
        raise NotHydrodynamic("structure flow has a degree-zero part")
    return P0, X, n


def extract_hydro(P, n=None) -> HydroStructure:
    """Read g, Gamma and V off the degree-one part of P ~ P0 + zeta X."""
    P0, X, n = _hydro_parts(P, n)
    P1 = P0.degree_part(1)
    g = sp.zeros(n, n)
    gamma = [[[sp.Integer(0)] * n for _ in range(n)] for _ in range(n)]
    V = sp.zeros(n, n)
    for i in range(1, n + 1):
        di = odd_variational_derivative(P1, i, n)
        Xi = odd_variational_derivative(X.degree_part(1), i, n)
        for j in range(1, n + 1):
            g[i - 1, j - 1] = to_sympy(partial_theta(di, j, 1), n)
            c0 = partial_theta(di, j, 0)
            for k in range(1, n + 1):
                gamma[i - 1][j - 1][k - 1] = to_sympy(partial_u(c0, k, 1), n)
        for k in range(1, n + 1):
            V[i - 1, k - 1] = to_sympy(partial_u(Xi, k, 1), n)
    if _simp(g.det()) == 0:
        raise DegenerateMetric("det g^{ij} vanishes identically")
    return HydroStructure(n, g, gamma, V)


def hydro_bivector(h: HydroStructure) -> SuperPoly:
    """Density 1/2(g th th' + Gamma u' th th) + zeta V u' th; inverse of extract_hydro."""
    if not h.skew_condition():
        raise ValueError("Gamma^{ij}_k + Gamma^{ji}_k must equal dg^{ij}/du^k")
    n = h.n
    th = lambda i, s=0: SuperPoly.theta(i, s, n)
    ux = lambda k: SuperPoly.u(k, 1, n)
    parts = []
    for i, j in product(range(1, n + 1), repeat=2):
        gij = from_sympy(h.g[i - 1, j - 1], n)
        if gij.terms:
            parts.append(mul(gij, mul(th(i), th(j, 1))) * Fraction(1, 2))
        for k in range(1, n + 1):
            c = from_sympy(h.gamma[i - 1][j - 1][k - 1], n)
            if c.terms:
                parts.append(mul(mul(c, ux(k)), mul(th(i), th(j))) * Fraction(1, 2))
    z = SuperPoly.zeta(n)
    for i, k in product(range(1, n + 1), repeat=2):
        v = from_sympy(h.V[i - 1, k - 1], n)
        if v.terms:
            parts.append(mul(z, mul(mul(v, ux(k)), th(i))))
    return add_all(parts, n)


# ---------------------------------------------------------------- curvature

@dataclass
class CurvatureTensors:
    riemann: dict      # (i, j, k, l) -> R_{ijkl}
    ricci: sp.Matrix
    scalar: object
    weyl: dict
    cotton: dict

    def is_flat(self):
        return all(v == 0 for v in self.riemann.values())


def riemann_lower(h: HydroStructure) -> dict:
    """R_{ijkl} = g_{im} R^m_{jkl}, R^i_{jkl} = d_k G^i_{lj} - d_l G^i_{kj} + G^i_{km} G^m_{lj} - G^i_{lm} G^m_{kj}."""
    n, u, G, gl = h.n, h.u, h.levi_civita, h.g_lower
    Rup = {}
    for i, j, k, l in product(range(n), repeat=4):
        Rup[i, j, k, l] = (sp.diff(G[i][l][j], u[k]) - sp.diff(G[i][k][j], u[l])
                           + sum(G[i][k][m] * G[m][l][j] - G[i][l][m] * G[m][k][j] for m in range(n)))
    return {(i, j, k, l): _simp(sum(gl[i, m] * Rup[m, j, k, l] for m in range(n)))
            for i, j, k, l in product(range(n), repeat=4)}


def curvature(h: HydroStructure) -> CurvatureTensors:
    n, g, gl, G, u = h.n, h.g, h.g_lower, h.levi_civita, h.u
    R = riemann_lower(h)
    # Ric_{jl} = R^i_{jil}
    ric = sp.Matrix(n, n, lambda j, l: _simp(sum(g[i, m] * R[m, j, i, l] for i in range(n) for m in range(n))))
    scal = _simp(sum(g[j, l] * ric[j, l] for j in range(n) for l in range(n)))
    weyl, cotton = {}, {}
    if n >= 3:
        S = ((ric - scal * gl / (2 * (n - 1))) / (n - 2)).applyfunc(_simp)  # Schouten tensor
        for i, j, k, l in product(range(n), repeat=4):
            weyl[i, j, k, l] = _simp(R[i, j, k, l] - (gl[i, k] * S[j, l] + gl[j, l] * S[i, k]
                                                       - gl[i, l] * S[j, k] - gl[j, k] * S[i, l]))

        def nabla_S(a, b, c):  # nabla_c S_{ab}
            return (sp.diff(S[a, b], u[c]) - sum(G[m][c][a] * S[m, b] + G[m][c][b] * S[a, m]
                                                  for m in range(n)))
        for i, j, k in product(range(n), repeat=3):
            cotton[i, j, k] = _simp(nabla_S(i, j, k) - nabla_S(i, k, j))
    else:
        weyl = {idx: sp.Integer(0) for idx in product(range(n), repeat=4)}
        cotton = {idx: sp.Integer(0) for idx in product(range(n), repeat=3)}
    return CurvatureTensors(R, ric, scal, weyl, cotton)


# ---------------------------------------------------------------- integrability conditions

@dataclass
class FeraReport:
    conditions: dict   # name -> bool
    failures: dict     # name -> list of offending index tuples

    def __bool__(self):
        return all(self.conditions.values())


GAMMA_SYMMETRIC = "Gamma^j_{kl}=Gamma^j_{lk}"
V_SYMMETRIC = "V_{kj}=V_{jk}"
CODAZZI = "nabla_k V_{lj}=nabla_l V_{kj}"
CURVATURE = "R_{ijkl}=g_{ik}V_{jl}+g_{jl}V_{ik}-g_{jk}V_{il}-g_{il}V_{jk}"


def check_fera(h: HydroStructure) -> FeraReport:
    """The four conditions for a hydrodynamic bivector to be a Jacobi structure."""
    n, u = h.n, h.u
    gl, G, Vl = h.g_lower, h.levi_civita, h.V_lower
    Gs = h.christoffel
    fails = {GAMMA_SYMMETRIC: [], V_SYMMETRIC: [], CODAZZI: [], CURVATURE: []}
    for j, k, l in product(range(n), repeat=3):
        if l > k and not _is_zero(Gs[j][k][l] - Gs[j][l][k]):
            fails[GAMMA_SYMMETRIC].append((j, k, l))
    for k, j in product(range(n), repeat=2):
        if j > k and not _is_zero(Vl[k, j] - Vl[j, k]):
            fails[V_SYMMETRIC].append((k, j))

    def nabla_V(k, l, j):  # nabla_k V_{lj}
        return (sp.diff(Vl[l, j], u[k]) - sum(G[m][k][l] * Vl[m, j] + G[m][k][j] * Vl[l, m]
                                               for m in range(n)))
    for k, l, j in product(range(n), repeat=3):
        if l > k and not _is_zero(nabla_V(k, l, j) - nabla_V(l, k, j)):
            fails[CODAZZI].append((k, l, j))
    R = riemann_lower(h)
    for i, j, k, l in product(range(n), repeat=4):
        rhs = gl[i, k] * Vl[j, l] + gl[j, l] * Vl[i, k] - gl[j, k] * Vl[i, l] - gl[i, l] * Vl[j, k]
        if not _is_zero(R[i, j, k, l] - rhs):
            fails[CURVATURE].append((i, j, k, l))
    return FeraReport({k: not v for k, v in fails.items()}, fails)


def fera_transform(h: HydroStructure, rho) -> HydroStructure:
    """Conformal change induced by a reciprocal transformation with density rho(u)."""
    n = h.n
    rho = to_sympy(rho, n) if isinstance(rho, SuperPoly) else sp.sympify(rho)
    hess = h.covariant_hessian(rho)
    up = (h.g * hess).applyfunc(_simp)  # nabla^i nabla_k rho
    grad2 = h.sq_gradient(rho)
    g2 = (rho ** 2 * h.g).applyfunc(_simp)
    V2 = sp.Matrix(n, n, lambda i, k: _simp(rho ** 2 * h.V[i, k] + rho * up[i, k]
                                            - (grad2 / 2 if i == k else 0)))
    return levi_civita_structure(g2, V2) if h.skew_condition() else HydroStructure(n, g2, h.gamma, V2)


# ---------------------------------------------------------------- charge and locality

def _conservation_residue(P, rho, n, policy):
    """Degree parts of [P, int rho] that are not total derivatives (within the truncation)."""
    B = sn_bracket(P, rho, n)
    bad = []
    for d in sorted(B.degrees()):
        if policy is not None and d > policy.max_degree:
            continue
        part = B.degree_part(d)
        if not zero_test(part, n):
            bad.append((d, part))
    return bad


def _point_part(f: SuperPoly) -> SuperPoly:
    return f.degree_part(0)


@dataclass
class ChargeReport:
    z: Fraction
    c: Fraction
    sigma0: object
    residual: object   # nabla^i nabla_k rho0 + rho0 V^i_k + sigma0 delta^i_k


def charge_report(P, rho, policy: TruncationPolicy | None = None, n=None,
                  check_conserved=True, sigma_shift=0) -> ChargeReport:
    P = density_of(P)
    rho = density_of(rho)
    n = max(n or 1, P.n, rho.n)
    if check_conserved:
        bad = _conservation_residue(P, rho, n, policy)
        if bad:
            raise NotConserved(f"[P, int rho] is not zero at degree {bad[0][0]}")
    h = extract_hydro(P, n)
    _, X, _ = _hydro_parts(P, n)
    rho0p = _point_part(rho)
    rho0 = to_sympy(rho0p, n)
    # d^s(delta^i X) d_{i,s}(rho) = d(sigma); its degree-one part only sees rho0
    X1 = X.degree_part(1)
    flow = add_all([mul(odd_variational_derivative(X1, i, n), partial_u(rho0p, i, 0))
                    for i in range(1, n + 1)], n)
    try:
        sigma0 = to_sympy(invert_total_derivative(flow, n), n) + sp.sympify(sigma_shift)
    except NotExact:
        raise NotConserved("the structure flow does not preserve int rho") from None
    M = (h.g * h.covariant_hessian(rho0) + rho0 * h.V + sigma0 * sp.eye(n)).applyfunc(_simp)
    if any(not _is_zero(M[i, k]) for i in range(n) for k in range(n) if i != k):
        raise NonConstantCharge("off-diagonal entries in the charge equation")
    diag = [_simp(M[i, i]) for i in range(n)]
    if any(not _is_zero(d - diag[0]) for d in diag[1:]) or diag[0].free_symbols:
        raise NonConstantCharge(f"trace part {diag[0]} is not a constant")
    c = diag[0]
    z = _simp(h.sq_gradient(rho0) / 2 + rho0 * (sigma0 - c))
    if z.free_symbols:
        raise NonConstantCharge(f"charge {z} depends on u")
    return ChargeReport(Fraction(int(z.p), int(z.q)), Fraction(int(c.p), int(c.q)), sigma0, M)


def nonlocal_charge(P, rho, policy: TruncationPolicy | None = None, n=None) -> Fraction:
    """z(P, rho): coefficient of the surviving zeta-term after the reciprocal transformation."""
    return charge_report(P, rho, policy, n).z


def check_locality(P, rho, policy: TruncationPolicy | None = None, n=None,
                   construct=False) -> LocalityWitness:
    """Whether the reciprocal image of P with respect to rho is local.

    ``construct`` additionally transforms P and returns its local density; the
    verdict is cross-checked against the transformed element in that case.
    """
    from .transform import ReciprocalMap, reciprocal_transform

    P = density_of(P)
    rho = density_of(rho)
    n = max(n or 1, P.n, rho.n)
    p = P.super_degree()
    bad = _conservation_residue(P, rho, n, policy)
    if bad:
        return LocalityWitness(False, obstruction=("not conserved", bad[0][1]))
    z = None
    if p == 2:
        z = charge_report(P, rho, policy, n, check_conserved=False).z
        if z != 0:
            return LocalityWitness(False, obstruction=("charge", z), charge=z)
    density = None
    if construct:
        img = reciprocal_transform(P, ReciprocalMap(rho, n), policy)
        if policy is not None:
            img = truncate(img, policy.max_degree)
        density = local_normal_form(img, n)
    return LocalityWitness(True, density=density, charge=z)


# ---------------------------------------------------------------- central invariants

def ab_tensors(P, m_max=3, n=None):
    """A^{ij}_m = (d/d theta_j^m delta^i(P))_0 for m <= m_max; keys (i, j, m), 1-based."""
    P = density_of(P)
    n = max(n or 1, P.n)
    if partial_zeta(P).terms:
        P0, _ = split_zeta(P, n)
    else:
        P0 = P
    out = {}
    for i in range(1, n + 1):
        di = odd_variational_derivative(P0, i, n)
        for j in range(1, n + 1):
            for m in range(m_max + 1):
                out[i, j, m] = to_sympy(_point_part(partial_theta(di, j, m)), n)
    return out


@dataclass
class CentralInvariantReport:
    lam: list          # canonical coordinates as functions of u
    f: list
    A: dict
    B: dict
    c: list            # c_i as functions of u
    c_lambda: list     # c_i in terms of lambda_i when it can be solved for


def _local_representative(P, n):
    if not partial_zeta(P).terms:
        return P
    # a nonlocal P keeps its zeta part; ab_tensors then reads the split P0
    w = locality_witness(P, n)
    return w.density if w.local else P


def central_invariants(P, Q, canonical=None, n=None) -> CentralInvariantReport:
    """Central invariants of a semisimple pair with hydrodynamic leading terms.

    For n = 1 the canonical coordinate lambda = g2/g1 is computed.  For n >= 2
    pass ``canonical=True`` when P and Q are already written in canonical
    coordinates (diagonal metrics with g2^{ii} = u^i g1^{ii}).
    """
    P, Q = density_of(P), density_of(Q)
    n = max(n or 1, P.n, Q.n)
    P, Q = (_local_representative(S, n) for S in (P, Q))
    A, B = ab_tensors(P, 3, n), ab_tensors(Q, 3, n)
    u = coords(n)
    g1 = sp.Matrix(n, n, lambda i, j: A[i + 1, j + 1, 1])
    g2 = sp.Matrix(n, n, lambda i, j: B[i + 1, j + 1, 1])
    if _simp(g1.det()) == 0:
        raise DegenerateMetric("first metric is degenerate")
    if n == 1:
        lam = _simp(g2[0, 0] / g1[0, 0])
        if not lam.free_symbols:
            raise NotSemisimple("the canonical coordinate is constant")
        jac = sp.diff(lam, u[0])
        f = _simp(g1[0, 0] * jac ** 2)
        # A_3, B_3 are tensors of weight two under the change u -> lambda
        A3, B3 = A[1, 1, 3] * jac ** 2, B[1, 1, 3] * jac ** 2
        c = _simp((B3 - lam * A3) / (3 * f ** 2))
        L = sp.Symbol("lambda1")
        sols = sp.solve(sp.Eq(L, lam), u[0])
        c_lam = [_simp(c.subs(u[0], sols[0]))] if sols else [None]
        return CentralInvariantReport([lam], [f], A, B, [c], c_lam)
    if not canonical:
        raise MissingCoordinates("canonical coordinates must be supplied for n >= 2")
    for i, j in product(range(n), repeat=2):
        if i != j and not (_is_zero(g1[i, j]) and _is_zero(g2[i, j])):
            raise NotSemisimple("metrics are not diagonal in the supplied coordinates")
    for i in range(n):
        if not _is_zero(g2[i, i] - u[i] * g1[i, i]):
            raise NotSemisimple("g2 is not lambda g1 in the supplied coordinates")
    f = [g1[i, i] for i in range(n)]
    cs = []
    for i in range(1, n + 1):
        li = u[i - 1]
        s = B[i, i, 3] - li * A[i, i, 3]
        for k in range(1, n + 1):
            if k != i:
                s += (B[k, i, 2] - li * A[k, i, 2]) ** 2 / (f[k - 1] * (u[k - 1] - li))
        ci = _simp(s / (3 * f[i - 1] ** 2))
        if any(x != li for x in ci.free_symbols):
            raise NotSemisimple(f"c_{i} depends on other canonical coordinates")
        cs.append(ci)
    return CentralInvariantReport(list(u), f, A, B, cs,
                                  [c.subs(u[i], sp.Symbol(f"lambda{i + 1}")) for i, c in enumerate(cs)])
