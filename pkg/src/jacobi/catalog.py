"""Concrete structures: KdV, Camassa-Holm, the mKdV bridge and Frobenius manifolds."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product

import sympy as sp

from .bracket import (OperatorMatrix, bivector_from_operator, check_compatible, check_jacobi,
                      sn_bracket)
from .errors import NotQuasiHomogeneous, WDVVViolation
from .geometry import (check_locality, coords, from_sympy, hydro_bivector, levi_civita_structure,
                       to_sympy)
from .opalg import PsiOp, series_inverse_d_minus_d3

from .ring import SuperPoly, TruncationPolicy, add_all, mul, parse, total_derivative, truncate
from .transform import MiuraMap, ReciprocalMap, miura_transform, reciprocal_transform
from .varcalc import LocalityWitness, density_of, zero_test


@dataclass(frozen=True)
class NamedStructure:
    label: str
    density: SuperPoly
    operator: object = None
    note: str = ""
    max_degree: int | None = None   # exact only through this degree when set


def check_jacobi_upto(P, max_degree, n=None) -> bool:
    """[P, P] ~ 0 in every degree <= max_degree (for truncated series)."""
    P = density_of(P)
    B = sn_bracket(P, P, n)
    return all(zero_test(B.degree_part(d), n) for d in B.degrees() if d <= max_degree)


def check_compatible_upto(P, Q, max_degree, n=None) -> bool:
    B = sn_bracket(density_of(P), density_of(Q), n)
    return all(zero_test(B.degree_part(d), n) for d in B.degrees() if d <= max_degree)


def psi_bivector(op: PsiOp, check=True) -> SuperPoly:
    """Bivector of a scalar operator whose tails reduce to A (x) u_x + u_x (x) B."""
    A, B = op.tail_tensor()
    ux = SuperPoly.u(1, 1, 1)
    tails = []
    if A.terms:
        tails.append((A, ux))
    if B.terms:
        tails.append((ux, B))
    return bivector_from_operator(OperatorMatrix(1, {(1, 1): op.terms()}, tails), check=check)


# ---------------------------------------------------------------- KdV

def kdv_operators():
    """P0 = d, P1 = u d + u_x/2 - d^3/4 and P_k = (P1 d^-1)^k d for k = 2, 3."""
    P0 = PsiOp.d()
    P1 = PsiOp.from_terms([(parse("u[1]"), 1), (parse("1/2*u[1,1]"), 0), (parse("-1/4"), 3)])
    Di = PsiOp.d_inverse()
    P2 = P1 @ Di @ P1
    P3 = P2 @ Di @ P1
    return [P0, P1, P2, P3]


@lru_cache(maxsize=None)
def kdv_structures() -> dict:
    ops = kdv_operators()
    out = {}
    for k, op in enumerate(ops):
        Q = psi_bivector(op)
        if not check_jacobi(Q):
            raise AssertionError(f"Q{k} failed the Jacobi identity")
        out[f"Q{k}"] = NamedStructure(f"kdv.Q{k}", Q, op, "bivector 1/2 theta P_k theta")
    for a, b in product(out.values(), repeat=2):
        if a.label < b.label and not check_compatible(a.density, b.density):
            raise AssertionError(f"{a.label} and {b.label} are not compatible")
    return out


# ---------------------------------------------------------------- Camassa-Holm

def ch_operators(max_degree=7, j0_scale=1):
    """J0 = c(d - d^3), J1 = m d + m_y/2, J2 = J1 J0^-1 J1, J3 = J2 J0^-1 J1.

    J0^-1 is the series d^-1 + d + d^3 + ... (divided by c) truncated at
    ``max_degree``; m is the variable u[1].
    """
    c = Fraction(j0_scale)
    D = max_degree
    J0 = PsiOp.from_terms([(SuperPoly.const(c), 1), (SuperPoly.const(-c), 3)])
    J1 = PsiOp.from_terms([(parse("u[1]"), 1), (parse("1/2*u[1,1]"), 0)], max_degree=D)
    J0i = series_inverse_d_minus_d3(D).scale(1 / c)
    J2 = J1 @ J0i @ J1
    J3 = J2 @ J0i @ J1
    return [J0, J1, J2, J3]


@lru_cache(maxsize=None)
def ch_structures(max_degree=7, j0_scale=1) -> dict:
    ops = ch_operators(max_degree, j0_scale)
    out = {}
    for k, op in enumerate(ops):
        K = truncate(psi_bivector(op, check=False), max_degree)
        exact = k < 2
        ok = check_jacobi(K) if exact else check_jacobi_upto(K, max_degree)
        if not ok:
            raise AssertionError(f"K{k} failed the Jacobi identity")
        out[f"K{k}"] = NamedStructure(f"ch.K{k}", K, op, "bivector 1/2 theta J_k theta",
                                      None if exact else max_degree)
    return out


def ch_to_kdv(K, max_degree):
    """Reciprocal transformation with rho = sqrt(m), then u = 1/(4m) + m_xx/(4m) - 3 m_x^2/(16 m^2)."""
    pol = TruncationPolicy(max_degree)
    r = ReciprocalMap(parse("u[1]^(1/2)"))
    liouville = MiuraMap({1: parse("1/4*u[1]^(-1) + 1/4*u[1,2]*u[1]^(-1) - 3/16*u[1,1]^2*u[1]^(-2)")})
    R = truncate(reciprocal_transform(density_of(K), r, pol), max_degree)
    return truncate(miura_transform(R, liouville, pol), max_degree)


def equal_upto(P, Q, max_degree, n=None) -> bool:
    diff = density_of(P) - density_of(Q)
    return all(zero_test(diff.degree_part(d), n) for d in range(max_degree + 1))


def ch_bridge_report(max_degree=7, j0_scale=1) -> dict:
    """For each K_k the constant c with the image of K_k equal to c Q_{3-k} (None if none)."""
    K = ch_structures(max_degree, j0_scale)
    Q = kdv_structures()
    out = {}
    for k in range(4):
        img = ch_to_kdv(K[f"K{k}"].density, max_degree)
        target = Q[f"Q{3 - k}"].density
        c = _leading_ratio(img, target)
        out[f"K{k}"] = c if c is not None and equal_upto(img, target * c, max_degree) else None
    return out


def _leading_ratio(P, Q):
    """Ratio of the g^{11} coefficients of the degree-one parts."""
    from .geometry import extract_hydro
    a, b = extract_hydro(P).g[0, 0], extract_hydro(Q).g[0, 0]
    r = sp.simplify(a / b)
    if r.free_symbols:
        return None
    return Fraction(int(r.p), int(r.q))


# ---------------------------------------------------------------- mKdV bridge

def mkdv_miura():
    """u = v^2 + v_x (old variable v named u[1])."""
    return MiuraMap({1: parse("u[1]^2 + u[1,1]")})


def mkdv_v_series(max_degree) -> SuperPoly:
    """v as a series in u solving v^2 + v_x = u with leading term u^(1/2)."""
    v = [parse("u[1]^(1/2)")]
    half_inv = parse("1/2*u[1]^(-1/2)")
    for k in range(1, max_degree + 1):
        s = add_all([mul(v[a], v[k - a]) for a in range(1, k)] + [total_derivative(v[k - 1], 1)], 1)
        v.append(-mul(half_inv, s))
    return add_all(v, 1)


def mkdv_rho(max_degree) -> SuperPoly:
    """rho = 2v expressed in the KdV variable u."""
    return mkdv_v_series(max_degree) * 2


KAPPA_TABLE = {  # verdicts printed for rho with leading term u^kappa
    ("0", 0): True, ("0", 1): True, ("0", 2): False, ("0", 3): False,
    ("1", 0): False, ("1", 1): True, ("1", 2): False, ("1", 3): False,
    ("2", 0): True, ("2", 1): False, ("2", 2): False, ("2", 3): False,
    ("1/2", 0): False, ("1/2", 1): False, ("1/2", 2): True, ("1/2", 3): True,
}


def kappa_densities(max_degree=6):
    return {"0": SuperPoly.const(1), "1": parse("u[1]"), "2": parse("u[1]^2"),
            "1/2": mkdv_rho(max_degree)}


def kappa_table(max_degree=6) -> dict:
    """Locality verdict of Phi(Q_i) for each kappa; keys (kappa, i)."""
    Q = kdv_structures()
    pol = TruncationPolicy(max_degree)
    out = {}
    for kappa, rho in kappa_densities(max_degree).items():
        for i in range(4):
            w = check_locality(Q[f"Q{i}"].density, rho, pol if kappa == "1/2" else None)
            out[kappa, i] = w
    return out


def mkdv_bridge(max_degree=6):
    """(Miura map u = v^2 + v_x, reciprocal map rho = 2v in v-coordinates, kappa-table checker)."""
    def checker():
        table = kappa_table(max_degree)
        return {k: (bool(w), KAPPA_TABLE[k]) for k, w in table.items()}
    return mkdv_miura(), ReciprocalMap(parse("2*u[1]")), checker


def conservation_flux(X, rho, n=None) -> SuperPoly:
    """sigma with D_X(rho) = d(sigma) for a local flow X = X^i theta_i."""
    from .bracket import dp_operator
    from .varcalc import invert_total_derivative
    X, rho = density_of(X), density_of(rho)
    n = max(n or 1, X.n, rho.n)
    return invert_total_derivative(dp_operator(X, n)(rho), n)


# ---------------------------------------------------------------- Frobenius manifolds

@dataclass
class FrobeniusData:
    n: int
    F: object                 # sympy expression in u1..un (flat coordinates)
    d_weights: list
    r_shifts: list
    charge: object
    eta: sp.Matrix = None
    c: dict = field(default_factory=dict)     # (k, i, j) -> c^k_{ij}
    E: list = field(default_factory=list)
    g: sp.Matrix = None

    def potential(self) -> SuperPoly:
        return from_sympy(self.F, self.n)


def _third(F, v, i, j, k):
    return sp.diff(F, v[i], v[j], v[k])


def _quadratic_polynomial(expr, v) -> bool:
    expr = sp.expand(expr)
    if expr == 0:
        return True
    try:
        p = sp.Poly(expr, *v)
    except sp.PolynomialError:
        return False
    return p.total_degree() <= 2 and all(m >= 0 for mon in p.monoms() for m in mon)


def frobenius_data(F, d_weights, r_shifts=None, n=None) -> FrobeniusData:
    """Structure constants, Euler field and intersection form of a potential F."""
    if isinstance(F, str):
        F = parse(F, n)
    if isinstance(F, SuperPoly):
        n = max(n or 1, F.n)
        F = to_sympy(F, n)
    n = n or len(d_weights)
    v = coords(n)
    eta = sp.Matrix(n, n, lambda i, j: sp.simplify(_third(F, v, 0, i, j)))
    if eta.free_symbols or eta.det() == 0:
        raise WDVVViolation("d^3F/dv^1 dv^i dv^j must be a constant nondegenerate matrix")
    eta_inv = eta.inv()
    c = {}
    for k, i, j in product(range(n), repeat=3):
        c[k, i, j] = sp.expand(sum(eta_inv[k, l] * _third(F, v, l, i, j) for l in range(n)))
    for i, j, k, l in product(range(n), repeat=4):
        lhs = sum(c[m, i, j] * c[l, m, k] for m in range(n))
        rhs = sum(c[m, j, k] * c[l, i, m] for m in range(n))
        if sp.simplify(lhs - rhs) != 0:
            raise WDVVViolation(f"associativity fails for indices {(i, j, k, l)}")
    d_weights = [sp.nsimplify(x) for x in d_weights]
    r_shifts = [sp.nsimplify(x) for x in (r_shifts or [0] * n)]
    E = [d_weights[i] * v[i] + r_shifts[i] for i in range(n)]
    EF = sum(E[i] * sp.diff(F, v[i]) for i in range(n))
    charge = _charge(F, EF, v)
    if charge is None or not _quadratic_polynomial(EF - (3 - charge) * F, v):
        raise NotQuasiHomogeneous("E(F) - (3 - d)F is not a quadratic polynomial")
    # g^{ij} = E^k c^{ij}_k with c^{ij}_k = eta^{il} c^j_{lk}
    g = sp.Matrix(n, n, lambda i, j: sp.expand(sum(E[k] * eta_inv[i, l] * c[j, l, k]
                                                   for k in range(n) for l in range(n))))
    return FrobeniusData(n, F, d_weights, r_shifts, charge, eta, c, E, g)


def _charge(F, EF, v):
    """d with E(F) = (3 - d)F + quadratic, read off a non-quadratic monomial of F."""
    F = sp.expand(F)
    for term in sp.Add.make_args(F):
        if _quadratic_polynomial(term, v):
            continue
        coeff_F = term.as_coeff_Mul()[0]
        mono = term / coeff_F
        coeff_E = sp.expand(EF).coeff(mono) if mono != 1 else None
        if coeff_E is None:
            return None
        # coeff() treats other symbols as coefficients; keep only the numeric part
        if coeff_E.free_symbols:
            coeff_E = sp.Add(*[t for t in sp.Add.make_args(coeff_E) if not t.free_symbols])
        return sp.nsimplify(3 - coeff_E / coeff_F)
    return None


def frobenius_build(F, d_weights, r_shifts=None, n=None):
    """(FrobeniusData, P1, P2) with P1 from eta and P2 from the intersection form."""
    fd = frobenius_data(F, d_weights, r_shifts, n)
    n = fd.n
    P1 = hydro_bivector(levi_civita_structure(fd.eta.inv()))
    P2 = hydro_bivector(levi_civita_structure(fd.g))
    for P in (P1, P2):
        if not check_jacobi(P, n):
            raise AssertionError("Frobenius structure failed the Jacobi identity")
    if not check_compatible(P1, P2, n):
        raise AssertionError("Frobenius pair is not compatible")
    return fd, P1, P2


def inversion_coordinates(eta, n):
    """New flat coordinates and the inverse map, as (images, inverse) of SuperPoly."""
    v = coords(n)
    vn = v[n - 1]
    images = {1: sp.expand(sum(eta[k, l] * v[k] * v[l] for k in range(n) for l in range(n)) / (2 * vn)),
              n: -1 / vn}
    for i in range(2, n):
        images[i] = v[i - 1] / vn
    inv = {n: -1 / vn}
    for i in range(2, n):
        inv[i] = -v[i - 1] / vn
    # v^1 = vt^1 - 1/2 sum_{k,l in 2..n-1} eta_kl v^k v^l / v^n  with v^n = -1/vt^n, v^k = -vt^k/vt^n
    inner = sum(eta[k, l] * v[k] * v[l] for k in range(1, n - 1) for l in range(1, n - 1))
    inv[1] = sp.expand(v[0] + inner / (2 * vn))
    return ({i: from_sympy(e, n) for i, e in images.items()},
            {i: from_sympy(e, n) for i, e in inv.items()}, images)


@dataclass
class InversionReport:
    F_tilde: object
    charge_tilde: object
    images: tuple             # transformed (P1, P2) in the new flat coordinates
    built: tuple              # frobenius_build(F_tilde) pair
    local: tuple              # locality witnesses of the two reciprocal images
    match: bool


def frobenius_inversion(fd: FrobeniusData) -> InversionReport:
    """Reciprocal transformation with rho = v^n followed by the inversion coordinates."""
    n = fd.n
    v = coords(n)
    _, P1, P2 = frobenius_build(fd.F, fd.d_weights, fd.r_shifts, n)
    rho = SuperPoly.u(n, 0, n)
    wit = tuple(check_locality(P, rho, n=n) for P in (P1, P2))
    r = ReciprocalMap(rho, n)
    images, inverse, img_sym = inversion_coordinates(fd.eta, n)
    m = MiuraMap(images, n, inverse=inverse)
    moved = tuple(miura_transform(reciprocal_transform(P, r), m) for P in (P1, P2))
    # F~(vt) = (vt^n)^2 F(v(vt)) + 1/2 eta_kl vt^1 vt^k vt^l
    inv_sym = {v[i - 1]: to_sympy(e, n) for i, e in inverse.items()}
    Ft = sp.expand(v[n - 1] ** 2 * fd.F.subs(inv_sym, simultaneous=True)
                   + sum(fd.eta[k, l] * v[0] * v[k] * v[l] for k in range(n) for l in range(n)) / 2)
    # Euler field in the new coordinates: E~^i = E(vt^i) written in vt
    Et = [sp.expand(sp.simplify(sum(fd.E[k] * sp.diff(img_sym[i + 1], v[k]) for k in range(n))
                                .subs(inv_sym, simultaneous=True))) for i in range(n)]
    dt = [sp.diff(Et[i], v[i]) for i in range(n)]
    rt = [sp.expand(Et[i] - dt[i] * v[i]) for i in range(n)]
    fdt, B1, B2 = frobenius_build(Ft, dt, rt, n)
    match = zero_test(moved[0] - B1, n) and zero_test(moved[1] - B2, n)
    return InversionReport(Ft, fdt.charge, moved, (B1, B2), wit, match)


# ---------------------------------------------------------------- registry

def example_frobenius():
    return frobenius_build("1/2*u[1]^2*u[2] + u[2]^4", [1, Fraction(2, 3)], n=2)


def registry(ch_degree=7) -> dict:
    out = {s.label: s for s in kdv_structures().values()}
    out.update({s.label: s for s in ch_structures(ch_degree).values()})
    _, P1, P2 = example_frobenius()
    out["frobenius.P1"] = NamedStructure("frobenius.P1", P1, None, "flat metric of F = v1^2 v2/2 + v2^4")
    out["frobenius.P2"] = NamedStructure("frobenius.P2", P2, None, "intersection form of F = v1^2 v2/2 + v2^4")
    return out


def lookup(name: str) -> NamedStructure:
    if name.startswith("kdv."):
        table = kdv_structures()
    elif name.startswith("ch."):
        table = ch_structures()
    else:
        table = registry()
    for s in table.values():
        if s.label == name:
            return s
    raise KeyError(f"unknown catalog structure {name!r}")


def names() -> list:
    return [f"kdv.Q{k}" for k in range(4)] + [f"ch.K{k}" for k in range(4)] + ["frobenius.P1", "frobenius.P2"]
