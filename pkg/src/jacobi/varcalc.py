"""Variational operators and equality tests modulo total derivatives.

Operators act on super-polynomials.  ``momentum`` is the higher generalized
momentum p_{i,alpha,s}; its odd twin uses derivatives in theta_i.  The Euler
operators, energy operators and the normalizer are built on top of these.

The equality test in the quotient by total derivatives (``zero_test``) is the
three-stage reduction: peel off the zeta part, trade it for a local term, then
apply the local criterion appropriate for the super-degree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from gmpy2 import mpq

from .errors import NotClosed, NotExact, PoleAtOrigin
from .ring import (ONE_MONO, ZETA, SuperPoly, _merge_evens, _norm_exp, add_all, binom,
                   linear_combination, mono_degree, mul, partial_theta, partial_u, partial_zeta,
                   scalar_only, total_derivative, truncate)


def _dim(f, n):
    return max(n or 1, f.n)


def d_power(f: SuperPoly, k: int, n=None) -> SuperPoly:
    for _ in range(k):
        if not f.terms:
            break
        f = total_derivative(f, n)
    return f


def minus_d_power(f, k, n=None):
    g = d_power(f, k, n)
    return -g if k & 1 else g


def _order_of(f: SuperPoly, i=None, odd=False) -> int:
    best = -1
    for ev, od in f.terms:
        if odd:
            for k in od:
                if k != ZETA and (i is None or k[0] == i) and k[1] > best:
                    best = k[1]
        else:
            for (j, s), e in ev:
                if (i is None or j == i) and s > best:
                    best = s
    return best


def momentum(f: SuperPoly, i: int, alpha: int, s: int, n=None) -> SuperPoly:
    """p_{i,alpha,s}(f) = sum_t (-1)^t C(t+s,s) d^t d_{i,alpha+s+t}(f)."""
    n = _dim(f, n)
    if s == -1:
        return partial_u(f, i, alpha - 1)
    if s < -1:
        raise ValueError("s must be >= -1")
    top = _order_of(f, i)
    parts = []
    for t in range(0, top - alpha - s + 1):
        g = partial_u(f, i, alpha + s + t)
        if g.terms:
            parts.append(((-1) ** t * binom(t + s, s), d_power(g, t, n)))
    return linear_combination(parts, n)


def odd_momentum(f: SuperPoly, i: int, alpha: int, s: int, n=None) -> SuperPoly:
    """The same operator with left derivatives in theta_i^{alpha+s+t}."""
    n = _dim(f, n)
    if s == -1:
        return partial_theta(f, i, alpha - 1)
    top = _order_of(f, i, odd=True)
    parts = []
    for t in range(0, top - alpha - s + 1):
        g = partial_theta(f, i, alpha + s + t)
        if g.terms:
            parts.append(((-1) ** t * binom(t + s, s), d_power(g, t, n)))
    return linear_combination(parts, n)


def higher_euler(f, i, s, n=None):
    return momentum(f, i, 0, s, n)


def odd_higher_euler(f, i, s, n=None):
    return odd_momentum(f, i, 0, s, n)


def variational_derivative(f: SuperPoly, i: int, n=None) -> SuperPoly:
    """delta_i = sum_s (-d)^s d_{i,s}."""
    n = _dim(f, n)
    parts = []
    for s in range(0, _order_of(f, i) + 1):
        g = partial_u(f, i, s)
        if g.terms:
            parts.append(((-1) ** s, d_power(g, s, n)))
    return linear_combination(parts, n)


def odd_variational_derivative(f: SuperPoly, i: int, n=None) -> SuperPoly:
    """delta^i = sum_s (-d)^s d^i_s (left odd derivatives)."""
    n = _dim(f, n)
    parts = []
    for s in range(0, _order_of(f, i, odd=True) + 1):
        g = partial_theta(f, i, s)
        if g.terms:
            parts.append(((-1) ** s, d_power(g, s, n)))
    return linear_combination(parts, n)


def gradient(f, n=None):
    n = _dim(f, n)
    return [variational_derivative(f, i, n) for i in range(1, n + 1)]


def odd_gradient(f, n=None):
    n = _dim(f, n)
    return [odd_variational_derivative(f, i, n) for i in range(1, n + 1)]


def energy_s(f: SuperPoly, s: int, n=None) -> SuperPoly:
    """E_s = sum_{alpha>=1} (u^{i,alpha} p_{i,alpha,s} + theta_i^alpha p^i_{alpha,s})."""
    n = _dim(f, n)
    parts = []
    for i in range(1, n + 1):
        for alpha in range(1, _order_of(f, i) + 2):
            g = momentum(f, i, alpha, s, n)
            if g.terms:
                parts.append(mul(SuperPoly.u(i, alpha, n), g))
        for alpha in range(1, _order_of(f, i, odd=True) + 2):
            g = odd_momentum(f, i, alpha, s, n)
            if g.terms:
                parts.append(mul(SuperPoly.theta(i, alpha, n), g))
    return add_all(parts, n)


def energy(f: SuperPoly, n=None) -> SuperPoly:
    """E = E_0 - 1."""
    return energy_s(f, 0, n) - f


def normalizer(f: SuperPoly, n=None) -> SuperPoly:
    """N = theta_i delta^i."""
    n = _dim(f, n)
    return add_all([mul(SuperPoly.theta(i, 0, n), odd_variational_derivative(f, i, n))
                    for i in range(1, n + 1)], n)


def hat_energy(f: SuperPoly, n=None) -> SuperPoly:
    return energy(f, n) + normalizer(f, n)


def galilean(n: int) -> SuperPoly:
    """u^{i,1} theta_i, which equals -d(zeta)."""
    return add_all([mul(SuperPoly.u(i, 1, n), SuperPoly.theta(i, 0, n)) for i in range(1, n + 1)], n)


# ---------------------------------------------------------------- exactness

def is_total_derivative(f: SuperPoly, n=None) -> bool:
    """For super-degree 0: no constant term and every delta_i f vanishes."""
    n = _dim(f, n)
    if f.super_degree() != 0:
        raise ValueError("is_total_derivative expects super-degree 0")
    if not f.terms:
        return True
    if f.constant_term() != 0:
        return False
    return all(not variational_derivative(f, i, n).terms for i in range(1, n + 1))


def _antiderivative_even(a: SuperPoly, key) -> SuperPoly:
    """Integrate a polynomial in the even variable ``key`` (exact, no logs)."""
    d = {}
    for (ev, od), c in a.terms.items():
        e = 0
        rest = []
        for k, x in ev:
            if k == key:
                e = x
            else:
                rest.append((k, x))
        e1 = _norm_exp(e + 1)
        if e1 == 0:
            raise NotExact(f"logarithmic antiderivative in u[{key[0]},{key[1]}]")
        nev = _merge_evens(tuple(rest), ((key, e1),))
        m = (nev, od)
        d[m] = d.get(m, mpq(0)) + c / mpq(Fraction(e1))
    return SuperPoly.from_terms(d.items(), a.n)


def invert_total_derivative(f: SuperPoly, n=None) -> SuperPoly:
    """g with d(g) = f for local f, found by stripping top-order variables.

    The additive constant of g is fixed to zero.  Raises NotExact otherwise.
    """
    n = _dim(f, n)
    if f.has_zeta():
        raise NotExact("input depends on zeta; no local preimage")
    g = SuperPoly({}, n)
    rem = f
    guard = 0
    while rem.terms:
        guard += 1
        if guard > 10000:
            raise NotExact("stripping did not terminate")
        top = rem.max_order()
        if top <= 0:
            raise NotExact(f"remainder {rem} is not a total derivative")
        # pick one top variable, peel it, continue
        picked = None
        for ev, od in rem.terms:
            for k in od:
                if k != ZETA and k[1] == top:
                    picked = ("odd", k)
                    break
            if picked:
                break
            for k, e in ev:
                if k[1] == top:
                    picked = ("even", k)
                    break
            if picked:
                break
        kind, (i, s) = picked
        if kind == "even":
            a = partial_u(rem, i, s)
            # exact densities are linear in the top-order variables
            if a.max_order() >= s:
                raise NotExact(f"nonlinear in top-order variables at u[{i},{s}]")
            piece = _antiderivative_even(a, (i, s - 1))
        else:
            a = partial_theta(rem, i, s)
            if a.max_order() >= s:
                raise NotExact(f"nonlinear in top-order variables at t[{i},{s}]")
            piece = mul(SuperPoly.theta(i, s - 1, n), a)
        new_rem = rem - total_derivative(piece, n)
        # the peel must remove every occurrence of this variable
        if any(k == (i, s) for m in new_rem.terms for k in (m[1] if kind == "odd" else [x for x, _ in m[0]])):
            raise NotExact(f"could not remove the top variable of order {s}")
        g = g + piece
        rem = new_rem
    const = g.constant_term()
    if const:
        g = g - const
    return g


def is_exact_local(f: SuperPoly, n=None) -> bool:
    """Whether f = d(Q) for some local Q (any super-degree, f local)."""
    n = _dim(f, n)
    p = f.super_degree()
    if p == 0:
        return is_total_derivative(f, n)
    if f.has_zeta():
        return False
    return all(not odd_variational_derivative(f, i, n).terms for i in range(1, n + 1))


@dataclass
class ZeroTestResult:
    is_zero: bool
    stage: str
    super_degree: int
    constant: object = None  # Galilean constant c for super-degree 1
    preimage: SuperPoly | None = None  # local Q with zeta-part = d(Q)
    obstruction: object = None
    unproven_regime: bool = False

    def __bool__(self):
        return self.is_zero


@dataclass
class LocalityWitness:
    """Verdict of a locality decision; a local density or the obstruction."""
    local: bool
    density: SuperPoly | None = None
    obstruction: object = None
    charge: object = None

    def __post_init__(self):
        if self.local and self.density is not None and self.density.has_zeta():
            raise ValueError("a local witness cannot depend on zeta")

    def __bool__(self):
        return self.local


def locality_witness(P: SuperPoly, n=None) -> LocalityWitness:
    """Decide whether P is equivalent to a zeta-free element."""
    n = _dim(P, n)
    p = P.super_degree()
    Pb = partial_zeta(P)
    if not Pb.terms:
        return LocalityWitness(True, density=local_normal_form(P, n) if p >= 1 else P)
    if p - 1 == 0:
        ok = is_total_derivative(Pb, n)
        res = Pb
    else:
        ok = is_exact_local(Pb, n)
        res = [odd_variational_derivative(Pb, i, n) for i in range(1, n + 1)]
    if not ok:
        return LocalityWitness(False, obstruction=("zeta residue", res))
    return LocalityWitness(True, density=local_normal_form(P, n))


def zero_test_report(P: SuperPoly, n=None) -> ZeroTestResult:
    n = _dim(P, n)
    if not P.terms:
        return ZeroTestResult(True, "trivial", 0, constant=mpq(0), preimage=SuperPoly({}, n))
    p = P.super_degree()
    unproven = not P.is_polynomial()
    Pb = partial_zeta(P)
    Pa = P - mul(SuperPoly.zeta(n), Pb)
    Q = SuperPoly({}, n)
    if Pb.terms:
        # stage 1: zeta-part must be exact with a local preimage
        if p - 1 == 0:
            if Pb.constant_term() != 0:
                return ZeroTestResult(False, "zeta-part", p, obstruction=("constant", Pb.constant_term()),
                                      unproven_regime=unproven)
            bad = [i for i in range(1, n + 1) if variational_derivative(Pb, i, n).terms]
        else:
            bad = [i for i in range(1, n + 1) if odd_variational_derivative(Pb, i, n).terms]
        if bad:
            return ZeroTestResult(False, "zeta-part", p, obstruction=("delta", bad), unproven_regime=unproven)
        Q = invert_total_derivative(Pb, n)
    # stage 2: zeta Pb = zeta d(Q) ~ -d(zeta) Q = u^{i,1} theta_i Q
    Pp = Pa + mul(galilean(n), Q)
    # stage 3: local criteria
    if p == 0:
        ok = is_total_derivative(Pp, n)
        return ZeroTestResult(ok, "local", p, preimage=Q, unproven_regime=unproven,
                              obstruction=None if ok else "not exact")
    X = [odd_variational_derivative(Pp, i, n) for i in range(1, n + 1)]
    if p == 1:
        c = None
        for i in range(1, n + 1):
            ui = SuperPoly.u(i, 1, n)
            xi = X[i - 1]
            if not xi.terms:
                ci = mpq(0)
            elif len(xi.terms) == 1 and next(iter(xi.terms)) == next(iter(ui.terms)):
                ci = next(iter(xi.terms.values()))
            else:
                return ZeroTestResult(False, "local", p, obstruction=("flow", X), preimage=Q,
                                      unproven_regime=unproven)
            if c is None:
                c = ci
            elif c != ci:
                return ZeroTestResult(False, "local", p, obstruction=("flow", X), preimage=Q,
                                      unproven_regime=unproven)
        return ZeroTestResult(True, "local", p, constant=c, preimage=Q, unproven_regime=unproven)
    ok = all(not x.terms for x in X)
    return ZeroTestResult(ok, "local", p, preimage=Q, unproven_regime=unproven,
                          obstruction=None if ok else ("delta", X))


def zero_test(P: SuperPoly, n=None) -> bool:
    """True iff P is a total derivative in the super space (equality in the quotient)."""
    if not P.terms:
        return True
    ps = P.super_degrees()
    return all(zero_test_report(P.super_part(p), n).is_zero for p in ps)


def equivalent(P: SuperPoly, Q: SuperPoly, n=None) -> bool:
    return zero_test(P - Q, n)


def flow_components(X: SuperPoly, n=None):
    """Canonical components X^i of a super-degree-1 density (zeta part ignored)."""
    n = _dim(X, n)
    return [odd_variational_derivative(X, i, n) for i in range(1, n + 1)]


def local_normal_form(P: SuperPoly, n=None) -> SuperPoly:
    """A canonical local representative when P is equivalent to a local element.

    Super-degree 1: theta_i delta^i with the Galilean part removed; super-degree
    >= 2: (1/p) theta_i delta^i; super-degree 0: returned unchanged after the
    zeta part is traded for a local term.
    """
    n = _dim(P, n)
    p = P.super_degree()
    Pb = partial_zeta(P)
    Pa = P - mul(SuperPoly.zeta(n), Pb)
    if Pb.terms:
        Q = invert_total_derivative(Pb, n) if (p - 1 > 0 and is_exact_local(Pb, n)) or (
            p - 1 == 0 and is_total_derivative(Pb, n)) else None
        if Q is None:
            raise NotExact("zeta part is not exact; element is not local")
        Pa = Pa + mul(galilean(n), Q)
    if p == 0:
        return Pa
    comps = [odd_variational_derivative(Pa, i, n) for i in range(1, n + 1)]
    out = add_all([mul(SuperPoly.theta(i, 0, n), comps[i - 1]) for i in range(1, n + 1)], n)
    if p == 1:
        return out
    return out * Fraction(1, p)


# ---------------------------------------------------------------- homotopy

def _scale_homogeneous(gamma_i: SuperPoly):
    """Integrate u^i gamma_i(lambda u) in lambda term by term."""
    d = {}
    for (ev, od), c in gamma_i.terms.items():
        w = 0
        for k, e in ev:
            if not isinstance(e, int) or e < 0:
                raise PoleAtOrigin("homotopy through u=0 needs polynomial densities")
            w += e
        d[(ev, od)] = c / (w + 1)
    return SuperPoly(d, gamma_i.n)


def homotopy_reconstruct(gamma, n=None) -> SuperPoly:
    """h with delta_i(h) = gamma_i, from h = int_0^1 u^i gamma_i(lambda u) d lambda."""
    n = max([n or 1, len(gamma)] + [g.n for g in gamma])
    for g in gamma:
        if g.super_degrees() not in ([], [0]):
            raise ValueError("gradients must have super-degree 0")
        if not g.is_polynomial():
            raise PoleAtOrigin("homotopy through u=0 needs polynomial densities")
    parts = []
    for i, g in enumerate(gamma, start=1):
        if g.terms:
            parts.append(mul(SuperPoly.u(i, 0, n), _scale_homogeneous(g)))
    h = add_all(parts, n)
    for i, g in enumerate(gamma, start=1):
        if (variational_derivative(h, i, n) - g).terms:
            raise NotClosed(f"component {i} of the gradient is not closed")
    for i in range(len(gamma) + 1, n + 1):
        if variational_derivative(h, i, n).terms:
            raise NotClosed("gradient has fewer components than the density")
    return h


# ---------------------------------------------------------------- functionals

class Functional:
    """Class of a density modulo total derivatives."""

    def __init__(self, density: SuperPoly, n: int | None = None):
        if not isinstance(density, SuperPoly):
            raise TypeError("density must be a SuperPoly")
        self.n = max(n or 1, density.n)
        self.density = density.with_n(self.n)
        self.p = density.super_degree()
        self._report = None

    def report(self) -> ZeroTestResult:
        if self._report is None:
            self._report = zero_test_report(self.density, self.n)
        return self._report

    def is_zero(self) -> bool:
        return self.report().is_zero

    def __eq__(self, other):
        if isinstance(other, Functional):
            return equivalent(self.density, other.density, max(self.n, other.n))
        if isinstance(other, SuperPoly):
            return equivalent(self.density, other, self.n)
        return NotImplemented

    __hash__ = None

    def __add__(self, other):
        return type(self)(self.density + density_of(other), self.n)

    def __sub__(self, other):
        return type(self)(self.density - density_of(other), self.n)

    def __neg__(self):
        return type(self)(-self.density, self.n)

    def __mul__(self, c):
        return type(self)(self.density * c, self.n)

    __rmul__ = __mul__

    def is_local(self) -> bool:
        """Equivalent to a zeta-free density."""
        Pb = partial_zeta(self.density)
        if not Pb.terms:
            return True
        if self.p - 1 == 0:
            return is_total_derivative(Pb, self.n)
        return is_exact_local(Pb, self.n)

    def local_density(self) -> SuperPoly:
        return local_normal_form(self.density, self.n)

    def __repr__(self):
        return f"{type(self).__name__}({self.density})"


def density_of(x) -> SuperPoly:
    if isinstance(x, Functional):
        return x.density
    if isinstance(x, SuperPoly):
        return x
    return SuperPoly.const(x)
