"""Miura type and reciprocal transformations of quasi-local multivectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial

from .bracket import sn_bracket
from .errors import NonInvertibleRho, SingularJacobian, TruncationOverflow
from .ring import (SuperPoly, TruncationPolicy, add_all, mono_degree, mul, partial_theta, partial_u,
                   power, substitute, substitute_jets, total_derivative, truncate)
from .varcalc import density_of, galilean


def _n_of(*xs, n=None):
    return max([n or 1] + [x.n for x in xs])


def _trunc(f, policy):
    return truncate(f, policy.max_degree) if policy is not None else f


# ---------------------------------------------------------------- odd substitution

def substitute_odd(f: SuperPoly, theta_image, zeta_image: SuperPoly, n: int,
                   policy: TruncationPolicy | None = None) -> SuperPoly:
    """Algebra map fixing even variables and sending theta_i^s, zeta to images."""
    cache = {}

    def img(key):
        if key not in cache:
            cache[key] = zeta_image if key == (0, 0) else theta_image(*key)
        return cache[key]

    out = []
    for (ev, od), c in f.terms.items():
        acc = SuperPoly({(ev, ()): c}, n)
        for key in od:
            acc = _trunc(mul(acc, img(key)), policy)
            if not acc.terms:
                break
        out.append(acc)
    return add_all(out, n)


def shift_odd(f: SuperPoly, n: int) -> SuperPoly:
    """The derivation theta_i^s -> theta_i^{s+1} (even variables and zeta fixed)."""
    parts = []
    for i in range(1, n + 1):
        top = -1
        for ev, od in f.terms:
            for k in od:
                if k[0] == i:
                    top = max(top, k[1])
        for s in range(top + 1):
            d = partial_theta(f, i, s)
            if d.terms:
                parts.append(mul(SuperPoly.theta(i, s + 1, n), d))
    return add_all(parts, n)


def _det(rows):
    """Determinant of a small matrix of SuperPoly by cofactor expansion."""
    size = len(rows)
    if size == 1:
        return rows[0][0]
    total = []
    for j in range(size):
        minor = [r[:j] + r[j + 1:] for r in rows[1:]]
        term = mul(rows[0][j], _det(minor))
        total.append(term if j % 2 == 0 else -term)
    return add_all(total, rows[0][0].n)


# ---------------------------------------------------------------- Miura maps

@dataclass
class MiuraMap:
    """New coordinates ubar^i = images[i] expressed in the old u.

    ``inverse`` (old u^i in terms of ubar) may be supplied; otherwise it is
    computed when the leading part of each image is c*(u^i)^a, exactly for
    first kind maps and as a truncated fixed-point series in general.
    """
    images: dict
    n: int = 1
    inverse: dict | None = None
    _inv_cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        self.images = {i: density_of(f).with_n(self.n) for i, f in self.images.items()}
        for i in range(1, self.n + 1):
            self.images.setdefault(i, SuperPoly.u(i, 0, self.n))
        if self.inverse is not None:
            self.inverse = {i: density_of(f).with_n(self.n) for i, f in self.inverse.items()}
        det = _det([[partial_u(self.images[i].degree_part(0), j, 0) for j in range(1, self.n + 1)]
                    for i in range(1, self.n + 1)])
        if not det.terms:
            raise SingularJacobian("the leading part of the map has a degenerate Jacobian")

    @property
    def kind(self):
        if all(self.images[i].max_order() == 0 and all(mono_degree(m) == 0 for m in self.images[i].terms)
               for i in self.images):
            return "first"
        if all(self.images[i].degree_part(0) == SuperPoly.u(i, 0, self.n) for i in self.images):
            return "second"
        return "general"

    def _leading(self, i):
        lead = self.images[i].degree_part(0)
        if len(lead.terms) != 1:
            return None
        (m, c), = lead.terms.items()
        ev, od = m
        if od or len(ev) != 1 or ev[0][0] != (i, 0):
            return None
        return c, ev[0][1]

    def inverse_map(self, policy: TruncationPolicy | None = None) -> dict:
        """Old coordinates u^i as functions of the new ones."""
        if self.inverse is not None:
            return self.inverse
        key = policy.max_degree if policy else None
        if key in self._inv_cache:
            return self._inv_cache[key]
        n = self.n
        leads = {i: self._leading(i) for i in range(1, n + 1)}
        if any(v is None for v in leads.values()):
            raise SingularJacobian("cannot invert this map automatically; pass inverse=")
        rest = {i: self.images[i] - SuperPoly({((((i, 0), leads[i][1]),), ()): leads[i][0]}, n)
                for i in range(1, n + 1)}
        # u^i = ((ubar^i - rest^i(u)) / c)^(1/a)
        guess = {i: power(SuperPoly.u(i, 0, n) * (1 / leads[i][0]), Fraction(1) / Fraction(leads[i][1]))
                 for i in range(1, n + 1)}
        if all(not r.terms for r in rest.values()):
            self._inv_cache[key] = guess
            return guess
        if policy is None:
            raise TruncationOverflow("the inverse of this map is a series; supply a TruncationPolicy")
        for _ in range(policy.max_degree + 2):
            new = {}
            for i in range(1, n + 1):
                r = substitute(rest[i], guess, policy, n)
                base = (SuperPoly.u(i, 0, n) - r) * (1 / leads[i][0])
                new[i] = power(base, Fraction(1) / Fraction(leads[i][1]), policy)
            if new == guess:
                break
            guess = new
        self._inv_cache[key] = guess
        return guess


def miura_theta_images(m: MiuraMap):
    """(theta image function, zeta image) of the super variable rule, in mixed
    coordinates (old even jets, new odd variables)."""
    n = m.n
    cache = {}

    def base(i):
        if i not in cache:
            parts = []
            for j in range(1, n + 1):
                img = m.images[j]
                for t in range(img.max_order() + 1):
                    c = partial_u(img, i, t)
                    if c.terms:
                        term = mul(c, SuperPoly.theta(j, 0, n))
                        for _ in range(t):
                            term = -total_derivative(term, n)
                        parts.append(term)
            cache[i] = add_all(parts, n)
        return cache[i]

    def theta_image(i, s):
        f = base(i)
        for _ in range(s):
            f = total_derivative(f, n)
        return f

    zparts = [SuperPoly.zeta(n)]
    for i in range(1, n + 1):
        for j in range(1, n + 1):
            img = m.images[j]
            top = img.max_order()
            for a in range(1, top + 1):
                for s in range(0, top - a + 1):
                    c = partial_u(img, i, s + a)
                    if not c.terms:
                        continue
                    term = mul(c, SuperPoly.theta(j, 0, n))
                    for _ in range(s):
                        term = -total_derivative(term, n)
                    zparts.append(mul(SuperPoly.u(i, a, n), term))
    return theta_image, add_all(zparts, n)


def miura_transform(P, m: MiuraMap, policy: TruncationPolicy | None = None) -> SuperPoly:
    """Density of P written in the new coordinates ubar (old u substituted by the inverse)."""
    P = density_of(P)
    n = max(P.n, m.n)
    theta_image, zeta_image = miura_theta_images(m)
    mixed = substitute_odd(P, theta_image, zeta_image, n, policy)
    inv = m.inverse_map(policy)
    return substitute(mixed, inv, policy, n)


def miura_transform_functional(f, m: MiuraMap, policy=None) -> SuperPoly:
    return substitute(density_of(f), m.inverse_map(policy), policy, m.n)


def _exp_ad(gen, P, sign, policy: TruncationPolicy, n):
    if policy is None:
        raise TruncationOverflow("series transformations need an explicit TruncationPolicy")
    total = [truncate(P, policy.max_degree)]
    term = P
    k = 0
    while True:
        k += 1
        full = sn_bracket(gen, term, n)
        term = truncate(full, policy.max_degree)
        if policy.on_overflow == "error" and len(term.terms) != len(full.terms):
            raise TruncationOverflow(f"terms above degree {policy.max_degree}")
        if not term.terms:
            break
        total.append(term * (Fraction(sign) ** k / factorial(k)))
        if k > 4 * (policy.max_degree + 2):
            raise TruncationOverflow("adjoint series does not terminate; is nu(X) > 0?")
    return add_all(total, n)


def miura_second_kind(P, X, policy: TruncationPolicy) -> SuperPoly:
    """exp(-ad_X)(P), the action of the second kind map ubar = exp(D_X)(u)."""
    P, X = density_of(P), density_of(X)
    n = max(P.n, X.n)
    if X.terms and min(mono_degree(mm) for mm in X.terms) <= 0:
        raise ValueError("the generator must have positive order")
    return _exp_ad(X, P, -1, policy, n)


def exp_derivation(X, f, policy: TruncationPolicy):
    """exp(D_X)(f) for a local vector X = X^i theta_i (evolutionary derivation)."""
    from .bracket import dp_operator
    X, f = density_of(X), density_of(f)
    n = max(X.n, f.n)
    D = dp_operator(X, n)
    total = [f]
    term = f
    k = 0
    while True:
        k += 1
        term = truncate(D(term), policy.max_degree)
        if not term.terms:
            break
        total.append(term * Fraction(1, factorial(k)))
    return truncate(add_all(total, n), policy.max_degree)


# ---------------------------------------------------------------- reciprocal

@dataclass
class ReciprocalMap:
    rho: SuperPoly
    n: int = 1

    def __post_init__(self):
        self.rho = density_of(self.rho).with_n(self.n)
        lead = self.rho.degree_part(0)
        if len(lead.terms) != 1:
            raise NonInvertibleRho("rho needs a single-term nonzero leading part to be inverted")

    @property
    def kind(self):
        if all(mono_degree(m) == 0 for m in self.rho.terms):
            return "first"
        if self.rho.degree_part(0) == SuperPoly.const(1, self.n):
            return "second"
        return "general"

    def inverse_rho(self, policy=None):
        try:
            return power(self.rho, -1, policy)
        except TruncationOverflow:
            raise
        except Exception as exc:
            raise NonInvertibleRho(str(exc)) from None


def mixed_derivative(f: SuperPoly, rho: SuperPoly, n: int, policy=None) -> SuperPoly:
    """rho * d-tilde in mixed coordinates: d on x-jets, rho*shift on tilde odd
    variables, and zeta-tilde -> -u^{i,1} theta-tilde_i."""
    out = total_derivative(f, n)
    one = SuperPoly.const(1, n)
    if rho != one:
        out = out + mul(rho - one, shift_odd(f, n))
    return _trunc(out, policy)


def reciprocal_images(r: ReciprocalMap, n: int, policy=None):
    rho = r.rho.with_n(n)
    top = rho.max_order()
    zt = SuperPoly.zeta(n)

    def D(f):
        return mixed_derivative(f, rho, n, policy)

    def minus_D_pow(f, k):
        for _ in range(k):
            f = -D(f)
        return f

    bases = {}

    def base(i):
        if i not in bases:
            parts = [mul(rho, SuperPoly.theta(i, 0, n))]
            for t in range(top + 1):
                c = partial_u(rho, i, t)
                if c.terms:
                    parts.append(-minus_D_pow(mul(c, zt), t))
            bases[i] = add_all(parts, n)
        return bases[i]

    cache = {}

    def theta_image(i, s):
        key = (i, s)
        if key not in cache:
            cache[key] = base(i) if s == 0 else D(theta_image(i, s - 1))
        return cache[key]

    zparts = [mul(rho, zt)]
    for i in range(1, n + 1):
        for a in range(1, top + 1):
            for s in range(0, top - a + 1):
                c = partial_u(rho, i, s + a)
                if c.terms:
                    zparts.append(-mul(SuperPoly.u(i, a, n), minus_D_pow(mul(c, zt), s)))
    return theta_image, _trunc(add_all(zparts, n), policy)


def tilde_jets(r: ReciprocalMap, n: int, order: int, policy=None) -> dict:
    """x-jets u^{i,s} (s <= order) in tilde jets, using d = rho * d-tilde."""
    rho = r.rho.with_n(n)
    order = max(order, rho.max_order())
    if rho.max_order() <= 0:
        J = {}
        for i in range(1, n + 1):
            J[(i, 0)] = SuperPoly.u(i, 0, n)
            for s in range(1, order + 1):
                J[(i, s)] = _trunc(mul(rho, total_derivative(J[(i, s - 1)], n)), policy)
        return J
    if policy is None:
        raise TruncationOverflow("rho with jets needs a TruncationPolicy for the tilde jets")
    rho0 = rho.degree_part(0)
    J = tilde_jets(ReciprocalMap(rho0, n), n, order, policy)
    for _ in range(policy.max_degree + 2):
        rt = substitute_jets(rho, lambda i, s: J[(i, s)], policy, n)
        new = {}
        for i in range(1, n + 1):
            new[(i, 0)] = SuperPoly.u(i, 0, n)
            for s in range(1, order + 1):
                new[(i, s)] = truncate(mul(rt, total_derivative(new[(i, s - 1)], n)), policy.max_degree)
        if new == J:
            break
        J = new
    return J


def to_tilde(f: SuperPoly, r: ReciprocalMap, n: int, policy=None) -> SuperPoly:
    J = tilde_jets(r, n, f.max_order(), policy)
    return substitute_jets(f, lambda i, s: J[(i, s)], policy, n)


def reciprocal_transform(P, r: ReciprocalMap, policy: TruncationPolicy | None = None) -> SuperPoly:
    """Density of Phi(P) in tilde coordinates: rho^{-1} * Phi-hat(alpha), then tilde jets."""
    P = density_of(P)
    n = max(P.n, r.n)
    theta_image, zeta_image = reciprocal_images(r, n, policy)
    mixed = substitute_odd(P, theta_image, zeta_image, n, policy)
    mixed = _trunc(mul(r.inverse_rho(policy).with_n(n), mixed), policy)
    return to_tilde(mixed, r, n, policy)


def reciprocal_functional(f, r: ReciprocalMap, policy=None) -> SuperPoly:
    """Phi_0: density f dx -> rho^{-1} f d(x-tilde)."""
    f = density_of(f)
    n = max(f.n, r.n)
    return to_tilde(_trunc(mul(r.inverse_rho(policy).with_n(n), f), policy), r, n, policy)


def reciprocal_second_kind(P, f, policy: TruncationPolicy) -> SuperPoly:
    """exp(ad_Y)(P) with Y = f*zeta, the reciprocal map for rho = e^f."""
    P, f = density_of(P), density_of(f)
    n = max(P.n, f.n)
    if f.terms and min(mono_degree(mm) for mm in f.terms) <= 0:
        raise ValueError("f must have positive order")
    Y = mul(f, SuperPoly.zeta(n))
    return _exp_ad(Y, P, 1, policy, n)


def exp_series(f, policy: TruncationPolicy) -> SuperPoly:
    """e^f truncated, for f of positive order."""
    f = density_of(f)
    total = [SuperPoly.const(1, f.n)]
    term = SuperPoly.const(1, f.n)
    k = 0
    while True:
        k += 1
        term = truncate(mul(term, f), policy.max_degree)
        if not term.terms:
            break
        total.append(term * Fraction(1, factorial(k)))
    return add_all(total, f.n)


def flow_rho(f, policy: TruncationPolicy) -> SuperPoly:
    """The rho whose reciprocal map is exp(ad_Y), Y = f*zeta.

    Composition of reciprocal maps multiplies densities with the second one
    written in tilde jets, so the one-parameter group generated by ad_Y has
    d rho_t/dt = rho_t * f(tilde jets at time t).  This differs from e^f once
    f depends on jets.  Solved as a power series in t and evaluated at t = 1.
    """
    f = density_of(f)
    n = f.n
    D = policy.max_degree
    nu = min(mono_degree(m) for m in f.terms) if f.terms else 1
    if nu <= 0:
        raise ValueError("f must have positive order")
    K = D // nu + 1
    order = f.max_order()
    r = [SuperPoly.const(1, n)]

    def series_mul(a, b, upto):
        out = []
        for k in range(upto + 1):
            out.append(add_all([truncate(mul(a[i], b[k - i]), D)
                                for i in range(k + 1) if i < len(a) and k - i < len(b)], n))
        return out

    for k in range(K):
        # rho^{-1} as a t-series up to t^k
        inv = [SuperPoly.const(1, n)]
        for j in range(1, k + 1):
            inv.append(-add_all([truncate(mul(r[a], inv[j - a]), D) for a in range(1, j + 1)], n))
        # tilde jets (rho^{-1} d)^s u as t-series
        jets = {}
        for i in range(1, n + 1):
            jets[(i, 0)] = [SuperPoly.u(i, 0, n)] + [SuperPoly({}, n)] * k
            for s in range(1, order + 1):
                prev = [truncate(total_derivative(x, n), D) for x in jets[(i, s - 1)]]
                jets[(i, s)] = series_mul(inv, prev, k)
        # f at the tilde jets, coefficient by coefficient in t
        F = [SuperPoly({}, n) for _ in range(k + 1)]
        for (ev, od), c in f.terms.items():
            acc = [SuperPoly({((), od): c}, n)] + [SuperPoly({}, n)] * k
            for (i, s), e in ev:
                if s == 0:
                    acc = [truncate(mul(x, SuperPoly({((((i, 0), e),), ()): 1}, n)), D) for x in acc]
                    continue
                for _ in range(e):
                    acc = series_mul(acc, jets[(i, s)], k)
            F = [F[j] + acc[j] for j in range(k + 1)]
        nxt = add_all([truncate(mul(r[a], F[k - a]), D) for a in range(k + 1)], n) * Fraction(1, k + 1)
        r.append(nxt)
    return truncate(add_all(r, n), D)
