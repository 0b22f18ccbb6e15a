"""Schouten-Nijenhuis bracket, evaluation of quasi-local multivectors, and the
classical operator presentation of bivectors."""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations

from gmpy2 import mpq

from .errors import NotSkewAdjoint, UnsupportedTailShape
from .ring import (SuperPoly, add_all, binom, linear_combination, mul, parse, partial_theta,
                   partial_u, partial_zeta, substitute_jets, to_text, total_derivative)
from .varcalc import (Functional, d_power, density_of, energy, galilean, hat_energy,
                      invert_total_derivative, odd_variational_derivative, variational_derivative,
                      zero_test, zero_test_report)


def _n_of(*xs, n=None):
    return max([n or 1] + [density_of(x).n for x in xs])


# ---------------------------------------------------------------- evaluation

def evaluate(P, fs, n=None) -> SuperPoly:
    """Density of P(F_1, ..., F_p) for super-degree-0 densities F_k."""
    P = density_of(P)
    fs = [density_of(f) for f in fs]
    n = _n_of(P, *fs, n=n)
    if not P.terms:
        return SuperPoly({}, n)
    p = P.super_degree()
    if p != len(fs):
        raise ValueError(f"a multivector of super-degree {p} takes {p} arguments, got {len(fs)}")
    if p == 0:
        return P
    grads = [[variational_derivative(f, i, n) for i in range(1, n + 1)] for f in fs]
    dcache = {}

    def dgrad(k, i, s):
        key = (k, i, s)
        if key not in dcache:
            dcache[key] = grads[k][i - 1] if s == 0 else total_derivative(dgrad(k, i, s - 1), n)
        return dcache[key]

    def slot(Q, ks):
        if not ks:
            return Q
        k = ks[0]
        parts = []
        for i in range(1, n + 1):
            if not grads[k][i - 1].terms:
                continue
            top = -1
            for ev, od in Q.terms:
                for key in od:
                    if key[0] == i and key[1] > top:
                        top = key[1]
            for s in range(top + 1):
                dQ = partial_theta(Q, i, s)
                if dQ.terms:
                    inner = slot(dQ, ks[1:])
                    if inner.terms:
                        parts.append(mul(inner, dgrad(k, i, s)))
        return add_all(parts, n)

    out = [slot(P, list(range(p)))]
    Pz = partial_zeta(P)
    if Pz.terms:
        for k in range(p):
            rest = [j for j in range(p) if j != k]
            ek = energy(fs[k], n)
            if not ek.terms:
                continue
            val = mul(ek, slot(Pz, rest))
            out.append(-val if k & 1 else val)
    return add_all(out, n)


# ---------------------------------------------------------------- bracket

def sn_bracket(P, Q, n=None) -> SuperPoly:
    """[P, Q] on densities; bilinear, split by super-degree when needed."""
    P = density_of(P)
    Q = density_of(Q)
    n = _n_of(P, Q, n=n)
    if not P.terms or not Q.terms:
        return SuperPoly({}, n)
    pd, qd = P.super_degrees(), Q.super_degrees()
    if len(pd) > 1 or len(qd) > 1:
        return add_all([sn_bracket(P.super_part(a), Q.super_part(b), n) for a in pd for b in qd], n)
    p = pd[0]
    sgn = -1 if p & 1 else 1
    parts = []
    for i in range(1, n + 1):
        a = odd_variational_derivative(P, i, n)
        if a.terms:
            b = variational_derivative(Q, i, n)
            if b.terms:
                parts.append(mul(a, b))
        a = variational_derivative(P, i, n)
        if a.terms:
            b = odd_variational_derivative(Q, i, n)
            if b.terms:
                parts.append(mul(a, b) * sgn)
    Pz = partial_zeta(P)
    if Pz.terms:
        parts.append(mul(Pz, hat_energy(Q, n)))
    Qz = partial_zeta(Q)
    if Qz.terms:
        parts.append(mul(hat_energy(P, n), Qz) * sgn)
    return add_all(parts, n)


def degree_zero_bracket(P, Q, n=None) -> SuperPoly:
    """Bracket of jet-free multivectors (finite-dimensional Jacobi bracket)."""
    P = density_of(P)
    Q = density_of(Q)
    n = _n_of(P, Q, n=n)
    if P.max_order() > 0 or Q.max_order() > 0:
        raise ValueError("degree_zero_bracket needs jet-free inputs")
    p, q = P.super_degree(), Q.super_degree()
    sgn = -1 if p & 1 else 1
    parts = []
    for i in range(1, n + 1):
        parts.append(mul(partial_theta(P, i, 0), partial_u(Q, i, 0)))
        parts.append(mul(partial_u(P, i, 0), partial_theta(Q, i, 0)) * sgn)
    parts.append(mul(partial_zeta(P), Q) * (1 - q))
    parts.append(mul(P, partial_zeta(Q)) * ((1 - p) * sgn))
    return add_all(parts, n)


def check_jacobi(P, n=None) -> bool:
    return zero_test(sn_bracket(P, P, n), _n_of(P, n=n))


def check_compatible(P, Q, n=None) -> bool:
    return zero_test(sn_bracket(P, Q, n), _n_of(P, Q, n=n))


# ---------------------------------------------------------------- D_P

@dataclass
class DPOperator:
    """First-order operator D_P with [P, Q] ~ D_P(Q)."""
    P: SuperPoly
    p: int
    n: int
    zeta_part: SuperPoly
    hatE: SuperPoly
    X: list
    Y: list
    _xs: dict = field(default_factory=dict)
    _ys: dict = field(default_factory=dict)

    @property
    def scalar(self):
        """The zeroth-order part a = D_P(1) = -d_zeta(P)."""
        return -self.zeta_part

    def x_coeff(self, i, s):
        key = (i, s)
        if key not in self._xs:
            if s == 0:
                val = self.X[i - 1]
            else:
                val = total_derivative(self.x_coeff(i, s - 1), self.n)
                if self.zeta_part.terms:
                    val = val + mul(self.zeta_part, SuperPoly.u(i, s, self.n))
            self._xs[key] = val
        return self._xs[key]

    def y_coeff(self, i, s):
        key = (i, s)
        if key not in self._ys:
            if s == 0:
                val = self.Y[i - 1]
            else:
                val = total_derivative(self.y_coeff(i, s - 1), self.n)
                if self.zeta_part.terms:
                    val = val + mul(self.zeta_part, SuperPoly.theta(i, s, self.n))
            self._ys[key] = val
        return self._ys[key]

    def __call__(self, Q) -> SuperPoly:
        Q = density_of(Q)
        n = self.n
        parts = [mul(self.scalar, Q)]
        Qz = partial_zeta(Q)
        if Qz.terms:
            parts.append(mul(self.hatE, Qz) * (-1 if self.p & 1 else 1))
        for i in range(1, n + 1):
            for s in range(Q.max_order() + 1):
                dq = partial_u(Q, i, s)
                if dq.terms:
                    parts.append(mul(self.x_coeff(i, s), dq))
                dq = partial_theta(Q, i, s)
                if dq.terms:
                    parts.append(mul(self.y_coeff(i, s), dq))
        return add_all(parts, n)

    apply = __call__


def dp_operator(P, n=None) -> DPOperator:
    P = density_of(P)
    n = _n_of(P, n=n)
    p = P.super_degree()
    sgn = -1 if p & 1 else 1
    Pz = partial_zeta(P)
    X = [odd_variational_derivative(P, i, n) for i in range(1, n + 1)]
    Y = [(variational_derivative(P, i, n) - mul(SuperPoly.theta(i, 0, n), Pz)) * sgn
         for i in range(1, n + 1)]
    return DPOperator(P, p, n, Pz, hat_energy(P, n), X, Y)


# ---------------------------------------------------------------- NR oracle

def _perm_sign(seq):
    sign = 1
    seq = list(seq)
    for a in range(len(seq)):
        for b in range(a + 1, len(seq)):
            if seq[a] > seq[b]:
                sign = -sign
    return sign


def _wedge_bar(A, a, B, b, fs, n):
    if a == 0:
        return SuperPoly({}, n)
    m = len(fs)
    out = []
    for S in combinations(range(m), b):
        rest = [j for j in range(m) if j not in S]
        sign = _perm_sign(list(S) + rest)
        inner = evaluate(B, [fs[j] for j in S], n)
        val = evaluate(A, [inner] + [fs[j] for j in rest], n)
        out.append(val if sign > 0 else -val)
    return add_all(out, n)


def nr_bracket_eval(P, Q, fs, n=None) -> SuperPoly:
    """[P,Q](F_1..F_{p+q-1}) via the shuffle-product formula, using slot evaluation only."""
    P = density_of(P)
    Q = density_of(Q)
    fs = [density_of(f) for f in fs]
    n = _n_of(P, Q, *fs, n=n)
    if not P.terms or not Q.terms:
        return SuperPoly({}, n)
    p, q = P.super_degree(), Q.super_degree()
    if len(fs) != p + q - 1:
        raise ValueError("wrong number of arguments")
    s1 = -1 if ((p + 1) * q) & 1 else 1
    s2 = -1 if p & 1 else 1
    return _wedge_bar(P, p, Q, q, fs, n) * s1 + _wedge_bar(Q, q, P, p, fs, n) * s2


# ---------------------------------------------------------------- multivectors

class MultiVector(Functional):
    """Quasi-local multivector: a density modulo total derivatives."""

    def bracket(self, other) -> "MultiVector":
        other = other if isinstance(other, Functional) else MultiVector(density_of(other))
        n = max(self.n, other.n)
        return MultiVector(sn_bracket(self.density, other.density, n), n)

    def __call__(self, *fs):
        return evaluate(self.density, list(fs), self.n)

    def split(self):
        """(P0, X) with P ~ P0 + zeta*X, both local, X = X^i theta_i normalized."""
        return split_zeta(self.density, self.n)

    def is_jacobi(self):
        return check_jacobi(self.density, self.n)


def split_zeta(P, n=None):
    """Write P ~ P0 + zeta*X with P0 and X local and X = X^i theta_i (p >= 2).

    For super-degree 1 the zeta coefficient is returned as is.
    """
    P = density_of(P)
    n = _n_of(P, n=n)
    p = P.super_degree()
    Pb = partial_zeta(P)
    Pa = P - mul(SuperPoly.zeta(n), Pb)
    if p <= 1 or not Pb.terms:
        return Pa, Pb
    comps = [odd_variational_derivative(Pb, i, n) for i in range(1, n + 1)]
    norm = add_all([mul(SuperPoly.theta(i, 0, n), comps[i - 1]) for i in range(1, n + 1)], n)
    norm = norm * Fraction(1, p - 1)
    R = invert_total_derivative(Pb - norm, n)
    # zeta d(R) ~ -d(zeta) R = u^{i,1} theta_i R
    return Pa + mul(galilean(n), R), norm


# ---------------------------------------------------------------- operators

def _as_poly(x, n):
    if isinstance(x, SuperPoly):
        return x.with_n(n)
    if isinstance(x, str):
        return parse(x, n)
    return SuperPoly.const(x, n)


def apply_scalar_operator(terms, f: SuperPoly, n) -> SuperPoly:
    """(sum_s a_s d^s) f."""
    parts = []
    for a, s in terms:
        g = d_power(f, s, n)
        if g.terms:
            parts.append(mul(a, g))
    return add_all(parts, n)


def _adjoint_terms(terms, n):
    """(a d^s)^dagger = (-d)^s a = (-1)^s sum_k C(s,k) d^{s-k}(a) d^k."""
    out = {}
    for a, s in terms:
        da = a
        ders = [a]
        for _ in range(s):
            da = total_derivative(da, n)
            ders.append(da)
        for k in range(s + 1):
            c = (-1) ** s * binom(s, k)
            out[k] = out.get(k, SuperPoly({}, n)) + ders[s - k] * c
    return [(a, k) for k, a in sorted(out.items()) if a.terms]


def _collect(terms, n):
    out = {}
    for a, s in terms:
        out[s] = out.get(s, SuperPoly({}, n)) + a
    return [(a, s) for s, a in sorted(out.items()) if a.terms]


class OperatorMatrix:
    """n x n matrix of differential operators sum_s a_s d^s with optional
    nonlocal tails a^i d^{-1} b^j (each tail is a pair of length-n vectors)."""

    def __init__(self, n, entries=None, tails=None):
        self.n = n
        self.entries = {}
        for (i, j), terms in (entries or {}).items():
            t = _collect([(_as_poly(a, n), int(s)) for a, s in terms], n)
            if t:
                self.entries[(i, j)] = t
        self.tails = []
        for a, b in tails or []:
            if not isinstance(a, (list, tuple)):
                a, b = [a], [b]
            if len(a) != n or len(b) != n:
                raise ValueError("tail vectors must have length n")
            self.tails.append((tuple(_as_poly(x, n) for x in a), tuple(_as_poly(x, n) for x in b)))

    @classmethod
    def scalar(cls, terms, tails=None):
        return cls(1, {(1, 1): terms}, tails)

    def entry(self, i, j):
        return self.entries.get((i, j), [])

    def adjoint_local(self):
        ent = {}
        for (i, j), terms in self.entries.items():
            ent[(j, i)] = _adjoint_terms(terms, self.n)
        return OperatorMatrix(self.n, ent)

    def _tail_tensor_zero(self):
        """Check sum_r (a_r (x) b_r - b_r (x) a_r) = 0 for all index pairs."""
        n = self.n
        if not self.tails:
            return True

        def shift(f):
            return substitute_jets(f, lambda i, s: SuperPoly.u(i + n, s, 2 * n), n=2 * n)

        for i in range(n):
            for j in range(n):
                parts = []
                for a, b in self.tails:
                    parts.append(mul(a[i].with_n(2 * n), shift(b[j])))
                    parts.append(-mul(b[i].with_n(2 * n), shift(a[j])))
                if add_all(parts, 2 * n).terms:
                    return False
        return True

    def is_skew_adjoint(self):
        adj = self.adjoint_local()
        keys = set(self.entries) | set(adj.entries)
        for key in keys:
            total = _collect(list(self.entry(*key)) + list(adj.entry(*key)), self.n)
            if total:
                return False
        return self._tail_tensor_zero()

    def apply(self, fs):
        """Apply the local part to a vector of densities."""
        n = self.n
        return [add_all([apply_scalar_operator(self.entry(i, j), fs[j - 1], n) for j in range(1, n + 1)], n)
                for i in range(1, n + 1)]

    def to_json(self):
        from .ring import to_text
        n = self.n
        ent = [[[[to_text(a), s] for a, s in self.entry(i, j)] for j in range(1, n + 1)]
               for i in range(1, n + 1)]
        if n == 1:
            tails = [[to_text(a[0]), to_text(b[0])] for a, b in self.tails]
        else:
            tails = [[[to_text(x) for x in a], [to_text(x) for x in b]] for a, b in self.tails]
        return {"n": n, "entries": ent, "tails": tails}

    @classmethod
    def from_json(cls, data):
        n = int(data["n"])
        ent = {}
        for i, row in enumerate(data["entries"], start=1):
            for j, terms in enumerate(row, start=1):
                ent[(i, j)] = [(parse(a, n), int(s)) for a, s in terms]
        tails = []
        for a, b in data.get("tails", []):
            tails.append((a, b))
        return cls(n, ent, tails)

    def __repr__(self):
        return f"OperatorMatrix({self.to_json()})"


def _galilean_multiple(vec, n):
    """c if vec == c*(u^{1,1},...,u^{n,1}) for a rational c, else None."""
    c = None
    for i, x in enumerate(vec, start=1):
        ui = SuperPoly.u(i, 1, n)
        if not x.terms:
            ci = mpq(0)
        elif len(x.terms) == 1 and next(iter(x.terms)) == next(iter(ui.terms)):
            ci = next(iter(x.terms.values()))
        else:
            return None
        if c is None:
            c = ci
        elif c != ci:
            return None
    return c


def bivector_from_operator(A: OperatorMatrix, check=True) -> SuperPoly:
    """Density 1/2 theta_i A^{ij} theta_j, with d^{-1} tails turned into zeta terms."""
    n = A.n
    if check and not A.is_skew_adjoint():
        raise NotSkewAdjoint("operator is not skew-adjoint")
    parts = []
    for (i, j), terms in A.entries.items():
        for a, s in terms:
            parts.append(mul(SuperPoly.theta(i, 0, n), mul(a, SuperPoly.theta(j, s, n))) * Fraction(1, 2))
    # tail a d^{-1} b with b = c u_x:  d^{-1}(c u^{j,1} theta_j) = -c zeta
    zeta = SuperPoly.zeta(n)
    for a, b in A.tails:
        c = _galilean_multiple(b, n)
        vec = a
        if c is None:
            c = _galilean_multiple(a, n)
            vec = b
        if c is None:
            raise UnsupportedTailShape("tails must have one side proportional to (u^{i,1})")
        X = add_all([mul(vec[i - 1], SuperPoly.theta(i, 0, n)) for i in range(1, n + 1)], n)
        parts.append(mul(zeta, X) * (mpq(c) / 2))
    return add_all(parts, n)


def operator_from_bivector(P, n=None) -> OperatorMatrix:
    """Inverse of bivector_from_operator up to total derivatives."""
    P = density_of(P)
    n = _n_of(P, n=n)
    if P.super_degree() != 2:
        raise ValueError("operator_from_bivector needs super-degree 2")
    P0, X = split_zeta(P, n)
    ent = {}
    for i in range(1, n + 1):
        d = odd_variational_derivative(P0, i, n)
        for j in range(1, n + 1):
            for s in range(d.max_order() + 1):
                c = partial_theta(d, j, s)
                if c.terms:
                    ent.setdefault((i, j), []).append((c, s))
    tails = []
    if X.terms:
        xs = [odd_variational_derivative(X, i, n) for i in range(1, n + 1)]
        us = [SuperPoly.u(i, 1, n) for i in range(1, n + 1)]
        tails = [(xs, us), (us, xs)]
    return OperatorMatrix(n, ent, tails)
