"""Scalar pseudo-differential operators with finitely many d^{-1} tails.

An operator is  sum_s a_s d^s + sum_r a_r d^{-1} b_r  (one dependent variable).
Composition is exact for the local part; products of tails are reduced with
d^{-1} f' d^{-1} = f d^{-1} - d^{-1} f whenever the middle factor is exact.
Local parts can be truncated by degree (deg a d^s = deg a + s) so that formal
inverses such as (d - d^3)^{-1} can be handled as series.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import NotExact, RecursionNotQuasiLocal
from .ring import SuperPoly, add_all, binom, mono_degree, mul, total_derivative, zero
from .varcalc import invert_total_derivative


def _d(f, k=1):
    for _ in range(k):
        f = total_derivative(f, 1)
    return f


def _trunc(f: SuperPoly, limit):
    if limit is None:
        return f
    return f.filter(lambda m: mono_degree(m) <= limit)


@dataclass
class PsiOp:
    local: dict = field(default_factory=dict)   # power -> coefficient
    tails: list = field(default_factory=list)   # [(a, b)] meaning a d^{-1} b
    max_degree: int | None = None

    # -- construction
    @classmethod
    def mult(cls, a, max_degree=None):
        a = a if isinstance(a, SuperPoly) else SuperPoly.const(a, 1)
        return cls({0: a}, [], max_degree).normalized()

    @classmethod
    def d(cls, k=1, max_degree=None):
        return cls({k: SuperPoly.const(1, 1)}, [], max_degree).normalized()

    @classmethod
    def d_inverse(cls, max_degree=None):
        one = SuperPoly.const(1, 1)
        return cls({}, [(one, one)], max_degree)

    @classmethod
    def from_terms(cls, terms, tails=(), max_degree=None):
        loc = {}
        for a, s in terms:
            loc[s] = loc.get(s, zero(1)) + a
        return cls(loc, list(tails), max_degree).normalized()

    def normalized(self):
        loc = {}
        for s, a in self.local.items():
            if self.max_degree is not None:
                a = _trunc(a, self.max_degree - s)
            if a.terms:
                loc[s] = a
        tails = [(a, b) for a, b in self.tails if a.terms and b.terms]
        return PsiOp(loc, tails, self.max_degree)

    def _limit(self, other):
        lims = [x for x in (self.max_degree, other.max_degree) if x is not None]
        return min(lims) if lims else None

    # -- arithmetic
    def __add__(self, other):
        loc = dict(self.local)
        for s, a in other.local.items():
            loc[s] = loc.get(s, zero(1)) + a
        return PsiOp(loc, self.tails + other.tails, self._limit(other)).normalized()

    def __neg__(self):
        return PsiOp({s: -a for s, a in self.local.items()}, [(-a, b) for a, b in self.tails],
                     self.max_degree)

    def __sub__(self, other):
        return self + (-other)

    def scale(self, c):
        return PsiOp({s: a * c for s, a in self.local.items()}, [(a * c, b) for a, b in self.tails],
                     self.max_degree).normalized()

    def __call__(self, f: SuperPoly) -> SuperPoly:
        """Apply the local part to a function."""
        if self.tails:
            raise RecursionNotQuasiLocal("cannot apply a nonlocal operator to a function")
        return add_all([mul(a, _d(f, s)) for s, a in self.local.items()], 1)

    def adjoint_of_local_at_one(self):
        """L^dagger(1) = sum_s (-d)^s a_s."""
        return add_all([_d(a, s) * (-1) ** s for s, a in self.local.items()], 1)

    def __matmul__(self, other: "PsiOp") -> "PsiOp":
        lim = self._limit(other)
        loc_parts = []
        tails = []
        # local o local
        loc_parts.append(_compose_local(self.local, other.local, lim))
        # local o tail
        for a, b in other.tails:
            c = _compose_local(self.local, {0: a}, None)
            inner = {k - 1: ck for k, ck in c.items() if k >= 1}
            loc_parts.append(_compose_local(inner, {0: b}, lim))
            if 0 in c:
                tails.append((c[0], b))
        # tail o local
        for a, b in self.tails:
            m = _compose_local({0: b}, other.local, None)
            nloc, c = _dinv_local(m)
            loc_parts.append(_compose_local({0: a}, nloc, lim))
            if c.terms:
                tails.append((a, c))
        # tail o tail
        for a, b in self.tails:
            for c, d in other.tails:
                e = mul(b, c)
                try:
                    f = invert_total_derivative(e, 1)
                except NotExact as exc:
                    raise RecursionNotQuasiLocal(f"tail product not reducible: {exc}") from None
                tails.append((mul(a, f), d))
                tails.append((-a, mul(f, d)))
        loc = {}
        for part in loc_parts:
            for s, x in part.items():
                loc[s] = loc.get(s, zero(1)) + x
        return PsiOp(loc, tails, lim).normalized()

    def tail_tensor(self):
        """Normalize the tails to A (x) u_x + u_x (x) B; returns (A, B)."""
        ux = SuperPoly.u(1, 1, 1)
        ux_mono = next(iter(ux.terms))
        rows = {}
        for a, b in self.tails:
            for m, c in a.terms.items():
                rows[m] = rows.get(m, zero(1)) + b * c
        A = zero(1)
        B = zero(1)
        for m, r in rows.items():
            if not r.terms:
                continue
            mono = SuperPoly({m: 1}, 1)
            if m == ux_mono:
                B = B + r
                continue
            if len(r.terms) == 1 and next(iter(r.terms)) == ux_mono:
                A = A + mono * r.terms[ux_mono]
                continue
            raise RecursionNotQuasiLocal("tail does not reduce to the hydrodynamic shape")
        return A, B

    def terms(self):
        return [(a, s) for s, a in sorted(self.local.items())]

    def __repr__(self):
        from .ring import to_text
        loc = " + ".join(f"({to_text(a)})d^{s}" for s, a in sorted(self.local.items()))
        tl = " + ".join(f"({to_text(a)})d^-1({to_text(b)})" for a, b in self.tails)
        return f"PsiOp[{loc}{' + ' if tl and loc else ''}{tl}]"


def _compose_local(L, M, limit):
    """(sum a_s d^s) o (sum b_t d^t) via Leibniz."""
    out = {}
    for s, a in L.items():
        for t, b in M.items():
            db = b
            for k in range(s + 1):
                if k:
                    db = total_derivative(db, 1)
                if not db.terms:
                    break
                power = s - k + t
                term = mul(a, db) * binom(s, k)
                if limit is not None:
                    term = _trunc(term, limit - power)
                if term.terms:
                    out[power] = out.get(power, zero(1)) + term
    return out


def _dinv_local(M):
    """d^{-1} o M = N + d^{-1} o c with N local and c = M^dagger(1)."""
    work = {s: a for s, a in M.items() if a.terms}
    N = {}
    while work:
        k = max(work)
        if k == 0:
            break
        m = work.pop(k)
        # d^{-1} m d^k = m d^{k-1} - d^{-1} m' d^{k-1}
        N[k - 1] = N.get(k - 1, zero(1)) + m
        work[k - 1] = work.get(k - 1, zero(1)) - total_derivative(m, 1)
        if not work[k - 1].terms:
            del work[k - 1]
    c = work.get(0, zero(1))
    return N, c


def series_inverse_d_minus_d3(max_degree):
    """(d - d^3)^{-1} = d^{-1} + d + d^3 + ... truncated at max_degree."""
    op = PsiOp.d_inverse(max_degree)
    k = 1
    while k <= max_degree:
        op = op + PsiOp.d(k, max_degree)
        k += 2
    return op
