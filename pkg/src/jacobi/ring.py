"""Exact arithmetic in the super-commutative algebra of differential polynomials.

Even variables u^{i,s} (jet order s of component i), odd variables theta_i^s and
one extra odd variable zeta.  Coefficients are exact rationals (gmpy2.mpq).

A monomial is a pair ``(evens, odds)``:

* ``evens`` -- tuple of ``((i, s), exponent)`` sorted by ``(i, s)``;
* ``odds``  -- sorted tuple of odd keys.  zeta has key ``(0, 0)`` and
  theta_i^s has key ``(i, s)``, so zeta always comes first.

The product of odd factors is read left to right in the stored order, which
makes the canonical form unique.
"""
from __future__ import annotations

from bisect import bisect_left, bisect_right
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Callable, Iterable

import gmpy2
from gmpy2 import mpq

from .errors import NotRepresentable, SubstitutionError, TruncationOverflow

ZETA = (0, 0)
ONE_MONO = ((), ())

_ZERO = mpq(0)
_ONE = mpq(1)


def to_q(x) -> mpq:
    if isinstance(x, Fraction):
        return mpq(x.numerator, x.denominator)
    return mpq(x)


def _norm_exp(e):
    """Exponents are ints when integral, Fractions otherwise."""
    if isinstance(e, int):
        return e
    e = Fraction(int(mpq(e).numerator), int(mpq(e).denominator)) if not isinstance(e, Fraction) else e
    if e.denominator == 1:
        return int(e.numerator)
    return e


def rational_power(c, e) -> mpq:
    """c**e for rational e, exact or NotRepresentable."""
    c = to_q(c)
    e = _norm_exp(e)
    if isinstance(e, int):
        if c == 0 and e < 0:
            raise ZeroDivisionError("zero to a negative power")
        return c ** e
    p, q = e.numerator, e.denominator
    if c == 0:
        if p < 0:
            raise ZeroDivisionError("zero to a negative power")
        return _ZERO
    sign = 1
    if c < 0:
        if q % 2 == 0:
            raise NotRepresentable(f"({c})^({e}) is not real")
        sign = -1
        c = -c
    num, ok1 = gmpy2.iroot(gmpy2.mpz(c.numerator), q)
    den, ok2 = gmpy2.iroot(gmpy2.mpz(c.denominator), q)
    if not (ok1 and ok2):
        raise NotRepresentable(f"({c})^({e}) is irrational")
    return (mpq(sign * num, den)) ** p


# ---------------------------------------------------------------- variables

@dataclass(frozen=True, order=True)
class VariableId:
    kind: str  # "even", "odd" or "zeta"
    i: int = 0
    s: int = 0

    def __post_init__(self):
        if self.kind not in ("even", "odd", "zeta"):
            raise ValueError(f"bad variable kind {self.kind!r}")
        if self.kind != "zeta" and (self.i < 1 or self.s < 0):
            raise ValueError(f"bad variable index {self}")

    @staticmethod
    def u(i, s=0):
        return VariableId("even", i, s)

    @staticmethod
    def theta(i, s=0):
        return VariableId("odd", i, s)

    @staticmethod
    def zeta():
        return VariableId("zeta")

    def __str__(self):
        if self.kind == "zeta":
            return "z"
        return f"{'u' if self.kind == 'even' else 't'}[{self.i},{self.s}]"


# ---------------------------------------------------------------- monomials

def _merge_evens(a, b):
    if not a:
        return b
    if not b:
        return a
    d = dict(a)
    for k, e in b:
        v = d.get(k)
        if v is None:
            d[k] = e
        else:
            v = v + e
            if v == 0:
                del d[k]
            else:
                d[k] = _norm_exp(v) if not isinstance(v, int) else v
    return tuple(sorted(d.items()))


def _merge_odds(a, b):
    """Return (sign, merged) for the ordered product a*b, or None if zero."""
    if not a:
        return 1, b
    if not b:
        return 1, a
    inv = 0
    la = len(a)
    for y in b:
        pos = bisect_left(a, y)
        if pos < la and a[pos] == y:
            return None
        inv += la - pos
    return (-1 if inv & 1 else 1), tuple(sorted(a + b))


def mono_mul(m1, m2):
    r = _merge_odds(m1[1], m2[1])
    if r is None:
        return None
    sign, odds = r
    return sign, (_merge_evens(m1[0], m2[0]), odds)


def mono_degree(m) -> int:
    d = 0
    for (i, s), e in m[0]:
        if s:
            d += s * e
    for i, s in m[1]:
        d += s
    return d


def mono_super_degree(m) -> int:
    return len(m[1])


def mono_has_zeta(m) -> bool:
    return bool(m[1]) and m[1][0] == ZETA


# ---------------------------------------------------------------- polynomials

class SuperPoly:
    """Finite sum of rational multiples of monomials; immutable."""

    __slots__ = ("terms", "n", "_hash")

    def __init__(self, terms=None, n: int = 1):
        self.terms = terms if terms is not None else {}
        self.n = n
        self._hash = None

    # construction
    @classmethod
    def const(cls, c, n=1):
        c = to_q(c)
        return cls({ONE_MONO: c} if c else {}, n)

    @classmethod
    def u(cls, i, s=0, n=None, exp=1):
        return cls({((((i, s), _norm_exp(exp)),), ()): _ONE}, max(n or 1, i))

    @classmethod
    def theta(cls, i, s=0, n=None):
        return cls({((), ((i, s),)): _ONE}, max(n or 1, i))

    @classmethod
    def zeta(cls, n=1):
        return cls({((), (ZETA,)): _ONE}, n)

    @classmethod
    def from_terms(cls, items, n=1):
        d = {}
        for m, c in items:
            c = to_q(c)
            if not c:
                continue
            v = d.get(m)
            v = c if v is None else v + c
            if v:
                d[m] = v
            else:
                d.pop(m, None)
        return cls(d, n)

    def with_n(self, n):
        return SuperPoly(self.terms, max(n, self.n))

    # basic protocol
    def __bool__(self):
        return bool(self.terms)

    def is_zero(self):
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __eq__(self, other):
        if isinstance(other, SuperPoly):
            return self.terms == other.terms
        if isinstance(other, (int, Fraction)) or type(other) is type(_ONE):
            return self.terms == SuperPoly.const(other).terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __repr__(self):
        return f"SuperPoly({to_text(self)!r})"

    def __str__(self):
        return to_text(self)

    # arithmetic
    def _coerce(self, other):
        if isinstance(other, SuperPoly):
            return other
        return SuperPoly.const(other, self.n)

    def __add__(self, other):
        other = self._coerce(other)
        if not other.terms:
            return SuperPoly(self.terms, max(self.n, other.n))
        if not self.terms:
            return SuperPoly(other.terms, max(self.n, other.n))
        d = dict(self.terms)
        for m, c in other.terms.items():
            v = d.get(m)
            if v is None:
                d[m] = c
            else:
                v = v + c
                if v:
                    d[m] = v
                else:
                    del d[m]
        return SuperPoly(d, max(self.n, other.n))

    __radd__ = __add__

    def __neg__(self):
        return SuperPoly({m: -c for m, c in self.terms.items()}, self.n)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if not isinstance(other, SuperPoly):
            c = to_q(other)
            if not c:
                return SuperPoly({}, self.n)
            return SuperPoly({m: v * c for m, v in self.terms.items()}, self.n)
        return mul(self, other)

    def __rmul__(self, other):
        # scalars commute with everything
        return self.__mul__(other)

    def __truediv__(self, other):
        if isinstance(other, SuperPoly):
            return mul(self, power(other, -1))
        return self * (1 / to_q(other))

    def __pow__(self, e):
        return power(self, e)

    # structure
    def coefficient(self, mono):
        return self.terms.get(mono, _ZERO)

    def constant_term(self):
        return self.terms.get(ONE_MONO, _ZERO)

    def super_degrees(self):
        return sorted({len(m[1]) for m in self.terms})

    def super_degree(self):
        """The super-degree when homogeneous (0 for the zero polynomial)."""
        ds = self.super_degrees()
        if not ds:
            return 0
        if len(ds) > 1:
            raise ValueError(f"not homogeneous in super-degree: {ds}")
        return ds[0]

    def super_part(self, p):
        return SuperPoly({m: c for m, c in self.terms.items() if len(m[1]) == p}, self.n)

    def degrees(self):
        return sorted({mono_degree(m) for m in self.terms})

    def degree_part(self, d):
        return SuperPoly({m: c for m, c in self.terms.items() if mono_degree(m) == d}, self.n)

    def max_order(self) -> int:
        """Highest jet order among all variables (-1 for constants)."""
        best = -1
        for ev, od in self.terms:
            for (i, s), e in ev:
                if s > best:
                    best = s
            for i, s in od:
                if i and s > best:
                    best = s
        return best

    def components(self):
        out = set()
        for ev, od in self.terms:
            out.update(i for (i, s), e in ev)
            out.update(i for i, s in od if i)
        return out

    def even_vars(self):
        out = set()
        for ev, od in self.terms:
            out.update(k for k, e in ev)
        return out

    def odd_vars(self):
        out = set()
        for ev, od in self.terms:
            out.update(od)
        return out

    def has_zeta(self):
        return any(mono_has_zeta(m) for m in self.terms)

    def is_local(self):
        return not self.has_zeta()

    def is_polynomial(self):
        """True when every exponent is a nonnegative integer."""
        for ev, od in self.terms:
            for k, e in ev:
                if not isinstance(e, int) or e < 0:
                    return False
        return True

    def map_coeffs(self, fn):
        return SuperPoly.from_terms(((m, fn(c)) for m, c in self.terms.items()), self.n)

    def filter(self, pred):
        return SuperPoly({m: c for m, c in self.terms.items() if pred(m)}, self.n)

    def sorted_terms(self):
        return sorted(self.terms.items(), key=lambda mc: mono_sort_key(mc[0]))


def mono_sort_key(m):
    ev, od = m
    return (mono_degree(m), len(od), od, tuple((k, Fraction(e)) for k, e in ev))


def zero(n=1):
    return SuperPoly({}, n)


def const(c, n=1):
    return SuperPoly.const(c, n)


def u(i, s=0, n=None):
    return SuperPoly.u(i, s, n)


def theta(i, s=0, n=None):
    return SuperPoly.theta(i, s, n)


def zeta(n=1):
    return SuperPoly.zeta(n)


def variable(v: VariableId, n=None):
    if v.kind == "even":
        return u(v.i, v.s, n)
    if v.kind == "odd":
        return theta(v.i, v.s, n)
    return zeta(n or 1)


def mul(a: SuperPoly, b: SuperPoly) -> SuperPoly:
    n = max(a.n, b.n)
    if not a.terms or not b.terms:
        return SuperPoly({}, n)
    d = {}
    for m1, c1 in a.terms.items():
        ev1, od1 = m1
        for m2, c2 in b.terms.items():
            r = _merge_odds(od1, m2[1])
            if r is None:
                continue
            sign, odds = r
            m = (_merge_evens(ev1, m2[0]), odds)
            c = c1 * c2
            if sign < 0:
                c = -c
            v = d.get(m)
            if v is None:
                d[m] = c
            else:
                v = v + c
                if v:
                    d[m] = v
                else:
                    del d[m]
    return SuperPoly(d, n)


def add_all(polys: Iterable[SuperPoly], n=1) -> SuperPoly:
    d = {}
    for p in polys:
        n = max(n, p.n)
        for m, c in p.terms.items():
            v = d.get(m)
            if v is None:
                d[m] = c
            else:
                v = v + c
                if v:
                    d[m] = v
                else:
                    del d[m]
    return SuperPoly(d, n)


def linear_combination(pairs, n=1) -> SuperPoly:
    """Sum of c*p over (c, p) pairs."""
    d = {}
    for c, p in pairs:
        c = to_q(c)
        if not c:
            continue
        n = max(n, p.n)
        for m, v0 in p.terms.items():
            v = d.get(m)
            if v is None:
                d[m] = v0 * c
            else:
                v = v + v0 * c
                if v:
                    d[m] = v
                else:
                    del d[m]
    return SuperPoly(d, n)


# ---------------------------------------------------------------- powers

def _mono_power(m, e):
    ev, od = m
    if od:
        if e == 0:
            return ONE_MONO
        if e == 1:
            return m
        if isinstance(e, int) and e > 1:
            return None
        raise NotRepresentable("odd monomials only admit exponents 0 and 1")
    out = []
    for (i, s), x in ev:
        y = _norm_exp(x * e)
        if s > 0 and (not isinstance(y, int) or y < 0):
            raise NotRepresentable(f"u[{i},{s}] cannot carry exponent {y}")
        if y != 0:
            out.append(((i, s), y))
    return (tuple(out), ())


def power(f: SuperPoly, e, policy: "TruncationPolicy | None" = None) -> SuperPoly:
    """f**e.  Nonnegative integer powers always work.  Other exponents need a
    single-term degree-0 leading part; the tail is expanded as a binomial series
    truncated by ``policy``."""
    e = _norm_exp(e)
    if isinstance(e, int) and e >= 0:
        result = SuperPoly.const(1, f.n)
        base = f
        while e:
            if e & 1:
                result = mul(result, base)
            e >>= 1
            if e:
                base = mul(base, base)
        return result
    if not f.terms:
        raise ZeroDivisionError("power of zero polynomial")
    if len(f.terms) == 1:
        (m, c), = f.terms.items()
        mm = _mono_power(m, e)
        return SuperPoly({mm: rational_power(c, e)}, f.n)
    lead = f.degree_part(0)
    if len(lead.terms) != 1:
        raise NotRepresentable("power of a polynomial whose degree-zero part is not a single term")
    (m0, c0), = lead.terms.items()
    if m0[1] or any(s > 0 for (i, s), x in m0[0]):
        raise NotRepresentable("leading term must involve only order-zero even variables")
    if policy is None:
        raise TruncationOverflow("series expansion needs a TruncationPolicy")
    inv_lead = SuperPoly({_mono_power(m0, -1): 1 / c0}, f.n)
    ratio = mul(f - lead, inv_lead)  # degree >= 1 part relative to the leading term
    lead_pow = SuperPoly({_mono_power(m0, e): rational_power(c0, e)}, f.n)
    total = SuperPoly.const(1, f.n)
    term = SuperPoly.const(1, f.n)
    coeff = Fraction(1)
    k = 0
    while True:
        k += 1
        term = truncate(mul(term, ratio), policy.max_degree)
        if not term.terms:
            break
        coeff = coeff * (Fraction(e) - (k - 1)) / k
        if coeff == 0:
            break
        total = total + term * coeff
    return truncate(mul(lead_pow, total), policy.max_degree)


# ---------------------------------------------------------------- truncation

@dataclass(frozen=True)
class TruncationPolicy:
    max_degree: int
    on_overflow: str = "truncate"

    def __post_init__(self):
        if self.max_degree < 0:
            raise ValueError("max_degree must be nonnegative")
        if self.on_overflow not in ("truncate", "error"):
            raise ValueError("on_overflow is 'truncate' or 'error'")

    def apply(self, f: SuperPoly) -> SuperPoly:
        if self.on_overflow == "error":
            if any(mono_degree(m) > self.max_degree for m in f.terms):
                raise TruncationOverflow(f"terms above degree {self.max_degree}")
            return f
        return truncate(f, self.max_degree)


def truncate(f: SuperPoly, max_degree: int) -> SuperPoly:
    return SuperPoly({m: c for m, c in f.terms.items() if mono_degree(m) <= max_degree}, f.n)


def degree_decompose(f: SuperPoly):
    """List of (d, homogeneous part) in increasing d; empty for zero."""
    parts = {}
    for m, c in f.terms.items():
        parts.setdefault(mono_degree(m), {})[m] = c
    return [(d, SuperPoly(parts[d], f.n)) for d in sorted(parts)]


def order_nu(f: SuperPoly) -> int:
    """Smallest degree with a nonzero component."""
    if not f.terms:
        raise ValueError("the zero polynomial has no order")
    return min(mono_degree(m) for m in f.terms)


# ---------------------------------------------------------------- derivatives

def partial_u(f: SuperPoly, i: int, s: int) -> SuperPoly:
    if s < 0:
        return SuperPoly({}, f.n)
    key = (i, s)
    d = {}
    for (ev, od), c in f.terms.items():
        for idx, (k, e) in enumerate(ev):
            if k == key:
                e1 = e - 1
                if e1 == 0:
                    nev = ev[:idx] + ev[idx + 1:]
                else:
                    nev = ev[:idx] + ((k, _norm_exp(e1) if not isinstance(e1, int) else e1),) + ev[idx + 1:]
                m = (nev, od)
                v = d.get(m, _ZERO) + c * to_q(e)
                if v:
                    d[m] = v
                else:
                    d.pop(m, None)
                break
    return SuperPoly(d, f.n)


def _partial_odd(f: SuperPoly, key) -> SuperPoly:
    d = {}
    for (ev, od), c in f.terms.items():
        if not od:
            continue
        pos = bisect_left(od, key)
        if pos < len(od) and od[pos] == key:
            m = (ev, od[:pos] + od[pos + 1:])
            v = d.get(m, _ZERO) + (-c if pos & 1 else c)
            if v:
                d[m] = v
            else:
                d.pop(m, None)
    return SuperPoly(d, f.n)


def partial_theta(f: SuperPoly, i: int, s: int) -> SuperPoly:
    """Left derivative with respect to theta_i^s."""
    if s < 0:
        return SuperPoly({}, f.n)
    return _partial_odd(f, (i, s))


def partial_zeta(f: SuperPoly) -> SuperPoly:
    """Left derivative with respect to zeta (zeta is always first)."""
    d = {}
    for (ev, od), c in f.terms.items():
        if od and od[0] == ZETA:
            d[(ev, od[1:])] = c
    return SuperPoly(d, f.n)


def partial(f: SuperPoly, v: VariableId) -> SuperPoly:
    if v.kind == "even":
        return partial_u(f, v.i, v.s)
    if v.kind == "odd":
        return partial_theta(f, v.i, v.s)
    return partial_zeta(f)


def _insert_front(rest, key):
    """Sign and sorted tuple for key * rest (key placed in front)."""
    pos = bisect_left(rest, key)
    if pos < len(rest) and rest[pos] == key:
        return None
    return (-1 if pos & 1 else 1), rest[:pos] + (key,) + rest[pos:]


def total_derivative(f: SuperPoly, n: int | None = None) -> SuperPoly:
    """The even derivation u^{i,s+1}d_{i,s} + theta_i^{s+1}d^i_s - (u^{i,1}theta_i)d_zeta."""
    n = max(n or 1, f.n)
    d = {}

    def put(m, c):
        v = d.get(m)
        if v is None:
            d[m] = c
        else:
            v = v + c
            if v:
                d[m] = v
            else:
                del d[m]

    for (ev, od), c in f.terms.items():
        for idx, ((i, s), e) in enumerate(ev):
            # replace u^{i,s}^e by e u^{i,s}^(e-1) u^{i,s+1}
            dd = dict(ev)
            e1 = e - 1
            if e1 == 0:
                del dd[(i, s)]
            else:
                dd[(i, s)] = e1 if isinstance(e1, int) else _norm_exp(e1)
            dd[(i, s + 1)] = dd.get((i, s + 1), 0) + 1
            put((tuple(sorted(dd.items())), od), c * to_q(e))
        if not od:
            continue
        start = 0
        if od[0] == ZETA:
            start = 1
            rest = od[1:]
            for i in range(1, n + 1):
                r = _insert_front(rest, (i, 0))
                if r is None:
                    continue
                sign, nod = r
                nev = _merge_evens(ev, (((i, 1), 1),))
                put((nev, nod), -c if sign > 0 else c)
        for idx in range(start, len(od)):
            i, s = od[idx]
            nk = (i, s + 1)
            if idx + 1 < len(od) and od[idx + 1] == nk:
                continue
            # theta_i^{s+1} sorts into the same slot, no sign
            put((ev, od[:idx] + (nk,) + od[idx + 1:]), c)
    return SuperPoly(d, n)


def total_derivative_power(f: SuperPoly, k: int, n: int | None = None) -> SuperPoly:
    for _ in range(k):
        f = total_derivative(f, n)
    return f


# ---------------------------------------------------------------- substitution

def substitute_jets(f: SuperPoly, jet_image: Callable[[int, int], SuperPoly],
                    policy: TruncationPolicy | None = None, n: int | None = None) -> SuperPoly:
    """Ring homomorphism on even variables: u^{i,s} -> jet_image(i, s).

    Odd variables and zeta are left alone.  Non-integer or negative exponents
    are allowed only on order-zero variables, via ``power``.
    """
    out_n = n or f.n
    cache = {}

    def image_pow(i, s, e):
        key = (i, s, e)
        r = cache.get(key)
        if r is None:
            img = jet_image(i, s)
            if any(m[1] for m in img.terms):
                raise SubstitutionError("substitution images must have super-degree zero")
            r = power(img, e, policy)
            cache[key] = r
        return r

    total = {}
    for (ev, od), c in f.terms.items():
        acc = SuperPoly({((), od): c}, out_n)
        for (i, s), e in ev:
            acc = mul(image_pow(i, s, e), acc)
            if policy is not None:
                acc = truncate(acc, policy.max_degree)
            if not acc.terms:
                break
        for m, v in acc.terms.items():
            w = total.get(m, _ZERO) + v
            if w:
                total[m] = w
            else:
                total.pop(m, None)
    res = SuperPoly(total, out_n)
    if policy is not None:
        res = policy.apply(res) if policy.on_overflow == "error" else truncate(res, policy.max_degree)
    return res


def substitute(f: SuperPoly, mapping: dict, policy: TruncationPolicy | None = None,
               n: int | None = None) -> SuperPoly:
    """Substitute u^i -> mapping[i] with jet prolongation u^{i,s} -> d^s(mapping[i]).

    Components absent from ``mapping`` are left unchanged.
    """
    for img in mapping.values():
        if any(m[1] for m in img.terms):
            raise SubstitutionError("substitution images must have super-degree zero")
    out_n = n or max([f.n] + [img.n for img in mapping.values()])
    jets = {}

    def jet(i, s):
        if i not in mapping:
            return SuperPoly.u(i, s, out_n)
        key = (i, s)
        if key not in jets:
            if s == 0:
                jets[key] = mapping[i].with_n(out_n)
            else:
                prev = jet(i, s - 1)
                d = total_derivative(prev, out_n)
                jets[key] = truncate(d, policy.max_degree) if policy else d
        return jets[key]

    return substitute_jets(f, jet, policy, out_n)


def scalar_only(f: SuperPoly):
    """The rational value of a constant polynomial, else None."""
    if not f.terms:
        return _ZERO
    if len(f.terms) == 1 and ONE_MONO in f.terms:
        return f.terms[ONE_MONO]
    return None


# ---------------------------------------------------------------- text form

def _fmt_q(c) -> str:
    c = to_q(c)
    if c.denominator == 1:
        return str(c.numerator)
    return f"{c.numerator}/{c.denominator}"


def _fmt_exp(e) -> str:
    e = _norm_exp(e)
    if isinstance(e, int) and e >= 0:
        return str(e)
    return f"({e})"


def mono_to_text(m) -> str:
    ev, od = m
    parts = []
    for (i, s), e in ev:
        t = f"u[{i},{s}]"
        if e != 1:
            t += "^" + _fmt_exp(e)
        parts.append(t)
    for k in od:
        parts.append("z" if k == ZETA else f"t[{k[0]},{k[1]}]")
    return "*".join(parts)


def to_text(f: SuperPoly) -> str:
    if not f.terms:
        return "0"
    out = []
    for idx, (m, c) in enumerate(f.sorted_terms()):
        neg = c < 0
        a = -c if neg else c
        mt = mono_to_text(m)
        if mt and a == 1:
            body = mt
        elif mt:
            body = f"{_fmt_q(a)}*{mt}"
        else:
            body = _fmt_q(a)
        if idx == 0:
            out.append(("-" if neg else "") + body)
        else:
            out.append((" - " if neg else " + ") + body)
    return "".join(out)


def to_json(f: SuperPoly):
    out = []
    for m, c in f.sorted_terms():
        ev, od = m
        mono = []
        for (i, s), e in ev:
            e = _norm_exp(e)
            mono.append(["u", i, s, e if isinstance(e, int) else str(e)])
        for k in od:
            mono.append(["z", 0, 0, 1] if k == ZETA else ["t", k[0], k[1], 1])
        out.append({"coeff": _fmt_q(c), "mono": mono})
    return out


def from_json(data, n=None) -> SuperPoly:
    items = []
    maxi = n or 1
    for entry in data:
        c = mpq(str(entry["coeff"]))
        acc = SuperPoly.const(c)
        for kind, i, s, e in entry["mono"]:
            if kind == "u":
                f = SuperPoly.u(int(i), int(s), exp=Fraction(str(e)))
            elif kind == "t":
                if int(e) != 1:
                    f = SuperPoly.const(0)
                else:
                    f = SuperPoly.theta(int(i), int(s))
            elif kind == "z":
                f = SuperPoly.zeta()
            else:
                raise ValueError(f"unknown variable kind {kind!r}")
            maxi = max(maxi, f.n)
            acc = mul(acc, f)
        items.append(acc)
    return add_all(items, maxi)


def parse(text: str, n: int | None = None) -> SuperPoly:
    from .parser import parse_expression
    return parse_expression(text, n=n)


def binom(a, b) -> int:
    return comb(a, b) if 0 <= b <= a else 0
