"""Operator identities for momenta, higher Euler and energy operators.

Each checker takes densities of super-degree 0 and returns a list of the
identities that failed (empty when all hold).
"""
from __future__ import annotations

from jacobi.ring import SuperPoly, add_all, binom, mul, partial_u, total_derivative
from jacobi.varcalc import (d_power, energy, energy_s, higher_euler, momentum,
                            variational_derivative)


def _order(f):
    return max([s for ev, _ in f.terms for (_, s), _e in ev] + [0])


def _ux_delta(f, s, n):
    """u^{i,1} delta_{i,s}(f)."""
    return add_all([mul(SuperPoly.u(i, 1, n), higher_euler(f, i, s, n)) for i in range(1, n + 1)], n)


def first_identities(f, g, n, alphas=(1, 2), ss=(0, 1, 2)):
    fails = []
    T = _order(f) + _order(g) + 3
    d = lambda h, k=1: d_power(h, k, n)
    df = d(f)
    if energy_s(f, -1, n) != df:
        fails.append("E_-1 = d")
    if energy(df, n).terms:
        fails.append("E d = 0")
    if d(energy(f, n)) != -_ux_delta(f, 0, n):
        fails.append("d E = -u^{i,1} delta_i")
    for s in ss:
        if energy_s(df, s, n) != energy_s(f, s - 1, n):
            fails.append(f"E_{s} d = E_{s - 1}")
        if d(energy_s(f, s, n)) != energy_s(f, s - 1, n) - _ux_delta(f, s, n):
            fails.append(f"d E_{s}")
        lhs = energy_s(mul(f, g), s, n)
        rhs = add_all([(mul(energy_s(f, s + t, n), d(g, t)) + mul(d(f, t), energy_s(g, s + t, n)))
                       * ((-1) ** t * binom(t + s, s)) for t in range(T)], n)
        if lhs != rhs:
            fails.append(f"E_{s}(fg)")
        for i in range(1, n + 1):
            for a in alphas:
                p = lambda h, a_, s_: momentum(h, i, a_, s_, n)
                if p(df, a, s) != p(f, a, s - 1):
                    fails.append(f"p_{i},{a},{s} d")
                if d(p(f, a, s)) != p(f, a, s - 1) - p(f, a - 1, s):
                    fails.append(f"d p_{i},{a},{s}")
                lhs = p(mul(f, g), a, s)
                rhs = add_all([(mul(p(f, a, s + t), d(g, t)) + mul(d(f, t), p(g, a, s + t)))
                               * ((-1) ** t * binom(t + s, s)) for t in range(T)], n)
                if lhs != rhs:
                    fails.append(f"p_{i},{a},{s}(fg)")
                lhs = add_all([d(p(f, a, s + t), t) * binom(t + s, s) for t in range(T)], n)
                if lhs != partial_u(f, i, a + s):
                    fails.append(f"sum d^t p = d_{i},{a + s}")
            lhs = add_all([d(mul(f, momentum(g, i, a, t, n)), t) for a in alphas for t in range(T)], n)
            rhs = add_all([mul(d(f, t), partial_u(g, i, a + t)) for a in alphas for t in range(T)], n)
            if lhs != rhs:
                fails.append(f"sum d^t(f p(g)) [{i}]")
    lhs = energy(mul(f, g), n)
    rhs = add_all([(mul(energy_s(f, t, n), d(g, t)) + mul(d(f, t), energy_s(g, t, n))) * (-1) ** t
                   for t in range(T)], n) - mul(f, g)
    if lhs != rhs:
        fails.append("E(fg)")
    A = max(_order(f), 1) + 2
    for t in (0, 1, 2):
        lhs = add_all([d(energy_s(f, s + t, n), s) * binom(s + t, t) for s in range(T)], n)
        rhs = add_all([mul(SuperPoly.u(i, a, n), partial_u(f, i, a + t)) * binom(a + t, t + 1)
                       for i in range(1, n + 1) for a in range(1, A + T)], n)
        if lhs != rhs:
            fails.append(f"sum d^s E_(s+{t})")
        lhs = add_all([d(mul(f, energy_s(g, tt, n)), tt) for tt in range(T)], n)
        rhs = add_all([mul(d(mul(f, SuperPoly.u(i, a, n)), tt), partial_u(g, i, a + tt))
                       for tt in range(T) for i in range(1, n + 1) for a in range(1, A + T)], n)
        if lhs != rhs:
            fails.append("sum d^t(f E_t(g))")
    return fails


def second_identities(f, n, ts=(0, 1, 2)):
    fails = []
    T = _order(f) + 4
    E = energy(f, n)
    for j in range(1, n + 1):
        dj = variational_derivative(f, j, n)
        if energy(dj, n) != partial_u(E, j, 0):
            fails.append(f"E delta_{j}")
        for t in ts:
            for i in range(1, n + 1):
                lhs = higher_euler(dj, i, t, n)
                rhs = partial_u(variational_derivative(f, i, n), j, t) * (-1) ** t
                if lhs != rhs:
                    fails.append(f"delta_{i},{t} delta_{j}")
            if t >= 1 and energy_s(dj, t, n) != partial_u(E, j, t) * (-1) ** t:
                fails.append(f"E_{t} delta_{j}")
    for t in ts:
        lhs = energy_s(E, t, n)
        rhs = add_all([d_power(energy_s(E, s + t, n), s, n) * binom(s + t, t) for s in range(T)], n)
        if lhs != rhs * (-1) ** t:
            fails.append(f"E_{t} E")
    return fails
