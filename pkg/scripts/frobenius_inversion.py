"""Bihamiltonian structure of a polynomial Frobenius potential and its inversion.

Builds P1 (flat metric) and P2 (intersection form), applies the reciprocal
transformation with rho = v^n and the inversion coordinates, and compares
with the structures built from the inverted potential.
"""
import argparse
from dataclasses import dataclass, field
from fractions import Fraction

from jacobi.catalog import frobenius_build, frobenius_inversion


@dataclass
class Config:
    potential: str = "1/2*u[1]^2*u[2] + u[2]^4"
    weights: list = field(default_factory=lambda: [Fraction(1), Fraction(2, 3)])
    n: int = 2


PRESETS = {
    "a2": Config(),
    "a3": Config("1/2*u[1]^2*u[3] + 1/2*u[1]*u[2]^2 + 1/4*u[2]^2*u[3]^2 + 1/60*u[3]^5",
                 [Fraction(1), Fraction(3, 4), Fraction(1, 2)], 3),
}


def run(cfg: Config):
    fd, P1, P2 = frobenius_build(cfg.potential, cfg.weights, n=cfg.n)
    return fd, frobenius_inversion(fd)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("preset", nargs="?", default="a2", choices=sorted(PRESETS))
    cfg = PRESETS[ap.parse_args().preset]
    fd, rep = run(cfg)
    print(f"F = {fd.F}   d = {fd.charge}")
    print(f"g = {fd.g.tolist()}")
    print(f"F~ = {rep.F_tilde}   d~ = {rep.charge_tilde}   (2 - d = {2 - fd.charge})")
    print(f"images local: {[bool(w) for w in rep.local]}   match F~ structures: {rep.match}")


if __name__ == "__main__":
    main()
