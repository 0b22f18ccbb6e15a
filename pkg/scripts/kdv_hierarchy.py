"""Lenard-Magri recursion for the KdV pair (Q0, Q1)."""
import argparse
from dataclasses import dataclass

from jacobi.catalog import kdv_structures
from jacobi.integrable import Hierarchy, verify_involution
from jacobi.ring import parse, to_text
from jacobi.varcalc import flow_components


@dataclass
class Config:
    h0: str = "1/2*u[1]^2"
    steps: int = 3


def run(cfg: Config):
    Q = kdv_structures()
    h = Hierarchy.generate(Q["Q0"].density, Q["Q1"].density, parse(cfg.h0), cfg.steps)
    return h, verify_involution(h)


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--h0", default=Config.h0)
    ap.add_argument("--steps", type=int, default=Config.steps)
    a = ap.parse_args()
    h, rep = run(Config(a.h0, a.steps))
    for k, H in enumerate(h.hamiltonians):
        print(f"H{k} = {to_text(H)}")
    for k, X in enumerate(h.flows, 1):
        print(f"u_t{k} = {to_text(flow_components(X)[0])}")
    print(f"involution: {bool(rep)}")


if __name__ == "__main__":
    main()
