"""Send the Camassa-Holm structures K_0..K_3 to KdV coordinates.

The map is the reciprocal transformation with rho = sqrt(m) followed by the
Miura map u = 1/(4m) + m_xx/(4m) - 3 m_x^2/(16 m^2).  For each K_k the script
prints the constant c with image = c Q_{3-k}.
"""
import argparse
from dataclasses import dataclass
from fractions import Fraction

from jacobi.catalog import ch_bridge_report


@dataclass
class Config:
    max_degree: int = 5
    j0_scales: tuple = (Fraction(1), Fraction(1, 4))


def run(cfg: Config):
    return {s: ch_bridge_report(cfg.max_degree, s) for s in cfg.j0_scales}


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-degree", type=int, default=Config.max_degree)
    ap.add_argument("--scale", action="append", type=Fraction, help="factor in front of d - d^3")
    a = ap.parse_args()
    cfg = Config(a.max_degree, tuple(a.scale) if a.scale else Config.j0_scales)
    for scale, rep in run(cfg).items():
        print(f"J0 = {scale} (d - d^3), degrees <= {cfg.max_degree}")
        for k, c in rep.items():
            target = f"Q{3 - int(k[1])}"
            print(f"  {k} -> " + (f"{c} * {target}" if c is not None else "not a multiple of " + target))


if __name__ == "__main__":
    main()
