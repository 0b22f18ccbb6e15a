"""Locality of the reciprocal images of the four KdV structures.

For each density rho with leading term u^kappa, report whether Phi(Q_i) is
local, together with the nonlocal charge when it is defined.
"""
import argparse
import json
from dataclasses import asdict, dataclass

from jacobi.catalog import KAPPA_TABLE, kappa_table


@dataclass
class Config:
    max_degree: int = 6     # truncation for the kappa = 1/2 series density
    json: bool = False


def run(cfg: Config):
    rows = []
    for (kappa, i), w in kappa_table(cfg.max_degree).items():
        rows.append({"kappa": kappa, "Q": i, "local": bool(w), "expected": KAPPA_TABLE[kappa, i],
                     "z": None if w.charge is None else str(w.charge),
                     "obstruction": None if w.obstruction is None else w.obstruction[0]})
    return rows


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--max-degree", type=int, default=Config.max_degree)
    ap.add_argument("--json", action="store_true")
    a = ap.parse_args()
    cfg = Config(a.max_degree, a.json)
    rows = run(cfg)
    if cfg.json:
        print(json.dumps({"config": asdict(cfg), "rows": rows}, indent=1))
        return
    for r in rows:
        mark = "ok" if r["local"] == r["expected"] else "MISMATCH"
        why = r["obstruction"] or ""
        print(f"kappa={r['kappa']:>3}  Q{r['Q']}  local={r['local']!s:5}  {why:14} {mark}")


if __name__ == "__main__":
    main()
