"""Command-line front end.

Exit codes: 0 the property holds (or the computation succeeded), 1 the
property fails, 2 usage, parse or domain errors.

Structures are given as expressions (``"1/2*t[1]*t[1,1]"``), as paths to JSON
files (a SuperPoly term list, an operator matrix or a hydrodynamic structure)
or by ``--catalog NAME``.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

from . import catalog
from .bracket import OperatorMatrix, bivector_from_operator, check_compatible, evaluate, sn_bracket
from .errors import JacobiError
from .geometry import (HydroStructure, central_invariants, charge_report, check_fera, check_locality,
                       extract_hydro, hydro_bivector)
from .integrable import Hierarchy, verify_involution
from .ring import SuperPoly, TruncationPolicy, from_json, parse, to_json, to_text, truncate
from .transform import MiuraMap, ReciprocalMap, miura_transform, reciprocal_transform
from .varcalc import zero_test_report


@dataclass
class Session:
    n: int | None
    policy: TruncationPolicy | None
    json_mode: bool

    def load(self, source: str) -> SuperPoly:
        path = Path(source)
        if path.suffix == ".json" or path.is_file():
            return load_structure_file(path, self.n)
        return parse(source, self.n)

    def trunc(self, P):
        return truncate(P, self.policy.max_degree) if self.policy else P


def load_structure_file(path: Path, n=None) -> SuperPoly:
    data = json.loads(path.read_text())
    if isinstance(data, list):
        return from_json(data, n)
    if "g" in data:
        return hydro_bivector(HydroStructure.from_json(data))
    if "entries" in data:
        return bivector_from_operator(OperatorMatrix.from_json(data))
    if "terms" in data:
        return from_json(data["terms"], data.get("n", n))
    raise ValueError(f"{path}: unrecognized structure file")


_MIURA_LINE = re.compile(r"^\s*miura\s*:\s*ubar\[(\d+)\]\s*=\s*(.+)$")
_RHO_LINE = re.compile(r"^\s*reciprocal\s*:\s*rho\s*=\s*(.+)$")


def load_map_file(text: str, n=None):
    """``miura: ubar[i] = <expr>`` lines and/or a ``reciprocal: rho = <expr>`` line."""
    images, rho = {}, None
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip() or line.lstrip().startswith("#"):
            continue
        if m := _MIURA_LINE.match(line):
            images[int(m.group(1))] = parse(m.group(2), n)
        elif m := _RHO_LINE.match(line):
            rho = parse(m.group(1), n)
        else:
            raise SyntaxError(f"map file line {lineno}: cannot parse {line!r}")
    return images, rho


def poly_out(P: SuperPoly, s: Session):
    return to_json(P) if s.json_mode else to_text(P)


def emit(report: dict, s: Session):
    if s.json_mode:
        print(json.dumps(report, sort_keys=True, default=str))
    else:
        for k, v in report.items():
            print(f"{k}: {v}")


def _structures(args, s: Session, count: int):
    items = []
    if args.catalog:
        items.extend(catalog.lookup(c).density for c in args.catalog)
    items.extend(s.load(x) for x in args.inputs)
    if len(items) < count:
        raise ValueError(f"need {count} structure(s), got {len(items)}")
    return items


def _rho(args, s):
    if args.rho is None and args.map is None:
        raise ValueError("a density is required (--rho or --map)")
    if args.rho is not None:
        return parse(args.rho, s.n)
    _, rho = load_map_file(Path(args.map).read_text(), s.n)
    if rho is None:
        raise ValueError("map file has no reciprocal line")
    return rho


# ---------------------------------------------------------------- verbs

def cmd_bracket(args, s):
    P, Q = _structures(args, s, 2)[:2]
    B = s.trunc(sn_bracket(P, Q, s.n))
    emit({"bracket": poly_out(B, s), "super_degree": B.super_degree() if B.terms else None}, s)
    return 0


def cmd_check_jacobi(args, s):
    P, = _structures(args, s, 1)[:1]
    if s.policy:
        ok = catalog.check_jacobi_upto(P, s.policy.max_degree, s.n)
    else:
        from .bracket import check_jacobi
        ok = check_jacobi(P, s.n)
    emit({"jacobi": ok}, s)
    return 0 if ok else 1


def cmd_check_compatible(args, s):
    P, Q = _structures(args, s, 2)[:2]
    if s.policy:
        ok = catalog.check_compatible_upto(P, Q, s.policy.max_degree, s.n)
    else:
        ok = check_compatible(P, Q, s.n)
    emit({"compatible": ok}, s)
    return 0 if ok else 1


def cmd_miura(args, s):
    P, = _structures(args, s, 1)[:1]
    images = {}
    if args.map:
        images, _ = load_map_file(Path(args.map).read_text(), s.n)
    for item in args.image or []:
        i, expr = item.split("=", 1)
        images[int(i)] = parse(expr, s.n)
    if not images:
        raise ValueError("no Miura images given (--map or --image i=expr)")
    n = max([s.n or 1, P.n] + [f.n for f in images.values()] + list(images))
    out = s.trunc(miura_transform(P, MiuraMap(images, n), s.policy))
    emit({"image": poly_out(out, s)}, s)
    return 0


def cmd_reciprocal(args, s):
    P, = _structures(args, s, 1)[:1]
    rho = _rho(args, s)
    n = max(s.n or 1, P.n, rho.n)
    out = s.trunc(reciprocal_transform(P, ReciprocalMap(rho, n), s.policy))
    emit({"image": poly_out(out, s)}, s)
    return 0


def cmd_locality(args, s):
    P, = _structures(args, s, 1)[:1]
    rho = _rho(args, s)
    w = check_locality(P, rho, s.policy, s.n, construct=args.construct)
    rep = {"local": w.local}
    if w.charge is not None:
        rep["z"] = str(w.charge)
    if w.obstruction is not None:
        kind, data = w.obstruction
        rep["obstruction"] = kind
        rep["detail"] = str(data) if not isinstance(data, SuperPoly) else poly_out(data, s)
    if w.density is not None:
        rep["density"] = poly_out(w.density, s)
    emit(rep, s)
    return 0 if w.local else 1


def cmd_charge(args, s):
    P, = _structures(args, s, 1)[:1]
    rep = charge_report(P, _rho(args, s), s.policy, s.n)
    emit({"z": str(rep.z), "c": str(rep.c), "sigma0": str(rep.sigma0)}, s)
    return 0


def cmd_fera(args, s):
    P, = _structures(args, s, 1)[:1]
    h = extract_hydro(P, s.n)
    rep = check_fera(h)
    emit({"structure": h.to_json(), "conditions": rep.conditions,
          "failures": {k: v for k, v in rep.failures.items() if v}}, s)
    return 0 if rep else 1


def cmd_central_invariants(args, s):
    P, Q = _structures(args, s, 2)[:2]
    rep = central_invariants(P, Q, canonical=args.canonical or None, n=s.n)
    emit({"lambda": [str(x) for x in rep.lam], "c": [str(x) for x in rep.c],
          "c_lambda": [str(x) for x in rep.c_lambda]}, s)
    return 0


def cmd_lenard(args, s):
    P, Q = _structures(args, s, 2)[:2]
    h = Hierarchy.generate(P, Q, parse(args.h0, s.n), args.steps, s.n)
    rep = verify_involution(h)
    out = h.to_json()
    out["involution"] = rep.ok
    if not rep.ok:
        out["failures"] = [list(f) for f in rep.failures]
    emit(out, s)
    return 0 if rep.ok else 1


def cmd_evaluate(args, s):
    P = catalog.lookup(args.catalog[0]).density if args.catalog else s.load(args.inputs[0])
    rest = args.inputs if args.catalog else args.inputs[1:]
    fs = [s.load(x) for x in rest]
    out = evaluate(P, fs, s.n)
    emit({"value": poly_out(out, s)}, s)
    return 0


def cmd_zero_test(args, s):
    P, = _structures(args, s, 1)[:1]
    r = zero_test_report(P, s.n)
    rep = {"zero": r.is_zero, "stage": r.stage}
    if r.constant is not None:
        rep["constant"] = str(r.constant)
    emit(rep, s)
    return 0 if r.is_zero else 1


def cmd_catalog(args, s):
    if args.action == "list":
        if s.json_mode:
            print(json.dumps(catalog.names()))
        else:
            print("\n".join(catalog.names()))
        return 0
    if not args.name:
        raise ValueError("catalog dump needs a structure name")
    st = catalog.lookup(args.name)
    out = {"name": st.label, "n": st.density.n, "terms": to_json(st.density), "note": st.note}
    if st.max_degree is not None:
        out["max_degree"] = st.max_degree
    print(json.dumps(out, sort_keys=True))
    return 0


VERBS = {
    "bracket": cmd_bracket,
    "check-jacobi": cmd_check_jacobi,
    "check-compatible": cmd_check_compatible,
    "miura": cmd_miura,
    "reciprocal": cmd_reciprocal,
    "locality": cmd_locality,
    "charge": cmd_charge,
    "fera": cmd_fera,
    "central-invariants": cmd_central_invariants,
    "lenard": cmd_lenard,
    "evaluate": cmd_evaluate,
    "zero-test": cmd_zero_test,
    "catalog": cmd_catalog,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="jacobi", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=None, help="number of dependent variables")
    common.add_argument("--max-degree", type=int, default=None, help="truncation degree")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--catalog", action="append", default=[], help="named structure")
    sub = ap.add_subparsers(dest="verb", required=True)
    for verb in VERBS:
        p = sub.add_parser(verb, parents=[common])
        if verb == "catalog":
            p.add_argument("action", choices=["list", "dump"])
            p.add_argument("name", nargs="?")
            continue
        p.add_argument("inputs", nargs="*", help="expressions or JSON files")
        if verb in ("reciprocal", "locality", "charge", "miura"):
            p.add_argument("--rho", default=None)
            p.add_argument("--map", default=None, help="map file")
        if verb == "miura":
            p.add_argument("--image", action="append", help="i=expr for ubar[i]")
        if verb == "locality":
            p.add_argument("--construct", action="store_true", help="also build the local density")
        if verb == "central-invariants":
            p.add_argument("--canonical", action="store_true")
        if verb == "lenard":
            p.add_argument("--h0", default="1/2*u[1]^2")
            p.add_argument("--steps", type=int, default=3)
    return ap


def run_command(argv) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    s = Session(args.n, TruncationPolicy(args.max_degree) if args.max_degree is not None else None,
                args.json)
    try:
        return VERBS[args.verb](args, s)
    except (JacobiError, SyntaxError, ValueError, KeyError, OSError, ZeroDivisionError) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        print(f"error: {type(exc).__name__}: {msg}", file=sys.stderr)
        return 2


def main(argv=None):
    sys.exit(run_command(sys.argv[1:] if argv is None else argv))


if __name__ == "__main__":
    main()
