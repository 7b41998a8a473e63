"""Command-line front end.

Exit codes: 0 success, 1 verification verdict false, 2 usage or malformed input,
3 the requested tester cannot be built.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction

from . import bounds, constructions, irreducibles, serialize, verify
from .errors import BudgetExceeded, DensetestError, HypothesisViolated, Unconstructible
from .gf import Field, FieldElement, UniPoly
from .tester import apply

EXIT_OK, EXIT_FALSE, EXIT_USAGE, EXIT_UNCONSTRUCTIBLE = 0, 1, 2, 3


def _frac(s: str) -> Fraction:
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected NUM/DEN, got {s!r}") from exc


def _int_list(s: str) -> list[int]:
    try:
        return [int(x) for x in s.split(",") if x.strip()]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {s!r}") from exc


def _emit(payload: dict, out=None):
    payload = {"schema_version": serialize.SCHEMA_VERSION, **payload}
    text = json.dumps(payload, indent=1, default=serialize._default)
    print(text, file=out or sys.stdout)


# ---------------------------------------------------------------------------
def cmd_build(args) -> int:
    eps_vector = args.eps_vector if args.eps_vector else None
    t, p = constructions.build(args.q, args.t, args.d, args.eps, args.cls, args.route,
                               args.n, eps_vector)
    meta = {"plan": p.to_json()}
    if args.out:
        serialize.save(t, args.out, **meta)
    _emit({"command": "build", "size": t.size, "epsilon": serialize.frac_json(t.epsilon),
           "route": p.route, "citation": p.citation, "out": args.out,
           "summary": f"{p.route}: size {t.size}, eps {t.epsilon}"})
    return EXIT_OK


def cmd_plan(args) -> int:
    p = constructions.plan(args.q, args.d, args.t, args.eps, args.cls)
    _emit({"command": "plan", "plan": p.to_json(), "citation": p.citation})
    return EXIT_UNCONSTRUCTIBLE if p.route == "Unconstructible" else EXIT_OK


def _parse_element(S, text: str):
    if isinstance(S, Field):
        vals = _int_list(text)
        if len(vals) == 1 and S.base is None:
            return FieldElement(S, vals[0])
        if S.base is None or len(vals) > S.degree:
            raise argparse.ArgumentTypeError(f"element needs at most {S.degree} coefficients")
        return FieldElement(S, S.from_coeffs(vals + [0] * (S.degree - len(vals))))
    return UniPoly(S.field, _int_list(text))


def cmd_entry(args) -> int:
    t = serialize.load(args.tester)
    e = _parse_element(t.source, args.element)
    start = time.perf_counter()
    v = apply(t, args.index, args.block, e)
    dt = time.perf_counter() - start
    if isinstance(v, FieldElement):
        val = {"code": v.code, "coeffs": v.field.coeffs(v.code) if v.field.base is not None else [v.code]}
    else:
        val = {"poly": list(v.coeffs)}
    _emit({"command": "entry", "index": args.index, "block": args.block, "value": val,
           "seconds": dt})
    return EXIT_OK


def cmd_verify(args) -> int:
    t = serialize.load(args.tester)
    grid = verify.Grid(n=args.n, poly_cap=args.cap, point_cap=args.cap, exact=args.exact or None,
                       budget=args.budget, seed=args.seed)
    rep = verify.is_tester(t, grid)
    _emit({"command": "verify", "report": rep.to_json(),
           "summary": f"verdict {rep.verdict}: worst failure {rep.worst_failure} vs declared {t.epsilon}"})
    return EXIT_OK if rep.verdict else EXIT_FALSE


def cmd_bounds(args) -> int:
    kind = args.kind
    need = {"size-lb": ("t", "eps"), "density": (), "tower": ("t", "eps", "route"),
            "t1-consts": (), "eps-nu": ("m",), "cq": ()}[kind]
    missing = [k for k in need if getattr(args, k) is None]
    if missing:
        raise argparse.ArgumentTypeError(f"--kind {kind} needs " + ", ".join("--" + m for m in missing))
    if kind == "size-lb":
        rep = bounds.size_lower_bound(args.q, args.d, args.t, args.eps, args.cls)
    elif kind == "density":
        rep = bounds.density_limit(args.q, args.d, args.t, args.cls)
    elif kind == "cq":
        rep = bounds.cq_constant(args.q, args.precision)
    elif kind == "t1-consts":
        c = bounds.c_pi_of_eps_vector(args.q, args.d, bounds.preset_eps_vector(args.q, args.d, args.preset))
        _emit({"command": "bounds", "kind": kind, "r": c.r, "c": str(c.c), "pi": str(c.pi),
               "density": serialize.frac_json(c.density), "epsilon": serialize.frac_json(c.epsilon),
               "chunks": c.chunks, "size_exponent_log2": str(c.size_exponent), "note": c.size_note})
        return EXIT_OK
    elif kind == "eps-nu":
        e, nu = bounds.eps_nu_of_m(args.q, args.m)
        _emit({"command": "bounds", "kind": kind, "eps": str(e), "nu": str(nu)})
        return EXIT_OK
    else:
        extra = {}
        if args.route == "genus":
            if args.g is None or args.N is None:
                raise argparse.ArgumentTypeError("genus needs --g and --N")
            extra = {"g": args.g, "N": args.N}
        try:
            rep = bounds.tower_tester_size_estimate(args.q, args.d, args.t, args.eps, args.route, **extra)
        except HypothesisViolated as exc:
            _emit({"command": "bounds", "kind": kind, "feasible": False,
                   "hypothesis_violated": exc.condition})
            return EXIT_UNCONSTRUCTIBLE
    _emit({"command": "bounds", "kind": kind, "report": rep.to_json(), "citation": rep.citation})
    return EXIT_OK


def cmd_irr(args) -> int:
    if args.irr_cmd == "count":
        _emit({"command": "irr count", "q": args.q, "k": args.k,
               "count": irreducibles.count_irreducibles(args.q, args.k)})
        return EXIT_OK
    if args.irr_cmd == "nth":
        start = time.perf_counter()
        rec = irreducibles.nth_irreducible(args.q, args.t, args.m)
        recs = [rec]
    else:
        start = time.perf_counter()
        recs = irreducibles.first_m_irreducibles(args.q, args.t, args.m)
    dt = time.perf_counter() - start
    _emit({"command": f"irr {args.irr_cmd}", "seconds": dt, "polys": [
        {"index": r.index, "coeffs": list(r.poly.coeffs), "root": r.root.code, "vector": list(r.vector)}
        for r in recs]})
    return EXIT_OK


def cmd_bench(args) -> int:
    w = csv.writer(sys.stdout)
    w.writerow(["t", "size", "build_seconds", "entry_seconds"])
    for t in args.t_list:
        start = time.perf_counter()
        try:
            L, _ = constructions.build(args.q, t, args.d, args.eps, args.cls)
        except Unconstructible:
            continue
        built = time.perf_counter() - start
        idx = [(i * 7919) % L.size for i in range(args.entries)]
        start = time.perf_counter()
        for i in idx:
            L.map_at(i)[0].apply(1)
        per = (time.perf_counter() - start) / max(1, len(idx))
        w.writerow([t, L.size, f"{built:.6f}", f"{per:.3e}"])
    return EXIT_OK


# ---------------------------------------------------------------------------
def _add_params(p, eps_required=True):
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--t", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--eps", type=_frac, required=eps_required, help="NUM/DEN")
    p.add_argument("--class", dest="cls", choices=["P", "HP", "HLF"], default="P")


def make_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="densetest", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="cmd", required=True)

    b = sub.add_parser("build", help="construct a tester")
    _add_params(b)
    b.add_argument("--route", choices=["auto", "eval", "crt", "t1"], default="auto")
    b.add_argument("--n", type=int, default=None)
    b.add_argument("--eps-vector", default=None, help="preset name for the small-q pipeline")
    b.add_argument("--out", default=None)
    b.set_defaults(func=cmd_build)

    p = sub.add_parser("plan", help="print the construction plan")
    _add_params(p)
    p.set_defaults(func=cmd_plan)

    e = sub.add_parser("entry", help="one map applied to one element")
    e.add_argument("--tester", required=True)
    e.add_argument("--index", type=int, required=True)
    e.add_argument("--block", type=int, default=0)
    e.add_argument("--element", required=True, help="comma-separated coefficients over the level below")
    e.set_defaults(func=cmd_entry)

    v = sub.add_parser("verify", help="brute-force the tester property")
    v.add_argument("--tester", required=True)
    v.add_argument("--n", type=int, default=2)
    v.add_argument("--exact", action="store_true")
    v.add_argument("--cap", type=int, default=10 ** 6)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--budget", type=int, default=None)
    v.set_defaults(func=cmd_verify)

    bo = sub.add_parser("bounds", help="lower bounds, density limits and constants")
    bo.add_argument("--kind", choices=["size-lb", "density", "cq", "t1-consts", "eps-nu", "tower"],
                    required=True)
    bo.add_argument("--q", type=int, required=True)
    bo.add_argument("--d", type=int, default=1)
    bo.add_argument("--t", type=int, default=None)
    bo.add_argument("--eps", type=_frac, default=None)
    bo.add_argument("--class", dest="cls", choices=["P", "HP", "HLF"], default="P")
    bo.add_argument("--m", type=int, default=None)
    bo.add_argument("--preset", default="density2", help="density2 or co1:M")
    bo.add_argument("--precision", type=float, default=1e-9)
    bo.add_argument("--route", choices=("genus",) + bounds.TOWER_ROUTES, default=None)
    bo.add_argument("--g", type=int, default=None)
    bo.add_argument("--N", type=int, default=None)
    bo.set_defaults(func=cmd_bounds)

    ir = sub.add_parser("irr", help="irreducible polynomials")
    isub = ir.add_subparsers(dest="irr_cmd", required=True)
    c = isub.add_parser("count")
    c.add_argument("--q", type=int, required=True)
    c.add_argument("--k", type=int, required=True)
    for name in ("nth", "first"):
        x = isub.add_parser(name)
        x.add_argument("--q", type=int, required=True)
        x.add_argument("--t", type=int, required=True)
        x.add_argument("--m", type=int, required=True)
    ir.set_defaults(func=cmd_irr)

    be = sub.add_parser("bench", help="CSV of size, build time and entry time over t")
    be.add_argument("--q", type=int, required=True)
    be.add_argument("--d", type=int, required=True)
    be.add_argument("--eps", type=_frac, required=True)
    be.add_argument("--class", dest="cls", choices=["P", "HP", "HLF"], default="P")
    be.add_argument("--t-list", type=_int_list, default=[2, 4, 8, 16])
    be.add_argument("--entries", type=int, default=200)
    be.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = make_parser().parse_args(argv)
    try:
        return args.func(args)
    except Unconstructible as exc:
        _emit({"command": args.cmd, "error": "Unconstructible", "reason": exc.reason,
               "detail": exc.detail, "citation": exc.citation})
        return EXIT_UNCONSTRUCTIBLE
    except BudgetExceeded as exc:
        _emit({"command": args.cmd, "error": "BudgetExceeded", "detail": str(exc)})
        return EXIT_USAGE
    except (DensetestError, argparse.ArgumentTypeError, OSError) as exc:
        _emit({"command": args.cmd, "error": type(exc).__name__, "detail": str(exc)})
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
