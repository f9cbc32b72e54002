"""Command-line front end.

Every command prints one JSON document on stdout and exits 0 on pass, 1 on
fail and 2 on bad input. System files are JSON objects with ``m``, ``n``
and ``gamma`` (m expression strings) and/or ``lagrangian``.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from math import factorial, pi

import numpy as np

from . import fixtures
from .geod import IntegrationError, arclength_resample, hausdorff, integrate, std_init
from .homog import DEField, SprayNormalizer, lambda_by_flow, lambda_extract
from .jetgroup import AlgebraElement, exp_k, inv, log_k, mul
from .symexpr import SampleConfig, parse, to_string
from .varcalc import (
    Lagrangian,
    el_identity_report,
    extract_el_field_at,
    regularity_rank,
    verify_el_field,
    zermelo_check,
)


class InputError(ValueError):
    pass


# -- input handling --------------------------------------------------------------

def _resolve(name: str) -> str:
    """A filesystem path, or the name of a bundled fixture."""
    if os.path.exists(name):
        return name
    if name in fixtures.FILES or name + ".json" in fixtures.FILES:
        return str(fixtures.path(name if name.endswith(".json") else name + ".json"))
    raise InputError(f"no such file: {name}")


def load_system(name: str) -> dict:
    """Read and validate a system file; returns the raw dict plus parsed
    ``field`` and/or ``lag`` entries."""
    path = _resolve(name)
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InputError(f"{name}: invalid JSON ({exc})") from exc
    try:
        m, n = int(doc["m"]), int(doc["n"])
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{name}: integer fields m and n are required") from exc
    if m < 1 or n < 1:
        raise InputError(f"{name}: m and n must be positive")
    if "gamma" not in doc and "lagrangian" not in doc:
        raise InputError(f"{name}: need gamma or lagrangian")
    out = {"doc": doc, "m": m, "n": n, "path": path}
    try:
        if "gamma" in doc:
            g = doc["gamma"]
            if not isinstance(g, list) or len(g) != m:
                raise InputError(f"{name}: gamma must be a list of {m} strings")
            out["field"] = DEField(m, n, tuple(parse(s, m=m, max_order=n) for s in g))
        if "lagrangian" in doc:
            out["lag"] = Lagrangian(m, n, parse(doc["lagrangian"], m=m, max_order=n))
    except ValueError as exc:
        if isinstance(exc, InputError):
            raise
        raise InputError(f"{name}: {exc}") from exc
    return out


def _need(system, key, name):
    if key not in system:
        what = "gamma" if key == "field" else "lagrangian"
        raise InputError(f"{name} has no {what}")
    return system[key]


def parse_numbers(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"cannot read numbers from {text!r}") from exc


def parse_point(text: str, rows: int, m: int, allow_std: bool = True) -> np.ndarray:
    if allow_std and text.strip() == "std":
        return std_init(m, rows - 1)
    vals = parse_numbers(text)
    if len(vals) != rows * m:
        raise InputError(f"expected {rows * m} coordinates (levels 0..{rows - 1}, m={m}), got {len(vals)}")
    return np.array(vals).reshape(rows, m)


def _fmt_exact(x) -> str:
    if isinstance(x, Fraction):
        return str(x)
    return repr(x)


def _cfg(args) -> SampleConfig:
    kw = {"count": args.samples, "seed": args.seed}
    if getattr(args, "tol", None) is not None:
        kw["tol"] = args.tol
    return SampleConfig().replace(**kw)


# -- commands --------------------------------------------------------------------

def cmd_check_homogeneity(args):
    sysd = load_system(args.file)
    f = _need(sysd, "field", args.file)
    cfg = _cfg(args)
    rep = lambda_extract(f, cfg)
    lam = []
    for e, zero in zip(rep.lambdas, rep.lambda_zero):
        if zero:
            lam.append("0")
        elif args.simplify:
            lam.append(_simplified(e))
        else:
            lam.append(to_string(e))
    out = {
        "command": "check-homogeneity",
        "file": args.file,
        "homogeneous": rep.homogeneous,
        "lambda": lam,
        "cross_residual": rep.cross_residual,
        "consistency": {f"{r},{s}": v for (r, s), v in sorted(rep.consistency.items())},
    }
    return out, rep.homogeneous


def _simplified(e) -> str:
    import sympy

    text = to_string(e).replace("^", "**")
    return str(sympy.simplify(sympy.sympify(text))).replace("**", "^")


def cmd_check_zermelo(args):
    sysd = load_system(args.file)
    lag = _need(sysd, "lag", args.file)
    cfg = _cfg(args)
    res = zermelo_check(lag, cfg)
    ok = all(v <= cfg.tol for v in res.values())
    return {"command": "check-zermelo", "file": args.file, "residuals": {f"Delta{r}": v for r, v in res.items()},
            "passes": ok}, ok


def cmd_euler_lagrange(args):
    sysd = load_system(args.file)
    lag = _need(sysd, "lag", args.file)
    cfg = _cfg(args)
    out = {"command": "euler-lagrange", "file": args.file}
    if args.verify:
        other = load_system(args.verify)
        f = _need(other, "field", args.verify)
        tol = args.tol if args.tol is not None else 1e-7
        try:
            res = verify_el_field(lag, f, cfg)
        except ValueError as exc:
            raise InputError(str(exc)) from exc
        out.update(verify=args.verify, residual=res, passes=res < tol)
        return out, res < tol
    if args.extract_at:
        p = parse_point(args.extract_at, 2 * lag.n, lag.m, allow_std=False)
        try:
            ex = extract_el_field_at(lag, p)
        except ValueError as exc:
            out.update(error=str(exc))
            return out, False
        out.update(point=p.tolist(), particular=ex.particular.tolist(), kernel=ex.kernel.tolist(),
                   residual=ex.residual)
        return out, True
    rep = el_identity_report(lag, cfg)
    tol = args.tol if args.tol is not None else 1e-8
    resid = {
        "horizontality": rep.horizontality,
        "S_eps": rep.s_eps,
        "form_vs_classical": rep.classical_vs_form,
        "iT_theta_minus_L": rep.i_t_theta,
        "iT_dtheta_plus_eps": rep.i_t_dtheta,
    }
    ok = all(v <= tol for v in resid.values())
    out.update(eps=[to_string(e) for e in rep.eps] if args.show else None, residuals=resid, passes=ok)
    if out["eps"] is None:
        del out["eps"]
    return out, ok


def cmd_regularity(args):
    sysd = load_system(args.file)
    lag = _need(sysd, "lag", args.file)
    f = _need(load_system(args.field), "field", args.field) if args.field else None
    n, m = lag.n, lag.m
    rng = np.random.default_rng(args.seed)
    tol = args.tol if args.tol is not None else 1e-8
    dims, worst = [], 0.0
    for _ in range(args.samples):
        p = rng.uniform(-2, 2, size=(2 * n, m))
        p[1] *= rng.uniform(0.5, 2.0) / np.linalg.norm(p[1])
        rep = regularity_rank(lag, p, f)
        dims.append(rep.kernel_dim)
        worst = max(worst, max(rep.kernel_residuals.values()))
    ok = all(d == 2 * n for d in dims) and worst < tol
    return {"command": "regularity", "file": args.file, "dimension": 2 * n * m, "expected_kernel": 2 * n,
            "kernel_dims": dims, "kernel_residual": worst, "regular": ok}, ok


def cmd_integrate(args):
    sysd = load_system(args.file)
    f = _need(sysd, "field", args.file)
    y0 = parse_point(args.init, f.n + 1, f.m)
    try:
        tr = integrate(f, y0, args.t1, args.h, richardson=not args.no_richardson)
        ok = True
    except IntegrationError as exc:
        tr, ok = exc.trajectory, False
    if args.out and tr is not None:
        tr.to_csv(args.out)
    out = {"command": "integrate", "file": args.file, "status": tr.status if tr is not None else "rejected",
           "steps": len(tr) - 1 if tr is not None else 0, "t_final": float(tr.t[-1]) if tr is not None else 0.0,
           "error_estimate": tr.error_estimate if tr is not None else None,
           "final_state": tr.y[-1].tolist() if tr is not None else None}
    if args.out:
        out["csv"] = args.out
    return out, ok


def cmd_compare_paths(args):
    a = _need(load_system(args.file_a), "field", args.file_a)
    b = _need(load_system(args.file_b), "field", args.file_b)
    if (a.m, a.n) != (b.m, b.n):
        raise InputError("systems have different (m, n)")
    y0 = parse_point(args.init, a.n + 1, a.m)
    tol = args.tol if args.tol is not None else 1e-5
    trs = []
    for f in (a, b):
        try:
            trs.append(integrate(f, y0, args.t1, args.h, max_arclength=args.length,
                                 max_speed=args.max_speed, richardson=False))
        except IntegrationError as exc:
            trs.append(exc.trajectory)
    lengths = [float(t.arclength()[-1]) for t in trs]
    common = min(lengths)
    if args.length is not None:
        common = min(common, args.length)
    pa = arclength_resample(trs[0], args.ds, length=common)
    pb = arclength_resample(trs[1], args.ds, length=common)
    dist = hausdorff(pa, pb)
    ok = dist < tol
    if args.length is not None and common < args.length * (1 - 1e-9):
        ok = False
    return {"command": "compare-paths", "files": [args.file_a, args.file_b], "compared_length": common,
            "lengths": lengths, "status": [t.status for t in trs], "hausdorff": dist,
            "result": "PASS" if ok else "FAIL"}, ok


def cmd_spray_normalize(args):
    f = _need(load_system(args.file), "field", args.file)
    p = parse_point(args.at, f.n + 1, f.m)
    try:
        s = SprayNormalizer(f, _cfg(args))
    except ValueError as exc:
        return {"command": "spray-normalize", "file": args.file, "error": str(exc)}, False
    mu = s.mu(p)
    lam = {f"lambda{r}": lambda_by_flow(s.gamma, p, r, h=args.h) for r in range(1, min(f.n, 2) + 1)}
    tol = args.tol if args.tol is not None else 1e-4
    ok = all(abs(v) < tol for v in lam.values())
    return {"command": "spray-normalize", "file": args.file, "point": p.tolist(), "mu": mu,
            "gamma": s.gamma(p).tolist(), "normalized_lambda_by_flow": lam, "passes": ok}, ok


def _exact(text: str):
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise InputError(f"cannot read jet coordinates from {text!r}") from exc


def cmd_jetgroup(args):
    n = args.order
    ops = [_exact(t) for t in args.operands]
    need = {"mul": 2, "inv": 1, "exp": 1, "log": 1}[args.op]
    if len(ops) != need:
        raise InputError(f"jetgroup {args.op} takes {need} operand(s)")
    for o in ops:
        if args.op == "exp" and len(o) == n - 1:
            o.insert(0, Fraction(0))
        if len(o) != n:
            raise InputError(f"operand {o} does not have {n} coordinates")
    try:
        if args.op == "mul":
            res = mul(ops[0], ops[1]).coords
        elif args.op == "inv":
            res = inv(ops[0]).coords
        elif args.op == "exp":
            res = exp_k(AlgebraElement(tuple(ops[0]))).coords
        else:
            res = log_k(ops[0]).coeffs
    except (ValueError, ZeroDivisionError) as exc:
        raise InputError(str(exc)) from exc
    return {"command": "jetgroup", "op": args.op, "order": n, "result": ",".join(_fmt_exact(x) for x in res)}, True


# -- parser ------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="jetpaths", description="Homogeneity, variational and geodesic checks "
                                "for higher-order ODE systems on R^m.")
    sub = p.add_subparsers(dest="command", required=True)

    def sampling(sp, tol_default_help):
        sp.add_argument("--samples", type=int, default=100, help="random sample points (default 100)")
        sp.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
        sp.add_argument("--tol", type=float, default=None, help=tol_default_help)

    sp = sub.add_parser("check-homogeneity", help="extract lambda^r and test consistency")
    sp.add_argument("file")
    sampling(sp, "relative tolerance (default 1e-9)")
    sp.add_argument("--simplify", action="store_true", help="simplify lambda with sympy")
    sp.set_defaults(func=cmd_check_homogeneity)

    sp = sub.add_parser("check-zermelo", help="test Delta^1 L = L, Delta^r L = 0")
    sp.add_argument("file")
    sampling(sp, "relative tolerance (default 1e-9)")
    sp.set_defaults(func=cmd_check_zermelo)

    sp = sub.add_parser("euler-lagrange", help="Euler-Lagrange identities, verification or extraction")
    sp.add_argument("file")
    g = sp.add_mutually_exclusive_group()
    g.add_argument("--verify", metavar="GAMMAFILE", help="substitute this field into eps")
    g.add_argument("--extract-at", metavar="POINT", help="solve eps = 0 for the top jet at a point")
    sp.add_argument("--show", action="store_true", help="include eps expressions")
    sampling(sp, "tolerance (default 1e-7 for --verify, else 1e-8)")
    sp.set_defaults(func=cmd_euler_lagrange)

    sp = sub.add_parser("regularity", help="kernel dimension of d(theta) at random points")
    sp.add_argument("file")
    sp.add_argument("--field", metavar="GAMMAFILE", help="also test this field is in the kernel")
    sp.add_argument("--samples", type=int, default=20)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=None, help="kernel residual tolerance (default 1e-8)")
    sp.set_defaults(func=cmd_regularity)

    sp = sub.add_parser("integrate", help="RK4 integration; CSV with --out")
    sp.add_argument("file")
    sp.add_argument("--init", default="std", help="comma-separated jet, row-major, or 'std'")
    sp.add_argument("--t1", type=float, default=2 * pi)
    sp.add_argument("--h", type=float, default=1e-3)
    sp.add_argument("--out", help="CSV output path")
    sp.add_argument("--no-richardson", action="store_true")
    sp.set_defaults(func=cmd_integrate)

    sp = sub.add_parser("compare-paths", help="Hausdorff distance between geodesic paths")
    sp.add_argument("file_a")
    sp.add_argument("file_b")
    sp.add_argument("--init", default="std")
    sp.add_argument("--tol", type=float, default=None, help="distance bound (default 1e-5)")
    sp.add_argument("--t1", type=float, default=2 * pi)
    sp.add_argument("--h", type=float, default=1e-4)
    sp.add_argument("--ds", type=float, default=1e-3)
    sp.add_argument("--length", type=float, default=None, help="required arc length (default: common length)")
    sp.add_argument("--max-speed", type=float, default=10.0, help="stop a path once |y1| exceeds this")
    sp.set_defaults(func=cmd_compare_paths)

    sp = sub.add_parser("spray-normalize", help="mu and the normalized field at a point")
    sp.add_argument("file")
    sp.add_argument("--at", required=True, metavar="POINT")
    sp.add_argument("--h", type=float, default=1e-3, help="finite-difference step for the flow check")
    sampling(sp, "flow-check tolerance (default 1e-4)")
    sp.set_defaults(func=cmd_spray_normalize)

    sp = sub.add_parser("jetgroup", help="exact jet-group arithmetic")
    sp.add_argument("op", choices=["mul", "inv", "exp", "log"])
    sp.add_argument("--order", type=int, required=True)
    sp.add_argument("operands", nargs="+")
    sp.set_defaults(func=cmd_jetgroup)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        out, ok = args.func(args)
        code = 0 if ok else 1
    except InputError as exc:
        out, code = {"command": args.command, "error": str(exc)}, 2
    json.dump(out, sys.stdout, indent=2, default=_json_default)
    sys.stdout.write("\n")
    return code


def _json_default(x):
    if isinstance(x, (np.floating, np.integer)):
        return x.item()
    if isinstance(x, np.bool_):
        return bool(x)
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not serializable: {type(x)}")


if __name__ == "__main__":
    sys.exit(main())
