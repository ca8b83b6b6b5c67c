"""``fbl-lab`` command-line front end.

Every command prints one JSON document (``--format json``, the default) with
a top-level ``"schema": "fbl-lab/1"``; ``--format csv`` writes experiment
rows (or a single row of scalar fields) and ``--format text`` prints only the
headline value.  Exit codes: 0 success, 1 invalid input, 2 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import __version__
from .duals import AtomCombination, atom_norm_fbl_p, atom_norm_upper_p_bound
from .errors import FblLabError, NumericalError, ValidationError
from .experiments import (CSV_COLUMNS, check_id_ratio, cor_6_5_trend, remark_6_7,
                          remark_6_8)
from .fblnorm import (DEFAULT_TUPLE_CAP, FunctionalTuple, fbl_p_lower, fbl_p_upper,
                      sandwich_bounds, weak_p_norm)
from .fvl import LatticeExpr
from .pap import ControllingFamilySpec, apply_P, build_partition, verify_pap_bound
from .solver import AscentConfig
from .spaces import NormedSpace

SCHEMA = "fbl-lab/1"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ValidationError(message)


# -- argument helpers --------------------------------------------------------------


def _real(text: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if math.isnan(v):
        raise argparse.ArgumentTypeError("nan is not allowed")
    return v


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in text.split(",")])
    except ValueError:
        raise ValidationError(f"cannot parse vector {text!r}") from None


def _matrix(text: str) -> np.ndarray:
    rows = [_vector(r) for r in text.split(";") if r.strip()]
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"cannot parse matrix {text!r}")
    return np.array(rows)


def _json_arg(text: str):
    if text.startswith("@"):
        try:
            with open(text[1:], encoding="utf-8") as fh:
                text = fh.read()
        except OSError as exc:
            raise ValidationError(f"cannot read {text[1:]}: {exc.strerror}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed JSON: {exc}") from None


def _space(args) -> NormedSpace:
    if not args.space:
        raise ValidationError("--space is required")
    return NormedSpace.parse(args.space)


def _expr(args, space):
    if not args.expr:
        raise ValidationError("--expr is required (inline JSON or @file)")
    return LatticeExpr.from_json(_json_arg(args.expr), space)


def _atoms(args, space) -> AtomCombination:
    if args.atoms in (None, "basis"):
        return AtomCombination.basis(space)
    return AtomCombination(space, _matrix(args.atoms))


def _need(value, flag):
    if value is None:
        raise ValidationError(f"{flag} is required")
    return value


# -- commands ----------------------------------------------------------------------


def cmd_norm(args):
    space = _space(args)
    x = _vector(_need(args.x, "--x"))
    value = space.dual_norm(x) if args.dual else space.norm(x)
    return {"space": space.to_json(), "x": x, "dual": args.dual, "value": value}


def cmd_weakp(args):
    space = _space(args)
    p = _need(args.p, "--p")
    t = FunctionalTuple(space, _matrix(_need(args.tuple, "--tuple")), p)
    return {"space": space.to_json(), "p": p, "tuple": t.members,
            "value": weak_p_norm(t, AscentConfig(seed=args.seed))}


def cmd_fblnorm(args):
    space = _space(args)
    f = _expr(args, space)
    out = {"space": space.to_json(), "expr": f.to_json(), "mode": args.mode}
    if args.mode == "sandwich":
        lo, hi = sandwich_bounds(f, grid=args.grid, seed=args.seed)
        out.update(lower=lo, upper=hi, value=lo)
        return out
    p = _need(args.p, "--p")
    if args.mode == "lower":
        est = fbl_p_lower(f, p, tuple_cap=args.tuple_cap, config=AscentConfig(seed=args.seed))
        value = est.lower
    else:
        est = fbl_p_upper(f, p, grid_mass=args.grid, grid_test=args.grid, seed=args.seed,
                          rule=args.rule)
        value = est.upper
    out.update(p=p, estimate=est.to_json(), value=value)
    return out


def cmd_atomdual(args):
    space = _space(args)
    p = _need(args.p, "--p")
    c = _atoms(args, space)
    est = atom_norm_fbl_p(c, p, AscentConfig(seed=args.seed))
    return {"space": space.to_json(), "p": p, "atoms": c.to_json(), "estimate": est.to_json(),
            "value": est.lower}


def cmd_atomdual_upperp(args):
    space = _space(args)
    p = _need(args.p, "--p")
    c = _atoms(args, space)
    res = atom_norm_upper_p_bound(c, p, n_cap=args.n_cap, seed=args.seed)
    return {"space": space.to_json(), "p": p, "atoms": c.to_json(), "result": res.to_json(),
            "value": res.value}


def cmd_pap(args):
    space = _space(args)
    alpha = build_partition(space, args.sectors, overlap=args.overlap)
    out = {"space": space.to_json(), "action": args.action, "sectors": len(alpha),
           "overlap": alpha.overlap, "diam": alpha.diam}
    if args.action == "build":
        out.update(peaks=alpha.peaks, residual=alpha.residual(seed=args.seed), value=alpha.diam)
        return out
    f = _expr(args, space)
    if args.action == "apply":
        image = apply_P(alpha, f)
        out.update(peaks=alpha.peaks, coefficients=image.coefficients,
                   value=float(np.abs(image.coefficients).max(initial=0.0)))
        return out
    p = _need(args.p, "--p")
    spec = ControllingFamilySpec(args.family, p if args.family == "fblp" else args.family_p or p)
    rep = verify_pap_bound(alpha, spec, f, p, grid=args.grid, seed=args.seed)
    out.update(family={"kind": spec.kind, "p": spec.p, "c": spec.constant(space)}, report=rep,
               value=rep["measured"])
    return out


def cmd_exp(args):
    if args.name == "id-ratio":
        space = _space(args)
        rep = check_id_ratio(space, _need(args.p, "--p"), _need(args.q, "--q"),
                             trials=args.trials, seed=args.seed, grid=args.grid_opt)
        rep["value"] = rep["max_ratio"]
    elif args.name == "remark67":
        rep = remark_6_7(_need(args.n, "--n"))
        rep["value"] = rep["ratio"]
    elif args.name == "remark68":
        rep = remark_6_8(_need(args.n, "--n"), _need(args.p, "--p"), n_cap=args.n_cap)
        rep["value"] = rep["R"]
    else:
        if args.n_list:
            ns = [int(v) for v in _vector(args.n_list)]
        else:
            ns = [_need(args.n, "--n or --n-list")]
        rep = cor_6_5_trend(_need(args.p, "--p"), ns, n_cap=args.n_cap)
        rep["value"] = max(r["ratio"] for r in rep["rows"])
    return rep


# -- output ------------------------------------------------------------------------


def _clean(obj):
    """JSON-safe copy: numpy to builtins, non-finite floats to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    return obj


def render(result: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(result, sort_keys=True, indent=2) + "\n"
    if fmt == "text":
        value = result["value"]
        return (value if isinstance(value, str) else repr(value)) + "\n"
    buf = io.StringIO()
    if "rows" in result:
        w = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, extrasaction="ignore", lineterminator="\n")
        w.writeheader()
        w.writerows(result["rows"])
    else:
        flat = {k: v for k, v in sorted(result.items()) if not isinstance(v, (dict, list))}
        w = csv.DictWriter(buf, fieldnames=list(flat), lineterminator="\n")
        w.writeheader()
        w.writerow(flat)
    return buf.getvalue()


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--space", help="e.g. l2:3, linf:2, lq:1.5:3, lorentzweak:2:4")
    common.add_argument("--p", type=_real)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--out", help="write output to FILE instead of stdout")
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")

    parser = _Parser(prog="fbl-lab", description="Norms in free p-convex Banach lattices.")
    parser.add_argument("--version", action="version", version=f"fbl-lab {__version__}")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("norm", parents=[common], help="norm of a vector")
    s.add_argument("--x", help="comma-separated coordinates")
    s.add_argument("--dual", action="store_true", help="use the dual norm")
    s.set_defaults(func=cmd_norm)

    s = sub.add_parser("weakp", parents=[common], help="weak-p norm of a functional tuple")
    s.add_argument("--tuple", help="rows separated by ';', coordinates by ','")
    s.set_defaults(func=cmd_weakp)

    s = sub.add_parser("fblnorm", parents=[common], help="FBL^(p) norm estimates")
    s.add_argument("mode", choices=("lower", "upper", "sandwich"))
    s.add_argument("--expr", help="expression JSON, inline or @file")
    s.add_argument("--grid", type=int, default=720)
    s.add_argument("--tuple-cap", type=int, default=DEFAULT_TUPLE_CAP)
    s.add_argument("--rule", choices=("dantzig", "bland"), default="dantzig")
    s.set_defaults(func=cmd_fblnorm)

    for name, func in (("atomdual", cmd_atomdual), ("atomdual-upperp", cmd_atomdual_upperp)):
        s = sub.add_parser(name, parents=[common], help="dual norm of an atom combination")
        s.add_argument("--atoms", default="basis", help="'basis' or rows separated by ';'")
        s.add_argument("--n-cap", type=int, default=9)
        s.set_defaults(func=func)

    s = sub.add_parser("pap", parents=[common], help="pointed partitions of unity")
    s.add_argument("action", choices=("build", "apply", "verify"))
    s.add_argument("--sectors", type=int, default=16)
    s.add_argument("--overlap", type=_real, default=0.5)
    s.add_argument("--expr")
    s.add_argument("--grid", type=int, default=720)
    s.add_argument("--family", choices=("fblp", "upperp"), default="fblp")
    s.add_argument("--family-p", type=_real)
    s.set_defaults(func=cmd_pap)

    s = sub.add_parser("exp", parents=[common], help="experiments")
    s.add_argument("name", choices=("id-ratio", "remark67", "remark68", "cor65"))
    s.add_argument("--q", type=_real)
    s.add_argument("--n", type=int)
    s.add_argument("--n-list", help="comma-separated dimensions for cor65")
    s.add_argument("--trials", type=int, default=20)
    s.add_argument("--grid", dest="grid_opt", type=int)
    s.add_argument("--n-cap", type=int, default=9)
    s.set_defaults(func=cmd_exp)
    return parser


def run(argv=None) -> tuple[int, str]:
    """Parse and execute; returns ``(exit code, output text)``."""
    try:
        args = build_parser().parse_args(argv)
        if args.command is None:
            raise ValidationError("missing command; see fbl-lab --help")
        result = {"schema": SCHEMA, "command": args.command}
        result.update(args.func(args))
        result = _clean(result)
        text = render(result, args.format)
        if args.out:
            with open(args.out, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
            return 0, ""
        return 0, text
    except (ValidationError, ValueError) as exc:
        return 1, json.dumps({"schema": SCHEMA, "error": "validation", "message": str(exc)}) + "\n"
    except (NumericalError, FloatingPointError, np.linalg.LinAlgError) as exc:
        return 2, json.dumps({"schema": SCHEMA, "error": "numerical", "message": str(exc)}) + "\n"
    except FblLabError as exc:
        return 1, json.dumps({"schema": SCHEMA, "error": "error", "message": str(exc)}) + "\n"


def main(argv=None) -> int:
    code, text = run(argv)
    (sys.stdout if code == 0 else sys.stderr).write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
