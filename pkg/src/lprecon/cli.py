"""Command-line front end.

Exit status: 0 success, 1 a mathematical check failed, 2 bad input.
"""
from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import convolution as cv
from . import groupoid as gpd
from . import reconstruction as rc
from . import regular
from . import semigroup as isg
from . import structure as st

VERBS = ("validate", "bisections", "norms", "mp-classify", "spi", "tight", "reconstruct", "compare",
         "rakocevic", "catalog")
NEEDS_STRUCTURE = {"mp-classify", "spi", "reconstruct", "compare", "rakocevic", "catalog"}


class InputError(Exception):
    pass


def parse_builtin(name: str) -> gpd.Groupoid:
    """``cyclic:n``, ``klein``, ``pair:n``, ``symmetric:n``, ``swap-action`` or ``union:A+B``."""
    kind, _, arg = name.partition(":")
    try:
        if kind == "union":
            left, sep, right = arg.partition("+")
            if not sep:
                raise InputError("union needs two operands: union:A+B")
            return gpd.disjoint_union(parse_builtin(left), parse_builtin(right))
        if kind == "cyclic":
            return gpd.group_cyclic(int(arg))
        if kind == "klein":
            return gpd.group_klein()
        if kind == "pair":
            return gpd.pair(int(arg))
        if kind == "symmetric":
            return gpd.group_symmetric(int(arg))
        if kind == "swap-action":
            return gpd.action_groupoid([(0, 1), (1, 0)], label="Z_2~{0,1}")
    except ValueError as exc:
        raise InputError(f"bad builtin {name!r}: {exc}") from exc
    raise InputError(f"unknown builtin {name!r}")


def _read_json(path):
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"malformed JSON in {path}: {exc}") from exc


def load_groupoid(path, builtin) -> gpd.Groupoid:
    if builtin:
        return parse_builtin(builtin)
    if not path:
        raise InputError("need an input path or --builtin")
    try:
        return gpd.from_json(_read_json(path))
    except gpd.GroupoidFormatError as exc:
        raise InputError(str(exc)) from exc


def _require_valid(g):
    v = gpd.validate(g)
    if v:
        raise InputError(f"groupoid fails validation: {v[0]}")
    return g


def _number(x, exact):
    return {"value": float(x), "regime": "exact" if exact else "iterative-1e-6"}


# ---------------------------------------------------------------- verbs


def cmd_validate(args):
    g = load_groupoid(args.input, args.builtin)
    v = gpd.validate(g)
    report = {"format": 1, "valid": not v,
              "violations": [{"axiom": x.axiom, "arrows": list(x.arrows)} for x in v]}
    return (0 if not v else 1), report


def cmd_bisections(args):
    g = _require_valid(load_groupoid(args.input, args.builtin))
    bis = gpd.enumerate_bisections(g, args.work_bound)
    return 0, {"format": 1, "count": len(bis), "bisections": [[g.names[x] for x in sorted(B)] for B in bis]}


def _element(args, g):
    if args.element:
        try:
            return cv.from_json(g, _read_json(args.element))
        except (ValueError, TypeError) as exc:
            raise InputError(f"bad element: {exc}") from exc
    return cv.random_element(g, np.random.default_rng(args.seed))


def cmd_norms(args):
    g = _require_valid(load_groupoid(args.input, args.builtin))
    f = _element(args, g)
    p = args.p
    fp = regular.fp_norm_result(g, f, p, args.seed)
    sym = regular.sym_norm(g, f, p, args.seed) if p != 2 else max(fp.value, regular.fp_norm(g, f.star(), p))
    report = {
        "format": 1,
        "p": p,
        "element": cv.to_json(f),
        "sup": _number(f.sup_norm(), True),
        "i": _number(cv.i_norm(g, f), True),
        "fp": _number(fp.value, fp.exact),
        "symfp": _number(sym, fp.exact),
    }
    return 0, report


def _ctx(args, g):
    ctx = st.AlgebraContext(g, args.ctx, args.p, args.seed)
    ctx.require_structure()
    return ctx


def cmd_mp_classify(args):
    g = _require_valid(load_groupoid(args.input, args.builtin))
    ctx = _ctx(args, g)
    if args.element:
        elems = [_element(args, g)]
    else:
        rng = np.random.default_rng(args.seed)
        elems = [st.random_phase_element(g, B, rng) for B in gpd.enumerate_bisections(g, args.work_bound)]
    out = []
    for a in elems:
        d = st.is_mp_partial_isometry(ctx, a)
        out.append({"element": cv.to_json(a), "mp_partial_isometry": d is not None,
                    "decomposition": d.to_json(g) if d else None})
    return 0, {"format": 1, "ctx": str(ctx), "results": out}


def cmd_spi(args):
    g = _require_valid(load_groupoid(args.input, args.builtin))
    spi = st.spi_semigroup(_ctx(args, g))
    report = spi.semigroup.to_json()
    report.update({"phi_bijective": spi.phi_bijective, "phi_multiplicative": spi.phi_multiplicative,
                   "idempotents": len(spi.semigroup.idempotents)})
    ok = spi.phi_bijective and spi.phi_multiplicative and not isg.verify_inverse_semigroup(spi.semigroup)
    return (0 if ok else 1), report


def cmd_tight(args):
    if args.semigroup:
        try:
            S = isg.from_json(_read_json(args.semigroup))
        except (KeyError, ValueError, TypeError) as exc:
            raise InputError(f"bad semigroup document: {exc}") from exc
    elif args.builtin_semigroup:
        kind, _, n = args.builtin_semigroup.partition(":")
        if kind != "sym-inverse":
            raise InputError(f"unknown builtin semigroup {args.builtin_semigroup!r}")
        S = isg.symmetric_inverse_monoid(int(n))
    else:
        S = isg.from_bisections(_require_valid(load_groupoid(args.input, args.builtin)))
    violations = isg.verify_inverse_semigroup(S)
    if violations:
        return 1, {"format": 1, "error": "not an inverse semigroup", "violations": violations}
    T = isg.tight_groupoid(S)
    doc = gpd.to_json(T.groupoid)
    doc["zero_adjoined"] = T.zero_adjoined
    return 0, doc


def cmd_reconstruct(args):
    g = _require_valid(load_groupoid(args.input, args.builtin))
    _ctx(args, g)
    rep = rc.reconstruct(g, args.p, args.ctx, args.seed)
    return (0 if rep.ok else 1), rep.to_json(args.timings)


def cmd_compare(args):
    g = _require_valid(load_groupoid(args.input, args.builtin))
    h = _require_valid(load_groupoid(args.input2, args.builtin2))
    _ctx(args, g)
    try:
        v = rc.rigidity_compare(g, h, args.p, args.ctx, args.seed)
    except (rc.RigidityMismatch, RuntimeError) as exc:
        return 1, {"format": 1, "error": str(exc)}
    return 0, {"format": 1, "verdict": v.verdict, "direct": v.direct, "reconstructed": v.reconstructed,
               "p": args.p, "ctx": args.ctx}


def cmd_rakocevic(args):
    rows, ok = [], True
    for seq, expected in rc.sequence_battery(args.p, args.ctx):
        r = rc.rakocevic_experiment(seq, check=False)
        good = r.consistent and r.conditions == (expected,) * 3
        ok &= good
        rows.append({"sequence": r.name, "conditions": list(r.conditions), "expected": expected,
                     "consistent": r.consistent, "dagger_sup": r.observed_dagger_sup})
    return (0 if ok else 1), {"format": 1, "p": args.p, "ctx": args.ctx, "sequences": rows}


def cmd_catalog(args):
    rows, ok = [], True
    for name, g in rc.catalog().items():
        for p, kind in rc.SETTINGS:
            rep = rc.reconstruct(g, p, kind, args.seed)
            ok &= rep.ok
            row = rep.to_json(args.timings)
            row["groupoid"] = name
            rows.append(row)
    return (0 if ok else 1), {"format": 1, "runs": rows, "all_success": ok}


HANDLERS = {
    "validate": cmd_validate, "bisections": cmd_bisections, "norms": cmd_norms,
    "mp-classify": cmd_mp_classify, "spi": cmd_spi, "tight": cmd_tight, "reconstruct": cmd_reconstruct,
    "compare": cmd_compare, "rakocevic": cmd_rakocevic, "catalog": cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lprecon", description=__doc__)
    ap.add_argument("verb", choices=VERBS)
    ap.add_argument("input", nargs="?", help="groupoid JSON file")
    ap.add_argument("input2", nargs="?", help="second groupoid JSON file (compare)")
    ap.add_argument("--builtin", help="cyclic:n | klein | pair:n | symmetric:n | swap-action | union:A+B")
    ap.add_argument("--builtin2", help="second builtin (compare)")
    ap.add_argument("--semigroup", help="inverse semigroup JSON (tight)")
    ap.add_argument("--builtin-semigroup", help="sym-inverse:n (tight)")
    ap.add_argument("--element", help="algebra element JSON: arrow name -> [re, im]")
    ap.add_argument("--p", type=float, default=1.5)
    ap.add_argument("--ctx", choices=st.CONTEXT_KINDS, default="fp")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", help="write the JSON report here instead of stdout")
    ap.add_argument("--work-bound", type=int, default=gpd.DEFAULT_WORK_BOUND)
    ap.add_argument("--timings", action="store_true", help="include wall-clock timings (non-deterministic)")
    return ap


def run(argv=None) -> tuple:
    """Parse ``argv`` and execute; returns ``(exit_status, report)``."""
    args = build_parser().parse_args(argv)
    if args.p < 1:
        return 2, {"format": 1, "error": f"p must be >= 1, got {args.p}"}
    if args.verb in NEEDS_STRUCTURE and args.p == 2 and args.ctx != "i":
        return 2, {"format": 1, "error": "p = 2 is refused: the structure theorem for MP-partial "
                                         "isometries (bisection support, unimodular values) needs p != 2"}
    try:
        return HANDLERS[args.verb](args)
    except (InputError, st.PEqualsTwo) as exc:
        return 2, {"format": 1, "error": str(exc)}
    except gpd.WorkBoundExceeded as exc:
        return 2, {"format": 1, "error": f"work bound exceeded: {exc}"}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    status, report = run(argv)
    text = json.dumps(report, indent=2, sort_keys=True, ensure_ascii=False) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    if status and "error" in report:
        print(f"lprecon: {report['error']}", file=sys.stderr)
    return status


if __name__ == "__main__":
    sys.exit(main())
