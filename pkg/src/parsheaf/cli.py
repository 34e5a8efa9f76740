"""Command-line front end: parsheaf <group> <command> [options]."""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction
from typing import Sequence

from . import docio
from .base_chart import ChartError
from .exact import fmt, frac
from .monoid_lattice import (KummerExtension, MonoidError, free_envelope, indecomposables, is_free,
                             simplicial_structure, standard_relations)
from .parabolic_core import SheafError, piece
from .repro import TARGETS, run_target
from .root_ops import ExtensionStep, adjunction_defect, descends, pullback, pushforward, twisted_pushforward
from .stability import (StabilityError, hn_filtration, jh_factors, jh_graded, modified_hilbert, s_equivalent,
                        slope, verdict)

OK, FINDING, INPUT_ERROR = 0, 1, 2
STATUSES = ("stable", "strictly_semistable", "semistable", "unstable")


class InputError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--input", help="problem document (JSON)")
    common.add_argument("--json", action="store_true", help="emit a JSON report")
    common.add_argument("--chart", help="generating chart name from the document (default: standard)")
    common.add_argument("--level", type=int, help="target level for root operations")
    common.add_argument("--degree", type=int, action="append", help="degree of L (repeatable)")
    common.add_argument("--cap", type=int, default=8, help="summand cap per class")
    common.add_argument("--expect", choices=STATUSES, help="exit 1 unless the verdict matches")
    common.add_argument("--normalization", choices=("factorial", "monic"), default="factorial")
    common.add_argument("--weight", help="comma separated rational weight, e.g. -1/2,0")
    common.add_argument("--twist", help="comma separated integer twist d for twisted pushforward")
    common.add_argument("--other", help="second problem document (for sequiv)")

    parser = argparse.ArgumentParser(prog="parsheaf", description="Exact parabolic sheaf calculus.")
    groups = parser.add_subparsers(dest="group", required=True)
    for group, commands in [
        ("monoid", ["info", "envelope", "quotient"]),
        ("sheaf", ["validate", "piece", "slope", "verdict"]),
        ("rootops", ["pullback", "pushforward", "twist", "adjunction"]),
        ("stability", ["verdict", "hn", "jh", "sequiv"]),
    ]:
        gp = groups.add_parser(group)
        sub = gp.add_subparsers(dest="command", required=True)
        for c in commands:
            sub.add_parser(c, parents=[common])
    rp = groups.add_parser("repro", parents=[common])
    rp.add_argument("target", choices=sorted(TARGETS))
    return parser


# ---------------------------------------------------------------- helpers

def _problem(path: str | None) -> docio.Problem:
    if not path:
        raise InputError("--input is required for this command")
    return docio.parse_document(docio.load(path))


def _need_sheaf(p: docio.Problem, cap: int | None = None):
    if p.sheaf is None:
        raise InputError("the document has no sheaf section")
    if cap is not None and any(len(s) > cap for s in p.sheaf.summands):
        raise InputError(f"a class has more than --cap {cap} summands")
    return p.sheaf


def _ratvec(text: str | None, what: str) -> tuple[Fraction, ...]:
    if text is None:
        raise InputError(f"--{what} is required for this command")
    try:
        return tuple(frac(x) for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError) as e:
        raise InputError(f"cannot read --{what} {text!r}") from e


def _gens(gs) -> list[list[str]]:
    return [[fmt(x) for x in g] for g in gs]


def _step_up(p: docio.Problem, m: int | None) -> ExtensionStep:
    k = p.chart.kummer
    target = p.params.get("target_q")
    if m is None and target is not None:
        return ExtensionStep(k, docio.extension_from_json({"p": _gens(k.p_gens), "q": target}))
    if m is None:
        raise InputError("--level (or params.target_q in the document) is required for this command")
    n = k.level
    if n is None:
        raise InputError("--level needs a free tower N^r in (1/n)N^r")
    if m % n:
        raise InputError(f"level {m} is not a multiple of the current level {n}")
    return ExtensionStep.levels(k.r, n, m)


def _matches(expect: str | None, status: str) -> bool:
    if expect is None:
        return True
    if expect == "semistable":
        return status != "unstable"
    return expect == status


# ---------------------------------------------------------------- commands

def cmd_monoid(args, p: docio.Problem):
    k = p.chart.kummer
    if args.command == "info":
        st = simplicial_structure(k.p)
        rels = standard_relations(k.p) if st.is_simplicial else []
        return OK, {
            "p": _gens(indecomposables(k.p)), "q": _gens(k.q_gens), "free": is_free(k.p),
            "simplicial": st.is_simplicial, "extremal": _gens(st.extremal), "internal": _gens(st.internal),
            "relations": [{"c": r.c, "q": [fmt(x) for x in r.q], "coefficients": [fmt(a) for a in r.coefficients]}
                          for r in rels],
        }
    if args.command == "envelope":
        env = free_envelope(k.p)
        same = sorted(env.generators) == sorted(k.p.generators)
        KummerExtension(k.p, env).validate()
        return OK, {"envelope": _gens(env.generators), "free": is_free(env), "unchanged": same,
                    "kummer": True}
    return OK, {
        "invariant_factors": list(k.invariant_factors), "group_order": k.group_order, "orders": list(k.orders),
        "representatives": _gens(k.default_reps),
        "fundamental_weights": [{"index": list(w.index), "weight": [fmt(x) for x in w.vector]}
                                for w in k.fundamental_weights()],
    }


def _verdict_result(args, p: docio.Problem):
    f = _need_sheaf(p, args.cap)
    g = p.generating_chart(args.chart)
    v = verdict(f, g, args.normalization)
    res = v.to_json()
    res["modified_hilbert"] = docio.poly_to_json(modified_hilbert(f, g))
    return (OK if _matches(args.expect, v.status) else FINDING), res


def cmd_sheaf(args, p: docio.Problem, raw: dict):
    if args.command == "validate":
        diags = docio.validate_document(raw)
        return (FINDING if diags else OK), {"diagnostics": diags, "valid": not diags}
    f = _need_sheaf(p, args.cap)
    bad = docio.validate_document(raw)
    if bad:
        raise InputError(bad[0])
    if args.command == "piece":
        v = _ratvec(args.weight, "weight")
        if len(v) != p.chart.r:
            raise InputError(f"--weight needs {p.chart.r} entries")
        return OK, {"weight": [fmt(x) for x in v], "summands": [list(c) for c in piece(f, v)]}
    if args.command == "slope":
        g = p.generating_chart(args.chart)
        return OK, {"slope": docio.poly_to_json(slope(f, g, args.normalization)),
                    "modified_hilbert": docio.poly_to_json(modified_hilbert(f, g))}
    return _verdict_result(args, p)


def cmd_rootops(args, p: docio.Problem):
    f = _need_sheaf(p, args.cap)
    k = p.chart.kummer
    if args.command == "pullback":
        g = pullback(f, _step_up(p, args.level))
        return OK, {"document": docio.document(g)}
    if args.command == "pushforward":
        if args.level is None or k.level is None or k.level % args.level:
            raise InputError("--level must divide the level of the sheaf's free tower")
        g = pushforward(f, ExtensionStep.levels(k.r, args.level, k.level))
        return OK, {"document": docio.document(g)}
    if args.command == "twist":
        if args.level is None:
            raise InputError("--level is required for this command")
        d = tuple(int(x) for x in _ratvec(args.twist, "twist"))
        g = twisted_pushforward(f, d, args.level)
        return OK, {"document": docio.document(g)}
    if args.level is None or k.level is None:
        raise InputError("--level is required and the sheaf must live on a free tower")
    if args.level % k.level == 0:
        ok = adjunction_defect(f, ExtensionStep.levels(k.r, k.level, args.level))
        return (OK if ok else FINDING), {"mode": "unit", "isomorphism": ok}
    if k.level % args.level == 0:
        ok = descends(f, ExtensionStep.levels(k.r, args.level, k.level))
        return (OK if ok else FINDING), {"mode": "descent", "isomorphism": ok}
    raise InputError("levels must divide one another")


def cmd_stability(args, p: docio.Problem):
    f = _need_sheaf(p, args.cap)
    g = p.generating_chart(args.chart)
    if args.command == "verdict":
        return _verdict_result(args, p)
    if args.command == "hn":
        steps = hn_filtration(f, g, args.normalization)
        return OK, {"steps": [{"subsheaf": s.subsheaf.to_json(), "slope": docio.poly_to_json(s.slope)}
                              for s in steps]}
    if args.command == "jh":
        factors = jh_factors(f, g)
        return OK, {"factors": [sorted([c, j] for c, j in grp) for grp in factors],
                    "graded": docio.document(jh_graded(f, g))}
    if not args.other:
        raise InputError("--other is required for sequiv")
    q = _problem(args.other)
    h = _need_sheaf(q, args.cap)
    same = s_equivalent(f, h, g)
    return (OK if same else FINDING), {"s_equivalent": same}


def cmd_repro(args):
    params = {}
    if args.target == "non_simplicial" and args.degree:
        params["degree"] = args.degree
    checks = run_target(args.target, **params)
    passed = all(c.passed for c in checks)
    return (OK if passed else FINDING), {"target": args.target, "passed": passed}, checks


# ---------------------------------------------------------------- output

def _text(command: str, code: int, result: dict | None, checks) -> str:
    lines = []
    if checks is not None:
        for c in checks:
            mark = "PASS" if c.passed else "FAIL"
            lines.append(f"{mark}  {c.name}: expected {_show(c.expected)}, got {_show(c.actual)}  [{c.origin}]")
        lines.append("PASS" if code == OK else "FAIL")
        return "\n".join(lines)
    for key in sorted(result or {}):
        val = result[key]
        if key == "document":
            lines.append(docio.dumps(val).rstrip())
        elif isinstance(val, dict) and "text" in val:
            lines.append(f"{key}: {val['text']}")
        elif isinstance(val, (dict, list)):
            lines.append(f"{key}: {json.dumps(val, sort_keys=True)}")
        else:
            lines.append(f"{key}: {val}")
    return "\n".join(lines)


def _show(x) -> str:
    from .repro import _js

    x = _js(x)
    if isinstance(x, (str, int, bool)) or x is None:
        return str(x)
    return json.dumps(x)


def _emit(args, command: str, code: int, result, checks=None, error: str | None = None, out=None):
    out = out or sys.stdout
    if args is not None and getattr(args, "json", False):
        outcome = "error" if code == INPUT_ERROR else ("finding" if code == FINDING else "ok")
        rep = {"command": command, "outcome": outcome, "result": result}
        if checks is not None:
            rep["checks"] = [c.to_json() for c in checks]
        if error is not None:
            rep["error"] = error
        errs = docio.schema_errors(rep, "report")
        if errs:
            raise RuntimeError(f"report does not match its schema: {errs[0]}")
        out.write(docio.dumps(rep))
    elif error is not None:
        sys.stderr.write(f"parsheaf: error: {error}\n")
    else:
        out.write(_text(command, code, result, checks) + "\n")


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return OK if e.code == 0 else INPUT_ERROR
    command = args.group if args.group == "repro" else f"{args.group} {args.command}"
    try:
        if args.group == "repro":
            code, result, checks = cmd_repro(args)
            _emit(args, command, code, result, checks)
            return code
        raw = docio.load(args.input) if args.input else None
        if raw is None:
            raise InputError("--input is required for this command")
        if args.group == "sheaf" and args.command == "validate":
            code, result = cmd_sheaf(args, None, raw)
        else:
            p = docio.parse_document(raw)
            if args.group == "monoid":
                code, result = cmd_monoid(args, p)
            elif args.group == "sheaf":
                code, result = cmd_sheaf(args, p, raw)
            elif args.group == "rootops":
                code, result = cmd_rootops(args, p)
            else:
                code, result = cmd_stability(args, p)
    except SheafError as e:
        msg = str(e)
        _emit(args, command, INPUT_ERROR, None, error=msg)
        return INPUT_ERROR
    except (InputError, docio.DocumentError, MonoidError, ChartError, StabilityError, KeyError, ValueError) as e:
        _emit(args, command, INPUT_ERROR, None, error=str(e).strip("'\""))
        return INPUT_ERROR
    _emit(args, command, code, result)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
