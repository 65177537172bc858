"""Command-line front end: instance I/O, subcommand dispatch, reports.

Exit codes: 0 for a definite verdict, 2 when any verdict in the report is
"unknown" (so scripts can tell "the method cannot decide" from failure),
1 for input errors (malformed JSON gets line/column diagnostics).

Reports are JSON with sorted keys, embed the full run configuration, the
tool version and the SHA-256 of the input file, and contain no timestamps:
identical configuration and input produce byte-identical reports.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from importlib import resources
from pathlib import Path

from . import __version__
from .config import RunConfig
from .influence import (
    StarField,
    raster_to_csv,
    raster_to_pgm,
    region_raster,
    robust_member,
    to_robust_instance,
    worst_case_reduce,
)
from .procedures import (
    RhsFunction,
    certify_b,
    certify_b_h,
    check_a,
    check_a_h,
    check_hypotheses,
    dump_report,
    report_payload,
    validate_equivalence,
)
from .rockafellian import QuadraticFn, RobustInstance

THEOREM_CHOICES = ("t2_1", "t3_1", "t4_1", "c2_1", "c2_2", "c3_1", "c4_1")


class InputError(Exception):
    pass


def _read_json(path: str) -> tuple:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(
            f"{path}:{exc.lineno}:{exc.colno}: malformed JSON: {exc.msg}") from exc
    digest = hashlib.sha256(text.encode()).hexdigest()
    return data, digest


def _load_instance(path: str):
    data, digest = _read_json(path)
    try:
        return RobustInstance.from_json(data), digest
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad instance: {exc}") from exc


def _load_rhs(path: str):
    data, digest = _read_json(path)
    try:
        return RhsFunction.from_json(data), digest
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad rhs function: {exc}") from exc


def _load_field(path: str):
    data, digest = _read_json(path)
    try:
        return StarField.from_json(data), digest
    except (KeyError, TypeError, ValueError) as exc:
        raise InputError(f"{path}: bad star field: {exc}") from exc


def _config_from_args(args) -> RunConfig:
    kw = {}
    if args.tol_psd is not None:
        kw["tol_psd"] = args.tol_psd
    if args.tol_sub is not None:
        kw["tol_sub"] = args.tol_sub
    if args.seed is not None:
        kw["seed"] = args.seed
    if args.ascent_iters is not None:
        kw["ascent_iters"] = args.ascent_iters
    if args.restarts is not None:
        kw["restarts"] = args.restarts
    if args.probes is not None:
        kw["probes"] = args.probes
    if args.exact_only:
        kw["exact_only"] = True
    if args.out is not None:
        kw["out"] = args.out
    try:
        return RunConfig(**kw)
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def _has_unknown(node) -> bool:
    if isinstance(node, str):
        return node in ("unknown", "UNKNOWN")
    if isinstance(node, dict):
        for key, value in node.items():
            if key in ("agreement", "valid_on_probes") and value is None:
                return True
            if _has_unknown(value):
                return True
        return False
    if isinstance(node, list):
        return any(_has_unknown(v) for v in node)
    return False


def _emit(kind: str, cfg: RunConfig, body: dict, digest) -> int:
    # the report destination is not semantic configuration; keep reports
    # byte-identical regardless of where they are written
    payload = report_payload(kind, cfg.with_updates(out=None), body,
                             input_digest=digest, tool_version=__version__)
    text = dump_report(payload)
    if cfg.out:
        Path(cfg.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 2 if _has_unknown(payload["result"]) else 0


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------


def _cmd_check_a(args) -> int:
    cfg = _config_from_args(args)
    inst, digest = _load_instance(args.instance)
    res = check_a(inst, cfg)
    return _emit("check-a", cfg, res.to_json(), digest)


def _cmd_certify_b(args) -> int:
    cfg = _config_from_args(args)
    inst, digest = _load_instance(args.instance)
    res = certify_b(inst, cfg)
    return _emit("certify-b", cfg, res.to_json(), digest)


def _cmd_check_ah(args) -> int:
    cfg = _config_from_args(args)
    inst, digest = _load_instance(args.instance)
    h, _hd = _load_rhs(args.rhs)
    res = check_a_h(inst, h, cfg)
    return _emit("check-ah", cfg, res.to_json(), digest)


def _cmd_certify_bh(args) -> int:
    cfg = _config_from_args(args)
    inst, digest = _load_instance(args.instance)
    h, _hd = _load_rhs(args.rhs)
    res = certify_b_h(inst, h, cfg)
    return _emit("certify-bh", cfg, res.to_json(), digest)


def _cmd_hypotheses(args) -> int:
    cfg = _config_from_args(args)
    inst, digest = _load_instance(args.instance)
    h = None
    if args.rhs:
        h, _hd = _load_rhs(args.rhs)
    rep = check_hypotheses(inst, h, cfg)
    return _emit("hypotheses", cfg, rep.to_json(), digest)


def _cmd_validate(args) -> int:
    cfg = _config_from_args(args)
    inst, digest = _load_instance(args.instance)
    h = None
    if args.rhs:
        h, _hd = _load_rhs(args.rhs)
    try:
        rep = validate_equivalence(inst, args.theorem, h=h, cfg=cfg)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return _emit("validate", cfg, rep.to_json(), digest)


def _cmd_influence_reduce(args) -> int:
    cfg = _config_from_args(args)
    field, digest = _load_field(args.field)
    try:
        sysm = worst_case_reduce(field, args.center)
    except KeyError as exc:
        raise InputError(str(exc)) from exc
    body = {"system": sysm.to_json()}
    if args.claim_const is not None or args.drop is not None:
        try:
            inst = to_robust_instance(
                sysm,
                claim=None if args.claim_const is None else args.claim_const,
                drop=args.drop,
                endpoints=args.endpoints)
        except (KeyError, ValueError) as exc:
            raise InputError(str(exc)) from exc
        body["instance"] = inst.to_json()
        if args.instance_out:
            Path(args.instance_out).write_text(
                json.dumps(inst.to_json(), sort_keys=True, indent=2) + "\n")
    elif args.endpoints:
        raise InputError("--endpoints needs --claim-const")
    return _emit("influence-reduce", cfg, body, digest)


def _parse_csv_numbers(text: str, n: int, what: str):
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != n:
        raise InputError(f"{what} needs {n} comma-separated values")
    return parts


def _cmd_influence_raster(args) -> int:
    cfg = _config_from_args(args)
    field, digest = _load_field(args.field)
    bbox = _parse_csv_numbers(args.bbox, 4, "--bbox")
    res = _parse_csv_numbers(args.res, 2, "--res")
    try:
        sysm = worst_case_reduce(field, args.center)
        grid = region_raster(sysm, bbox, (int(res[0]), int(res[1])))
    except (KeyError, ValueError) as exc:
        raise InputError(str(exc)) from exc
    if args.csv:
        Path(args.csv).write_text(raster_to_csv(grid))
    if args.pgm:
        Path(args.pgm).write_text(raster_to_pgm(grid))
    body = {
        "center": args.center,
        "bbox": bbox,
        "res": [int(res[0]), int(res[1])],
        "inside": int(grid.sum()),
        "cells": int(grid.size),
        "csv": args.csv,
        "pgm": args.pgm,
    }
    return _emit("influence-raster", cfg, body, digest)


def _bundled(name: str) -> str:
    return str(resources.files("sproclab").joinpath("instances", name))


def _cmd_selftest(args) -> int:
    cfg = _config_from_args(args)
    checks = []

    def record(name, ok, info=""):
        checks.append({"name": name, "pass": bool(ok), "info": info})
        print(f"[{'PASS' if ok else 'FAIL'}] {name}" + (f" ({info})" if info else ""))

    inst, _ = _load_instance(_bundled("trust_region.json"))
    res = check_a(inst, cfg)
    record("trust_region check-a holds", res.verdict == "holds")
    cb = certify_b(inst, cfg)
    record("trust_region certify-b unit multiplier",
           cb.certificate is not None and abs(cb.certificate.lam[0] - 1) < 1e-6)

    neg, _ = _load_instance(_bundled("negative_const.json"))
    record("negative_const check-a violated",
           check_a(neg, cfg).verdict == "violated")
    record("negative_const certify-b none",
           certify_b(neg, cfg).certificate is None)

    two, _ = _load_instance(_bundled("two_scenario_abs.json"))
    ra = check_a(two, cfg)
    record("two_scenario_abs exact holds", ra.verdict == "holds" and ra.certified)

    reg, _ = _load_instance(_bundled("regression_nonconvex.json"))
    record("regression check-a holds", check_a(reg, cfg).verdict == "holds")
    record("regression certify-b none", certify_b(reg, cfg).certificate is None)
    rep = validate_equivalence(reg, "t2_1", cfg=cfg)
    record("regression validate t2_1 agreement",
           rep.agreement is True and not rep.fatal,
           "geometric side fails with the procedure, as permitted")

    field, digest = _load_field(_bundled("influence_demo.json"))
    sysm = worst_case_reduce(field, "s")
    _ident, q = sysm.constraints[0]
    record("influence worked-example coefficients",
           q.lead == 3 and tuple(map(str, q.lin)) == ("-16", "0") and q.const == 16)
    record("influence member at rival", robust_member((2, 0), sysm))

    ok_all = all(c["pass"] for c in checks)
    body = {"checks": checks, "all_pass": ok_all}
    code = _emit("selftest", cfg, body, digest)
    if not ok_all:
        return 1
    return code


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--tol-psd", type=float, default=None)
    sp.add_argument("--tol-sub", type=float, default=None)
    sp.add_argument("--seed", type=int, default=None,
                    help="search seed (falls back to SPROC_SEED)")
    sp.add_argument("--ascent-iters", type=int, default=None)
    sp.add_argument("--restarts", type=int, default=None)
    sp.add_argument("--probes", type=int, default=None)
    sp.add_argument("--exact-only", action="store_true")
    sp.add_argument("--out", default=None, help="write the report here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sproclab",
        description="checkers and certificate searches for robust "
                    "perturbation-function families")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    for name, fn, needs_rhs in (
        ("check-a", _cmd_check_a, False),
        ("certify-b", _cmd_certify_b, False),
        ("check-ah", _cmd_check_ah, True),
        ("certify-bh", _cmd_certify_bh, True),
    ):
        sp = sub.add_parser(name)
        sp.add_argument("instance")
        if needs_rhs:
            sp.add_argument("--rhs", required=True,
                            help="right-hand-side function JSON")
        _add_common(sp)
        sp.set_defaults(fn=fn)

    sp = sub.add_parser("hypotheses")
    sp.add_argument("instance")
    sp.add_argument("--rhs", default=None)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_hypotheses)

    sp = sub.add_parser("validate")
    sp.add_argument("instance")
    sp.add_argument("--theorem", required=True, choices=THEOREM_CHOICES)
    sp.add_argument("--rhs", default=None)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_validate)

    sp = sub.add_parser("influence-reduce")
    sp.add_argument("field")
    sp.add_argument("--center", required=True)
    sp.add_argument("--claim-const", type=float, default=None)
    sp.add_argument("--drop", default=None)
    sp.add_argument("--endpoints", action="store_true",
                    help="one scenario per endpoint coefficient draw")
    sp.add_argument("--instance-out", default=None)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_influence_reduce)

    sp = sub.add_parser("influence-raster")
    sp.add_argument("field")
    sp.add_argument("--center", required=True)
    sp.add_argument("--bbox", required=True, help="x_lo,x_hi,y_lo,y_hi")
    sp.add_argument("--res", required=True, help="nx,ny")
    sp.add_argument("--csv", default=None)
    sp.add_argument("--pgm", default=None)
    _add_common(sp)
    sp.set_defaults(fn=_cmd_influence_raster)

    sp = sub.add_parser("selftest")
    _add_common(sp)
    sp.set_defaults(fn=_cmd_selftest)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.fn(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
