"""Command line: ``qsplit check|split|gen``.

Exit codes: 0 pass, 1 verification failure, 2 input error.  Reports are
JSON with sorted keys and no timings, so equal inputs give equal bytes.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time

import numpy as np

from .errors import ParameterOutOfRange, ParseError, QSplitError, ValidationError
from .numkit import TolerancePolicy
from .qsys import dq_calculus, level_report, stability_level
from .scenario import (Scenario, explicit_source, fixture_generate, scenario_parse,
                       truncate_qsystem)
from .split import certificate_json, verify_splitting
from .uc2 import one_cell_check

INPUT_ERRORS = (ParseError, ValidationError, ParameterOutOfRange)
ENV_TOL = "QSPLIT_TOL"


def resolve_tol(flag, sc: Scenario = None) -> TolerancePolicy:
    """``--tol`` beats QSPLIT_TOL, which beats the scenario, which beats the default."""
    base = sc.policy() if sc is not None else TolerancePolicy()
    eps = flag
    if eps is None and os.environ.get(ENV_TOL):
        try:
            eps = float(os.environ[ENV_TOL])
        except ValueError as exc:
            raise ValidationError(f"{ENV_TOL} is not a number") from exc
    if eps is None:
        return base
    try:
        return TolerancePolicy(eps_num=float(eps), tau_rel=base.tau_rel)
    except ValueError as exc:
        raise ValidationError(str(exc)) from exc


def _plain(x):
    if isinstance(x, np.ndarray):
        return x.tolist()
    if isinstance(x, (np.floating, np.integer, np.bool_)):
        return x.item()
    if isinstance(x, complex):
        return [x.real, x.imag]
    raise TypeError(f"cannot serialize {type(x).__name__}")


def dumps(report) -> str:
    return json.dumps(report, indent=1, sort_keys=True, default=_plain, ensure_ascii=False) + "\n"


def _dq_ok(dq, tol: TolerancePolicy) -> bool:
    c = dq.checks
    eq = max(c["d_times_dinv_minus_s"], c["s_idempotent"], c["Q_s_eq_id"])
    psd = min(c["cap_cup_le_d"], c["d_le_norm"], c["Q_d_le_norm"], c["i_istar_le_norm"])
    return eq <= tol.eps_num and psd >= -tol.eps_num


def cmd_check(sc: Scenario, tol: TolerancePolicy, jobs: int = 1):
    """Axioms, exchange relations, stability level and the d_Q calculus."""
    Q = sc.qsystem()
    rows = level_report(Q, tol, jobs)
    report = {"scenario": sc.name, "depth": Q.depth, "eps_num": tol.eps_num, "levels": rows}
    cell = one_cell_check(Q.q, tol)
    report["connections"] = cell
    failing = [r["k"] for r in rows if not r["pass"]]
    report["failing_levels"] = failing
    ok = cell["pass"]
    try:
        l = stability_level(Q, tol, rows)
    except QSplitError as exc:
        report.update(l=None, error=exc.code, message=str(exc), **{"pass": False})
        return 1, report
    report["l"] = l
    want = sc.expect.get("l")
    if want is not None and want != l:
        ok = False
        report["message"] = f"stability level {l}, scenario expects {want}; failing levels {failing}"
    dq = []
    for k in range(l, Q.depth + 1):
        d = dq_calculus(Q, k, tol)
        good = _dq_ok(d, tol)
        ok = ok and good
        dq.append({"k": k, "d": d.d, "d_inv": d.d_inv, "s": d.s, "norm": d.norm,
                   "classification": d.classification, "checks": d.checks, "pass": good})
    report["dq"] = dq
    report["pass"] = bool(ok)
    return (0 if ok else 1), report


def cmd_split(sc: Scenario, tol: TolerancePolicy, depth: int = None):
    Q = sc.qsystem()
    if depth is not None:
        Q = truncate_qsystem(Q, depth)
    try:
        cert = verify_splitting(Q, tol, fixture=sc.name)
    except INPUT_ERRORS:
        raise
    except QSplitError as exc:
        return 1, {"scenario": sc.name, "pass": False, "error": exc.code, "message": str(exc)}
    out = certificate_json(cert)
    out.pop("seconds", None)
    out["failing_levels"] = [lv["k"] for lv in out["levels"] if not lv["pass"]]
    return (0 if out["pass"] else 1), out


def _emit(text: str, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="qsplit", description="Q-system checks and splittings.")
    sub = p.add_subparsers(dest="cmd", required=True)
    c = sub.add_parser("check", help="verify the axioms and find the stability level")
    c.add_argument("file")
    c.add_argument("--tol", type=float)
    c.add_argument("--report")
    c.add_argument("--jobs", type=int, default=1)
    s = sub.add_parser("split", help="build X and certify Q ≅ X̄X")
    s.add_argument("file")
    s.add_argument("--tol", type=float)
    s.add_argument("--depth", type=int)
    s.add_argument("--report")
    s.add_argument("--jobs", type=int, default=1, help="accepted for symmetry; the split runs serially")
    g = sub.add_parser("gen", help="write a fixture scenario")
    g.add_argument("kind", help="trivial, amp2, amp3, fib, forced_l2, ...")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--depth", type=int)
    g.add_argument("--explicit", action="store_true", help="store m, i and connections as matrices")
    g.add_argument("--out")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.cmd == "gen":
            sc = fixture_generate(args.kind, args.seed, args.depth)
            if args.explicit:
                sc.q_source = explicit_source(sc.qsystem())
            _emit(sc.dumps(), args.out)
            return 0
        sc = scenario_parse(args.file)
        tol = resolve_tol(args.tol, sc)
        t0 = time.time()
        if args.cmd == "check":
            code, report = cmd_check(sc, tol, max(args.jobs, 1))
        else:
            code, report = cmd_split(sc, tol, args.depth)
    except INPUT_ERRORS as exc:
        print(f"qsplit: {exc.code}: {exc}", file=sys.stderr)
        return 2
    _emit(dumps(report), args.report)
    verdict = "PASS" if code == 0 else "FAIL"
    extra = f" failing levels {report.get('failing_levels')}" if code else ""
    print(f"{verdict} {args.cmd} {sc.name} ({time.time() - t0:.2f}s){extra}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
