"""Command-line entry point: ``hellmann <command> [options]``.

Exit codes: 0 success, 2 invalid parameters, 3 no bound state,
4 convergence failure, 5 golden-table tolerance failure.
"""
from __future__ import annotations

import argparse
import json
import sys
from datetime import datetime, timezone

from . import analysis
from .analytic import (
    arda_sever_energy,
    critical_lambda,
    hf_bounds,
    modified_model_census,
    modified_model_energy,
    quantization_audit,
)
from .model import (
    ConvergenceFailure,
    InvalidParameters,
    ModelKind,
    NoBoundState,
    ScaledParams,
    StateLabel,
    to_scaled,
)
from .numerov import EigenResult, GridSpec, Method, count_bound_states, solve_state

EXIT_OK, EXIT_INVALID, EXIT_NO_BOUND, EXIT_CONVERGENCE, EXIT_GOLDEN = 0, 2, 3, 4, 5


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _emit_error("InvalidParameters", message)
        sys.exit(EXIT_INVALID)


def _emit_error(kind: str, message: str):
    sys.stderr.write(json.dumps({"error": kind, "message": message}, sort_keys=True) + "\n")


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--format", choices=("json", "csv", "md"), default="json")
    p.add_argument("--output", "-o", help="write the document here instead of stdout")
    p.add_argument("--no-timestamp", action="store_true", help="omit the timestamp for byte-identical output")


def _add_physics(p: argparse.ArgumentParser, need_lambda: bool = True):
    p.add_argument("--b", type=float, default=None, help="scaled screened strength b = 2B/A")
    if need_lambda:
        p.add_argument("--lambda", dest="lam", type=float, default=None, help="scaled screening rate")
    p.add_argument("--physical", action="store_true", help="read --A --B --C --hbar2-over-m and convert")
    p.add_argument("--A", type=float)
    p.add_argument("--B", type=float)
    p.add_argument("--C", type=float, default=0.0)
    p.add_argument("--hbar2-over-m", dest="hbar2_over_m", type=float, default=1.0)


def _add_state(p: argparse.ArgumentParser):
    p.add_argument("--nu", type=int)
    p.add_argument("--l", type=int, default=0)
    p.add_argument("--state", help="label such as 1s or 4f (overrides --nu/--l)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hellmann", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("solve", help="one eigenvalue")
    _add_physics(s)
    _add_state(s)
    s.add_argument("--model", choices=("hellmann", "modified"), default="hellmann")
    s.add_argument("--method", choices=("numerov", "rpm", "closed-form", "arda-sever"), default="numerov")
    s.add_argument("--digits", type=int, default=None, help="RPM working precision")
    s.add_argument("--D-max", dest="D_max", type=int, default=15)
    s.add_argument("--r-max", dest="r_max", type=float)
    s.add_argument("--n-points", dest="n_points", type=int)
    s.add_argument("--wavefunction", help="write the normalized R(r) as two-column text (numerov)")
    s.add_argument("--history", help="write the RPM root history as CSV")
    _add_common(s)

    t = sub.add_parser("table1", help="reproduce the golden table (b=1, lambda=0.01)")
    t.add_argument("--no-rpm", action="store_true")
    _add_common(t)

    a = sub.add_parser("audit", help="all audit findings of the golden table and the quantization grid")
    _add_common(a)

    c = sub.add_parser("census", help="bound states of the modified model")
    _add_physics(c)
    c.add_argument("--l", type=int, default=None)
    c.add_argument("--confirm", action="store_true", help="confirm the counts with Numerov node counting")
    _add_common(c)

    k = sub.add_parser("critical-lambda", help="screening rate where the modified model stops binding")
    k.add_argument("--b", type=float, required=True)
    _add_common(k)

    bd = sub.add_parser("bounds", help="Coulomb-limit bounds for a shell")
    _add_physics(bd, need_lambda=False)
    bd.add_argument("--nu", type=int, required=True)
    _add_common(bd)

    sw = sub.add_parser("sweep", help="modified-minus-true energies along a lambda grid")
    sw.add_argument("--b", type=float, default=1.0)
    sw.add_argument("--lambdas", default="0.001,0.01,0.1,0.5")
    sw.add_argument("--states", default="1s")
    _add_common(sw)

    h = sub.add_parser("hf-check", help="Hellmann-Feynman derivative check")
    _add_physics(h)
    _add_state(h)
    h.add_argument("--delta", type=float, default=1e-4)
    _add_common(h)
    return parser


def _params(args) -> tuple[ScaledParams, dict]:
    echo = {}
    if getattr(args, "physical", False):
        if args.A is None or args.B is None:
            raise InvalidParameters("--physical needs --A and --B (and optionally --C, --hbar2-over-m)")
        p = to_scaled(args.A, args.B, args.C, args.hbar2_over_m)
        echo["physical"] = {"A": args.A, "B": args.B, "C": args.C, "hbar2_over_m": args.hbar2_over_m}
    else:
        if args.b is None:
            raise InvalidParameters("--b is required")
        lam = getattr(args, "lam", 0.0)
        if lam is None:
            raise InvalidParameters("--lambda is required")
        p = ScaledParams(args.b, lam)
    echo["scaled"] = {"b": p.b, "lambda": p.lam}
    return p, echo


def _label(args) -> StateLabel:
    if args.state:
        return StateLabel.parse(args.state)
    if args.nu is None:
        raise InvalidParameters("--nu or --state is required")
    return StateLabel(args.nu, args.l)


def _config(args) -> dict:
    skip = {"output", "no_timestamp", "func"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _cmd_solve(args):
    p, echo = _params(args)
    label = _label(args)
    kind = ModelKind(args.model)
    extra = {}
    if args.method == "numerov":
        grid = None
        if args.r_max or args.n_points:
            grid = GridSpec(args.r_max or 200.0, args.n_points or 100_000)
        res = solve_state(p, kind, label, grid, return_wavefunction=bool(args.wavefunction))
        if args.wavefunction:
            res, wf = res
            with open(args.wavefunction, "w", encoding="utf-8") as fh:
                fh.write(wf.to_text())
    elif args.method == "rpm":
        from .rpm import DEFAULT_DIGITS, RpmConfig, rpm_eigenvalue

        if kind is ModelKind.MODIFIED:
            raise InvalidParameters("the rpm method is only available for the hellmann model")
        cfg = RpmConfig(precision_digits=args.digits or DEFAULT_DIGITS, D_max=args.D_max)
        res, history = rpm_eigenvalue(p, label, cfg)
        extra["history"] = [[D, None if r is None else float(r), None if d is None else float(d)]
                            for D, r, d in history.rows]
        if args.history:
            with open(args.history, "w", encoding="utf-8") as fh:
                fh.write(history.to_csv())
    elif args.method == "closed-form":
        if kind is not ModelKind.MODIFIED:
            raise InvalidParameters("closed-form energies exist only for the modified model")
        res = EigenResult(float(modified_model_energy(p, label)), label, Method.CLOSED_FORM)
    else:
        # the published formula in the same scaled units: a = 2, hbar^2/m = 2
        e = arda_sever_energy(2.0, p.b, p.lam, 2.0, label.n_r, label.l)
        res = EigenResult(float(e), label, Method.ARDA_SEVER)
    payload = res.to_dict()
    payload.update(extra)
    payload["parameters"] = echo
    return "eigenvalue", payload, [res.to_dict() | {"diagnostics": None}], EXIT_OK


def _cmd_table1(args):
    rep = analysis.reproduce_table1(use_rpm=not args.no_rpm)
    doc = rep.to_dict()
    return "table1", doc, doc["rows"], EXIT_OK if rep.passed else EXIT_GOLDEN, analysis.table1_markdown(rep)


def _cmd_audit(args):
    rep = analysis.reproduce_table1()
    findings = [f.to_dict() for f in rep.findings]
    for b in (0.0, 1.0):
        for lam in (0.01, 0.1):
            for l in range(3):
                for n in range(3):
                    findings.append(quantization_audit(ScaledParams(b, lam), l, n).to_dict())
    rows = [{"subject": f["subject"], "verdict": f["verdict"], "detail": f["detail"]} for f in findings]
    return "audit", {"findings": findings, "table1_passed": rep.passed}, rows, EXIT_OK


def _cmd_census(args):
    p, echo = _params(args)
    if p.lam == 0:
        payload = {"parameters": echo, "infinite": True, "count": None, "states": []}
        return "census", payload, [], EXIT_OK
    census = modified_model_census(p, args.l)
    states = [{"state": lab.name, "nu": lab.nu, "l": lab.l, "energy": float(e)} for lab, e in census.states]
    payload = {"parameters": echo, "infinite": False, "count": census.count, "states": states}
    if args.confirm:
        ls = [args.l] if args.l is not None else sorted({s["l"] for s in states} | {0})
        numerov_counts = {str(l): count_bound_states(p, l) for l in ls}
        payload["numerov_counts"] = numerov_counts
        payload["confirmed"] = all(
            numerov_counts[str(l)] == sum(1 for s in states if s["l"] == l) for l in ls
        )
    return "census", payload, states, EXIT_OK


def _cmd_critical(args):
    lam_c, binds = critical_lambda(args.b)
    payload = {"b": args.b, "critical_lambda": lam_c, "binds": binds}
    return "critical-lambda", payload, [payload], EXIT_OK


def _cmd_bounds(args):
    args.lam = 0.0
    p, echo = _params(args)
    bi = hf_bounds(p, args.nu)
    payload = {"b": p.b, "nu": bi.nu, "lower": bi.lower, "upper": bi.upper,
               "b_sign_case": bi.b_sign_case.value}
    return "bounds", payload, [payload], EXIT_OK


def _cmd_sweep(args):
    try:
        lambdas = [float(x) for x in args.lambdas.split(",")]
    except ValueError:
        raise InvalidParameters(f"cannot parse --lambdas {args.lambdas!r}") from None
    labels = [StateLabel.parse(x) for x in args.states.split(",")]
    try:
        rep = analysis.approximation_error_sweep(args.b, lambdas, labels)
    except ValueError as exc:
        raise InvalidParameters(str(exc)) from None
    rows = []
    for r in rep.rows:
        for name, st in r["states"].items():
            rows.append({"lambda": r["lambda"], "census_count": r["census_count"], "state": name,
                         "true": st["true"], "modified": st["modified"], "delta": st["delta"]})
    return "sweep", rep.to_dict(), rows, EXIT_OK


def _cmd_hf(args):
    p, echo = _params(args)
    out = analysis.hf_derivative_audit(p, _label(args), args.delta)
    return "hf-check", out, [out], EXIT_OK


_COMMANDS = {
    "solve": _cmd_solve,
    "table1": _cmd_table1,
    "audit": _cmd_audit,
    "census": _cmd_census,
    "critical-lambda": _cmd_critical,
    "bounds": _cmd_bounds,
    "sweep": _cmd_sweep,
    "hf-check": _cmd_hf,
}


def _markdown_from_rows(title: str, rows: list[dict]) -> str:
    if not rows:
        return f"## {title}\n\n(no rows)\n"
    keys = list(rows[0])
    lines = [f"## {title}", "", "| " + " | ".join(keys) + " |", "|" + "---|" * len(keys)]
    for row in rows:
        lines.append("| " + " | ".join("" if row.get(k) is None else str(row.get(k)) for k in keys) + " |")
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        out = _COMMANDS[args.command](args)
    except InvalidParameters as exc:
        _emit_error("InvalidParameters", str(exc))
        return EXIT_INVALID
    except NoBoundState as exc:
        _emit_error("NoBoundState", str(exc))
        return EXIT_NO_BOUND
    except ConvergenceFailure as exc:
        _emit_error(type(exc).__name__, str(exc))
        return EXIT_CONVERGENCE
    kind, payload, rows, code = out[:4]
    timestamp = None if args.no_timestamp else datetime.now(timezone.utc).isoformat()
    if args.format == "json":
        text = analysis.to_json(analysis.envelope(kind, _config(args), payload, timestamp))
    elif args.format == "csv":
        text = analysis.rows_to_csv(rows)
    else:
        text = out[4] if len(out) > 4 else _markdown_from_rows(kind, rows)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
