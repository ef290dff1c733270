"""Table reproduction and audits of the approximate Hellmann spectrum."""
from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field
from decimal import Decimal
from fractions import Fraction
from importlib import resources

from . import __version__
from .analytic import (
    AuditFinding,
    Subject,
    Verdict,
    arda_sever_energy,
    critical_lambda,
    exponent_audit,
    hf_bounds,
    modified_model_census,
    modified_model_energy,
    quantization_audit,
)
from .model import (
    ConvergenceFailure,
    HellmannError,
    ModelKind,
    NoBoundState,
    ScaledParams,
    StateLabel,
)
from .numerov import (
    EigenResult,
    GridSpec,
    Method,
    auto_grid,
    expectation_exp_lambda_r,
    solve_state,
)

SCHEMA_VERSION = "1"

# golden tolerances, set by printed precision of each column
TOL_PRESENT = 1e-8
TOL_FIVE_DECIMALS = Fraction(5, 10**6)
# printed-formula rows are called mismatched when they miss the table by at least this much
MISMATCH_GAP = 5e-3
TOL_ADAMOWSKI = 1e-5

TABLE1_PARAMS = ScaledParams(b=1.0, lam=0.01)
# printed-formula inputs that put it in the same scaled units: a = 2 (charge), hbar^2/m = 2 (2m/hbar^2 = 1)
AS_A = 2
AS_HBAR2_OVER_M = 2

LIVE_COLUMNS = ("numerov", "rpm", "closed-form", "arda-sever")
REFERENCE_COLUMNS = ("present", "adamowski", "arda_sever")


@dataclass(frozen=True)
class ReferenceRow:
    label: StateLabel
    present: str
    adamowski: str
    arda_sever: str

    def value(self, column: str) -> float:
        return float(getattr(self, column))

    def exact(self, column: str) -> Fraction:
        return Fraction(Decimal(getattr(self, column)))

    def decimals(self, column: str) -> int:
        return -Decimal(getattr(self, column)).as_tuple().exponent


@dataclass(frozen=True)
class ReferenceDataset:
    version: str
    rows: tuple[ReferenceRow, ...]
    columns: dict
    provenance_note: str

    def row(self, label: StateLabel) -> ReferenceRow:
        for row in self.rows:
            if row.label == label:
                return row
        raise KeyError(label.name)

    @property
    def labels(self) -> list[StateLabel]:
        return [row.label for row in self.rows]


def load_reference() -> ReferenceDataset:
    text = resources.files("hellmann").joinpath("data/table1.json").read_text(encoding="utf-8")
    raw = json.loads(text)
    rows = tuple(
        ReferenceRow(StateLabel.parse(r["state"]), r["present"], r["adamowski"], r["arda_sever"]) for r in raw["rows"]
    )
    return ReferenceDataset(raw["version"], rows, raw["columns"], raw["provenance_note"])


@dataclass
class SpectrumTable:
    """Rows keyed by state; each row maps a column name to an EigenResult (or None on failure)."""

    params: ScaledParams
    rows: dict = field(default_factory=dict)
    errors: dict = field(default_factory=dict)
    notes: dict = field(default_factory=dict)

    def set(self, column: str, result: EigenResult):
        self.rows.setdefault(result.label, {})[column] = result

    def fail(self, column: str, label: StateLabel, error: str):
        self.rows.setdefault(label, {})[column] = None
        self.errors[f"{label.name}/{column}"] = error

    def energy(self, label: StateLabel, column: str) -> float | None:
        res = self.rows.get(label, {}).get(column)
        return None if res is None else res.energy

    def column(self, column: str) -> dict:
        return {lab: res.energy for lab, cols in self.rows.items() if (res := cols.get(column)) is not None}

    def labels(self) -> list[StateLabel]:
        return sorted(self.rows, key=lambda lab: (lab.nu, lab.l))


def _reference_result(label: StateLabel, value: float) -> EigenResult:
    return EigenResult(value, label, Method.REFERENCE)


class OrderVerdict(str, enum.Enum):
    ACCURATE = "AccurateOrder"
    OPPOSITE = "OppositeOrder"
    MIXED = "Mixed"


@dataclass(frozen=True)
class OrderingReport:
    column: str
    shells: dict  # nu -> (list of (l, E), verdict)

    def verdict(self, nu: int) -> OrderVerdict:
        return self.shells[nu][1]

    def to_dict(self) -> dict:
        return {
            "column": self.column,
            "shells": {
                str(nu): {"levels": [[l, e] for l, e in levels], "verdict": v.value}
                for nu, (levels, v) in sorted(self.shells.items())
            },
        }


def ordering_audit(table: SpectrumTable, column: str) -> OrderingReport:
    """Classify each nu-shell by how E depends on l (strictly down, strictly up, or neither)."""
    energies = table.column(column)
    shells = {}
    for nu in sorted({lab.nu for lab in energies}):
        levels = sorted((lab.l, e) for lab, e in energies.items() if lab.nu == nu)
        if len(levels) < 2:
            continue
        steps = [b[1] - a[1] for a, b in zip(levels, levels[1:])]
        if all(s < 0 for s in steps):
            v = OrderVerdict.ACCURATE
        elif all(s > 0 for s in steps):
            v = OrderVerdict.OPPOSITE
        else:
            v = OrderVerdict.MIXED
        shells[nu] = (levels, v)
    return OrderingReport(column, shells)


def reference_table(ref: ReferenceDataset | None = None) -> SpectrumTable:
    ref = ref or load_reference()
    table = SpectrumTable(TABLE1_PARAMS)
    for row in ref.rows:
        for col in REFERENCE_COLUMNS:
            table.set(f"ref:{col}", _reference_result(row.label, row.value(col)))
    return table


def _safe(table: SpectrumTable, column: str, label: StateLabel, fn):
    try:
        table.set(column, fn())
    except HellmannError as exc:
        table.fail(column, label, f"{type(exc).__name__}: {exc}")


@dataclass
class Table1Report:
    table: SpectrumTable
    findings: list
    orderings: dict
    passed: bool
    checks: dict

    def to_dict(self) -> dict:
        ref = load_reference()
        rows = []
        for lab in self.table.labels():
            row = {"state": lab.name, "nu": lab.nu, "l": lab.l}
            for col, res in sorted(self.table.rows[lab].items()):
                row[col] = None if res is None else res.energy
            rows.append(row)
        return {
            "params": {"b": self.table.params.b, "lambda": self.table.params.lam},
            "reference_dataset": {"version": ref.version, "provenance_note": ref.provenance_note},
            "rows": rows,
            "errors": self.table.errors,
            "findings": [f.to_dict() for f in self.findings],
            "orderings": {k: v.to_dict() for k, v in sorted(self.orderings.items())},
            "checks": self.checks,
            "passed": self.passed,
        }


def reproduce_table1(*, use_rpm: bool = True, use_numerov: bool = True) -> Table1Report:
    """Recompute every column of the golden table and compare with the printed values."""
    from .rpm import rpm_eigenvalue

    ref = load_reference()
    p = TABLE1_PARAMS
    table = reference_table(ref)
    for row in ref.rows:
        lab = row.label
        if use_numerov:
            _safe(table, "numerov", lab, lambda: solve_state(p, ModelKind.TRUE_HELLMANN, lab))
        if use_rpm:
            _safe(table, "rpm", lab, lambda: rpm_eigenvalue(p, lab)[0])
        _safe(table, "closed-form", lab,
              lambda: EigenResult(modified_model_energy(p, lab), lab, Method.CLOSED_FORM))
        table.set("arda-sever", EigenResult(
            arda_sever_energy(AS_A, p.b, p.lam, AS_HBAR2_OVER_M, lab.n_r, lab.l), lab, Method.ARDA_SEVER))

    findings = []
    checks = {}

    for col in ("numerov", "rpm"):
        if col == "rpm" and not use_rpm or col == "numerov" and not use_numerov:
            continue
        diffs = {}
        for row in ref.rows:
            e = table.energy(row.label, col)
            diffs[row.label.name] = None if e is None else e - row.value("present")
        worst = max((abs(d) for d in diffs.values() if d is not None), default=math.inf)
        ok = all(d is not None and abs(d) <= TOL_PRESENT for d in diffs.values())
        checks[f"{col}_vs_present"] = {"max_abs_diff": worst, "tolerance": TOL_PRESENT, "pass": ok}
        findings.append(AuditFinding(
            Subject.ACCURATE_VS_TABLE, Verdict.CONFIRMED if ok else Verdict.MISMATCH,
            f"{col} eigenvalues vs the Present column: max |dE| = {worst:.3g} (tolerance {TOL_PRESENT:g})",
            {"column": col, "differences": diffs, "tolerance": TOL_PRESENT},
        ))

    if use_numerov:
        diffs = {}
        for row in ref.rows:
            e = table.energy(row.label, "numerov")
            diffs[row.label.name] = None if e is None else e - row.value("adamowski")
        worst = max((abs(d) for d in diffs.values() if d is not None), default=math.inf)
        findings.append(AuditFinding(
            Subject.ACCURATE_VS_TABLE, Verdict.CONFIRMED if worst <= TOL_ADAMOWSKI else Verdict.MISMATCH,
            f"numerov eigenvalues vs the five-decimal Adamowski column: max |dE| = {worst:.3g}; "
            "some entries look truncated rather than rounded",
            {"column": "adamowski", "differences": diffs, "tolerance": TOL_ADAMOWSKI},
        ))

    # closed form of the substituted model against the Arda-Sever column, exact rational comparison
    cf_diffs = {}
    cf_ok = True
    for row in ref.rows:
        lab = row.label
        exact = modified_model_energy(ScaledParams(Fraction(1), Fraction(1, 100)), lab)
        d = exact - row.exact("arda_sever")
        cf_diffs[lab.name] = float(d)
        cf_ok &= abs(d) <= TOL_FIVE_DECIMALS
    checks["closed_form_vs_arda_sever"] = {"max_abs_diff": max(abs(v) for v in cf_diffs.values()),
                                           "tolerance": float(TOL_FIVE_DECIMALS), "pass": cf_ok}
    findings.append(AuditFinding(
        Subject.CLOSED_FORM_VS_TABLE, Verdict.CONFIRMED if cf_ok else Verdict.MISMATCH,
        "exact spectrum of the substituted model (scaled units, N = nu) reproduces the Arda-Sever column "
        "to printed rounding; this is a hypothesis for how the column was produced, not a stated convention",
        {"differences": cf_diffs, "tolerance": float(TOL_FIVE_DECIMALS)},
    ))

    # the printed energy formula against the same column
    findings.extend(formula_findings(ref))

    findings.append(quantization_audit(p, 0, 0))
    findings.append(exponent_audit(p, StateLabel(1, 0)))
    findings.append(printed_bound_finding())
    findings.append(bounds_finding(table, "numerov" if use_numerov else "ref:present"))

    orderings = {}
    for col in ("numerov", "rpm", "closed-form", "ref:present", "ref:adamowski", "ref:arda_sever"):
        if table.column(col):
            orderings[col] = ordering_audit(table, col)
    for col, rep in orderings.items():
        verdicts = {nu: v.value for nu, (_, v) in rep.shells.items()}
        expected = OrderVerdict.OPPOSITE if col in ("closed-form", "ref:arda_sever") else OrderVerdict.ACCURATE
        ok = all(v == expected for _, v in rep.shells.values())
        findings.append(AuditFinding(
            Subject.ORDERING, Verdict.CONFIRMED if ok else Verdict.MISMATCH,
            f"column {col}: shells ordered {sorted(set(verdicts.values()))}",
            {"column": col, "verdicts": {str(k): v for k, v in verdicts.items()}, "expected": expected.value},
        ))

    passed = all(c["pass"] for c in checks.values())
    return Table1Report(table, findings, orderings, passed, checks)


def formula_findings(ref: ReferenceDataset | None = None) -> list[AuditFinding]:
    """Printed energy formula audit: per-row comparison with the table and the lambda-independence at n = l = 0."""
    ref = ref or load_reference()
    p = TABLE1_PARAMS
    out = []
    per_row = {}
    matched, mismatched = [], []
    for row in ref.rows:
        lab = row.label
        # exact rationals: several rows sit exactly on the half-unit rounding boundary
        e = arda_sever_energy(AS_A, Fraction(1), Fraction(1, 100), AS_HBAR2_OVER_M, lab.n_r, lab.l)
        d = e - row.exact("arda_sever")
        per_row[lab.name] = {"formula": float(e), "table": row.value("arda_sever"), "diff": float(d)}
        if abs(d) <= TOL_FIVE_DECIMALS:
            matched.append(lab.name)
        elif abs(d) >= MISMATCH_GAP:
            mismatched.append(lab.name)
    out.append(AuditFinding(
        Subject.FORMULA_VS_TABLE, Verdict.MISMATCH if mismatched else Verdict.CONFIRMED,
        f"printed energy formula (a=2, hbar^2/m=2, n=nu-l-1) matches the table for {matched} "
        f"but misses it by >= {MISMATCH_GAP:g} for {mismatched}",
        {"a": AS_A, "b": p.b, "lambda": p.lam, "hbar2_over_m": AS_HBAR2_OVER_M, "rows": per_row,
         "matched": matched, "mismatched": mismatched},
    ))
    lams = [0, Fraction(1, 100), Fraction(1, 10), 1]
    vals = [arda_sever_energy(AS_A, 1, lam, AS_HBAR2_OVER_M, 0, 0) for lam in lams]
    constant = all(v == vals[0] for v in vals)
    table_1s = ref.row(StateLabel(1, 0)).value("arda_sever")
    out.append(AuditFinding(
        Subject.LAMBDA_INDEPENDENCE_AT_ORIGIN, Verdict.CONFIRMED if constant else Verdict.MISMATCH,
        f"at n = l = 0 the printed formula gives {float(vals[0])} for every lambda, "
        f"while the table lists {table_1s} at lambda = 0.01",
        {"lambdas": [float(x) for x in lams], "values": [float(v) for v in vals], "table_1s": table_1s},
    ))
    return out


def printed_bound_finding() -> AuditFinding:
    """The lambda -> infinity limit printed as -1/(2 nu^2) against the charge-2 hydrogenic value."""
    rows = {}
    for nu in range(1, 5):
        computed = hf_bounds(TABLE1_PARAMS, nu).lower
        printed = -1.0 / (2 * nu * nu)
        rows[str(nu)] = {"computed": computed, "printed": printed}
    return AuditFinding(
        Subject.PRINTED_BOUND, Verdict.MISMATCH,
        "printed large-lambda bound -1/(2 nu^2) differs from the charge-2 Coulomb value -1/nu^2 used here; "
        "the computation keeps -1/nu^2",
        rows,
    )


def bounds_finding(table: SpectrumTable, column: str) -> AuditFinding:
    evidence = {}
    ok = True
    for lab, e in sorted(table.column(column).items(), key=lambda kv: (kv[0].nu, kv[0].l)):
        bi = hf_bounds(table.params, lab.nu)
        inside = bi.contains(e)
        ok &= inside
        evidence[lab.name] = {"E": e, "lower": bi.lower, "upper": bi.upper, "inside": inside}
    return AuditFinding(
        Subject.BOUNDS, Verdict.CONFIRMED if ok else Verdict.MISMATCH,
        f"{column} eigenvalues {'all lie' if ok else 'do not all lie'} strictly inside the Coulomb-limit bounds",
        evidence,
    )


def hf_derivative_audit(p: ScaledParams, label: StateLabel, delta_lambda: float = 1e-4) -> dict:
    """Central-difference dE/dlambda against -b <exp(-lambda r)> on a common grid."""
    kind = ModelKind.TRUE_HELLMANN
    grid = auto_grid(p, kind, label)
    res, wf = solve_state(p, kind, label, grid, return_wavefunction=True)
    e_plus = solve_state(ScaledParams(p.b, p.lam + delta_lambda), kind, label, grid).energy
    e_minus = solve_state(ScaledParams(p.b, p.lam - delta_lambda), kind, label, grid).energy
    derivative = (e_plus - e_minus) / (2 * delta_lambda)
    expectation = expectation_exp_lambda_r(wf, p.lam)
    residual = abs(derivative + p.b * expectation)
    bounds = hf_bounds(p, label.nu)
    sign_ok = (derivative < 0) if p.b > 0 else (derivative > 0) if p.b < 0 else True
    return {
        "state": label.name,
        "b": p.b,
        "lambda": p.lam,
        "delta_lambda": delta_lambda,
        "energy": res.energy,
        "derivative": derivative,
        "expectation_exp": expectation,
        "residual": residual,
        "derivative_sign_ok": sign_ok,
        "bounds": [bounds.lower, bounds.upper],
        "inside_bounds": bounds.contains(res.energy),
    }


@dataclass
class SweepReport:
    b: float
    rows: list
    claims: dict

    def to_dict(self) -> dict:
        return {"b": self.b, "rows": self.rows, "claims": self.claims}


def approximation_error_sweep(b: float, lambda_grid, labels) -> SweepReport:
    """Modified-minus-true energy differences and census counts along a lambda grid."""
    lambdas = [float(x) for x in lambda_grid]
    if any(x <= 0 for x in lambdas) or lambdas != sorted(lambdas):
        raise ValueError("lambda grid must be positive and ascending")
    labels = [StateLabel.parse(x) if isinstance(x, str) else x for x in labels]
    rows = []
    for lam in lambdas:
        p = ScaledParams(b, lam)
        census = modified_model_census(p)
        states = {}
        for lab in labels:
            entry = {}
            try:
                entry["true"] = solve_state(p, ModelKind.TRUE_HELLMANN, lab).energy
            except (NoBoundState, ConvergenceFailure) as exc:
                entry["true"] = None
                entry["true_error"] = str(exc)
            try:
                entry["modified"] = float(modified_model_energy(p, lab))
            except NoBoundState:
                entry["modified"] = None
            if entry["true"] is not None and entry["modified"] is not None:
                entry["delta"] = entry["modified"] - entry["true"]
            else:
                entry["delta"] = None
            states[lab.name] = entry
        rows.append({"lambda": lam, "census_count": census.count, "states": states})

    claims = {}
    if labels:
        first = labels[0].name
        deltas = [abs(r["states"][first]["delta"]) for r in rows if r["states"][first]["delta"] is not None]
        claims[f"abs_delta_{first}_increasing"] = all(a < b_ for a, b_ in zip(deltas, deltas[1:]))
    counts = [r["census_count"] for r in rows]
    claims["census_non_increasing"] = all(a >= b_ for a, b_ in zip(counts, counts[1:]))
    lam_c, binds = critical_lambda(b)
    beyond = [r for r in rows if r["lambda"] >= lam_c]
    claims["critical_lambda"] = lam_c if binds else None
    claims["empty_beyond_critical"] = all(r["census_count"] == 0 for r in beyond)
    if labels and beyond:
        claims["true_still_binds_beyond_critical"] = all(
            r["states"][labels[0].name]["true"] is not None for r in beyond
        )
    return SweepReport(b, rows, claims)


def infinite_spectrum_probe(b: float, lam: float, l: int, K: int, kind: ModelKind = ModelKind.TRUE_HELLMANN):
    """Whether K consecutive bound states with angular momentum l exist.

    Evidence of an unbounded spectrum, not a proof.  For the true model every
    nu = l+1 .. l+K is solved with Numerov on a coarse grid; for the modified
    model the exact census is used.  Returns ``(flag, energies)``.
    """
    if K > 15:
        raise ValueError("K > 15 exceeds practical grid limits")
    p = ScaledParams(b, lam)
    kind = ModelKind(kind)
    if kind is ModelKind.MODIFIED:
        census = modified_model_census(p, l)
        if census.infinite:
            return True, {}
        energies = {lab.name: float(e) for lab, e in census.states}
        return len(energies) >= K, energies
    energies = {}
    for nu in range(l + 1, l + K + 1):
        lab = StateLabel(nu, l)
        grid = auto_grid(p, kind, lab, h_target=0.01)
        grid = GridSpec(grid.r_max, max(grid.n_points // 5, 10_000))
        try:
            e = solve_state(p, kind, lab, grid).energy
        except (NoBoundState, ConvergenceFailure):
            return False, energies
        if not e < 0:
            return False, energies
        energies[lab.name] = e
    return True, energies


# --- serialization -----------------------------------------------------------------

def _jsonable(obj):
    if isinstance(obj, Fraction):
        return float(obj)
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, (set, tuple)):
        return list(obj)
    if hasattr(obj, "item"):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def to_json(document: dict) -> str:
    return json.dumps(document, indent=2, sort_keys=True, default=_jsonable, allow_nan=True) + "\n"


def envelope(kind: str, config: dict, payload: dict, timestamp: str | None = None) -> dict:
    doc = {
        "schema_version": SCHEMA_VERSION,
        "artifact_version": __version__,
        "reference_dataset_version": load_reference().version,
        "units": "scaled: length hbar^2/(m A), energy m A^2/(2 hbar^2); Coulomb charge 2",
        "kind": kind,
        "config": config,
        "result": payload,
    }
    if timestamp is not None:
        doc["timestamp"] = timestamp
    return doc


def rows_to_csv(rows: list[dict]) -> str:
    if not rows:
        return ""
    keys = []
    for row in rows:
        for k in row:
            if k not in keys:
                keys.append(k)
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=keys, lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: ("" if row.get(k) is None else row.get(k)) for k in keys})
    return buf.getvalue()


def _fmt(x, digits=11):
    return "" if x is None else f"{x:.{digits}f}"


def table1_markdown(report: Table1Report) -> str:
    """Human-readable table in the layout of the golden table, with pass marks."""
    ref = load_reference()
    t = report.table
    head = "| State | Numerov | RPM | Present | Adamowski | Closed form (mod.) | Arda-Sever | Printed formula | check |"
    lines = [head, "|" + "---|" * 9]
    for row in ref.rows:
        lab = row.label
        num = t.energy(lab, "numerov")
        rpm = t.energy(lab, "rpm")
        ok_num = num is not None and abs(num - row.value("present")) <= TOL_PRESENT
        ok_rpm = rpm is None or abs(rpm - row.value("present")) <= TOL_PRESENT
        mark = "PASS" if ok_num and ok_rpm else "FAIL"
        lines.append(
            f"| {lab.name} | {_fmt(num)} | {_fmt(rpm)} | {row.present} | {row.adamowski} | "
            f"{_fmt(t.energy(lab, 'closed-form'), 8)} | {row.arda_sever} | {_fmt(t.energy(lab, 'arda-sever'), 8)} | {mark} |"
        )
    lines.append("")
    lines.append(f"b = {t.params.b}, lambda = {t.params.lam}; overall: {'PASS' if report.passed else 'FAIL'}")
    return "\n".join(lines) + "\n"
