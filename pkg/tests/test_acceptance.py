"""Acceptance criteria, one test each; every test prints a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -s`` to see the lines.
"""
import time
from fractions import Fraction

import pytest

from hellmann.analysis import (
    AS_A,
    AS_HBAR2_OVER_M,
    OrderVerdict,
    SpectrumTable,
    hf_derivative_audit,
    infinite_spectrum_probe,
    load_reference,
    ordering_audit,
    reproduce_table1,
)
from hellmann.analytic import (
    SeriesKind,
    Subject,
    Verdict,
    arda_sever_energy,
    critical_lambda,
    hf_bounds,
    modified_model_census,
    modified_model_energy,
    substituted_inverse_r,
    substitution_series,
)
from hellmann.model import ModelKind, ScaledParams, StateLabel
from hellmann.numerov import GridSpec, Method, EigenResult, count_bound_states, solve_state
from hellmann.rpm import RpmConfig, rpm_eigenvalue

P = ScaledParams(1, 0.01)
P_EXACT = ScaledParams(Fraction(1), Fraction(1, 100))
TRUE, MOD = ModelKind.TRUE_HELLMANN, ModelKind.MODIFIED


def verdict(number, ok, detail):
    print(f"\n[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}")
    assert ok, detail


@pytest.fixture(scope="module")
def ref():
    return load_reference()


@pytest.fixture(scope="module")
def numerov_column(ref):
    t0 = time.perf_counter()
    out = {row.label: solve_state(P, TRUE, row.label).energy for row in ref.rows}
    return out, time.perf_counter() - t0


@pytest.fixture(scope="module")
def rpm_column(ref):
    out = {}
    for row in ref.rows:
        out[row.label] = rpm_eigenvalue(P, row.label, RpmConfig(precision_digits=60, D_max=15))[0].energy
    return out


def test_criterion_01_accurate_columns(ref, numerov_column):
    energies, elapsed = numerov_column
    worst = max(abs(energies[row.label] - row.value("present")) for row in ref.rows)
    t0 = time.perf_counter()
    rpm_digits_ok = True
    for name in ("1s", "2p"):
        lab = StateLabel.parse(name)
        res, _ = rpm_eigenvalue(P, lab, RpmConfig(precision_digits=60, D_max=15))
        printed = ref.row(lab).present
        rpm_digits_ok &= f"{res.energy:.{ref.row(lab).decimals('present')}f}" == printed
        rpm_digits_ok &= res.diagnostics["D_final"] <= 15
    rpm_elapsed = time.perf_counter() - t0
    ok = worst <= 1e-8 and elapsed <= 60 and rpm_digits_ok and rpm_elapsed <= 60
    verdict(1, ok, f"Numerov max |dE| = {worst:.2e} (<= 1e-8) in {elapsed:.1f} s; "
                   f"RPM 1s/2p all printed digits: {rpm_digits_ok} in {rpm_elapsed:.1f} s")


def test_criterion_02_substituted_model_column(ref):
    worst = max(abs(modified_model_energy(P_EXACT, row.label) - row.exact("arda_sever")) for row in ref.rows)
    numerov_worst = 0.0
    for name in ("1s", "2s", "2p", "3d"):
        lab = StateLabel.parse(name)
        numerov_worst = max(numerov_worst, abs(solve_state(P, MOD, lab).energy - float(modified_model_energy(P, lab))))
    ok = worst <= Fraction(5, 10**6) and numerov_worst <= 1e-8
    verdict(2, ok, f"closed form vs printed column max |dE| = {float(worst):.2e} (<= 5e-6); "
                   f"Numerov vs closed form max |dE| = {numerov_worst:.2e} (<= 1e-8)")


def test_criterion_03_formula_audit(ref):
    def formula(lab, lam=Fraction(1, 100)):
        return arda_sever_energy(AS_A, Fraction(1), lam, AS_HBAR2_OVER_M, lab.n_r, lab.l)

    close = {n: abs(formula(StateLabel.parse(n)) - ref.row(StateLabel.parse(n)).exact("arda_sever"))
             for n in ("2p", "3p")}
    far = {n: abs(formula(StateLabel.parse(n)) - ref.row(StateLabel.parse(n)).exact("arda_sever"))
           for n in ("1s", "2s", "3s")}
    ground = [formula(StateLabel(1, 0), lam) for lam in (0, Fraction(1, 100), Fraction(1, 10), 1, 7)]
    independent = len(set(ground)) == 1
    report = reproduce_table1(use_rpm=False)
    subjects = {f.subject for f in report.findings}
    surfaced = {Subject.FORMULA_VS_TABLE, Subject.LAMBDA_INDEPENDENCE_AT_ORIGIN} <= subjects
    (ff,) = [f for f in report.findings if f.subject is Subject.FORMULA_VS_TABLE]
    surfaced &= {"2p", "3p"} <= set(ff.evidence["matched"]) and {"1s", "2s", "3s"} <= set(ff.evidence["mismatched"])
    ok = (all(d <= Fraction(5, 10**6) for d in close.values())
          and all(d >= Fraction(5, 10**3) for d in far.values()) and independent and surfaced)
    verdict(3, ok, f"matches {sorted(close)} within 5e-6 ({[float(d) for d in close.values()]}); "
                   f"misses {sorted(far)} by >= 5e-3 (min {float(min(far.values())):.4f}); "
                   f"lambda-independent at n=l=0: {independent}; findings reported: {surfaced}")


def test_criterion_04_ordering(ref, numerov_column):
    energies, _ = numerov_column
    t = SpectrumTable(P)
    for row in ref.rows:
        lab = row.label
        t.set("numerov", EigenResult(energies[lab], lab, Method.NUMEROV))
        t.set("modified", EigenResult(float(modified_model_energy(P, lab)), lab, Method.CLOSED_FORM))
        t.set("formula", EigenResult(row.value("arda_sever"), lab, Method.REFERENCE))
    acc = ordering_audit(t, "numerov")
    mod = ordering_audit(t, "modified")
    printed = ordering_audit(t, "formula")
    ok = all(
        acc.verdict(nu) is OrderVerdict.ACCURATE
        and mod.verdict(nu) is OrderVerdict.OPPOSITE
        and printed.verdict(nu) is OrderVerdict.OPPOSITE
        for nu in (2, 3, 4)
    )
    verdict(4, ok, "nu = 2,3,4: accurate "
                   f"{[acc.verdict(nu).value for nu in (2, 3, 4)]}, substituted "
                   f"{[mod.verdict(nu).value for nu in (2, 3, 4)]}, printed column "
                   f"{[printed.verdict(nu).value for nu in (2, 3, 4)]}")


def test_criterion_05_bounds(ref, numerov_column):
    energies, _ = numerov_column
    outside = []
    for row in ref.rows:
        lab = row.label
        lower, upper = -1.0 / lab.nu**2, -((2 - P.b) ** 2) / (4 * lab.nu**2)
        bi = hf_bounds(P, lab.nu)
        for e in (energies[lab], row.value("present")):
            if not (lower < e < upper and bi.contains(e)):
                outside.append(lab.name)
    verdict(5, not outside, f"all ten accurate eigenvalues strictly inside (-1/nu^2, -(2-b)^2/(4 nu^2)); outside: {outside}")


def test_criterion_06_census_and_critical_lambda():
    s_waves = modified_model_census(P, 0).count
    near = modified_model_census(ScaledParams(1, 0.99))
    beyond = modified_model_census(ScaledParams(1, 1.01)).count
    lam_c = critical_lambda(1)
    numerov_s = count_bound_states(P, 0)
    numerov_near = sum(count_bound_states(ScaledParams(1, 0.99), l) for l in range(3))
    numerov_beyond = sum(count_bound_states(ScaledParams(1, 1.01), l) for l in range(3))
    ok = (s_waves == 9 and near.count == 1 and beyond == 0 and lam_c == (1.0, True)
          and numerov_s == 9 and numerov_near == 1 and numerov_beyond == 0)
    verdict(6, ok, f"census s-waves@0.01 = {s_waves} (Numerov {numerov_s}), total@0.99 = {near.count} "
                   f"(Numerov {numerov_near}), total@1.01 = {beyond} (Numerov {numerov_beyond}), "
                   f"critical_lambda(1) = {lam_c[0]}")


def test_criterion_07_infinite_spectrum_probe():
    flag, energies = infinite_spectrum_probe(1.0, 0.5, 0, 10)
    mod_count = modified_model_census(ScaledParams(1, 0.5)).count
    ok = flag and len(energies) >= 10 and mod_count <= 1
    verdict(7, ok, f"true model at lambda=0.5: {len(energies)} converged s-states; substituted census: {mod_count}")


def test_criterion_08_hellmann_feynman():
    residuals = {n: hf_derivative_audit(P, StateLabel.parse(n), 1e-4)["residual"] for n in ("1s", "2p")}
    ok = all(r <= 1e-6 for r in residuals.values())
    verdict(8, ok, "|dE/dlambda + b<exp(-lambda r)>| = " + ", ".join(f"{k}: {v:.2e}" for k, v in residuals.items()))


def test_criterion_09_series():
    worst_ratio = 0.0
    for lam in (0.001, 0.01, 0.1, 1.0):
        for k in range(1, 200):
            x = 0.1 * k / 200
            r = x / lam
            exact = substituted_inverse_r(lam, r)
            trunc = substitution_series(SeriesKind.INVERSE_R, lam, r, 3).value
            bound = 2 * lam**4 * r**3 / 720
            # the last term is the double-precision floor of the exact value
            worst_ratio = max(worst_ratio, abs(exact - trunc) / (bound + 1e-15 * exact))
    verdict(9, worst_ratio <= 1.0, f"max residual / (2 lambda^4 r^3 / 720) over lambda r in (0, 0.1): {worst_ratio:.3f}")


def test_criterion_10_method_independence(ref, numerov_column, rpm_column):
    energies, _ = numerov_column
    worst = max(abs(energies[lab] - rpm_column[lab]) for lab in energies)
    lab = StateLabel(1, 0)
    raw_a = solve_state(P, TRUE, lab, GridSpec(40.0, 1000)).diagnostics["raw_energies"]
    raw_b = solve_state(P, TRUE, lab, GridSpec(40.0, 4000)).diagnostics["raw_energies"]
    ratio = (raw_a[0] - raw_a[1]) / (raw_a[1] - raw_b[0])
    ok = worst <= 1e-9 and abs(ratio - 16) <= 0.2 * 16
    verdict(10, ok, f"Numerov vs RPM max |dE| = {worst:.2e} (<= 1e-9); Richardson ratio on 1s = {ratio:.3f} (16 +- 20%)")
