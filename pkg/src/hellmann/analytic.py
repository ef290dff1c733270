"""Closed-form results for the Hellmann potential and its substituted variant.

The substituted ("modified") model replaces 1/r by lambda/(1 - u) and 1/r^2
by lambda^2/(1 - u)^2 with u = exp(-lambda r).  In scaled units it is a
shifted Hulthen problem with the exact spectrum

    alpha = [(2 - b)/lambda - N^2 - L] / (2 N),   L = l(l+1),  N = nu
    E     = -2 lambda - lambda^2 (alpha^2 - L)

and a bound state exists only while alpha > 0.

The functions accept plain floats; :func:`modified_model_energy`,
:func:`arda_sever_energy` and :func:`hydrogenic_energy` only use field
operations, so they also evaluate exactly on :class:`fractions.Fraction`.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

from .model import InvalidParameters, ModelKind, NoBoundState, ScaledParams, StateLabel, continuum_threshold

# number of terms of the two expansions that are implemented
_MAX_SERIES_ORDER = 6


class SeriesKind(str, enum.Enum):
    INVERSE_R = "inverse-r"
    INVERSE_R2 = "inverse-r2"


class Subject(str, enum.Enum):
    QUANTIZATION_SIGN = "QuantizationSign"
    LAMBDA_INDEPENDENCE_AT_ORIGIN = "LambdaIndependenceAtOrigin"
    FORMULA_VS_TABLE = "FormulaVsTable"
    EXPONENT_SIGN = "ExponentSign"
    CLOSED_FORM_VS_TABLE = "ClosedFormVsTable"
    ACCURATE_VS_TABLE = "AccurateVsTable"
    ORDERING = "Ordering"
    BOUNDS = "Bounds"
    PRINTED_BOUND = "PrintedBound"


class Verdict(str, enum.Enum):
    INFEASIBLE = "Infeasible"
    MISMATCH = "Mismatch"
    CONFIRMED = "Confirmed"


@dataclass(frozen=True)
class AuditFinding:
    subject: Subject
    verdict: Verdict
    detail: str
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "subject": self.subject.value,
            "verdict": self.verdict.value,
            "detail": self.detail,
            "evidence": self.evidence,
        }


@dataclass(frozen=True)
class ExponentPair:
    lambda1: float | None
    lambda2: int
    lambda1_sq_as_printed: float
    lambda1_sq_derived: float
    feasible: bool
    coulomb_limit: bool = False


class BSign(str, enum.Enum):
    POSITIVE = "Positive"
    NEGATIVE = "Negative"
    ZERO = "Zero"


@dataclass(frozen=True)
class BoundsInterval:
    lower: float
    upper: float
    nu: int
    b_sign_case: BSign

    def contains(self, E: float, strict: bool = True) -> bool:
        if strict:
            return self.lower < E < self.upper
        return self.lower <= E <= self.upper


@dataclass(frozen=True)
class SeriesValue:
    value: float
    coefficients: list[float]


def substitution_series(which: SeriesKind, lam: float, r: float, order: int) -> SeriesValue:
    """Truncated small-(lambda r) expansion of a substituted form.

    ``coefficients`` are the individual terms (already multiplied by the powers
    of lambda and r); ``value`` is their sum.
    """
    which = SeriesKind(which)
    if order < 1 or order > _MAX_SERIES_ORDER:
        raise InvalidParameters(f"order must be in 1..{_MAX_SERIES_ORDER}, got {order}")
    if r <= 0 or lam < 0:
        raise InvalidParameters("need r > 0 and lambda >= 0")
    if which is SeriesKind.INVERSE_R:
        # x/(1 - e^-x) = 1 + x/2 + x^2/12 - x^4/720 + x^6/30240 - x^8/1209600
        terms = [
            1.0 / r,
            lam / 2.0,
            lam**2 * r / 12.0,
            -(lam**4) * r**3 / 720.0,
            lam**6 * r**5 / 30240.0,
            -(lam**8) * r**7 / 1209600.0,
        ]
    else:
        # (x/(1 - e^-x))^2 = 1 + x + 5x^2/12 + x^3/12 + x^4/240 - x^5/720 + ...
        terms = [
            1.0 / r**2,
            lam / r,
            5.0 * lam**2 / 12.0,
            lam**3 * r / 12.0,
            lam**4 * r**2 / 240.0,
            -(lam**5) * r**3 / 720.0,
        ]
    terms = terms[:order]
    return SeriesValue(math.fsum(terms), terms)


def substituted_inverse_r(lam: float, r: float) -> float:
    return lam / -math.expm1(-lam * r)


def substituted_inverse_r2(lam: float, r: float) -> float:
    return substituted_inverse_r(lam, r) ** 2


def exponents(p: ScaledParams, l: int, E: float) -> ExponentPair:
    """Origin and u -> 1 exponents of the hypergeometric ansatz.

    The printed lambda1^2 carries (E + 2 lambda) with a positive sign, which is
    negative for every bound state; both the printed and the sign-corrected
    values are returned.
    """
    L = l * (l + 1)
    lambda2 = l + 1
    if p.lam == 0:
        return ExponentPair(None, lambda2, math.inf, math.inf, E < 0, coulomb_limit=True)
    printed = (E + 2.0 * p.lam) / p.lam**2 + L
    derived = -(E + 2.0 * p.lam) / p.lam**2 + L
    feasible = E < continuum_threshold(p, ModelKind.MODIFIED, l) and derived > 0
    return ExponentPair(math.sqrt(derived) if feasible else None, lambda2, printed, derived, feasible)


def exponent_audit(p: ScaledParams, label: StateLabel) -> AuditFinding:
    """Checks the sign of the printed lambda1^2 at a bound-state energy of the modified model."""
    E = modified_model_energy(p, label)
    ex = exponents(p, label.l, E)
    verdict = Verdict.MISMATCH if ex.lambda1_sq_as_printed < 0 else Verdict.CONFIRMED
    return AuditFinding(
        Subject.EXPONENT_SIGN,
        verdict,
        f"{label}: printed lambda1^2 = {ex.lambda1_sq_as_printed:.6g}, sign-corrected = {ex.lambda1_sq_derived:.6g}",
        {"b": p.b, "lambda": p.lam, "state": label.name, "E": E,
         "lambda1_sq_as_printed": ex.lambda1_sq_as_printed, "lambda1_sq_derived": ex.lambda1_sq_derived},
    )


def quantization_audit(p: ScaledParams, l: int, n: int, samples: int = 64) -> AuditFinding:
    """Evaluate both sides of the polynomial condition -n = lambda1 + lambda2 + sqrt(...)/2.

    With the positive branches the right-hand side is at least lambda2 = l + 1 >= 1
    while the left-hand side is -n <= 0, whatever the energy.  The sweep over
    bound-state energies records the evidence.
    """
    if n < 0:
        raise InvalidParameters(f"n must be non-negative, got {n}")
    lhs = -n
    lam = p.lam if p.lam > 0 else 1e-12
    threshold = -2.0 * lam + lam**2 * l * (l + 1)
    deepest = -max(2.0 - p.b, 2.0) ** 2 / 4.0 - 2.0 * lam
    rhs_values = []
    for k in range(samples):
        E = threshold - (threshold - deepest) * (k + 1) / samples
        ex = exponents(ScaledParams(p.b, lam), l, E)
        if not ex.feasible:
            continue
        arg = -4.0 * (E + p.b * lam) / lam**2
        third = 0.5 * math.sqrt(arg) if arg >= 0 else 0.0
        rhs_values.append(ex.lambda1 + ex.lambda2 + third)
    rhs_min = min(rhs_values)
    verdict = Verdict.INFEASIBLE if lhs <= 0 < rhs_min else Verdict.CONFIRMED
    return AuditFinding(
        Subject.QUANTIZATION_SIGN,
        verdict,
        f"left side -n = {lhs} is never positive while the right side is at least {rhs_min:.6g} "
        f"over {len(rhs_values)} bound-state energies; the condition has no solution",
        {"b": p.b, "lambda": p.lam, "l": l, "n": n, "lhs": lhs, "rhs_min": rhs_min,
         "rhs_max": max(rhs_values), "energy_range": [deepest, threshold]},
    )


def arda_sever_energy(a, b, lam, hbar2_over_m, n: int, l: int):
    """The published closed-form energy, evaluated term by term as printed."""
    if n < 0 or l < 0:
        raise InvalidParameters("n and l must be non-negative")
    if not hbar2_over_m > 0:
        raise InvalidParameters("hbar^2/m must be positive")
    k = hbar2_over_m
    nl = (n + l) ** 2
    shift = l * (1 + 2 * n) + nl
    braces = (
        4 * (a * a + b * b)
        + 4 * k * lam * b * (2 * l * l + nl + l * (3 + 2 * n))
        + lam * lam * k * k * shift**2
        + 4 * a * (-2 * b + lam * k * shift)
    )
    return -braces / (8 * k * (n + l + 1) ** 2)


def hydrogenic_energy(a, hbar2_over_m, nu: int):
    if nu < 1:
        raise InvalidParameters(f"nu must be >= 1, got {nu}")
    return -a * a / (2 * hbar2_over_m * nu * nu)


def modified_alpha(p: ScaledParams, label: StateLabel):
    N = label.nu
    L = label.l * (label.l + 1)
    return ((2 - p.b) / p.lam - N * N - L) / (2 * N)


def modified_model_energy(p: ScaledParams, label: StateLabel):
    """Exact eigenvalue of the substituted model; raises NoBoundState if alpha <= 0."""
    if p.lam == 0:
        if p.b >= 2:
            raise NoBoundState("no attraction left at lambda = 0 with b >= 2")
        return -((2 - p.b) ** 2) / (4 * label.nu**2)
    alpha = modified_alpha(p, label)
    if alpha <= 0:
        raise NoBoundState(f"{label} is unbound in the modified model (alpha = {float(alpha):.6g})")
    L = label.l * (label.l + 1)
    return -2 * p.lam - p.lam**2 * (alpha * alpha - L)


@dataclass(frozen=True)
class Census:
    states: list[tuple[StateLabel, float]]
    infinite: bool = False

    @property
    def count(self) -> int | None:
        return None if self.infinite else len(self.states)

    @property
    def labels(self) -> set[StateLabel]:
        return {lab for lab, _ in self.states}


def modified_model_census(p: ScaledParams, l: int | None = None) -> Census:
    """All bound states of the modified model (l=None means every l)."""
    if p.lam == 0:
        return Census([], infinite=True)
    limit = (2.0 - p.b) / p.lam
    states = []
    ls = [l] if l is not None else range(0, max(int(math.isqrt(max(int(limit), 0))) + 1, 1))
    for ll in ls:
        L = ll * (ll + 1)
        nu = ll + 1
        while nu * nu + L < limit:
            lab = StateLabel(nu, ll)
            states.append((lab, modified_model_energy(p, lab)))
            nu += 1
    states.sort(key=lambda item: (item[0].nu, item[0].l))
    return Census(states)


def critical_lambda(b: float) -> tuple[float, bool]:
    """Screening rate beyond which the modified model has no bound state.

    Returns ``(lambda_crit, binds)``; ``binds`` is False when b >= 2.
    """
    if b >= 2:
        return 0.0, False
    return 2.0 - b, True


def hf_bounds(p: ScaledParams, nu: int) -> BoundsInterval:
    """Coulomb-limit bounds on the nu-shell of the true Hellmann model.

    Both limits are hydrogenic with charge 2 - b (lambda = 0) and 2 (lambda -> inf),
    E = -Z^2/(4 nu^2) in scaled units.
    """
    if nu < 1:
        raise InvalidParameters(f"nu must be >= 1, got {nu}")
    at_zero = -max(2.0 - p.b, 0.0) ** 2 / (4.0 * nu * nu)
    at_inf = -(2.0**2) / (4.0 * nu * nu)
    if p.b > 0:
        return BoundsInterval(at_inf, at_zero, nu, BSign.POSITIVE)
    if p.b < 0:
        return BoundsInterval(at_zero, at_inf, nu, BSign.NEGATIVE)
    return BoundsInterval(at_inf, at_zero, nu, BSign.ZERO)
