"""Parameterizations and potential evaluation for the Hellmann family.

Every solver works in scaled units where the radial equation reads

    -R'' + [l(l+1)/r^2 - 2/r + (b/r) exp(-lambda r)] R = E R

i.e. length a0 = hbar^2/(m A), energy m A^2/(2 hbar^2), Coulomb charge 2.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np


class HellmannError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParameters(HellmannError, ValueError):
    pass


class NoBoundState(HellmannError):
    pass


class ConvergenceFailure(HellmannError):
    pass


class GridTooCoarse(ConvergenceFailure):
    pass


class ModelKind(str, enum.Enum):
    TRUE_HELLMANN = "hellmann"
    MODIFIED = "modified"


@dataclass(frozen=True)
class PotentialParams:
    """Physical parameters of V(r) = (-a + b exp(-lambda r))/r."""

    a: float
    b: float
    lam: float
    hbar2_over_m: float = 1.0

    def __post_init__(self):
        if not self.a > 0:
            raise InvalidParameters(f"a must be positive, got {self.a}")
        if not self.lam >= 0:
            raise InvalidParameters(f"lambda must be non-negative, got {self.lam}")
        if not self.hbar2_over_m > 0:
            raise InvalidParameters(f"hbar^2/m must be positive, got {self.hbar2_over_m}")


@dataclass(frozen=True)
class ScaledParams:
    b: float
    lam: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise InvalidParameters(f"lambda must be non-negative, got {self.lam}")
        if not math.isfinite(float(self.b)):
            raise InvalidParameters(f"b must be finite, got {self.b}")


_L_LETTERS = "spdfghiklmnoqrtuv"


@dataclass(frozen=True, order=True)
class StateLabel:
    nu: int
    l: int
    n_r: int = field(init=False, compare=False)

    def __post_init__(self):
        if self.l < 0 or self.nu < self.l + 1:
            raise InvalidParameters(f"need nu >= l + 1 >= 1, got nu={self.nu}, l={self.l}")
        object.__setattr__(self, "n_r", self.nu - self.l - 1)

    @classmethod
    def parse(cls, text: str) -> "StateLabel":
        """Parse hydrogen-style labels such as ``"1s"`` or ``"4f"``."""
        text = text.strip().lower()
        try:
            return cls(int(text[:-1]), _L_LETTERS.index(text[-1]))
        except (ValueError, IndexError):
            raise InvalidParameters(f"cannot parse state label {text!r}") from None

    @property
    def name(self) -> str:
        letter = _L_LETTERS[self.l] if self.l < len(_L_LETTERS) else f"[l={self.l}]"
        return f"{self.nu}{letter}"

    def __str__(self):
        return self.name


def to_scaled(A: float, B: float, C: float, hbar2_over_m: float) -> ScaledParams:
    """Convert H = -hbar^2/(2m) lap - A/r + B exp(-C r)/r into scaled units."""
    if not A > 0:
        raise InvalidParameters(f"A must be positive, got {A}")
    if not hbar2_over_m > 0:
        raise InvalidParameters(f"hbar^2/m must be positive, got {hbar2_over_m}")
    if not C >= 0:
        raise InvalidParameters(f"C must be non-negative, got {C}")
    a0 = hbar2_over_m / A
    return ScaledParams(b=2.0 * B / A, lam=a0 * C)


def from_scaled(p: ScaledParams, A: float, hbar2_over_m: float) -> tuple[float, float, float]:
    """Inverse of :func:`to_scaled` for a chosen A and hbar^2/m; returns (A, B, C)."""
    if not A > 0 or not hbar2_over_m > 0:
        raise InvalidParameters("A and hbar^2/m must be positive")
    return A, 0.5 * p.b * A, p.lam * A / hbar2_over_m


def energy_unit(A: float, hbar2_over_m: float) -> float:
    """Scaled energy unit m A^2 / (2 hbar^2) in physical units."""
    return A * A / (2.0 * hbar2_over_m)


def _inv_r_substituted(lam, r):
    # lam / (1 - exp(-lam r)); series for small lam*r
    x = lam * r
    small = x < 1e-4
    with np.errstate(divide="ignore", invalid="ignore"):
        exact = lam / -np.expm1(-x)
    series = 1.0 / r + lam / 2.0 + lam * x / 12.0 - lam * x**3 / 720.0
    return np.where(small, series, exact)


def potential_value(p: ScaledParams, kind: ModelKind, l: int, r):
    """Effective radial potential (centrifugal term included) at r > 0.

    Accepts scalars or numpy arrays.
    """
    r_arr = np.asarray(r, dtype=float)
    if np.any(r_arr <= 0):
        raise InvalidParameters("potential is only defined for r > 0")
    L = l * (l + 1)
    if p.lam == 0 or kind is ModelKind.TRUE_HELLMANN:
        out = L / r_arr**2 - 2.0 / r_arr + p.b * np.exp(-p.lam * r_arr) / r_arr
    else:
        g = _inv_r_substituted(p.lam, r_arr)
        # exp(-x) * lam/(1-exp(-x)) = g - lam
        out = L * g**2 - 2.0 * g + p.b * (g - p.lam)
    return out[()] if out.ndim == 0 else out


def continuum_threshold(p: ScaledParams, kind: ModelKind, l: int) -> float:
    if kind is ModelKind.TRUE_HELLMANN or p.lam == 0:
        return 0.0
    return -2.0 * p.lam + p.lam**2 * l * (l + 1)


def r2_potential_series(p: ScaledParams, kind: ModelKind, l: int, E: float, order: int) -> np.ndarray:
    """Taylor coefficients q_k of r^2 (V_eff(r) - E) about r = 0, k = 0..order."""
    lam, b = p.lam, p.b
    L = l * (l + 1)
    k = np.arange(order + 1)
    fact = np.array([math.factorial(i) for i in range(order + 1)], dtype=float)
    exp_neg = (-lam) ** k / fact  # exp(-lam r)
    q = np.zeros(order + 1)
    if kind is ModelKind.TRUE_HELLMANN or lam == 0:
        q[0] = L
        if order >= 1:
            q[1:] = b * exp_neg[:-1]
            q[1] -= 2.0
    else:
        from scipy.special import bernoulli

        # r * lam/(1 - exp(-lam r)) = sum B_k^+ lam^k r^k / k!, with B_1^+ = +1/2
        bern = np.array(bernoulli(order), dtype=float)
        if order >= 1:
            bern[1] = 0.5
        beta = bern * lam**k / fact
        beta_sq = np.convolve(beta, beta)[: order + 1]
        beta_exp = np.convolve(beta, exp_neg)[: order + 1]
        q += L * beta_sq
        # r * (-2 beta + b beta exp(-lam r)) shifts by one power of r
        q[1:] += (-2.0 * beta + b * beta_exp)[:-1]
    if order >= 2:
        q[2] -= E
    return q
