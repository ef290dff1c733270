"""Riccati-Pade eigenvalues for the true Hellmann model.

With s = l + 1 the regularized logarithmic derivative f(r) = s/r - R'/R obeys

    f' = f^2 - 2 s f / r + E - V(r),   V(r) = -2/r + b exp(-lambda r)/r,

so its Taylor coefficients follow from a quadratic recurrence.  Quantization
asks for the Hankel determinants det[f_{i+j+d+1}] to vanish; the roots for
growing dimension D converge to the eigenvalues.  Everything runs in mpmath at
``precision_digits`` significant digits.
"""
from __future__ import annotations

import csv
import io
import os
from dataclasses import dataclass, field

import mpmath

from .analytic import hf_bounds
from .model import ConvergenceFailure, InvalidParameters, ScaledParams, StateLabel
from .numerov import EigenResult, Method

DEFAULT_DIGITS = int(os.environ.get("HELLMANN_RPM_DIGITS", "60"))


class RootDivergence(ConvergenceFailure):
    pass


class StateMismatch(ConvergenceFailure):
    pass


@dataclass(frozen=True)
class RpmConfig:
    precision_digits: int = DEFAULT_DIGITS
    d_displacement: int = 0
    D_max: int = 15
    D_min: int = 2
    seed_energy: float | None = None
    root_tol: float = 1e-14
    max_newton: int = 60

    def __post_init__(self):
        if self.precision_digits < 50:
            raise InvalidParameters("precision_digits must be >= 50")
        if self.D_max < self.D_min or self.D_min < 1:
            raise InvalidParameters("need 1 <= D_min <= D_max")
        if self.d_displacement < 0:
            raise InvalidParameters("displacement must be non-negative")
        if self.root_tol < 10.0 ** (-(self.precision_digits - 10)):
            raise InvalidParameters("root_tol is finer than the working precision supports")


@dataclass(frozen=True)
class CoefficientTable:
    coefficients: list
    b: float
    lam: float
    l: int
    energy: object

    @property
    def J(self) -> int:
        return len(self.coefficients) - 1

    def __getitem__(self, j):
        return self.coefficients[j]


@dataclass
class RootHistory:
    rows: list = field(default_factory=list)

    def add(self, D: int, root, delta):
        self.rows.append((D, root, delta))

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["D", "root", "abs_delta"])
        for D, root, delta in self.rows:
            w.writerow([
                D,
                "" if root is None else mpmath.nstr(root, 25),
                "" if delta is None else mpmath.nstr(delta, 6),
            ])
        return buf.getvalue()


def riccati_coefficients(p: ScaledParams, l: int, E, J: int) -> CoefficientTable:
    """Taylor coefficients f_0..f_J of the regularized log-derivative at energy E.

    Uses the current mpmath precision.
    """
    if J < 1:
        raise InvalidParameters("J must be >= 1")
    mpf = mpmath.mpf
    s = l + 1
    b = mpf(p.b)
    lam = mpf(p.lam)
    E = mpf(E)
    # v_j: coefficient of r^j in V; v_{-1} = b - 2
    v = [b * (-lam) ** (j + 1) / mpmath.factorial(j + 1) for j in range(J)]
    f = [-(b - 2) / (2 * s)]
    for j in range(J):
        acc = mpmath.fsum(f[k] * f[j - k] for k in range(j + 1))
        if j == 0:
            acc += E
        f.append((acc - v[j]) / (j + 1 + 2 * s))
    return CoefficientTable(f, p.b, p.lam, l, E)


def hankel_determinant(table: CoefficientTable, D: int, d: int = 0):
    if D < 1:
        raise InvalidParameters("D must be >= 1")
    need = 2 * D + d - 1
    if table.J < need:
        raise InvalidParameters(f"need coefficients up to f_{need}, table stops at f_{table.J}")
    M = mpmath.matrix(D, D)
    for i in range(D):
        for j in range(D):
            M[i, j] = table[i + j + d + 1]
    return mpmath.det(M)


def _hankel_function(p: ScaledParams, l: int, D: int, d: int):
    J = 2 * D + d - 1

    def fn(E):
        return hankel_determinant(riccati_coefficients(p, l, E, J), D, d)

    return fn


def _newton(fn, x0, lo, hi, tol, max_iter):
    """Damped Newton with a central-difference derivative, kept inside [lo, hi]."""
    x = mpmath.mpf(x0)
    fx = fn(x)
    eps = mpmath.mpf(10) ** (-(mpmath.mp.dps // 3))
    for it in range(1, max_iter + 1):
        step_h = eps * max(abs(x), mpmath.mpf(1))
        dfx = (fn(x + step_h) - fn(x - step_h)) / (2 * step_h)
        if dfx == 0:
            raise RootDivergence("vanishing derivative of the Hankel determinant")
        step = fx / dfx
        t = mpmath.mpf(1)
        while True:
            x_new = x - t * step
            if lo <= x_new <= hi:
                f_new = fn(x_new)
                if abs(f_new) < abs(fx) or t < mpmath.mpf(2) ** -30:
                    break
            t /= 2
            if t < mpmath.mpf(2) ** -40:
                raise RootDivergence(f"Newton iterate left the bounds interval [{float(lo)}, {float(hi)}]")
        done = abs(x_new - x) <= tol * abs(x_new)
        x, fx = x_new, f_new
        if done or fx == 0:
            return x, it
    raise ConvergenceFailure("Newton iteration on the Hankel determinant did not converge")


def rpm_eigenvalue(p: ScaledParams, label: StateLabel, cfg: RpmConfig | None = None, *, check_state: bool = True):
    """Eigenvalue of ``label`` from the sequence of Hankel roots, D = D_min .. D_max.

    Returns ``(EigenResult, RootHistory)``.  With ``check_state`` the converged
    root is compared with coarse Numerov energies of the neighbouring states
    and must be closest to the requested one.
    """
    cfg = cfg or RpmConfig()
    bounds = hf_bounds(p, label.nu)
    seed = cfg.seed_energy
    if seed is None:
        seed = 0.5 * (bounds.lower + bounds.upper) if label.n_r == 0 else _coarse_numerov(p, label)
    nu = label.nu
    # Hankel roots of neighbouring shells are ~(1/nu^2 - 1/(nu+1)^2) apart; stay well inside
    half_gap = 0.25 * abs(seed) * (1.0 - nu**2 / (nu + 1.0) ** 2)
    if label.n_r == 0 and cfg.seed_energy is None:
        half_gap = max(half_gap, bounds.upper - bounds.lower)
    with mpmath.workdps(cfg.precision_digits):
        lo = mpmath.mpf(seed - half_gap)
        hi = mpmath.mpf(min(seed + half_gap, 0.0))
        history = RootHistory()
        previous = None
        x = None
        converged = False
        newton_tol = mpmath.mpf(10) ** (-(cfg.precision_digits - 15))
        iterations = 0
        delta = None
        for D in range(cfg.D_min, cfg.D_max + 1):
            fn = _hankel_function(p, label.l, D, cfg.d_displacement)
            try:
                x, its = _newton(fn, seed if previous is None else previous, lo, hi, newton_tol, cfg.max_newton)
            except ConvergenceFailure:
                # no root of this dimension near the seed yet
                history.add(D, None, None)
                previous = None
                continue
            iterations += its
            delta = None if previous is None else abs(x - previous)
            history.add(D, x, delta)
            if delta is not None and delta < cfg.root_tol * abs(x):
                converged = True
                break
            previous = x
        if x is None:
            raise RootDivergence(f"{label}: no Hankel root found near {seed}")
        if not converged and cfg.D_min != cfg.D_max:
            raise ConvergenceFailure(
                f"{label}: Hankel roots not converged at D_max={cfg.D_max} (last change {mpmath.nstr(delta, 3)})"
            )
        energy = x
        residual = _hankel_function(p, label.l, history.rows[-1][0], cfg.d_displacement)(energy)

    E = float(energy)
    est = float(delta) if delta is not None else 0.0
    if check_state:
        _check_state(p, label, E)
    result = EigenResult(
        energy=E,
        label=label,
        method=Method.RPM,
        est_error=max(est, 1e-300),
        nodes=None,
        diagnostics={
            "iterations": iterations,
            "D_final": history.rows[-1][0],
            "precision_digits": cfg.precision_digits,
            "displacement": cfg.d_displacement,
            "energy_digits": mpmath.nstr(energy, 25),
            "residual": float(abs(residual)),
        },
    )
    return result, history


def _coarse_grid_solve(p: ScaledParams, label: StateLabel) -> float:
    from .model import ModelKind
    from .numerov import GridSpec, auto_grid, solve_state

    grid = auto_grid(p, ModelKind.TRUE_HELLMANN, label)
    grid = GridSpec(grid.r_max, max(1000, grid.n_points // 20))
    return solve_state(p, ModelKind.TRUE_HELLMANN, label, grid).energy


_coarse_numerov = _coarse_grid_solve


def _check_state(p: ScaledParams, label: StateLabel, E: float):
    from .model import NoBoundState

    target = _coarse_grid_solve(p, label)
    neighbours = []
    for nu in (label.nu - 1, label.nu + 1):
        if nu >= label.l + 1:
            try:
                neighbours.append(_coarse_grid_solve(p, StateLabel(nu, label.l)))
            except NoBoundState:
                pass
    if any(abs(E - e) < abs(E - target) for e in neighbours):
        raise StateMismatch(f"converged root {E} is closer to another {label.l}-state than to {label}")
