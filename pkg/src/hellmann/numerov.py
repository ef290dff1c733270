"""Numerov shooting solver for bound states of both model kinds.

Outward integration starts from a Frobenius series at the origin, inward
integration from the WKB decay at r_max.  The two branches are matched in
logarithmic derivative at the outermost classical turning point; the energy
is first bracketed by node counting so that the state identity (nu, l) is
guaranteed, then refined with Brent's method.  Energies from steps h and h/2
are Richardson-extrapolated assuming an O(h^4) error.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numba
import numpy as np
from scipy.integrate import simpson
from scipy.optimize import brentq

from .model import (
    ConvergenceFailure,
    GridTooCoarse,
    InvalidParameters,
    ModelKind,
    NoBoundState,
    ScaledParams,
    StateLabel,
    continuum_threshold,
    potential_value,
    r2_potential_series,
)

_SERIES_ORDER = 10
_MAX_BISECT = 200


class Method(str, enum.Enum):
    NUMEROV = "numerov"
    RPM = "rpm"
    CLOSED_FORM = "closed-form"
    ARDA_SEVER = "arda-sever"
    REFERENCE = "reference"


@dataclass(frozen=True)
class GridSpec:
    r_max: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 1000:
            raise InvalidParameters(f"n_points must be >= 1000, got {self.n_points}")
        if not self.r_max > 0:
            raise InvalidParameters(f"r_max must be positive, got {self.r_max}")

    @property
    def h(self) -> float:
        return self.r_max / self.n_points

    def refined(self, factor: int = 2) -> "GridSpec":
        return GridSpec(self.r_max, self.n_points * factor)

    def radii(self) -> np.ndarray:
        return np.linspace(0.0, self.r_max, self.n_points + 1)


@dataclass(frozen=True)
class EigenResult:
    energy: float
    label: StateLabel
    method: Method
    est_error: float = 0.0
    nodes: int | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "state": self.label.name,
            "nu": self.label.nu,
            "l": self.label.l,
            "energy": self.energy,
            "method": self.method.value,
            "est_error": self.est_error,
            "nodes": self.nodes,
            "diagnostics": self.diagnostics,
        }


@dataclass(frozen=True)
class RadialFunction:
    r: np.ndarray
    values: np.ndarray
    normalized: bool = False

    def normalize(self) -> "RadialFunction":
        norm = simpson(self.values**2, x=self.r)
        return RadialFunction(self.r, self.values / math.sqrt(norm), True)

    def node_count(self) -> int:
        return _count_sign_changes(self.values[1:-1])

    def to_text(self) -> str:
        """Two-column ``r R(r)`` text for plotting tools."""
        lines = [f"{r:.10e} {v:.10e}" for r, v in zip(self.r, self.values)]
        return "\n".join(lines) + "\n"


@numba.njit(cache=True, nogil=True)
def _numerov_outward(g, h, y1, y2, stop):
    # y'' = g y, y[0] = 0, seeds at indices 1 and 2
    c = h * h / 12.0
    y = np.zeros(stop + 1)
    y[1] = y1
    y[2] = y2
    for i in range(2, stop):
        y[i + 1] = (2.0 * (1.0 + 5.0 * c * g[i]) * y[i] - (1.0 - c * g[i - 1]) * y[i - 1]) / (1.0 - c * g[i + 1])
        if abs(y[i + 1]) > 1e200:
            for j in range(i + 2):
                y[j] *= 1e-200
    return y


@numba.njit(cache=True, nogil=True)
def _numerov_inward(g, h, kappa, stop):
    c = h * h / 12.0
    n = g.shape[0] - 1
    y = np.zeros(n + 1)
    y[n] = 1e-100
    y[n - 1] = y[n] * math.exp(kappa * h)
    for i in range(n - 1, stop, -1):
        y[i - 1] = (2.0 * (1.0 + 5.0 * c * g[i]) * y[i] - (1.0 - c * g[i + 1]) * y[i + 1]) / (1.0 - c * g[i - 1])
        if abs(y[i - 1]) > 1e200:
            for j in range(i - 1, n + 1):
                y[j] *= 1e-200
    return y


@numba.njit(cache=True)
def _count_sign_changes(y):
    count = 0
    last = 0.0
    for v in y:
        if v != 0.0:
            if last != 0.0 and (v > 0.0) != (last > 0.0):
                count += 1
            last = v
    return count


def frobenius_seed(q: np.ndarray, l: int, r: np.ndarray) -> np.ndarray:
    """Regular solution r^(l+1) sum c_k r^k from the Taylor coefficients q of r^2 (V - E)."""
    s = l + 1
    c = np.zeros(len(q))
    c[0] = 1.0
    for k in range(1, len(q)):
        c[k] = np.dot(q[1 : k + 1], c[k - 1 :: -1][:k]) / (k * (k + 2 * s - 1))
    return r**s * np.polyval(c[::-1], r)


class _Shooter:
    """Numerov machinery for one (params, kind, l, grid) combination."""

    def __init__(self, p: ScaledParams, kind: ModelKind, l: int, grid: GridSpec):
        self.p, self.kind, self.l, self.grid = p, kind, l, grid
        self.h = grid.h
        self.r = grid.radii()
        self.V = np.empty_like(self.r)
        self.V[1:] = potential_value(p, kind, l, self.r[1:])
        self.V[0] = np.inf
        self.threshold = continuum_threshold(p, kind, l)

    def g(self, E: float) -> np.ndarray:
        g = self.V - E
        g[0] = 0.0
        return g

    def turning_index(self, g: np.ndarray) -> int:
        allowed = np.nonzero(g[1:] < 0)[0]
        if allowed.size == 0:
            return -1
        return int(allowed[-1]) + 1

    def outward(self, E: float, g: np.ndarray, stop: int) -> np.ndarray:
        q = r2_potential_series(self.p, self.kind, self.l, E, _SERIES_ORDER)
        y1, y2 = frobenius_seed(q, self.l, self.r[1:3])
        return _numerov_outward(g, self.h, y1, y2, stop)

    def inward(self, g: np.ndarray, stop: int) -> np.ndarray:
        kappa = math.sqrt(max(g[-1], 1e-300))
        return _numerov_inward(g, self.h, kappa, stop)

    def mismatch(self, E: float, m: int) -> tuple[float, float, float]:
        """Log-derivative mismatch at index m; returns (difference, out, in)."""
        g = self.g(E)
        yo = self.outward(E, g, m + 1)
        yi = self.inward(g, m - 1)
        ld_out = (yo[m + 1] - yo[m - 1]) / (2.0 * self.h * yo[m])
        ld_in = (yi[m + 1] - yi[m - 1]) / (2.0 * self.h * yi[m])
        return ld_out - ld_in, ld_out, ld_in

    def classify(self, E: float, n_r: int) -> int:
        """-1 if E is below the n_r-th level, +1 if above."""
        g = self.g(E)
        m = self.turning_index(g)
        if m < 3:
            return -1
        if m >= len(self.r) - 3:
            # no turning point inside the box: only an excess of nodes is conclusive
            yo = self.outward(E, g, len(self.r) - 1)
            if _count_sign_changes(yo[1:]) > n_r:
                return 1
            raise GridTooCoarse("classical turning point too close to r_max; enlarge the box")
        yo = self.outward(E, g, m + 1)
        nodes = _count_sign_changes(yo[1 : m + 1])
        if nodes != n_r:
            return 1 if nodes > n_r else -1
        diff, _, _ = self.mismatch(E, m)
        return -1 if diff > 0 else 1

    def wavefunction(self, E: float) -> RadialFunction:
        g = self.g(E)
        m = self.turning_index(g)
        yo = self.outward(E, g, m + 1)
        yi = self.inward(g, m - 1)
        y = np.empty_like(self.r)
        y[: m + 1] = yo[: m + 1]
        y[m:] = yi[m:] * (yo[m] / yi[m])
        return RadialFunction(self.r.copy(), y).normalize()


def energy_lower_bound(p: ScaledParams, kind: ModelKind) -> float:
    """Rigorous lower bound on every eigenvalue, from pointwise potential bounds."""
    b = p.b
    if kind is ModelKind.TRUE_HELLMANN or p.lam == 0:
        return -max(1.0, (2.0 - b) ** 2 / 4.0) if b < 2 or p.lam > 0 else 0.0
    return -max(2.0 - b, 0.0) ** 2 / 4.0 - 2.0 * p.lam


def _solve_on_grid(p, kind, label: StateLabel, grid: GridSpec, bracket=None):
    sh = _Shooter(p, kind, label.l, grid)
    if bracket is None:
        lo = max(energy_lower_bound(p, kind), float(np.min(sh.V[1:]))) - 1e-9
        hi = sh.threshold
    else:
        lo, hi = bracket
    if sh.classify(hi - 1e-14 * max(1.0, abs(hi)), label.n_r) < 0:
        raise NoBoundState(f"no {label} state below threshold {sh.threshold:.6g}")
    if sh.classify(lo, label.n_r) > 0:
        raise NoBoundState(f"{label} not found above energy {lo:.6g}")
    iters = 0
    while hi - lo > 1e-7 * max(abs(lo), abs(hi), 1e-3):
        mid = 0.5 * (lo + hi)
        if sh.classify(mid, label.n_r) < 0:
            lo = mid
        else:
            hi = mid
        iters += 1
        if iters > _MAX_BISECT:
            raise ConvergenceFailure(f"bisection did not converge for {label}")

    m = sh.turning_index(sh.g(0.5 * (lo + hi)))
    f_lo = sh.mismatch(lo, m)[0]
    f_hi = sh.mismatch(hi, m)[0]
    if not (f_lo > 0 > f_hi):
        raise ConvergenceFailure(f"matching function does not change sign for {label}")
    E, info = brentq(lambda e: sh.mismatch(e, m)[0], lo, hi, xtol=1e-16, rtol=4 * np.finfo(float).eps, full_output=True)
    diff, ld_out, ld_in = sh.mismatch(E, m)
    rel = abs(diff) / max(abs(ld_out), abs(ld_in), 1e-300)
    return E, sh, {"iterations": iters + info.iterations, "mismatch": rel, "match_radius": float(sh.r[m])}


def auto_grid(p: ScaledParams, kind: ModelKind, label: StateLabel, h_target: float = 2e-3) -> GridSpec:
    """Box and step for a state; the box covers 40 decay lengths past the shallowest estimate."""
    threshold = continuum_threshold(p, kind, label.l)
    e_est = _shallow_estimate(p, kind, label)
    kappa = math.sqrt(max(threshold - e_est, 1e-12))
    # outermost Coulomb-like turning point for the shallow estimate
    charge = max(2.0 - min(p.b, 0.0), 2.0)
    r_turn = charge / max(threshold - e_est, 1e-12)
    r_max = min(max(40.0 / kappa, 3.0 * r_turn, 20.0), 5000.0)
    n = int(np.clip(math.ceil(r_max / h_target), 50_000, 400_000))
    return GridSpec(r_max, n)


def _shallow_estimate(p: ScaledParams, kind: ModelKind, label: StateLabel) -> float:
    from .analytic import hf_bounds, modified_model_energy

    if kind is ModelKind.MODIFIED and p.lam > 0:
        return modified_model_energy(p, label)
    bounds = hf_bounds(p, label.nu)
    return bounds.upper if bounds.upper < 0 else bounds.lower


def solve_state(
    p: ScaledParams,
    kind: ModelKind,
    label: StateLabel,
    grid: GridSpec | None = None,
    *,
    return_wavefunction: bool = False,
    refinements: int = 1,
):
    """Bound-state energy of ``label`` with Richardson extrapolation.

    ``refinements`` is the number of step halvings; 1 gives the h, h/2 pair,
    2 additionally returns the h/4 energy in the diagnostics (used for the
    convergence-order check).
    """
    kind = ModelKind(kind)
    if kind is ModelKind.MODIFIED and p.lam > 0:
        from .analytic import modified_alpha

        if modified_alpha(p, label) <= 0:
            raise NoBoundState(f"{label} is not in the bound-state census of the modified model")
    if grid is None:
        grid = auto_grid(p, kind, label)

    energies = []
    diag = []
    shooter = None
    bracket = None
    for k in range(refinements + 1):
        g_k = GridSpec(grid.r_max, grid.n_points * 2**k)
        E, shooter, info = _solve_on_grid(p, kind, label, g_k, bracket)
        energies.append(E)
        diag.append(info)
        if k == 0:
            # the refined solve only needs a narrow window around the coarse root
            width = max(1e-4 * abs(E), 1e-9)
            bracket = (max(E - width, energy_lower_bound(p, kind) - 1e-9), min(E + width, shooter.threshold))

    e_h, e_h2 = energies[0], energies[1]
    E = e_h2 + (e_h2 - e_h) / 15.0
    est = max(abs(e_h2 - e_h) / 15.0, np.finfo(float).eps * abs(E))
    if refinements >= 2:
        E = energies[2] + (energies[2] - energies[1]) / 15.0
        est = max(abs(energies[2] - energies[1]) / 15.0, np.finfo(float).eps * abs(E))
    wf = shooter.wavefunction(energies[-1])
    nodes = wf.node_count()
    if nodes != label.n_r:
        raise GridTooCoarse(f"{label}: wavefunction has {nodes} nodes, expected {label.n_r}")
    if not E < shooter.threshold:
        raise NoBoundState(f"{label} energy {E} not below threshold")
    result = EigenResult(
        energy=float(E),
        label=label,
        method=Method.NUMEROV,
        est_error=float(est),
        nodes=nodes,
        diagnostics={
            "iterations": sum(d["iterations"] for d in diag),
            "mismatch": diag[-1]["mismatch"],
            "match_radius": diag[-1]["match_radius"],
            "r_max": grid.r_max,
            "n_points": grid.n_points,
            "h": grid.h,
            "raw_energies": [float(e) for e in energies],
        },
    )
    if return_wavefunction:
        return result, wf
    return result


def scan_spectrum(p: ScaledParams, kind: ModelKind, l: int, nu_max: int, *, workers: int = 1):
    """Every bound state with the given l and nu <= nu_max, ordered by energy.

    Returns ``(results, missing)`` where ``missing`` maps labels that could not
    be solved to the error message.
    """
    kind = ModelKind(kind)
    if nu_max < l + 1:
        raise InvalidParameters(f"nu_max must be >= l + 1, got {nu_max}")
    labels = [StateLabel(nu, l) for nu in range(l + 1, nu_max + 1)]
    if kind is ModelKind.MODIFIED and p.lam > 0:
        from .analytic import modified_alpha

        labels = [lab for lab in labels if modified_alpha(p, lab) > 0]

    def run(label):
        try:
            return solve_state(p, kind, label)
        except (NoBoundState, ConvergenceFailure) as exc:
            return exc

    if workers > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(workers) as pool:
            outcomes = list(pool.map(run, labels))
    else:
        outcomes = [run(lab) for lab in labels]
    results, missing = [], {}
    for label, out in zip(labels, outcomes):
        if isinstance(out, Exception):
            missing[label.name] = str(out)
        else:
            results.append(out)
    results.sort(key=lambda res: res.energy)
    return results, missing


def count_bound_states(p: ScaledParams, l: int, n_points: int = 400_000) -> int:
    """Number of Modified-model bound states with angular momentum l.

    Counts the nodes of the regular solution at the continuum threshold.  Past
    lambda r = 40 the potential equals the threshold to double precision, so the
    solution is linear there and a final zero beyond the grid is detected from
    the sign of y y'.
    """
    if p.lam <= 0:
        raise InvalidParameters("the modified model has an infinite spectrum at lambda = 0")
    grid = GridSpec(40.0 / p.lam, n_points)
    sh = _Shooter(p, ModelKind.MODIFIED, l, grid)
    E = sh.threshold
    g = sh.g(E)
    n = len(sh.r) - 1
    y = sh.outward(E, g, n)
    nodes = _count_sign_changes(y[1:])
    slope = (y[n] - y[n - 1]) / sh.h
    if y[n] * slope < 0:
        nodes += 1
    return nodes


def expectation_exp_lambda_r(wf: RadialFunction, lam: float) -> float:
    """<exp(-lam r)> for a normalized radial function, Simpson rule."""
    if not wf.normalized:
        raise InvalidParameters("wavefunction must be normalized")
    return float(simpson(wf.values**2 * np.exp(-lam * wf.r), x=wf.r))
