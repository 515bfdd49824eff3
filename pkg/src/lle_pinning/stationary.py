"""Stationary problem ``-d u'' + i eps V u' + (zeta - i mu) u - |u|^2 u + i f0 = 0``."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field, replace
from typing import Optional

import numpy as np
import scipy.linalg as sla
from scipy.signal import find_peaks

from .field import (
    Field,
    PotentialSpec,
    TorusGrid,
    cubic_term,
    derivative,
)

log = logging.getLogger(__name__)

NEWTON_TOL = 1e-11
NEWTON_MAXITER = 50
DARK_HALF_WIDTH = 0.45
EXTREMUM_PROMINENCE = 0.05


class SolveError(RuntimeError):
    """Raised when a nonlinear or linear solve cannot proceed."""


@dataclass(frozen=True)
class Params:
    d: float
    zeta: float
    mu: float
    f0: float
    eps: float = 0.0
    potential: PotentialSpec = dc_field(default_factory=PotentialSpec)

    def __post_init__(self):
        if self.d == 0:
            raise ValueError("Params.d: dispersion must be nonzero")
        if not self.mu > 0:
            raise ValueError("Params.mu: damping must be positive")

    def with_(self, **changes) -> "Params":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "zeta": self.zeta,
            "mu": self.mu,
            "f0": self.f0,
            "eps": self.eps,
            "potential": self.potential.to_dict(),
        }


@dataclass
class NewtonReport:
    solution: Field
    residual_norm: float
    iterations: int
    history: list
    converged: bool
    tolerance: float = NEWTON_TOL


@dataclass
class ConstantStateSet:
    states: list  # complex constants sorted by intensity
    intensities: list

    @property
    def count(self) -> int:
        return len(self.states)

    @property
    def lowest(self) -> complex:
        return self.states[0]

    @property
    def highest(self) -> complex:
        return self.states[-1]


@dataclass(frozen=True)
class TrivialBifurcation:
    k: int
    zeta: float
    rho: float


def l2_norm(f: Field) -> float:
    return float(np.sqrt(np.sum(np.abs(f.values) ** 2) * f.grid.dx))


def residual(u: Field, p: Params) -> Field:
    grid = u.grid
    out = -p.d * derivative(u, 2).values + (p.zeta - 1j * p.mu) * u.values
    out = out - cubic_term(u).values + 1j * p.f0
    if p.eps != 0.0:
        out = out + 1j * p.eps * p.potential.sample(grid) * derivative(u, 1).values
    return Field(grid, values=out)


def cubic_blocks(u: Field):
    """Dealiased real blocks of the cubic linearization.

    Returns ``(M11, M12, M22)`` with ``M11 ~ 3u1^2 + u2^2``, ``M12 ~ 2 u1 u2``,
    ``M22 ~ u1^2 + 3 u2^2`` acting as multipliers evaluated on the padded grid.
    """
    grid = u.grid
    fine = grid.padded
    w = fine.inverse(grid.pad(u.coeffs))
    w1, w2 = w.real, w.imag
    E, P = grid.interp_matrix, grid.project_matrix
    blocks = []
    for m in (3 * w1**2 + w2**2, 2 * w1 * w2, w1**2 + 3 * w2**2):
        blocks.append(P @ (m[:, None] * E))
    return tuple(blocks)


def jacobian(u: Field, p: Params) -> np.ndarray:
    """Dense real ``2n x 2n`` Jacobian of the residual in (Re, Im) variables."""
    grid = u.grid
    n = grid.n
    D1, D2 = grid.diff_matrix, grid.diff2_matrix
    M11, M12, M22 = cubic_blocks(u)
    eye = np.eye(n)
    jac = np.empty((2 * n, 2 * n))
    jac[:n, :n] = -p.d * D2 + p.zeta * eye - M11
    jac[:n, n:] = p.mu * eye - M12
    jac[n:, :n] = -p.mu * eye - M12
    jac[n:, n:] = -p.d * D2 + p.zeta * eye - M22
    if p.eps != 0.0:
        VD = p.eps * p.potential.sample(grid)[:, None] * D1
        jac[:n, n:] -= VD
        jac[n:, :n] += VD
    return jac


def solve_constant_states(p: Params) -> ConstantStateSet:
    """All spatially constant solutions.

    The intensity ``rho`` solves ``rho((zeta - rho)^2 + mu^2) = f0^2`` and the
    state is ``-i f0 / (zeta - i mu - rho)``.
    """
    coeffs = [1.0, -2.0 * p.zeta, p.zeta**2 + p.mu**2, -(p.f0**2)]
    roots = np.roots(coeffs)
    rhos = []
    for r in roots:
        if abs(r.imag) > 1e-7 * max(1.0, abs(r)):
            continue
        rho = float(r.real)
        for _ in range(3):  # polish
            g = rho * ((p.zeta - rho) ** 2 + p.mu**2) - p.f0**2
            dg = 3 * rho**2 - 4 * p.zeta * rho + p.zeta**2 + p.mu**2
            if dg == 0:
                break
            rho -= g / dg
        if rho >= -1e-14:
            rhos.append(max(rho, 0.0))
    if p.f0 == 0:
        rhos = [0.0]
    rhos.sort()
    states = [-1j * p.f0 / (p.zeta - 1j * p.mu - rho) for rho in rhos]
    return ConstantStateSet(states=states, intensities=[abs(s) ** 2 for s in states])


def trivial_branch_zeta(rho: np.ndarray, p: Params):
    """Both arcs ``zeta = rho +- sqrt(f0^2/rho - mu^2)`` of the constant-state curve."""
    rho = np.asarray(rho, dtype=float)
    root = np.sqrt(np.maximum(p.f0**2 / rho - p.mu**2, 0.0))
    return rho - root, rho + root


def trivial_branch_bifurcations(p: Params, kmax: int, zeta_range=None, samples: int = 4000):
    """Points on the constant-state curve where Fourier mode ``k`` becomes critical.

    Mode ``k`` is critical when ``(d k^2 + zeta - 2 rho)^2 = rho^2 - mu^2``.
    Results are ordered along the curve, starting from negative detuning.
    """
    rho_max = p.f0**2 / p.mu**2
    # a mode can only turn critical where rho >= mu
    if rho_max <= p.mu:
        return []
    # both arcs traversed as one curve: lower arc rho up, then upper arc rho down
    s = np.linspace(0.0, 1.0, samples)

    def curve(t):
        if t <= 1.0:
            rho = p.mu + (rho_max - p.mu) * t
            return rho, trivial_branch_zeta(rho, p)[0]
        rho = rho_max - (rho_max - p.mu) * (t - 1.0)
        return rho, trivial_branch_zeta(rho, p)[1]

    ts = np.concatenate([s, 1.0 + s[1:]])
    found = []
    for k in range(1, kmax + 1):
        for sign in (1.0, -1.0):

            def g(t):
                rho, zeta = curve(t)
                return p.d * k**2 + zeta - 2 * rho - sign * np.sqrt(max(rho**2 - p.mu**2, 0.0))

            vals = np.array([g(t) for t in ts])
            for i in np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]:
                a, b = ts[i], ts[i + 1]
                ga = vals[i]
                for _ in range(80):
                    m = 0.5 * (a + b)
                    gm = g(m)
                    if np.sign(gm) == np.sign(ga):
                        a, ga = m, gm
                    else:
                        b = m
                t = 0.5 * (a + b)
                rho, zeta = curve(t)
                found.append((t, TrivialBifurcation(k=k, zeta=float(zeta), rho=float(rho))))
    found.sort(key=lambda item: item[0])
    out = [b for _, b in found]
    if zeta_range is not None:
        lo, hi = zeta_range
        out = [b for b in out if lo <= b.zeta <= hi]
    return out


def critical_mode_amplitude(p: Params, k: int, which: int = 0) -> complex:
    """Complex amplitude ``a`` such that ``a cos(kx)`` spans the kernel at a constant state."""
    u = solve_constant_states(p).states[which]
    u1, u2 = u.real, u.imag
    g = p.d * k**2 + p.zeta
    block = np.array([[g - (3 * u1**2 + u2**2), p.mu - 2 * u1 * u2],
                      [-p.mu - 2 * u1 * u2, g - (u1**2 + 3 * u2**2)]])
    _, _, vt = np.linalg.svd(block)
    a, b = vt[-1]
    return complex(a, b)


def initial_guess(kind: str, p: Params, grid: Optional[TorusGrid] = None, k: int = 1,
                  delta: float = 0.0, which: int = 0) -> Field:
    grid = grid or TorusGrid()
    x = grid.points
    states = solve_constant_states(p)
    if kind == "bright":
        if p.d <= 0:
            raise ValueError("bright soliton guess needs anomalous dispersion d > 0")
        rho_lo = states.intensities[0]
        zt = p.zeta - rho_lo
        if zt <= 0:
            raise ValueError("bright soliton guess needs zeta above the background intensity")
        bump = np.sqrt(2 * zt) / np.cosh(np.sqrt(zt / p.d) * x)
        return Field(grid, values=states.lowest + bump)
    if kind == "dark":
        if p.d >= 0:
            raise ValueError("dark soliton guess needs normal dispersion d < 0")
        # well of the low state inside the high one, bounded by two fronts
        front = 0.5 * np.sqrt(abs(p.d))
        well = 0.5 * (np.tanh((x + DARK_HALF_WIDTH) / front) - np.tanh((x - DARK_HALF_WIDTH) / front))
        return Field(grid, values=states.highest + (states.lowest - states.highest) * well)
    if kind == "constant_plus_mode":
        return Field(grid, values=states.states[which] + delta * np.cos(k * x))
    raise ValueError(f"unknown initial guess kind {kind!r}")


def _even_maps(n: int):
    """Matrices parametrizing even grid functions by samples j = 0..n/2."""
    m = n // 2 + 1
    S = np.zeros((n, m))
    for j in range(n):
        S[j, min(j, (n - j) % n)] = 1.0
    return S


def newton_solve(guess: Field, p: Params, phase_fix: str = "none", tol: float = NEWTON_TOL,
                 maxiter: int = NEWTON_MAXITER, raise_on_fail: bool = False) -> NewtonReport:
    """Damped Newton iteration for the stationary equation.

    ``phase_fix`` selects the handling of the translation mode at ``eps = 0``:
    ``"none"``, ``"even_subspace"`` (iterate on even fields only) or
    ``"orthogonal_to_translation"`` (bordered system, correction orthogonal
    to ``u'``).
    """
    if phase_fix not in ("none", "even_subspace", "orthogonal_to_translation"):
        raise ValueError(f"unknown phase_fix {phase_fix!r}")
    grid = guess.grid
    n = grid.n
    u = guess
    F = residual(u, p)
    rnorm = l2_norm(F)
    history = [rnorm]
    it = 0
    if phase_fix == "even_subspace":
        S = _even_maps(n)
        S2 = sla.block_diag(S, S)
        rows = np.concatenate([np.arange(n // 2 + 1), n + np.arange(n // 2 + 1)])
    while rnorm > tol and it < maxiter:
        it += 1
        jac = jacobian(u, p)
        r = F.to_real()
        if phase_fix == "none":
            step = _solve(jac, -r)
        elif phase_fix == "even_subspace":
            step = S2 @ _solve(jac[rows] @ S2, -r[rows])
        else:
            t = derivative(u, 1).to_real()
            t = t / np.linalg.norm(t)
            big = np.zeros((2 * n + 1, 2 * n + 1))
            big[: 2 * n, : 2 * n] = jac
            big[: 2 * n, -1] = t
            big[-1, : 2 * n] = t
            step = _solve(big, np.concatenate([-r, [0.0]]))[:-1]
        alpha = 1.0
        while True:
            trial = Field.from_real(grid, u.to_real() + alpha * step)
            Ft = residual(trial, p)
            tn = l2_norm(Ft)
            if tn <= (1 - 1e-4 * alpha) * rnorm or alpha < 1e-6:
                break
            alpha *= 0.5
        u, F, rnorm = trial, Ft, tn
        history.append(rnorm)
        log.debug("newton it=%d |F|=%.3e alpha=%.3g", it, rnorm, alpha)
        if not np.isfinite(rnorm):
            break
    converged = bool(rnorm <= tol)
    report = NewtonReport(u, rnorm, it, history, converged, tol)
    if raise_on_fail and not converged:
        raise SolveError(f"Newton did not converge: |F| = {rnorm:.3e} after {it} iterations")
    return report


def _solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    try:
        lu = sla.lu_factor(a, check_finite=True)
    except (ValueError, sla.LinAlgError) as exc:
        raise SolveError(f"linear solve failed: {exc}") from exc
    if np.any(np.diag(lu[0]) == 0):
        raise SolveError("singular Newton system")
    return sla.lu_solve(lu, b)


def intensity_extremum(u: Field, kind: str = "max") -> float:
    """Sub-grid location of the intensity extremum by parabolic interpolation."""
    I = u.intensity
    if kind == "min":
        I = -I
    j = int(np.argmax(I))
    n = len(I)
    ym, y0, yp = I[(j - 1) % n], I[j], I[(j + 1) % n]
    denom = ym - 2 * y0 + yp
    off = 0.0 if denom == 0 else 0.5 * (ym - yp) / denom
    x = u.grid.points[j] + off * u.grid.dx
    L = u.grid.length
    return float((x - u.grid.x0) % L + u.grid.x0)


def count_extrema(u: Field, rel: float = EXTREMUM_PROMINENCE) -> tuple[int, int]:
    """Number of local maxima and minima of ``|u|^2`` on the torus.

    Extrema count only if their prominence exceeds ``rel`` times the
    intensity range (and an absolute floor), so constant fields have none.
    """
    I = u.intensity
    n = len(I)
    spread = float(I.max() - I.min())
    if spread <= 1e-10 * max(1.0, float(I.max())):
        return 0, 0
    wrapped = np.concatenate([I, I, I])
    prom = max(rel * spread, 1e-12)

    def count(sig):
        idx, _ = find_peaks(sig, prominence=prom)
        # plateaus and wraparound handled by looking at the middle copy only
        return int(np.count_nonzero((idx >= n) & (idx < 2 * n)))

    return count(wrapped), count(-wrapped)


def count_localized(u: Field, kind: str) -> int:
    """Number of separate peaks (``kind="max"``) or dips (``"min"``) at half depth.

    Counts connected arcs of the torus where the intensity lies beyond the
    midpoint of its range, so shallow ripples inside one dip do not count.
    """
    if kind not in ("max", "min"):
        raise ValueError("kind must be 'max' or 'min'")
    I = u.intensity
    lo, hi = float(I.min()), float(I.max())
    if hi - lo <= 1e-10 * max(1.0, hi):
        return 0
    mid = 0.5 * (lo + hi)
    inside = I > mid if kind == "max" else I < mid
    # arcs start where the indicator switches on (cyclically)
    return int(np.count_nonzero(inside & ~np.roll(inside, 1)))
