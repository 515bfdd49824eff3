"""Pseudo-arclength continuation of stationary states in ``zeta`` or ``eps``."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .field import Field, derivative, sobolev_norm
from .operators import assemble, full_spectrum
from .stationary import (
    NEWTON_TOL,
    Params,
    SolveError,
    _even_maps,
    intensity_extremum,
    jacobian,
    l2_norm,
    newton_solve,
    residual,
)

log = logging.getLogger(__name__)

DS_INIT = 1e-2
DS_MIN = 1e-6
DS_MAX = 5e-2
STEP_UNDERFLOW = 1e-8
GAP_TOL = 1e-6


@dataclass
class BranchPoint:
    param: float
    state: Field
    l2norm: float
    critical_eig: complex
    stable: bool
    sigma_est: float
    eigenvalues: Optional[np.ndarray] = None
    gap: float = np.nan


@dataclass
class Branch:
    points: list
    parameter_name: str
    events: list = dc_field(default_factory=list)
    base_params: Optional[Params] = None

    @property
    def params(self) -> np.ndarray:
        return np.array([pt.param for pt in self.points])

    def params_at(self, i: int) -> Params:
        return self.base_params.with_(**{self.parameter_name: self.points[i].param})

    def sorted(self) -> "Branch":
        order = np.argsort(self.params, kind="stable")
        return Branch([self.points[i] for i in order], self.parameter_name,
                      list(self.events), self.base_params)


def _dF_dparam(u: Field, p: Params, name: str) -> np.ndarray:
    if name == "eps":
        return Field(u.grid, values=1j * p.potential.sample(u.grid) * derivative(u, 1).values).to_real()
    if name == "zeta":
        return u.to_real()
    raise ValueError(f"unsupported continuation parameter {name!r}")


def make_point(u: Field, p: Params, name: str, extremum: str, spectrum: bool = True) -> BranchPoint:
    param = getattr(p, name)
    if spectrum:
        sp = full_spectrum(assemble(u, p))
        lam0, gap = sp.critical, sp.gap
        stable = sp.classification == "stable"
        eigs = sp.eigenvalues
    else:
        lam0, gap, stable, eigs = complex(np.nan), np.nan, False, None
    return BranchPoint(float(param), u, l2_norm(u), lam0, stable,
                       intensity_extremum(u, extremum), eigs, gap)


class _System:
    """Extended system in the (optionally symmetry-reduced) unknowns ``(u, lambda)``."""

    def __init__(self, p: Params, name: str, n: int, dx: float, even: bool):
        self.p, self.name, self.n, self.dx, self.even = p, name, n, dx, even
        if even:
            S = _even_maps(n)
            self.S = sla.block_diag(S, S)
            m = n // 2 + 1
            self.rows = np.concatenate([np.arange(m), n + np.arange(m)])
            # weights so that the reduced Euclidean product mimics the L2 product
            mult = np.bincount(np.array([min(j, (n - j) % n) for j in range(n)]), minlength=m)
            self.w = np.concatenate([mult, mult]) * dx
        else:
            self.S = None
            self.rows = slice(None)
            self.w = np.full(2 * n, dx)

    def pack(self, u: Field, lam: float) -> np.ndarray:
        r = u.to_real()
        if self.even:
            r = r[self.rows]
        return np.append(r, lam)

    def unpack(self, X: np.ndarray, grid):
        r = X[:-1]
        if self.even:
            r = self.S @ r
        return Field.from_real(grid, r), float(X[-1])

    def params(self, lam: float) -> Params:
        return self.p.with_(**{self.name: lam})

    def G(self, u: Field, lam: float) -> np.ndarray:
        return residual(u, self.params(lam)).to_real()[self.rows]

    def DG(self, u: Field, lam: float) -> np.ndarray:
        p = self.params(lam)
        jac = jacobian(u, p)
        col = _dF_dparam(u, p, self.name)
        if self.even:
            jac = jac[self.rows] @ self.S
            col = col[self.rows]
        return np.column_stack([jac, col])

    def dot(self, a: np.ndarray, b: np.ndarray) -> float:
        return float(np.dot(a[:-1] * self.w, b[:-1]) + a[-1] * b[-1])

    def normalize(self, t: np.ndarray) -> np.ndarray:
        return t / np.sqrt(self.dot(t, t))


def _initial_tangent(sys: _System, u: Field, lam: float, direction: float) -> np.ndarray:
    """Tangent with positive parameter component times ``direction``.

    At ``eps = 0`` the translation family crosses the branch, so the
    tangent is taken orthogonal to ``u'``.
    """
    DG = sys.DG(u, lam)
    m = DG.shape[1]
    rows = [DG]
    rhs = [np.zeros(DG.shape[0])]
    e = np.zeros(m)
    e[-1] = 1.0
    rows.append(e[None, :])
    rhs.append([1.0])
    if sys.name == "eps" and not sys.even:
        du = np.append(derivative(u, 1).to_real(), 0.0)
        rows.append(du[None, :])
        rhs.append([0.0])
    A = np.vstack(rows)
    b = np.concatenate(rhs)
    t = np.linalg.lstsq(A, b, rcond=None)[0]
    return direction * sys.normalize(t)


def _correct(sys: _System, Xp: np.ndarray, Xprev: np.ndarray, t: np.ndarray, ds: float, grid,
             tol: float, maxiter: int = 10):
    X = Xp.copy()
    wt = np.append(t[:-1] * sys.w, t[-1])
    for it in range(1, maxiter + 1):
        u, lam = sys.unpack(X, grid)
        G = sys.G(u, lam)
        N = np.dot(wt, X - Xprev) - ds
        A = np.vstack([sys.DG(u, lam), wt[None, :]])
        try:
            dX = sla.solve(A, -np.append(G, N))
        except (sla.LinAlgError, ValueError) as exc:
            raise SolveError(str(exc)) from exc
        X = X + dX
        u, lam = sys.unpack(X, grid)
        rn = l2_norm(residual(u, sys.params(lam)))
        if not np.isfinite(rn):
            raise SolveError("non-finite corrector iterate")
        if rn <= tol and np.linalg.norm(dX) < 1e-6:
            arc = np.dot(wt, X - Xprev) - ds
            return X, it, rn, arc
    raise SolveError(f"corrector did not converge (|F| = {rn:.2e})")


def _land(sys: _System, X: np.ndarray, Xn: np.ndarray, end: float, grid, tol: float):
    """Natural-parameter solve at the range endpoint between two branch points."""
    s = (end - X[-1]) / (Xn[-1] - X[-1])
    u, _ = sys.unpack(X + s * (Xn - X), grid)
    phase_fix = "even_subspace" if sys.even else "none"
    try:
        rep = newton_solve(u, sys.params(end), phase_fix=phase_fix, tol=tol)
    except SolveError:
        return None
    return rep.solution if rep.converged else None


def continue_branch(start: Field, p: Params, parameter: str, param_range, direction: float = 1.0,
                    ds: float = DS_INIT, ds_min: float = DS_MIN, ds_max: float = DS_MAX,
                    max_points: int = 400, spectrum: bool = True, extremum: Optional[str] = None,
                    even: Optional[bool] = None, tol: float = NEWTON_TOL,
                    tangent: Optional[tuple] = None) -> Branch:
    """Follow a solution branch from ``start`` until the parameter leaves ``param_range``.

    ``direction`` fixes the sign of the initial parameter increment.  At
    ``eps = 0`` with ``parameter == "zeta"`` the iteration is restricted to
    even fields to remove the translation mode (pass ``even=False`` to
    disable).  ``tangent = (Field, float)`` overrides the initial direction,
    e.g. for switching onto a bifurcating branch.
    """
    if parameter not in ("zeta", "eps"):
        raise ValueError("parameter must be 'zeta' or 'eps'")
    lo, hi = param_range
    grid = start.grid
    extremum = extremum or ("max" if p.d > 0 else "min")
    if even is None:
        even = parameter == "zeta" and p.eps == 0.0
    sys = _System(p, parameter, grid.n, grid.dx, even)
    lam = float(getattr(p, parameter))
    res0 = l2_norm(residual(start, p))
    if res0 > 1e-9:
        raise SolveError(f"start is not a solution (|F| = {res0:.2e})")

    branch = Branch([make_point(start, p, parameter, extremum, spectrum)], parameter, [], p)
    X = sys.pack(start, lam)
    if tangent is None:
        t = _initial_tangent(sys, start, lam, direction)
    else:
        t = direction * sys.normalize(sys.pack(tangent[0], tangent[1]))
    prev_X = None
    easy = 0
    while len(branch.points) < max_points:
        Xp = X + ds * t
        try:
            Xn, its, rn, arc = _correct(sys, Xp, X, t, ds, grid, tol)
        except SolveError as exc:
            ds *= 0.5
            easy = 0
            if ds < max(ds_min, STEP_UNDERFLOW):
                branch.events.append({"type": "step_underflow", "param": float(X[-1]), "reason": str(exc)})
                log.warning("continuation stopped: step underflow at %s=%.6g", parameter, X[-1])
                break
            continue
        u, lam_new = sys.unpack(Xn, grid)
        if not (lo <= lam_new <= hi):
            end = hi if lam_new > hi else lo
            landed = _land(sys, X, Xn, end, grid, tol)
            if landed is not None:
                branch.points.append(make_point(landed, sys.params(end), parameter, extremum, spectrum))
            branch.events.append({"type": "range_exit", "param": float(end)})
            break
        t_new = sys.normalize(Xn - X)
        if t_new[-1] * t[-1] < 0:
            branch.events.append({"type": "turning_point", "param": float(X[-1])})
        pt = make_point(u, sys.params(lam_new), parameter, extremum, spectrum)
        if spectrum and pt.stable != branch.points[-1].stable:
            branch.events.append({"type": "stability_change", "param": pt.param})
        branch.points.append(pt)
        prev_X, X, t = X, Xn, t_new
        easy = easy + 1 if its <= 3 else 0
        if easy >= 3:
            ds = min(2 * ds, ds_max)
            easy = 0
    return branch


def continue_both_ways(start: Field, p: Params, parameter: str, half_width: float, **kw) -> Branch:
    """Two-sided branch around the start value, sorted by parameter."""
    lam = getattr(p, parameter)
    rng = (lam - half_width, lam + half_width)
    up = continue_branch(start, p, parameter, rng, 1.0, **kw)
    down = continue_branch(start, p, parameter, rng, -1.0, **kw)
    pts = down.points[:0:-1] + up.points
    return Branch(pts, parameter, down.events + up.events, p)


def solve_at(guess: Field, p: Params, parameter: str, value: float, **kw):
    """Natural-parameter correction: Newton at a fixed parameter value."""
    return newton_solve(guess, p.with_(**{parameter: value}), **kw)


def track_critical_eigenvalue(branch: Branch, origin: float = 0.0):
    """``(param, lambda0)`` pairs with ``lambda0`` followed by nearest-neighbour matching.

    Matching starts at the point closest to ``origin`` (where the critical
    eigenvalue is the translation mode) and proceeds outward.
    """
    pts = branch.points
    if not pts or pts[0].eigenvalues is None:
        raise ValueError("branch has no stored spectra")
    params = np.array([pt.param for pt in pts])
    i0 = int(np.argmin(np.abs(params - origin)))
    lam = {i0: pts[i0].critical_eig}
    for rng in (range(i0 + 1, len(pts)), range(i0 - 1, -1, -1)):
        prev = lam[i0]
        for i in rng:
            ev = pts[i].eigenvalues
            prev = complex(ev[np.argmin(np.abs(ev - prev))])
            lam[i] = prev
    order = np.argsort(params)
    return [(float(params[i]), lam[i]) for i in order]


def pinning_drift(branch: Branch):
    return [(pt.param, pt.sigma_est) for pt in branch.points]


def h2_distance(u: Field, v: Field) -> float:
    return sobolev_norm(u - v, 2)
