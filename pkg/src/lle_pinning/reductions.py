"""Dual-pump reduction to the single-pump model with potential, and small-mu asymptotics."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .continuation import continue_branch
from .field import Field, PotentialSpec, TorusGrid, cubic_term, derivative, shift, sobolev_norm
from .operators import assemble, kernel_pair
from .pinning import find_zeros, v_eff
from .stationary import (
    Params,
    SolveError,
    initial_guess,
    l2_norm,
    newton_solve,
    residual,
)

log = logging.getLogger(__name__)

LINE_WIDTHS = 40.0  # half-length of the line surrogate, in soliton widths
LINE_GRID = 512
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class DualPumpParams:
    d: float
    zeta: float
    mu: float
    f0: float
    f1: float
    k1: int = 1
    nu1: float = 0.0

    def __post_init__(self):
        if self.k1 == 0 or int(self.k1) != self.k1:
            raise ValueError("DualPumpParams.k1 must be a nonzero integer")
        if self.f0 == 0:
            raise ValueError("DualPumpParams.f0 must be nonzero")
        if abs(self.f1) >= abs(self.f0):
            raise ValueError("reduction needs |f1| < |f0|")

    @property
    def ratio(self) -> float:
        return self.f1 / self.f0

    @property
    def dispersion(self) -> float:
        return self.d * self.k1**2

    @property
    def zeta1(self) -> float:
        return self.zeta - self.nu1 + self.dispersion

    def potential(self) -> PotentialSpec:
        return PotentialSpec(self.nu1, (-2.0 * self.dispersion * self.ratio,))

    def to_dict(self) -> dict:
        return {"d": self.d, "zeta": self.zeta, "mu": self.mu, "f0": self.f0, "f1": self.f1,
                "k1": self.k1, "nu1": self.nu1}


@dataclass
class FrameData:
    speed: float  # nu1, the moving-frame velocity in xi
    phase_amplitude: float  # f1/f0 in the phase profile (f1/f0) sin(xi)

    def phase(self, xi: np.ndarray) -> np.ndarray:
        return np.exp(1j * self.phase_amplitude * np.sin(xi))


def dual_pump_reduce(dp: DualPumpParams):
    """Reduced single-pump parameters (eps = 1, dispersion d k1^2) and the frame data."""
    p = Params(d=dp.dispersion, zeta=dp.zeta, mu=dp.mu, f0=dp.f0, eps=1.0, potential=dp.potential())
    return p, FrameData(dp.nu1, dp.ratio)


def alpha(xi: np.ndarray, dp: DualPumpParams) -> np.ndarray:
    """The coefficient dropped in the reduction, as a function of xi."""
    b, dk = dp.ratio, dp.dispersion
    return -dp.nu1 * b * np.cos(xi) + dk * b**2 * np.cos(xi) ** 2 + 1j * dk * b * np.sin(xi)


def alpha_bound(dp: DualPumpParams) -> float:
    b, dk = abs(dp.ratio), abs(dp.dispersion)
    return 3 * b * (abs(dp.nu1) + dk + dk * b)


def dual_pump_residual(u: Field, dp: DualPumpParams) -> Field:
    """Stationary residual of the dual-pump equation in the co-moving frame.

    ``-d k1^2 u'' + i nu1 u' + (zeta - i mu) u - |u|^2 u + i f0 + i f1 e^{i xi}``.
    """
    g = u.grid
    out = (-dp.dispersion * derivative(u, 2).values + 1j * dp.nu1 * derivative(u, 1).values
           + (dp.zeta - 1j * dp.mu) * u.values - cubic_term(u).values
           + 1j * dp.f0 + 1j * dp.f1 * np.exp(1j * g.points))
    return Field(g, values=out)


@dataclass
class DualPumpReport:
    params: dict
    reduced: Params
    potential_mean: float
    potential_cosine: float
    sigma0: float
    reduced_residual: float
    mapped_residual: float
    alpha_sup: float
    alpha_w_sup: float
    alpha_bound: float
    solution: Field
    mapped: Field

    def to_dict(self) -> dict:
        return {
            "inputs": self.params,
            "potential": {"mean": self.potential_mean, "cosine": [self.potential_cosine]},
            "sigma0": self.sigma0,
            "reduced_residual": self.reduced_residual,
            "mapped_residual": self.mapped_residual,
            "alpha_sup": self.alpha_sup,
            "alpha_w_sup": self.alpha_w_sup,
            "alpha_bound": self.alpha_bound,
        }


def reduced_solution(dp: DualPumpParams, grid: TorusGrid | None = None, start: Field | None = None):
    """Stationary solution of the reduced equation pinned at a stable zero of V_eff.

    The soliton of the unperturbed problem is moved to the zero with
    positive slope (stable for eps > 0) and continued in eps up to 1.
    """
    grid = grid or TorusGrid()
    p, _ = dual_pump_reduce(dp)
    p0 = p.with_(eps=0.0)
    if start is None:
        kind = "bright" if p.d > 0 else "dark"
        start = newton_solve(initial_guess(kind, p0, grid), p0, phase_fix="even_subspace",
                             raise_on_fail=True).solution
    if p.potential.is_constant():
        if abs(p.potential.mean) > 0:
            raise SolveError("constant nonzero potential: no pinned stationary state")
        return start, 0.0, p
    kp = kernel_pair(assemble(start, p0))
    zeros = [z for z in find_zeros(kp, p.potential).zeros if z.slope > 0]
    if not zeros:
        raise SolveError("effective potential has no zero with positive slope")
    sigma0 = zeros[0].sigma0
    u0 = shift(start, sigma0)
    branch = continue_branch(u0, p0, "eps", (-0.5, 1.0), 1.0, spectrum=False)
    last = branch.points[-1]
    if abs(last.param - 1.0) > 1e-12:
        raise SolveError(f"eps-continuation stopped at eps = {last.param:.4g}")
    return last.state, sigma0, p


def dual_pump_validate(dp: DualPumpParams, grid: TorusGrid | None = None,
                       start: Field | None = None) -> DualPumpReport:
    """Solve the reduced problem, map back to the dual-pump frame and report the residual."""
    w, sigma0, p = reduced_solution(dp, grid, start)
    frame = dual_pump_reduce(dp)[1]
    xi = w.grid.points
    mapped = Field(w.grid, values=w.values * frame.phase(xi))
    a = alpha(xi, dp)
    return DualPumpReport(
        params=dp.to_dict(),
        reduced=p,
        potential_mean=p.potential.mean,
        potential_cosine=p.potential.cosine_coeffs[0],
        sigma0=sigma0,
        reduced_residual=l2_norm(residual(w, p)),
        mapped_residual=l2_norm(dual_pump_residual(mapped, dp)),
        alpha_sup=float(np.max(np.abs(a))),
        alpha_w_sup=float(np.max(np.abs(a * w.values))),
        alpha_bound=alpha_bound(dp),
        solution=w,
        mapped=mapped,
    )


# -- small-mu asymptotics on the line ------------------------------------------------------


@dataclass
class LineSoliton:
    amplitude: float
    width_param: float
    truncation_length: float
    field: Field

    @property
    def mass(self) -> float:
        """Closed-form ``int 2 zeta sech^2 = 4 sqrt(zeta d)``."""
        return 2 * self.amplitude**2 / self.width_param


def line_grid(zeta: float, d: float, n: int = LINE_GRID) -> TorusGrid:
    L = LINE_WIDTHS / np.sqrt(zeta / d)
    return TorusGrid(n, 2 * L)


def nls_soliton(zeta: float, d: float, L: float | None = None, grid: TorusGrid | None = None) -> LineSoliton:
    """``sqrt(2 zeta) sech(sqrt(zeta/d) x)`` on a torus of circumference ``2L``."""
    if not (d > 0 and zeta > 0):
        raise ValueError("the line soliton needs d > 0 and zeta > 0")
    k = np.sqrt(zeta / d)
    if L is None:
        L = LINE_WIDTHS / k
    grid = grid or TorusGrid(LINE_GRID, 2 * L)
    if abs(grid.length - 2 * L) > 1e-12 * L:
        raise ValueError("grid length must equal 2L")
    a = np.sqrt(2 * zeta)
    tail = a / np.cosh(k * L)
    if tail >= TAIL_TOL:
        raise ValueError(f"truncation too short: tail {tail:.2e} at x = L")
    u = Field(grid, values=(a / np.cosh(k * grid.points)).astype(complex))
    return LineSoliton(float(a), float(k), float(L), u)


def veff_leading_order(sigma, soliton: LineSoliton, V: PotentialSpec):
    """``(1/||u0||^2) int [x V'(x + sigma) + V(x + sigma)] |u0|^2 dx`` by quadrature."""
    if V.is_constant():
        # the x V' term vanishes and the mass normalization cancels
        return np.full(np.shape(sigma), V.mean) if np.ndim(sigma) else float(V.mean)
    u = soliton.field
    x = u.grid.points
    w = u.intensity * u.grid.dx
    mass = float(np.sum(w))
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    xs = x[None, :] + sig[:, None]
    vals = ((x[None, :] * V.derivative(xs) + V(xs)) @ w) / mass
    return vals if np.ndim(sigma) else float(vals[0])


def small_mu_params(zeta: float, d: float, mu: float, f0: float, V: PotentialSpec) -> Params:
    """Stationary problem with pump ``i mu f0`` and damping ``mu``."""
    return Params(d=d, zeta=zeta, mu=mu, f0=mu * f0, eps=0.0, potential=V)


def veff_small_mu(sigma, soliton: LineSoliton, mu: float, f0: float, V: PotentialSpec,
                  zeta: float, d: float):
    """Full ``V_eff`` from the kernel pair of the small-mu stationary problem."""
    p = small_mu_params(zeta, d, mu, f0, V)
    rep = newton_solve(soliton.field, p, phase_fix="even_subspace", raise_on_fail=True)
    kp = kernel_pair(assemble(rep.solution, p))
    return v_eff(sigma, kp, V), rep


@dataclass
class AsymptoticsReport:
    mus: tuple
    sigma: np.ndarray
    leading: np.ndarray
    full: dict  # mu -> values
    differences: dict  # mu -> sup difference
    first_order: bool

    def to_dict(self) -> dict:
        return {
            "mus": list(self.mus),
            "differences": {str(k): v for k, v in self.differences.items()},
            "first_order": self.first_order,
        }


def asymptotics_check(zeta: float = 3.7, d: float = 0.1, f0: float = 2.0,
                      mus=(0.025, 0.05), V: PotentialSpec | None = None,
                      samples: int = 64) -> AsymptoticsReport:
    """Compare leading-order and full ``V_eff`` at two damping values.

    ``V`` defaults to ``0.1 + 0.5 cos`` with its period stretched to the
    line-surrogate torus.
    """
    sol = nls_soliton(zeta, d)
    L = sol.truncation_length
    if V is None:
        V = PotentialSpec(0.1, (0.5,), period=2 * L)
    sig = -L + 2 * L * np.arange(samples) / samples
    lead = veff_leading_order(sig, sol, V)
    full, diffs = {}, {}
    for mu in mus:
        vals, _ = veff_small_mu(sig, sol, mu, f0, V, zeta, d)
        full[mu] = vals
        diffs[mu] = float(np.max(np.abs(vals - lead)))
    m_small, m_big = sorted(mus)[:2]
    ok = diffs[m_big] <= (m_big / m_small) * diffs[m_small] + 1e-3
    return AsymptoticsReport(tuple(mus), sig, lead, full, diffs, bool(ok))


def odd_part_norm(u: Field) -> float:
    return sobolev_norm(0.5 * (u - u.reflect()), 0)
