"""Time integration of ``i u_t = -d u'' + i eps V u' + (zeta - i mu) u - |u|^2 u + i f0``.

The stiff diagonal part ``-i d k^2 - i zeta - mu`` is propagated exactly in
Fourier space; advection and the cubic term are treated explicitly by the
fourth-order exponential Runge-Kutta scheme of Cox & Matthews.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .field import Field, TorusGrid, sobolev_norm
from .stationary import Params

log = logging.getLogger(__name__)

DT_CAP = 1e-3
SCHEME_ORDER = 4
FIT_WINDOW = (1e-8, 1e-3)
MIN_CORRELATION = 0.98


class BlowUpError(RuntimeError):
    def __init__(self, t: float):
        super().__init__(f"non-finite field at t = {t:.6g}")
        self.t = t


def max_stable_dt(p: Params, grid: TorusGrid) -> float:
    vmax = float(np.max(np.abs(p.potential.sample(grid)))) if p.eps else 0.0
    return min(0.5 * grid.dx / max(abs(p.eps) * vmax, 1e-12), DT_CAP)


@dataclass
class EvolutionConfig:
    dt: float = DT_CAP
    t_end: float = 100.0
    scheme: str = "etd_imex"
    record_every: int = 100
    perturbation: object = None  # Field, "critical" (default) or "random"
    perturbation_scale: float = 1e-4
    seed: Optional[int] = None

    def validate(self, p: Params, grid: TorusGrid):
        if not self.dt > 0:
            raise ValueError("EvolutionConfig.dt must be positive")
        bound = max_stable_dt(p, grid)
        if self.dt > bound * (1 + 1e-12):
            raise ValueError(f"EvolutionConfig.dt = {self.dt} exceeds the stability bound {bound:.3g}")
        if self.scheme != "etd_imex":
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if isinstance(self.perturbation, str) and self.perturbation not in ("critical", "random"):
            raise ValueError(f"unknown perturbation {self.perturbation!r}")
        if self.record_every < 1:
            raise ValueError("EvolutionConfig.record_every must be >= 1")


@dataclass
class DecayFit:
    times: np.ndarray
    deviations: np.ndarray  # H1
    deviations_l2: np.ndarray
    rate: float  # slope of log(deviation); negative when decaying
    eta: float  # decay rate, -rate
    correlation: float
    fit_window: tuple
    verdict: str  # decays | grows | inconclusive
    note: str = ""
    blow_up_t: Optional[float] = None


def _phi_functions(z: np.ndarray, radius: float = 1.0, m: int = 64):
    """ETDRK4 coefficients ``(Q, f1, f2, f3)`` divided by ``h``.

    Direct formulas where ``|z|`` is large, contour averages elsewhere.
    """
    def direct(z):
        ez, ez2 = np.exp(z), np.exp(z / 2)
        q = (ez2 - 1) / z
        f1 = (-4 - z + ez * (4 - 3 * z + z**2)) / z**3
        f2 = (2 + z + ez * (z - 2)) / z**3
        f3 = (-4 - 3 * z - z**2 + ez * (4 - z)) / z**3
        return q, f1, f2, f3

    out = [np.empty_like(z) for _ in range(4)]
    big = np.abs(z) > 0.5
    if big.any():
        for o, v in zip(out, direct(z[big])):
            o[big] = v
    small = ~big
    if small.any():
        r = radius * np.exp(2j * np.pi * (np.arange(m) + 0.5) / m)
        zz = z[small][:, None] + r[None, :]
        for o, v in zip(out, direct(zz)):
            o[small] = v.mean(axis=1)
    return tuple(out)


class Integrator:
    """Cached ETDRK4 stepper for fixed ``(grid, params, dt)``; works on coefficients."""

    def __init__(self, grid: TorusGrid, p: Params, dt: float):
        self.grid, self.p, self.dt = grid, p, dt
        # u_t = i d u'' - i zeta u - mu u + N(u)
        lin = -1j * p.d * grid.kappa**2 - 1j * p.zeta - p.mu
        z = lin * dt
        self.E = np.exp(z)
        self.E2 = np.exp(z / 2)
        q, f1, f2, f3 = _phi_functions(z)
        self.Q, self.f1, self.f2, self.f3 = dt * q, dt * f1, dt * f2, dt * f3
        self.d1 = grid.derivative_symbol(1)
        self.V = p.potential.sample(grid) if p.eps != 0.0 else None
        self.forcing = np.zeros(grid.n, dtype=complex)
        self.forcing[0] = p.f0

    def nonlinear(self, c: np.ndarray) -> np.ndarray:
        g = self.grid
        fine = g.padded
        w = fine.inverse(g.pad(c))
        out = 1j * g.truncate(fine.forward(np.abs(w) ** 2 * w)) + self.forcing
        if self.V is not None:
            du = g.inverse(self.d1 * c)
            out = out + g.forward(self.p.eps * self.V * du)
        return out

    def step(self, c: np.ndarray) -> np.ndarray:
        N = self.nonlinear
        Nv = N(c)
        a = self.E2 * c + self.Q * Nv
        Na = N(a)
        b = self.E2 * c + self.Q * Na
        Nb = N(b)
        cc = self.E2 * a + self.Q * (2 * Nb - Nv)
        Nc = N(cc)
        return self.E * c + self.f1 * Nv + 2 * self.f2 * (Na + Nb) + self.f3 * Nc


def step(u: Field, p: Params, dt: float, t: float = 0.0) -> Field:
    c = Integrator(u.grid, p, dt).step(u.coeffs)
    if not np.all(np.isfinite(c)):
        raise BlowUpError(t + dt)
    return Field(u.grid, coeffs=c)


def evolve(u: Field, p: Params, dt: float, t_end: float, record_every: int = 1, callback=None):
    """Integrate to ``t_end``; returns the final field and the recorded ``(t, Field)`` list."""
    integ = Integrator(u.grid, p, dt)
    nsteps = int(round(t_end / dt))
    c = u.coeffs.copy()
    record = [(0.0, u)]
    for i in range(1, nsteps + 1):
        c = integ.step(c)
        if i % record_every == 0 or i == nsteps:
            if not np.all(np.isfinite(c)):
                raise BlowUpError(i * dt)
            f = Field(u.grid, coeffs=c.copy())
            record.append((i * dt, f))
            if callback is not None and callback(i * dt, f):
                break
    return Field(u.grid, coeffs=c), record


def fit_log_rate(times, devs, window=FIT_WINDOW):
    """Least-squares slope of ``log(dev)`` over samples with ``dev`` inside ``window``."""
    times = np.asarray(times)
    devs = np.asarray(devs)
    mask = (devs >= window[0]) & (devs <= window[1]) & np.isfinite(devs)
    if mask.sum() < 3:
        return np.nan, 0.0, mask
    t, y = times[mask], np.log(devs[mask])
    slope, _ = np.polyfit(t, y, 1)
    corr = float(np.corrcoef(t, y)[0, 1]) if np.ptp(t) > 0 and np.ptp(y) > 0 else 0.0
    return float(slope), corr, mask


def critical_perturbation(u_star: Field, p: Params) -> Field:
    """Real part of the eigenvector of the critical eigenvalue, as a field."""
    from .operators import assemble, full_spectrum

    sp = full_spectrum(assemble(u_star, p), vectors=True)
    return Field.from_real(u_star.grid, np.real(sp.critical_vector))


def random_perturbation(grid: TorusGrid, seed: Optional[int] = None) -> Field:
    """Smooth random field from a seeded generator."""
    rng = np.random.default_rng(seed)
    pert = Field(grid, values=rng.standard_normal(grid.n) + 1j * rng.standard_normal(grid.n))
    return Field(grid, coeffs=pert.coeffs * np.exp(-(grid.kappa / 8.0) ** 2))


def evolve_and_fit(u_star: Field, p: Params, cfg: EvolutionConfig) -> DecayFit:
    """Perturb a stationary state, integrate, and fit the exponential rate of the H1 deviation."""
    grid = u_star.grid
    cfg.validate(p, grid)
    if cfg.perturbation is None or cfg.perturbation == "critical":
        pert = critical_perturbation(u_star, p)
    elif cfg.perturbation == "random":
        pert = random_perturbation(grid, cfg.seed)
    else:
        pert = cfg.perturbation
    scale = cfg.perturbation_scale
    if scale > 1e-2 * sobolev_norm(u_star, 0):
        raise ValueError("perturbation_scale must not exceed 1e-2 of the state norm")
    pert = pert * (scale / sobolev_norm(pert, 1))
    u_init = u_star + pert

    times, dev1, dev0 = [], [], []
    note = ""
    blow_up_t = None

    def monitor(t, f):
        diff = f - u_star
        times.append(t)
        dev1.append(sobolev_norm(diff, 1))
        dev0.append(sobolev_norm(diff, 0))
        # nothing left to fit once the deviation has left the window
        return dev1[-1] > 10 * FIT_WINDOW[1] or dev1[-1] < 0.1 * FIT_WINDOW[0]

    monitor(0.0, u_init)
    try:
        evolve(u_init, p, cfg.dt, cfg.t_end, cfg.record_every, monitor)
    except BlowUpError as exc:
        note = str(exc)
        blow_up_t = exc.t
    times_a, dev1_a, dev0_a = map(np.asarray, (times, dev1, dev0))
    rate, corr, mask = fit_log_rate(times_a, dev1_a)
    window = (float(times_a[mask].min()), float(times_a[mask].max())) if mask.any() else (np.nan, np.nan)
    if not np.isfinite(rate) or abs(corr) < MIN_CORRELATION:
        verdict = "inconclusive"
        eta = np.nan
    else:
        verdict = "decays" if rate < 0 else "grows"
        eta = -rate
    if note and verdict == "decays":
        verdict = "inconclusive"
    return DecayFit(times_a, dev1_a, dev0_a, rate, eta, corr, window, verdict, note, blow_up_t)
