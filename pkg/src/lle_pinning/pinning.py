"""Effective potential, its simple zeros and the stability sign rule."""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .field import PotentialSpec
from .operators import KernelPair

SIGMA_SAMPLES = 720
ZERO_TOL = 1e-10
SIMPLE_SLOPE = 1e-8
FD_STEP = 1e-5


@dataclass(frozen=True)
class ZeroRecord:
    sigma0: float
    slope: float
    prediction: str  # stable_for_positive_eps | stable_for_negative_eps


@dataclass
class EffectivePotential:
    sigma_grid: np.ndarray
    values: np.ndarray
    zeros: list
    nonsimple: list = dc_field(default_factory=list)


def _weight(kp: KernelPair) -> np.ndarray:
    if not kp.normalized:
        raise ValueError("kernel pair must be normalized before computing V_eff")
    return np.real(1j * kp.translation_mode.values * np.conj(kp.adjoint_kernel.values))


def _integrate(kp: KernelPair, sigma, func) -> np.ndarray:
    grid = kp.translation_mode.grid
    w = _weight(kp) * grid.dx
    sig = np.atleast_1d(np.asarray(sigma, dtype=float))
    vals = func(grid.points[None, :] + sig[:, None]) @ w
    return vals if np.ndim(sigma) else float(vals[0])


def v_eff(sigma, kp: KernelPair, V: PotentialSpec):
    """``V_eff(sigma) = Re int i V(x + sigma) u0' conj(phi0*) dx`` (scalar or array)."""
    return _integrate(kp, sigma, V)


def critical_slope(sigma0: float, kp: KernelPair, V: PotentialSpec) -> float:
    """Derivative of the critical eigenvalue in eps at eps = 0, ``-V_eff'(sigma0)``."""
    return -_integrate(kp, sigma0, V.derivative)


def _prediction(slope: float) -> str:
    return "stable_for_positive_eps" if slope > 0 else "stable_for_negative_eps"


def find_zeros(kp: KernelPair, V: PotentialSpec, samples: int = SIGMA_SAMPLES) -> EffectivePotential:
    grid = kp.translation_mode.grid
    L = grid.length
    sig = grid.x0 + L * np.arange(samples) / samples
    vals = v_eff(sig, kp, V)

    def f(s):
        return v_eff(s, kp, V)

    zeros, nonsimple = [], []
    for i in range(samples):
        a, b = sig[i], sig[i] + L / samples
        fa, fb = vals[i], vals[(i + 1) % samples]
        if fa == 0.0:
            root = a
        elif np.sign(fa) == np.sign(fb) or fb == 0.0:
            continue
        else:
            for _ in range(100):
                m = 0.5 * (a + b)
                fm = f(m)
                if abs(fm) < ZERO_TOL and b - a < 1e-12:
                    break
                if np.sign(fm) == np.sign(fa):
                    a, fa = m, fm
                else:
                    b = m
                if b - a < 1e-15:
                    break
            root = 0.5 * (a + b)
        root = (root - grid.x0) % L + grid.x0
        slope = (f(root + FD_STEP) - f(root - FD_STEP)) / (2 * FD_STEP)
        if abs(slope) <= SIMPLE_SLOPE:
            nonsimple.append(float(root))
            continue
        zeros.append(ZeroRecord(float(root), float(slope), _prediction(slope)))
    zeros.sort(key=lambda z: z.sigma0)
    return EffectivePotential(sig, vals, zeros, nonsimple)


def predict_stability(zero: ZeroRecord, eps: float) -> str:
    if eps == 0:
        return "marginal"
    return "stable" if zero.slope * eps > 0 else "unstable"
