"""Linearization ``L = J A_u - (mu - eps V d/dx)`` as a dense real operator.

Vectors are stacked ``(v1, v2)`` with ``v = v1 + i v2``; ``J = [[0, 1], [-1, 0]]``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.linalg as sla

from .field import Field, TorusGrid, derivative, inner_product
from .stationary import Params, cubic_blocks


class DegenerateKernelError(RuntimeError):
    """The zero eigenvalue is not algebraically simple."""


@dataclass
class LinearOperator:
    matrix: np.ndarray
    grid: TorusGrid
    around: Field
    params: Params

    @property
    def eps(self) -> float:
        return self.params.eps

    def apply(self, v: Field) -> Field:
        return Field.from_real(self.grid, self.matrix @ v.to_real())


@dataclass
class SpectrumReport:
    eigenvalues: np.ndarray  # sorted by real part, descending
    critical: complex
    critical_index: int
    gap: float
    classification: str
    eigenvectors: Optional[np.ndarray] = None  # columns match ``eigenvalues``

    @property
    def critical_vector(self) -> np.ndarray:
        if self.eigenvectors is None:
            raise ValueError("spectrum computed without eigenvectors")
        return self.eigenvectors[:, self.critical_index]


@dataclass
class KernelPair:
    translation_mode: Field
    adjoint_kernel: Field
    pairing: float
    normalized: bool

    def check_pairing(self) -> float:
        """``<u', J phi*>`` recomputed by quadrature, equal to ``Re int i u' conj(phi*)``."""
        return inner_product(1j * self.translation_mode, self.adjoint_kernel)


def J_matrix(n: int) -> np.ndarray:
    z, e = np.zeros((n, n)), np.eye(n)
    return np.block([[z, e], [-e, z]])


def apply_J(vec: np.ndarray) -> np.ndarray:
    n = len(vec) // 2
    return np.concatenate([vec[n:], -vec[:n]])


def assemble(u: Field, p: Params) -> LinearOperator:
    grid = u.grid
    n = grid.n
    D1, D2 = grid.diff_matrix, grid.diff2_matrix
    M11, M12, M22 = cubic_blocks(u)
    eye = np.eye(n)
    # A_u blocks
    A11 = -p.d * D2 + p.zeta * eye - M11
    A12 = -M12
    A22 = -p.d * D2 + p.zeta * eye - M22
    diag = -p.mu * eye
    if p.eps != 0.0:
        diag = diag + p.eps * p.potential.sample(grid)[:, None] * D1
    mat = np.empty((2 * n, 2 * n))
    mat[:n, :n] = A12 + diag
    mat[:n, n:] = A22
    mat[n:, :n] = -A11
    mat[n:, n:] = -A12 + diag
    return LinearOperator(mat, grid, u, p)


def _classify(eigs: np.ndarray, crit_idx: int, tol: float) -> tuple[str, float]:
    others = np.delete(eigs.real, crit_idx)
    gap = float(-others.max()) if len(others) else np.inf
    crit = eigs[crit_idx].real
    if crit > tol or gap < -tol:
        return "unstable", gap
    if crit < -tol and gap > 1e-6:
        return "stable", gap
    return "marginal", gap


def full_spectrum(op: LinearOperator, vectors: bool = False, tol: float = 1e-9) -> SpectrumReport:
    """All ``2n`` eigenvalues from a dense nonsymmetric eigensolver.

    The critical eigenvalue is the smallest in modulus among those with
    ``Re > -mu/2``; ``gap`` is minus the largest real part of the rest.
    """
    try:
        if vectors:
            w, vr = sla.eig(op.matrix)
        else:
            w, vr = sla.eigvals(op.matrix), None
    except sla.LinAlgError as exc:
        raise RuntimeError(f"eigensolver failed: {exc}") from exc
    order = np.lexsort((w.imag, -w.real))
    w = w[order]
    if vr is not None:
        vr = vr[:, order]
    mu = op.params.mu
    cand = np.nonzero(w.real > -mu / 2)[0]
    if len(cand) == 0:
        cand = np.arange(len(w))
    ci = int(cand[np.argmin(np.abs(w[cand]))])
    cls, gap = _classify(w, ci, tol)
    return SpectrumReport(w, complex(w[ci]), ci, gap, cls, vr)


def kernel_pair(op: LinearOperator, normalize: bool = True) -> KernelPair:
    """Translation mode ``u'`` and adjoint kernel ``phi*`` with ``<u', J phi*> = 1``.

    ``ker L^T = span{J phi*}``; its generator is the left singular vector of
    the smallest singular value.
    """
    grid = op.grid
    du = derivative(op.around, 1)
    uu, s, _ = np.linalg.svd(op.matrix)
    w = uu[:, -1]
    phi = Field.from_real(grid, -apply_J(w))
    pairing = inner_product(du, Field.from_real(grid, w))
    scale = np.linalg.norm(du.to_real()) * np.linalg.norm(w)
    if abs(pairing) < 1e-10 * max(scale * grid.dx, 1e-300):
        raise DegenerateKernelError(
            "translation mode is orthogonal to the adjoint kernel: zero eigenvalue is not simple"
        )
    if normalize:
        phi = phi / pairing
    return KernelPair(du, phi, float(pairing), normalize)


@dataclass
class GaugeData:
    theta: Field
    W: tuple  # (W1, W2, W3, W4) sampled on the padded grid
    mean_potential: float


def rotation_matrix(theta: np.ndarray) -> np.ndarray:
    c, s = np.diag(np.cos(theta)), np.diag(np.sin(theta))
    return np.block([[c, s], [-s, c]])


def gauge_rotate(u: Field, p: Params):
    """Operator ``R L R^{-1}`` with constant-coefficient advection.

    ``R`` rotates ``(v1, v2)`` pointwise by ``theta(x) = eps/(2d) int_{x0}^x (V - <V>)``.
    The potentials ``W1..W4`` are evaluated on the padded grid and projected
    like the cubic blocks, so a constant ``V`` reproduces ``assemble`` exactly.
    Returns ``(LinearOperator, GaugeData)``.
    """
    grid = u.grid
    fine = grid.padded
    n = grid.n
    V = p.potential
    v0 = V.mean
    scale = p.eps / (2 * p.d)
    xf = fine.points
    theta = scale * V.integral_of_fluctuation(xf, grid.x0)
    dtheta = scale * (V(xf) - v0)
    d2theta = scale * V.derivative(xf)
    c, s = np.cos(theta), np.sin(theta)
    w = fine.inverse(grid.pad(u.coeffs))
    u1, u2 = w.real, w.imag
    U1 = -(3 * u1**2 + u2**2)
    U2 = -2 * u1 * u2
    U3 = -(u1**2 + 3 * u2**2)
    extra = p.d * dtheta**2 - p.eps * dtheta * V(xf)
    W1 = p.zeta + c**2 * U1 + 2 * c * s * U2 + s**2 * U3 + extra
    W2 = (c**2 - s**2) * U2 + c * s * (U3 - U1)
    W3 = p.zeta + s**2 * U1 - 2 * c * s * U2 + c**2 * U3 + extra
    W4 = p.d * d2theta
    E, P = grid.interp_matrix, grid.project_matrix

    def mult(f):
        return P @ (f[:, None] * E)

    D1, D2 = grid.diff_matrix, grid.diff2_matrix
    A11 = -p.d * D2 + mult(W1)
    A12 = mult(W2 + W4)
    A21 = mult(W2 - W4)
    A22 = -p.d * D2 + mult(W3)
    diag = -p.mu * np.eye(n) + p.eps * v0 * D1
    mat = np.block([[A21 + diag, A22], [-A11, -A12 + diag]])
    theta_coarse = scale * V.integral_of_fluctuation(grid.points, grid.x0)
    gauge = GaugeData(Field(grid, values=theta_coarse), (W1, W2, W3, W4), v0)
    return LinearOperator(mat, grid, u, p), gauge


def hausdorff(a: np.ndarray, b: np.ndarray) -> float:
    dist = np.abs(a[:, None] - b[None, :])
    return float(max(dist.min(axis=1).max(), dist.min(axis=0).max()))


def constant_state_eigenvalues(u_const: complex, p: Params, grid: TorusGrid) -> np.ndarray:
    """Closed-form spectrum at ``eps = 0`` around a constant state.

    Each grid wavenumber contributes ``-mu +- sqrt(rho^2 - (d k^2 + zeta - 2 rho)^2)``.
    """
    rho = abs(u_const) ** 2
    g = p.d * grid.kappa**2 + p.zeta - 2 * rho
    root = np.sqrt((rho**2 - g**2).astype(complex))
    return np.concatenate([-p.mu + root, -p.mu - root])
