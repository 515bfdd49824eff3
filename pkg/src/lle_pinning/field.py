"""Periodic grids, spectral transforms and pointwise algebra on a torus.

Coefficient convention: for a field sampled at ``x_j = x0 + j*L/n`` the
coefficients ``c_k`` are the true Fourier coefficients of the band-limited
interpolant ``u(x) = sum_k c_k exp(i*kappa_k*x)``, so the forward transform
carries the factor ``1/n``.  Arrays are kept in FFT order.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property
from typing import Sequence

import numpy as np

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class TorusGrid:
    """Uniform collocation grid on ``[-length/2, length/2)``.

    The default length ``2*pi`` gives the torus used throughout; a longer
    torus is used as a surrogate for the real line.
    """

    n: int = 256
    length: float = TWO_PI

    def __post_init__(self):
        if self.n < 16 or self.n % 2:
            raise ValueError(f"grid size must be even and >= 16, got {self.n}")
        if not self.length > 0:
            raise ValueError("torus length must be positive")

    @cached_property
    def x0(self) -> float:
        return -0.5 * self.length

    @cached_property
    def dx(self) -> float:
        return self.length / self.n

    @cached_property
    def points(self) -> np.ndarray:
        return self.x0 + self.dx * np.arange(self.n)

    @cached_property
    def wavenumbers(self) -> np.ndarray:
        """Integer mode indices in FFT order (``-n/2 .. n/2-1``)."""
        return np.fft.fftfreq(self.n, d=1.0 / self.n).astype(int)

    @cached_property
    def kappa(self) -> np.ndarray:
        """Physical wavenumbers ``2*pi*k/length``."""
        return TWO_PI / self.length * self.wavenumbers

    @cached_property
    def nyquist(self) -> int:
        return self.n // 2

    @cached_property
    def _phase(self) -> np.ndarray:
        return np.exp(-1j * self.kappa * self.x0)

    def forward(self, values: np.ndarray) -> np.ndarray:
        return np.fft.fft(values, axis=-1) / self.n * self._phase

    def inverse(self, coeffs: np.ndarray) -> np.ndarray:
        return np.fft.ifft(coeffs / self._phase, axis=-1) * self.n

    def derivative_symbol(self, order: int) -> np.ndarray:
        sym = (1j * self.kappa) ** order
        if order % 2:
            sym[self.nyquist] = 0.0
        return sym

    @cached_property
    def diff_matrix(self) -> np.ndarray:
        """Real dense first-derivative matrix (zero diagonal)."""
        return _spectral_matrix(self, self.derivative_symbol(1))

    @cached_property
    def diff2_matrix(self) -> np.ndarray:
        return _spectral_matrix(self, self.derivative_symbol(2))

    @cached_property
    def padded(self) -> "TorusGrid":
        return TorusGrid(3 * self.n // 2, self.length)

    @cached_property
    def _pad_index(self) -> np.ndarray:
        # positions of this grid's modes inside the 3/2-padded FFT array
        m = self.padded.n
        return np.where(self.wavenumbers >= 0, self.wavenumbers, self.wavenumbers + m)

    def pad(self, coeffs: np.ndarray) -> np.ndarray:
        # the Nyquist coefficient is shared evenly between +n/2 and -n/2 so that
        # real fields stay real on the padded grid
        out = np.zeros(coeffs.shape[:-1] + (self.padded.n,), dtype=complex)
        out[..., self._pad_index] = coeffs
        half = 0.5 * coeffs[..., self.nyquist]
        out[..., self.nyquist] = half
        out[..., self.padded.n - self.nyquist] = half
        return out

    def truncate(self, padded_coeffs: np.ndarray) -> np.ndarray:
        out = padded_coeffs[..., self._pad_index].copy()
        out[..., self.nyquist] = padded_coeffs[..., self.nyquist] + padded_coeffs[..., self.padded.n - self.nyquist]
        return out

    @cached_property
    def interp_matrix(self) -> np.ndarray:
        """Real matrix mapping samples on this grid to samples on the padded grid."""
        eye = np.eye(self.n)
        return np.ascontiguousarray(np.real(self.padded.inverse(self.pad(self.forward(eye)))).T)

    @cached_property
    def project_matrix(self) -> np.ndarray:
        """Real matrix mapping padded-grid samples back to this grid (mode truncation)."""
        eye = np.eye(self.padded.n)
        return np.ascontiguousarray(np.real(self.inverse(self.truncate(self.padded.forward(eye)))).T)

    def same_as(self, other: "TorusGrid") -> bool:
        return self.n == other.n and self.length == other.length


def _spectral_matrix(grid: TorusGrid, symbol: np.ndarray) -> np.ndarray:
    eye = np.eye(grid.n)
    cols = grid.inverse(symbol * grid.forward(eye))  # row i = image of e_i
    # contiguous copies keep later matrix products on the fast BLAS path
    return np.ascontiguousarray(np.real(cols).T)


class Field:
    """Complex periodic function held by samples and/or Fourier coefficients.

    Whichever representation is missing is computed on first access.
    Fields are treated as immutable; arithmetic returns new fields.
    """

    __slots__ = ("grid", "_values", "_coeffs")

    def __init__(self, grid: TorusGrid, values=None, coeffs=None):
        if values is None and coeffs is None:
            raise ValueError("a Field needs values or coefficients")
        self.grid = grid
        self._values = None if values is None else np.asarray(values, dtype=complex)
        self._coeffs = None if coeffs is None else np.asarray(coeffs, dtype=complex)
        for arr in (self._values, self._coeffs):
            if arr is not None and arr.shape != (grid.n,):
                raise ValueError(f"expected {grid.n} samples, got shape {arr.shape}")

    @classmethod
    def from_function(cls, grid: TorusGrid, func) -> "Field":
        return cls(grid, values=func(grid.points))

    @classmethod
    def from_real(cls, grid: TorusGrid, vec: np.ndarray) -> "Field":
        """Inverse of :meth:`to_real` (stacked real and imaginary parts)."""
        vec = np.asarray(vec, dtype=float)
        return cls(grid, values=vec[: grid.n] + 1j * vec[grid.n:])

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            self._values = self.grid.inverse(self._coeffs)
        return self._values

    @property
    def coeffs(self) -> np.ndarray:
        if self._coeffs is None:
            self._coeffs = self.grid.forward(self._values)
        return self._coeffs

    def to_real(self) -> np.ndarray:
        v = self.values
        return np.concatenate([v.real, v.imag])

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    def conj(self) -> "Field":
        return Field(self.grid, values=np.conj(self.values))

    def reflect(self) -> "Field":
        """``u(-x)``; exact on the grid since ``-x_j = x_{n-j}`` modulo the period."""
        return Field(self.grid, values=np.roll(self.values[::-1], 1))

    def _other(self, other):
        if isinstance(other, Field):
            if not self.grid.same_as(other.grid):
                raise ValueError("fields live on different grids")
            return other.values
        return other

    def __add__(self, other):
        return Field(self.grid, values=self.values + self._other(other))

    __radd__ = __add__

    def __sub__(self, other):
        return Field(self.grid, values=self.values - self._other(other))

    def __rsub__(self, other):
        return Field(self.grid, values=self._other(other) - self.values)

    def __mul__(self, other):
        return Field(self.grid, values=self.values * self._other(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Field(self.grid, values=self.values / scalar)

    def __neg__(self):
        return Field(self.grid, values=-self.values)

    def __repr__(self):
        return f"Field(n={self.grid.n}, length={self.grid.length:.6g})"


def transform(f: Field, direction: str = "forward") -> Field:
    """Populate the other representation of ``f`` (returns a fresh field)."""
    if direction == "forward":
        return Field(f.grid, values=f.values, coeffs=f.grid.forward(f.values))
    if direction == "inverse":
        return Field(f.grid, values=f.grid.inverse(f.coeffs), coeffs=f.coeffs)
    raise ValueError(f"unknown direction {direction!r}")


def derivative(f: Field, order: int = 1) -> Field:
    if order not in (1, 2):
        raise ValueError("only first and second derivatives are supported")
    return Field(f.grid, coeffs=f.coeffs * f.grid.derivative_symbol(order))


def shift(f: Field, sigma: float) -> Field:
    """Translate: returns ``f(x - sigma)``."""
    return Field(f.grid, coeffs=f.coeffs * np.exp(-1j * f.grid.kappa * sigma))


def inner_product(f: Field, g: Field) -> float:
    """Real L2 pairing ``Re int f conj(g) dx`` by the trapezoid rule."""
    if not f.grid.same_as(g.grid):
        raise ValueError("inner product of fields on different grids")
    return float(np.real(np.vdot(g.values, f.values)) * f.grid.dx)


def dealiased_product(f: Field, g: Field, h: Field) -> Field:
    """Triple product computed on a 3/2-padded grid and truncated back."""
    grid = f.grid
    for other in (g, h):
        if not grid.same_as(other.grid):
            raise ValueError("dealiased product of fields on different grids")
    fine = grid.padded
    vals = [fine.inverse(grid.pad(a.coeffs)) for a in (f, g, h)]
    return Field(grid, coeffs=grid.truncate(fine.forward(vals[0] * vals[1] * vals[2])))


def cubic_term(u: Field) -> Field:
    """Dealiased ``|u|^2 u``."""
    grid = u.grid
    fine = grid.padded
    w = fine.inverse(grid.pad(u.coeffs))
    return Field(grid, coeffs=grid.truncate(fine.forward(np.abs(w) ** 2 * w)))


def sobolev_norm(f: Field, s: int = 0) -> float:
    weight = (1.0 + f.grid.kappa**2) ** s
    return float(np.sqrt(np.sum(weight * np.abs(f.coeffs) ** 2) * f.grid.length))


@dataclass(frozen=True)
class PotentialSpec:
    """Finite trigonometric series ``a0 + sum_m a_m cos(m w x) + b_m sin(m w x)``.

    ``w = 2*pi/period``; the default period is the ``2*pi`` torus.
    """

    mean: float = 0.0
    cosine_coeffs: tuple = ()
    sine_coeffs: tuple = ()
    period: float = TWO_PI

    def __post_init__(self):
        object.__setattr__(self, "cosine_coeffs", tuple(float(a) for a in self.cosine_coeffs))
        object.__setattr__(self, "sine_coeffs", tuple(float(b) for b in self.sine_coeffs))

    @classmethod
    def constant(cls, c: float) -> "PotentialSpec":
        return cls(mean=float(c))

    @property
    def order(self) -> int:
        return max(len(self.cosine_coeffs), len(self.sine_coeffs))

    def is_constant(self) -> bool:
        return not any(self.cosine_coeffs) and not any(self.sine_coeffs)

    def _harmonics(self):
        w = TWO_PI / self.period
        a = np.zeros(self.order)
        b = np.zeros(self.order)
        a[: len(self.cosine_coeffs)] = self.cosine_coeffs
        b[: len(self.sine_coeffs)] = self.sine_coeffs
        return w * np.arange(1, self.order + 1), a, b

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        om, a, b = self._harmonics()
        ph = np.multiply.outer(x, om)
        return self.mean + np.cos(ph) @ a + np.sin(ph) @ b

    def derivative(self, x, order: int = 1) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        om, a, b = self._harmonics()
        ph = np.multiply.outer(x, om)
        # d^r/dx^r of cos and sin via phase advance by r*pi/2
        shift_ = order * np.pi / 2
        return np.cos(ph + shift_) @ (a * om**order) + np.sin(ph + shift_) @ (b * om**order)

    def integral_of_fluctuation(self, x, start: float) -> np.ndarray:
        """Exact ``int_start^x (V(y) - mean) dy``."""
        x = np.asarray(x, dtype=float)
        om, a, b = self._harmonics()

        def prim(t):
            ph = np.multiply.outer(np.asarray(t, dtype=float), om)
            return np.sin(ph) @ (a / om) - np.cos(ph) @ (b / om)

        return prim(x) - prim(start)

    def sample(self, grid: TorusGrid) -> np.ndarray:
        reps = grid.length / self.period
        if not self.is_constant() and abs(reps - round(reps)) > 1e-9 * max(reps, 1.0):
            raise ValueError("potential period does not divide the torus length")
        if self.order and grid.length / self.period * self.order >= grid.n / 2:
            raise ValueError(
                f"potential of order {self.order} is aliased on a grid of {grid.n} points"
            )
        return self(grid.points)

    def scaled(self, factor: float) -> "PotentialSpec":
        return PotentialSpec(
            self.mean * factor,
            tuple(factor * a for a in self.cosine_coeffs),
            tuple(factor * b for b in self.sine_coeffs),
            self.period,
        )

    def __add__(self, other: "PotentialSpec") -> "PotentialSpec":
        if self.period != other.period:
            raise ValueError("cannot add potentials with different periods")
        m = max(self.order, other.order)

        def padded(c):
            return np.pad(np.asarray(c, dtype=float), (0, m - len(c)))

        return PotentialSpec(
            self.mean + other.mean,
            tuple(padded(self.cosine_coeffs) + padded(other.cosine_coeffs)),
            tuple(padded(self.sine_coeffs) + padded(other.sine_coeffs)),
            self.period,
        )

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "cosine_coeffs": list(self.cosine_coeffs),
            "sine_coeffs": list(self.sine_coeffs),
            "period": self.period,
        }
