"""Uniform periodic grids on [0, 1) and spectral differentiation helpers.

All continuum fields live on N equispaced nodes x_j = j/N.  Derivatives are
computed with the discrete Fourier transform (exact for trigonometric
polynomials below the Nyquist mode), and integrals over the unit torus reduce
to the grid mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import GridMismatch


@dataclass
class GridField:
    """Real samples of a periodic function on a uniform grid over [0, 1)."""

    values: np.ndarray
    spacing: float = 0.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.values.ndim != 1:
            raise GridMismatch("GridField requires a 1-D sample array")
        if self.spacing == 0.0:
            self.spacing = 1.0 / self.values.size
        if not np.all(np.isfinite(self.values)):
            raise ValueError("GridField values must be finite")

    @property
    def size(self) -> int:
        return self.values.size

    def nodes(self) -> np.ndarray:
        return np.arange(self.size) * self.spacing

    def mean(self) -> float:
        return float(np.mean(self.values))

    def copy(self) -> "GridField":
        return GridField(self.values.copy(), self.spacing)


def require_power_of_two(n: int, minimum: int = 16) -> None:
    if n < minimum or (n & (n - 1)) != 0:
        raise GridMismatch(f"grid size {n} must be a power of two >= {minimum}")


def wavenumbers(n: int) -> np.ndarray:
    """Integer wavenumbers for the rfft layout of an n-point grid."""
    return np.arange(n // 2 + 1)


def deriv_symbol(n: int, order: int) -> np.ndarray:
    """Multiplier (2*pi*i*k)**order on the rfft layout, Nyquist zeroed for odd orders."""
    k = wavenumbers(n).astype(float)
    if order % 2 == 0:
        sign = (-1) ** (order // 2)
        sym = sign * (2.0 * np.pi * k) ** order
        return sym.astype(complex)
    sym = (2.0j * np.pi * k) ** order
    if n % 2 == 0:
        sym[-1] = 0.0
    return sym


def spectral_derivative(values: np.ndarray, order: int) -> np.ndarray:
    """order-th spatial derivative of periodic samples on [0, 1)."""
    n = len(values)
    fh = np.fft.rfft(values)
    return np.fft.irfft(fh * deriv_symbol(n, order), n=n)


def spectral_laplacian(values: np.ndarray) -> np.ndarray:
    return spectral_derivative(values, 2)


def inverse_laplacian(values: np.ndarray) -> np.ndarray:
    """Solve lap(g) = f for zero-mean f; returns the zero-mean solution."""
    n = len(values)
    fh = np.fft.rfft(values)
    sym = deriv_symbol(n, 2)
    out = np.zeros_like(fh)
    out[1:] = fh[1:] / sym[1:]
    return np.fft.irfft(out, n=n)


def integrate(values: np.ndarray) -> float:
    """Integral over the unit torus: the grid mean (domain length 1)."""
    return float(np.mean(values))


def fourier_coefficients(values: np.ndarray) -> np.ndarray:
    """Full-spectrum coefficients c_k = (1/N) sum_j f_j e^{-2*pi*i*j*k/N}.

    Under this convention A*cos(2*pi*x) has coefficients A/2 at k = +/-1.
    Layout follows np.fft.fft (k = 0, 1, ..., -1).
    """
    return np.fft.fft(values) / len(values)


def discrete_laplacian(values: np.ndarray, spacing: float) -> np.ndarray:
    """Periodic 3-point Laplacian (f_{k+1} - 2 f_k + f_{k-1}) / spacing**2."""
    return (np.roll(values, -1) - 2.0 * values + np.roll(values, 1)) / spacing**2


@dataclass
class RegParams:
    """Regularization pair (epsilon, alpha) of the degenerate-mobility cutoff."""

    epsilon: float
    alpha: float = field(default=0.5)

    def __post_init__(self):
        if not (self.epsilon > 0):
            raise ValueError("epsilon must be positive")
        if not (0.0 < self.alpha < 1.0):
            raise ValueError("alpha must lie strictly in (0, 1)")

    @property
    def eps_alpha(self) -> float:
        return self.epsilon**self.alpha
