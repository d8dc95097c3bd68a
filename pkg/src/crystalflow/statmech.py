"""Tilted Gibbs ensemble over integer slopes.

The single-bond measure weights an integer slope z by exp(-beta*V(z) + eta*z)
with V(z) = |z|**p.  From its normalizer we obtain the surface tension as a
Legendre transform and its large-tilt scaling limit.  All sums are truncated
adaptively with a certified tail and evaluated in log space so large tilts do
not overflow.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import logsumexp

from .errors import Divergent, OutOfRange
from .grid import GridField, discrete_laplacian

# relative size at which the adaptive truncation stops adding terms
_TAIL_CUTOFF = 1e-16


@dataclass
class TiltedEnsemble:
    beta: float
    eta: float = 0.0
    p: int = 2
    z_max: int = 8

    def __post_init__(self):
        if not (np.isfinite(self.beta) and self.beta > 0):
            raise ValueError("beta must be finite and positive")
        if self.p not in (1, 2):
            raise ValueError("potential exponent p must be 1 or 2")
        if self.z_max < 8:
            raise ValueError("z_max must be at least 8")
        if self.p == 1 and abs(self.eta) >= self.beta:
            raise Divergent("Z_eta diverges for p=1 when |eta| >= beta")


def _support(beta: float, eta: float, p: int, z_min: int) -> np.ndarray:
    """Integer support wide enough that the dropped tail is negligible."""
    center = int(round(eta / (2.0 * beta))) if p == 2 else 0
    radius = max(z_min, 8)
    while True:
        z = np.arange(center - radius, center + radius + 1)
        logw = -beta * np.abs(z).astype(float) ** p + eta * z
        peak = logw.max()
        if logw[0] < peak + np.log(_TAIL_CUTOFF) and logw[-1] < peak + np.log(_TAIL_CUTOFF):
            return z
        radius *= 2
        if radius > 1 << 24:
            raise Divergent("tilted sum failed to localize")


def _check(ens: TiltedEnsemble) -> None:
    if ens.p == 1 and abs(ens.eta) >= ens.beta:
        raise Divergent("Z_eta diverges for p=1 when |eta| >= beta")


def log_partition_function(ens: TiltedEnsemble) -> float:
    """log of the tilted normalizer, safe for arbitrarily large tilts (p=2)."""
    _check(ens)
    z = _support(ens.beta, ens.eta, ens.p, ens.z_max)
    logw = -ens.beta * np.abs(z).astype(float) ** ens.p + ens.eta * z
    return float(logsumexp(logw))


def partition_function(ens: TiltedEnsemble) -> float:
    return float(np.exp(log_partition_function(ens)))


def tilt_mean(ens: TiltedEnsemble) -> float:
    """Mean slope under the tilted measure; equals d(log Z)/d(eta)."""
    _check(ens)
    z = _support(ens.beta, ens.eta, ens.p, ens.z_max)
    logw = -ens.beta * np.abs(z).astype(float) ** ens.p + ens.eta * z
    w = np.exp(logw - logw.max())
    return float(np.sum(z * w) / np.sum(w))


def _mean_of_eta(eta: float, beta: float, p: int) -> float:
    return tilt_mean(TiltedEnsemble(beta=beta, eta=eta, p=p))


def surface_tension(u: float, beta: float, p: int = 2) -> tuple[float, float]:
    """Legendre transform sup_eta {eta*u - log Z_eta} at mean slope u.

    Returns (sigma, eta_star) where eta_star is the maximizing tilt; log Z is
    strictly convex in eta so the root of tilt_mean(eta) = u is unique.
    """
    if u == 0.0:
        logz = log_partition_function(TiltedEnsemble(beta=beta, eta=0.0, p=p))
        return -logz, 0.0

    if p == 2:
        # the lattice Gaussian mean is close to eta/(2*beta); bracket around it
        lo, hi = 2.0 * beta * u - 2.0, 2.0 * beta * u + 2.0
        while _mean_of_eta(lo, beta, p) > u:
            lo -= 2.0
        while _mean_of_eta(hi, beta, p) < u:
            hi += 2.0
    else:
        # p=1: admissible tilts live in (-beta, beta)
        edge = beta * (1.0 - 1e-12)
        if not (_mean_of_eta(-edge, beta, p) < u < _mean_of_eta(edge, beta, p)):
            raise OutOfRange(f"mean slope u={u} not attainable for p=1, beta={beta}")
        lo, hi = -edge, edge

    eta_star = brentq(lambda e: _mean_of_eta(e, beta, p) - u, lo, hi, xtol=1e-12)
    logz = log_partition_function(TiltedEnsemble(beta=beta, eta=eta_star, p=p))
    return float(eta_star * u - logz), float(eta_star)


def scaled_tension_limit(u: float, beta: float, kappa: float) -> float:
    """kappa^{-1} * sigma_D'(kappa*u); tends to 2*beta*u as kappa grows (p=2)."""
    if kappa < 1:
        raise ValueError("kappa must be >= 1")
    _, eta_star = surface_tension(kappa * u, beta, p=2)
    return eta_star / kappa


def chemical_potential(h: GridField) -> GridField:
    """Minus twice the 3-point discrete Laplacian with the grid's spacing."""
    return GridField(-2.0 * discrete_laplacian(h.values, h.spacing), h.spacing)
