"""Energies, perturbed energies and pointwise bounds used by the run audits."""

from __future__ import annotations

import numpy as np

from .errors import NonPositiveState
from .grid import GridField, RegParams, integrate, spectral_derivative


def functional_F(u: GridField) -> float:
    """Total mass: integral of u over the unit torus."""
    return integrate(u.values)


def functional_E(u: GridField) -> float:
    """Dirichlet-type energy: integral of (u_xx)^2 + (u_x)^2."""
    ux = spectral_derivative(u.values, 1)
    uxx = spectral_derivative(u.values, 2)
    return integrate(uxx**2 + ux**2)


def functional_F_eps(u: GridField, reg: RegParams) -> float:
    """Perturbed mass: integral of eps^a/(1-a) * u^{1-a} + u."""
    v = u.values
    if np.min(v) <= 0:
        raise NonPositiveState("F_eps requires a strictly positive field")
    return integrate(reg.eps_alpha / (1.0 - reg.alpha) * v ** (1.0 - reg.alpha) + v)


def log_invariant(u: GridField, reg: RegParams) -> float:
    """Conserved quantity of the regularized flow: integral of eps^a/a * u^{-a} - ln u."""
    v = u.values
    if np.min(v) <= 0:
        raise NonPositiveState("log invariant requires a strictly positive field")
    return integrate(reg.eps_alpha / reg.alpha * v ** (-reg.alpha) - np.log(v))


def min_lemma_check(u: GridField) -> tuple[bool, float]:
    """Check u(x) - u_min <= (2/3) ||u_xx||_L2 |x - x*|^{3/2} at every node.

    The distance to the grid argmin x* is taken periodically (the conservative
    choice on the torus).  Returns (holds, worst_slack) with the slack defined
    as min over nodes of rhs - lhs; a tiny negative slack within roundoff of
    the norm scale still counts as holding.
    """
    v = u.values
    n = v.size
    uxx = spectral_derivative(v, 2)
    norm_uxx = float(np.sqrt(integrate(uxx**2)))
    i_star = int(np.argmin(v))
    x = np.arange(n) / n
    d = np.abs(x - x[i_star])
    d = np.minimum(d, 1.0 - d)
    lhs = v - v[i_star]
    rhs = (2.0 / 3.0) * norm_uxx * d**1.5
    slack = rhs - lhs
    worst = float(np.min(slack))
    tol = 1e-12 * max(1.0, norm_uxx, float(np.max(np.abs(v))))
    return worst >= -tol, worst
