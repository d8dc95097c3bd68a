"""Multiscale simulation and verification toolkit for 1-D crystal surfaces.

Layers, from microscopic to continuum:

* :mod:`crystalflow.kmc` — lattice kinetic Monte Carlo of hopping,
  evaporation, and deposition on a screw-periodic height column model.
* :mod:`crystalflow.statmech` — tilted Gibbs ensembles on slopes, surface
  tension via the Legendre transform of the log partition function.
* :mod:`crystalflow.mesoscale` — the exponential-mobility step-flow ODE
  system on mesoscopic boxes.
* :mod:`crystalflow.pde` — the regularized fourth-order continuum flow in
  both the u = exp(-lap h) form and the h form.
* :mod:`crystalflow.functionals` — conserved and dissipated quantities.
* :mod:`crystalflow.spectral` — Wiener-type norms, factorial series
  thresholds, Lyapunov and decay audits.
* :mod:`crystalflow.harness` — configuration, CLI scenarios, cross-scale
  comparison experiments.
"""

__version__ = "0.1.0"

from .errors import (
    BadPartition,
    ConfigInvalid,
    CrystalflowError,
    Divergent,
    GridMismatch,
    NonPositiveState,
    OutOfRange,
    OverflowGuard,
    PreconditionViolated,
    StiffnessAbort,
    ZeroTotalRate,
)
from .grid import GridField, RegParams

__all__ = [
    "__version__",
    "BadPartition",
    "ConfigInvalid",
    "CrystalflowError",
    "Divergent",
    "GridField",
    "GridMismatch",
    "NonPositiveState",
    "OutOfRange",
    "OverflowGuard",
    "PreconditionViolated",
    "RegParams",
    "StiffnessAbort",
    "ZeroTotalRate",
]
