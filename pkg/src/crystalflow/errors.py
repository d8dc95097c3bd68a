"""Exception types shared across the toolkit."""


class CrystalflowError(Exception):
    """Base class for all toolkit errors."""


class ZeroTotalRate(CrystalflowError):
    """All KMC rate channels vanished; no event can be drawn."""


class BadPartition(CrystalflowError):
    """Coarse-graining box size does not divide the lattice size."""


class Divergent(CrystalflowError):
    """Tilted partition sum diverges for the requested parameters."""


class OutOfRange(CrystalflowError):
    """Requested mean slope is not attainable by any finite tilt."""


class OverflowGuard(CrystalflowError):
    """An exponent exceeded the double-precision exp range."""


class NonPositiveState(CrystalflowError):
    """A field that must stay positive touched zero or went negative."""


class StiffnessAbort(CrystalflowError):
    """Adaptive time step collapsed below its floor."""


class GridMismatch(CrystalflowError):
    """Profiles being compared do not live on compatible grids."""


class ConfigInvalid(CrystalflowError):
    """Run configuration failed schema validation."""


class PreconditionViolated(CrystalflowError):
    """A stated smallness or admissibility condition does not hold."""
