"""Exception hierarchy shared across the package."""


class PolymerLabError(Exception):
    """Base class for all package-specific errors."""


class InvalidVertex(PolymerLabError):
    """Vertex payload violates the constraints of its graph family."""


class BudgetExceeded(PolymerLabError):
    """A front, ball or enumeration outgrew its configured cap."""


class EmptyCluster(PolymerLabError):
    """Largest percolation cluster is below the configured minimum size."""


class ExtinctTree(PolymerLabError):
    """Galton-Watson survival rejection exceeded its retry cap."""


class HorizonExceedsGraph(PolymerLabError):
    """Requested walk horizon is unsafe for a finite graph approximation."""


class WrongFamily(PolymerLabError):
    """Operation requires a specific graph family."""


class NumericalError(PolymerLabError):
    """Quadrature or stability failure in a numeric routine."""


class MissingHistory(PolymerLabError):
    """Path sampling requested without stored front history."""


class InsufficientData(PolymerLabError):
    """Not enough data points for a requested fit."""


class ConfigError(PolymerLabError):
    """Run configuration failed validation."""
