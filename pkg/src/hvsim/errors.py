"""Exception types shared across the package."""


class HvError(Exception):
    """Base class for all hvsim errors."""


class DimensionMismatch(HvError):
    """Operands live on Hilbert spaces of different dimension."""


class NotHermitian(HvError):
    """Matrix deviates from its conjugate transpose beyond tolerance."""


class ConvergenceFailure(HvError):
    """Iterative eigensolver exhausted its sweep budget."""


class OutOfDomain(HvError):
    """Argument lies outside the open fiber interval (0, 1)."""


class NotCommuting(HvError):
    """Projectors required to commute do not."""


class DegenerateLabeling(HvError):
    """Joint-sector eigenvalues do not snap onto integer labels."""


class BackingMismatch(HvError):
    """Propositions expected to share one spectral backing do not."""


class LoadError(HvError):
    """Problem file missing, malformed, or referencing unknown names."""
