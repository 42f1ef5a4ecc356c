"""Exception types shared across the package."""


class SymorbError(Exception):
    """Base class for all package-specific errors."""


class DomainError(SymorbError):
    """Evaluation requested outside a function's domain (e.g. at a collision)."""


class CollisionError(DomainError):
    """Phase point sits numerically at a primary."""

    def __init__(self, primary: str, message: str | None = None):
        self.primary = primary
        super().__init__(message or f"evaluation at the {primary} singularity")


class UnsupportedInvolutionError(SymorbError):
    """The requested involution is not a symmetry of this problem."""


class NumericalError(SymorbError):
    """A numerical procedure failed (root bracketing, step-size underflow, ...)."""


class ConstraintDriftError(NumericalError):
    """Integration left the constraint manifold beyond the allowed drift."""


class FrameError(NumericalError):
    """The contact frame degenerated along a trajectory."""


class DegenerateCrossingError(NumericalError):
    """A crossing of a Lagrangian path could not be regularized."""

    def __init__(self, times, message: str | None = None):
        self.times = list(times)
        super().__init__(message or f"degenerate crossings at t={self.times}")


class CoverContractError(SymorbError):
    """A clause of the double-cover validation contract failed."""

    def __init__(self, clause: str, detail: str = ""):
        self.clause = clause
        super().__init__(f"cover contract clause {clause} failed{': ' + detail if detail else ''}")


class InvalidConfigError(SymorbError):
    """A run configuration failed validation."""
