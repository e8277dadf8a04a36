"""Exception and warning types shared across the package."""


class PcalError(ValueError):
    """Base class for all domain errors raised by pcal."""


class ConfigurationError(PcalError):
    """A grid, scale sequence or experiment config violates an invariant."""


class SymmetryError(PcalError):
    """Spectral coefficients are not Hermitian within tolerance."""


class RangeError(PcalError):
    """A dyadic block index lies outside the valid block range."""


class DomainError(PcalError):
    """A negative-order multiplier was applied to a field with nonzero mean."""


class SolenoidalityError(PcalError):
    """Velocity input is not divergence free; carries the measured defect."""

    def __init__(self, defect: float, message: str | None = None):
        self.defect = float(defect)
        super().__init__(message or f"divergence defect {self.defect:.3e} exceeds tolerance")


class StructureError(PcalError):
    """Div-curl structure (div f = 0, curl g = 0) is violated."""


class ResolutionError(PcalError):
    """Requested frequency band contains no lattice points on this grid."""


class SupportError(PcalError):
    """A compactly supported profile leaks mass to the box boundary."""


class PcalWarning(UserWarning):
    """Precondition warnings; any of these marks a report row as flagged."""


class MeanRemovedWarning(PcalWarning):
    pass


class TruncationWarning(PcalWarning):
    pass


class RelaxedSeparationWarning(PcalWarning):
    pass
