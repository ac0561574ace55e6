"""Exception hierarchy shared by every module of the package."""


class DiamondKiteError(Exception):
    """Base class for all errors raised by :mod:`diamondkite`."""


class PreconditionViolation(DiamondKiteError):
    """A mesh operation was called on a configuration that does not admit it."""


class BoundaryViolation(DiamondKiteError):
    """A replacement would need quadrilaterals outside the finite patch."""


class NonTermination(DiamondKiteError):
    """Refinement would exceed the configured level cap."""


class InconsistentRadius(DiamondKiteError):
    """Incident faces disagree on a packing radius (kernel bug)."""


class FormatError(DiamondKiteError):
    """Malformed mesh file or size-field configuration."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
