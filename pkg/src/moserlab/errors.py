"""Exception types raised across the package."""


class MoserLabError(Exception):
    """Base class for all package errors."""


class MissingOverride(MoserLabError, ValueError):
    """A critical exponent is unbounded and no working exponent was given."""


class NotAdmissible(MoserLabError, ValueError):
    """The exponent tuple violates the conditions an operation relies on."""


class DomainMismatch(MoserLabError, ValueError):
    """A point or vector does not fit the domain of a coefficient function."""


class UnknownPreset(MoserLabError, KeyError):
    pass


class MeshMismatch(MoserLabError, ValueError):
    """Fields passed together live on different meshes."""


class SingularJacobian(MoserLabError, ArithmeticError):
    pass


class NotConverged(MoserLabError, RuntimeError):
    """Raised when an operation needs a converged solution and got none."""


class NegativeInput(MoserLabError, ValueError):
    pass


class ParseError(MoserLabError, ValueError):
    """An input document could not be read into the expected structure."""
