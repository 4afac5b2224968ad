"""Exception types shared across the package."""


class QuadcertError(Exception):
    """Base class for all package-specific errors."""


class DimensionError(QuadcertError):
    """Inputs have incompatible or invalid shapes."""


class SingularJacobianError(QuadcertError):
    """A matrix required to be invertible is numerically singular."""


class NotASolutionError(QuadcertError):
    """The proposed nominal point does not solve the system."""


class UnsupportedFormError(QuadcertError):
    """The system does not have the structure required by the operation."""


class ParseError(QuadcertError):
    """Case-file text could not be parsed.

    ``line`` is the 1-based line number of the offending token when known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ModelError(QuadcertError):
    """A grid case cannot be turned into a usable network model."""


class DegenerateNoLoadError(ModelError):
    """The zero-injection voltage profile has a (near-)zero component."""


class FormatError(QuadcertError):
    """An interchange file violates its schema."""
