"""Exception types shared across the package."""


class InstanceError(ValueError):
    """Base class for problems with an instance document."""


class ParseError(InstanceError):
    """The instance text is not well-formed.

    ``field`` names the offending key (if known) and ``line`` the 1-based
    line where JSON decoding failed.
    """

    def __init__(self, message, *, field=None, line=None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field {field!r}")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.field = field
        self.line = line


class ValidationError(InstanceError):
    """The instance parsed but breaks a grid invariant."""


class InfeasibleError(Exception):
    """A solver proved that no feasible solution exists."""


class GenerationError(ValueError):
    """A random instance could not be generated with the requested sites."""


class ModelSizeError(ValueError):
    """An exported linear model would exceed the configured variable budget."""
