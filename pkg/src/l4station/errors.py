"""Exception hierarchy shared across the package."""


class L4StationError(Exception):
    """Base class for all errors raised by l4station."""


class InvalidParameterError(L4StationError, ValueError):
    """A physical parameter is non-positive, non-finite or malformed."""


class SingularityError(L4StationError, ArithmeticError):
    """The spacecraft coincides with one of the primaries."""


class DegenerateRadiusError(L4StationError, ArithmeticError):
    """The spacecraft is closer to L4 than the controller guard radius.

    ``stage`` is set by the integrator to the RK4 stage (1-4) that tripped
    the guard, and is ``None`` for direct calls.
    """

    def __init__(self, message: str, stage: int | None = None):
        super().__init__(message)
        self.stage = stage


class ConfigError(L4StationError, ValueError):
    """A scenario or sweep file is unreadable or fails validation.

    ``key`` holds the dotted path of the offending entry when known.
    """

    def __init__(self, message: str, key: str | None = None):
        super().__init__(f"{key}: {message}" if key else message)
        self.key = key


class OutputError(L4StationError, OSError):
    """Writing a trajectory, summary or basin file failed; ``path`` says where."""

    def __init__(self, path, reason: str):
        super().__init__(f"cannot write {path}: {reason}")
        self.path = path
