"""Exception hierarchy shared by every timax module."""


class TimaxError(Exception):
    """Base class for all timax errors."""


class InvalidInputError(TimaxError, ValueError):
    """An argument violates an operation's precondition."""


class DegenerateMixtureError(InvalidInputError):
    """Every mixture weight was eliminated by the floor threshold."""


class CapacityError(TimaxError):
    """Exact enumeration would exceed the supported number of free edges."""


class FormatError(TimaxError):
    """A graph or index file is malformed."""

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class StaleIndexError(TimaxError):
    """An index was built for a different graph than the one supplied."""


class SmoothingError(TimaxError):
    """A topic has no sub-cutoff probabilities to resample from."""


class SelectorError(TimaxError):
    """A seed selector failed while building one landmark entry."""

    def __init__(self, topic, landmark, cause):
        self.topic = topic
        self.landmark = landmark
        super().__init__(f"selector failed for topic={topic} landmark={landmark!r}: {cause}")
