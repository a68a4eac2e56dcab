"""Exception hierarchy."""


class CollapseRadianceError(Exception):
    """Base class for all package errors."""


class AtomDataError(CollapseRadianceError, ValueError):
    """Invalid atom description."""


class MalformedAtomError(AtomDataError):
    pass


class InvalidRadiusError(AtomDataError):
    pass


class OccupancyMismatchError(AtomDataError):
    pass


class UnknownAtomError(AtomDataError, KeyError):
    def __str__(self):
        # KeyError would repr() the message
        return str(self.args[0]) if self.args else ""


class QuadratureError(CollapseRadianceError, RuntimeError):
    """Numerical integration missed its tolerance."""

    def __init__(self, message, achieved=None, target=None):
        super().__init__(message)
        self.achieved = achieved
        self.target = target


class ModelMismatchError(CollapseRadianceError, ValueError):
    """Parameter record does not match the requested model family."""


class AlreadyNormalizedError(CollapseRadianceError, ValueError):
    pass


class GridMismatchError(CollapseRadianceError, ValueError):
    pass


class DegenerateDesignError(CollapseRadianceError, ValueError):
    """Amplitude fit has no information (e.g. an all-zero shape)."""


class IterationError(CollapseRadianceError, RuntimeError):
    """The correlation-length iteration produced a non-finite update."""

    def __init__(self, message, trace=None):
        super().__init__(message)
        self.trace = list(trace or [])


class SemiclassicalValidityWarning(UserWarning):
    """Emitted when a rate is evaluated below 1 keV."""
