"""Exception hierarchy shared by every module."""

from __future__ import annotations


class LaxGlueError(Exception):
    """Base class; ``locus`` names the file/field or object where the problem sits."""

    def __init__(self, message: str, locus: str | None = None):
        self.locus = locus
        super().__init__(f"{locus}: {message}" if locus else message)


class CycleDetected(LaxGlueError):
    pass


class UnknownElement(LaxGlueError):
    pass


class SizeLimit(LaxGlueError):
    pass


class ChainNotInCosieve(LaxGlueError):
    pass


class OutOfRange(LaxGlueError):
    pass


class MaxMismatch(LaxGlueError):
    pass


class MixedBackend(LaxGlueError):
    pass


class OrientationViolation(LaxGlueError):
    pass


class NotOriginating(LaxGlueError):
    pass


class LimitHypothesisFailed(LaxGlueError):
    pass


class NotExtendable(LaxGlueError):
    pass


class NotCosieve(LaxGlueError):
    pass


class ParseError(LaxGlueError):
    pass


class ValidationFailed(LaxGlueError):
    pass
