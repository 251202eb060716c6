"""Exceptions shared across the package."""


class LoewnerError(Exception):
    """Base class for domain errors raised by this package."""


class SwallowedPoint(LoewnerError):
    """A point was absorbed by the growing hull and has no image under the map."""


class ProbeTooClose(LoewnerError):
    """The evaluation point is too close to the hull for a reliable estimate."""


class ThetaOutOfRange(LoewnerError):
    """Curve parameter outside the open interval (0, pi/2)."""


class NotKnkInstance(LoewnerError):
    """Operation requires a trace driven by the constant pair -1, +1."""
