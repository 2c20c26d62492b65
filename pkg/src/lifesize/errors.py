"""Exception hierarchy shared across the toolkit.

Domain errors derive from :class:`LifesizeError` so the CLI can map them to
exit code 3; :class:`InvalidInput` additionally subclasses ``ValueError``.
"""

from __future__ import annotations


class LifesizeError(Exception):
    """Base class for every domain error raised by the toolkit."""


class InvalidInput(LifesizeError, ValueError):
    pass


# fov
class TargetExceedsDevice(LifesizeError):
    pass


class AspectMismatch(LifesizeError):
    pass


# layout
class InvalidCount(LifesizeError, ValueError):
    pass


class AtOrigin(LifesizeError, ValueError):
    pass


# placement models
class UnsupportedScenario(LifesizeError):
    pass


class NotTabulated(LifesizeError):
    pass


# fitting
class InsufficientData(LifesizeError):
    pass


class DegenerateDesign(LifesizeError):
    pass


class ZeroVariance(LifesizeError):
    pass


# wire protocol
class WireError(LifesizeError):
    pass


class Truncated(WireError):
    pass


class UnknownType(WireError):
    pass


class LengthMismatch(WireError):
    pass


class InvariantViolation(WireError):
    pass


# session
class ProtocolViolation(LifesizeError):
    pass


class NonMonotoneTime(LifesizeError):
    pass


# media
class FormatMismatch(LifesizeError):
    pass
