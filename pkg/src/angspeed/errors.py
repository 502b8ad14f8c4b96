"""Exception types shared across the package."""

from __future__ import annotations


class NotSkew(ValueError):
    """Matrix passed to ``vee`` is not skew-symmetric within tolerance."""


class NotRotation(ValueError):
    """Matrix fails the orthonormality or orientation test."""


class InvalidField(ValueError):
    """A constructor argument violates its invariant.

    ``field`` names the offending attribute so config parsing can report a
    dotted path such as ``integrator.dt``.
    """

    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
        self.message = message


class OutOfRange(ValueError):
    """Angle outside the wrapped interval (-pi, pi]."""


class DegenerateProjection(ValueError):
    """Nearest rotation is not unique (input lies in the degenerate set)."""


class NonFinite(FloatingPointError):
    """Integration produced NaN or Inf."""

    def __init__(self, message: str, t: float | None = None):
        super().__init__(message if t is None else f"{message} at t={t:.17g}")
        self.t = t


class UnknownPreset(KeyError):
    pass


class UnknownParameter(KeyError):
    pass


class ConfigError(ValueError):
    """Config document rejected; ``path`` is the dotted key that failed."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
        self.message = message
