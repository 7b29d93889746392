"""Exception types shared by the whole toolkit."""


class Bie2dError(Exception):
    """Base class for all toolkit errors."""


class InvalidGeometry(Bie2dError):
    """Curve data does not describe an admissible multiply connected domain."""


class LengthMismatch(Bie2dError):
    """A grid function does not align with the mesh it is used on."""


class OutOfRange(Bie2dError):
    """A component or region index is outside the valid range."""


class NearBoundary(Bie2dError):
    """Evaluation point falls inside the near-boundary quadrature band."""


class SingularPoint(Bie2dError):
    """Kernel evaluated at a zero offset."""


class SingularSystem(Bie2dError):
    """A dense solve or least-squares problem failed its residual check."""


class InvalidProbe(Bie2dError):
    """Probe circle does not enclose the domain (or touches it)."""


class NoLimit(Bie2dError):
    """Exterior field grows logarithmically; no finite value at infinity."""


class ConfigError(Bie2dError):
    """Run configuration file or CLI arguments are inconsistent."""


class IncompatibleData(Bie2dError):
    """Neumann datum violates the per-component compatibility conditions."""

    def __init__(self, message, pairings=None):
        super().__init__(message)
        self.pairings = [] if pairings is None else list(pairings)


class ConditioningWarning(UserWarning):
    """Singular-value gap of a null-space computation is suspiciously small."""
