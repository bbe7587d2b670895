"""Exception taxonomy for the hartree_exact package.

Every error raised by the library derives from :class:`HartreeError`, so
callers can catch one type at the boundary.  The subclasses mirror the ways a
computation can leave its domain of validity: model parameters outside the
oscillatory regime, resonant driving, caustics of the quadratic flow, grids
too small for the state they carry, and quadrature/step-size failures.
"""

__all__ = [
    "HartreeError",
    "ConfigError",
    "ParseError",
    "ValidationError",
    "RegimeError",
    "ResonanceError",
    "StepError",
    "GridError",
    "AliasError",
    "CausticError",
    "QuadratureError",
    "ToleranceError",
    "ClassError",
]


class HartreeError(Exception):
    """Base class for all package errors."""


class ConfigError(HartreeError):
    """Problem with a run configuration (file or programmatic)."""


class ParseError(ConfigError):
    """Malformed config text; carries the offending line/key when known."""

    def __init__(self, message, line=None, key=None):
        super().__init__(message)
        self.line = line
        self.key = key


class ValidationError(ConfigError):
    """Config parsed fine but a value is out of range or inconsistent."""


class RegimeError(HartreeError):
    """Effective frequencies are not real: the quadratic flow is unstable."""


class ResonanceError(HartreeError):
    """Drive frequency too close to the effective centre frequency."""


class StepError(HartreeError):
    """Requested time step is too coarse for the integrator."""


class GridError(HartreeError):
    """State is not resolved/contained by the spatial grid."""


class AliasError(GridError):
    """Spectral tail carries non-negligible mass; derivatives would alias.

    A special case of :class:`GridError`: the grid is too coarse to resolve
    the state's momentum content.
    """


class CausticError(HartreeError):
    """Propagation interval hits a focal point of the oscillator flow."""


class QuadratureError(HartreeError):
    """Numerical quadrature failed to reach the requested tolerance."""


class ToleranceError(HartreeError):
    """Finite-difference limit did not settle within tolerance."""


class ClassError(HartreeError):
    """Operator output left the admissible class of concentrated states."""
