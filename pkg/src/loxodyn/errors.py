"""Exception types shared across the toolkit.

Names match the failure modes of the public operations, so callers can
catch e.g. ``ZeroCoordinate`` without string matching.
"""


class LoxodynError(Exception):
    """Base class for all toolkit errors."""


class ZeroCoordinate(LoxodynError):
    """Monomial map evaluated at a point with a zero coordinate."""


class SurfaceMismatch(LoxodynError):
    """Point or second automorphism lives on a different surface."""


class OffSurface(LoxodynError):
    """Markov point violates the surface equation beyond tolerance."""


class NonUnimodular(LoxodynError):
    """Integer matrix with |det| != 1 where GL2(Z) is required."""


class NotLoxodromic(LoxodynError):
    """Operation requires dynamical degree > 1."""


class DegenerateEigenspace(LoxodynError):
    """Power iteration failed to converge to a dominant eigenvector."""


class BasisFailure(LoxodynError):
    """Divisor decomposition residual too large; model violates the
    expected basis structure."""


class RequiresCustomModel(LoxodynError):
    """No built-in completion for this automorphism; supply (Q, Mf) data."""


class NonConvergence(LoxodynError):
    """Tate limit hit the iteration cap without a certified tail."""


class BadPoint(LoxodynError):
    """Point outside the domain of a local Green evaluation."""


class UnsupportedField(LoxodynError):
    """Coordinates of algebraic degree > 2, or an unsupported extension."""


class BadFiber(LoxodynError):
    """Specialization requested at an excluded parameter value."""


class SchemaError(LoxodynError):
    """JSON input does not match the documented schema."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path


class GridMismatch(LoxodynError):
    """Two grid measures with incompatible bounds or resolution."""


class EmptyInput(LoxodynError):
    """Operation requires a nonempty collection."""
