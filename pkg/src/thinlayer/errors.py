"""Exception hierarchy shared by all thinlayer modules."""

from __future__ import annotations


class ThinLayerError(Exception):
    """Base class for every error raised by the package."""


# geometry
class DegenerateChart(ThinLayerError):
    """Tangent vectors are (numerically) parallel at the requested point."""


class FoldedLayer(ThinLayerError):
    """The normal offset leaves the tubular neighbourhood of the surface."""


class AxisSingularity(ThinLayerError):
    """A polar quantity was requested at rho = 0 without the axis limit."""


class OutsideDomain(ThinLayerError):
    """A surface point lies outside the chart's domain rectangle."""


# spectral
class NonPositiveWeight(ThinLayerError):
    """p or w evaluated to a non-positive value on the grid."""


class ConvergenceFailure(ThinLayerError):
    """Inverse iteration did not settle within its iteration cap."""


class NotConverged(ThinLayerError):
    """Grid refinement did not reach the requested self-convergence.

    The best available estimate and its residual ride along so callers
    can still report them.
    """

    def __init__(self, message, estimate=None, residual=None, state=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual
        self.state = state


class TailUnderflow(ThinLayerError):
    """Samples in a tail-fit window are too small to be trusted."""


class FitRejected(ThinLayerError):
    """A tail fit does not look like exponential decay."""


# expr
class ExprError(ThinLayerError):
    """Base class for expression errors."""


class ParseError(ExprError):
    def __init__(self, message, offset, expected=()):
        self.offset = offset
        self.expected = tuple(expected)
        detail = f"{message} at offset {offset}"
        if self.expected:
            detail += f" (expected one of: {', '.join(self.expected)})"
        super().__init__(detail)


class UnknownIdentifier(ExprError):
    def __init__(self, name, offset):
        self.name = name
        self.offset = offset
        super().__init__(f"unknown identifier {name!r} at offset {offset}")


class UnboundVariable(ExprError):
    pass


class DomainError(ExprError):
    pass


class NonDifferentiable(ExprError):
    pass


# cli
class SpecError(ThinLayerError):
    """Invalid surface or problem specification."""
