"""Exception hierarchy shared by all ermakov modules."""


class ErmakovError(Exception):
    """Base class for all errors raised by this package."""


class ValidationError(ErmakovError):
    """Model or scenario construction failed; carries every violation found."""

    def __init__(self, problems):
        if isinstance(problems, str):
            problems = [problems]
        self.problems = list(problems)
        super().__init__("; ".join(self.problems))


class DegenerateDirection(ErmakovError):
    """The quadratic form is not positive along the requested ray."""


class AxisSingularity(ErmakovError):
    """Evaluation too close to a coordinate axis while f or g is nonzero."""


class NonPositiveRho(ErmakovError):
    """The scale function rho(t) is not strictly positive."""


class ParseError(ErmakovError):
    """Expression text could not be parsed; offset is a byte position."""

    def __init__(self, message, offset):
        self.offset = offset
        super().__init__(f"{message} (offset {offset})")


class UnknownIdentifier(ParseError):
    """Identifier is neither a declared variable, constant nor function."""


class ArityError(ParseError):
    """A function call has the wrong number of arguments."""


class EvalDomainError(ErmakovError):
    """IEEE domain violation (log of non-positive, division by zero, ...)."""

    def __init__(self, message, subexpr=None):
        self.subexpr = subexpr
        if subexpr is not None:
            message = f"{message} in '{subexpr}'"
        super().__init__(message)


class QuadratureFailure(ErmakovError):
    """Adaptive quadrature could not reach the requested tolerance."""


class StepUnderflow(ErmakovError):
    """Integrator step size collapsed below the minimum."""


class InconsistentEnergy(ErmakovError):
    """Radial initial data do not satisfy the energy relation."""


class ForbiddenRegion(ErmakovError):
    """Radial start lies where the energy is below the effective potential."""


class AngularTurning(ErmakovError):
    """The angular radicand reached zero; theta stops being monotone."""

    def __init__(self, message, theta=None):
        self.theta = theta
        super().__init__(message)


class AlphaVanishes(ErmakovError):
    """alpha(t) crosses zero inside the window; the chart breaks there."""

    def __init__(self, message, t=None):
        self.t = t
        super().__init__(message)
