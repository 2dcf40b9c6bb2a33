"""Exception and warning types shared across the package."""


class PainleveError(Exception):
    """Base class for operation errors raised by this package."""


class NewtonDivergence(PainleveError):
    pass


class InsufficientSpan(PainleveError):
    pass


class InsufficientData(PainleveError):
    pass


class FitDivergence(PainleveError):
    pass


class PoleOfGamma(PainleveError, ValueError):
    pass


class QuadratureNonConvergence(PainleveError):
    pass


class DomainError(PainleveError, ValueError):
    pass


class NotSeparatrix(PainleveError):
    pass


class SeparatrixProximity(PainleveError):
    """Initial data sit on (or numerically at) a separatrix, where both
    the oscillatory and the pole-train parameterisations are singular."""


class VerdictInversion(PainleveError):
    """A sweep produced verdicts that do not alternate A/C as expected."""


class RegimeWarning(UserWarning):
    """Large-parameter asymptotics evaluated outside their intended regime."""
