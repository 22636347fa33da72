"""Exception hierarchy shared by the library and the CLI exit-code table."""


class EulerFrontsError(Exception):
    """Base class for all library errors."""


class DomainError(EulerFrontsError, ValueError):
    """Input lies outside the domain where a formula or model is defined."""


class AmbiguityError(EulerFrontsError, ValueError):
    """A scalar equation has more than one admissible solution on the bracket."""


class SingularParameterError(EulerFrontsError, ValueError):
    """Parameter set makes a closed form divide by zero (alpha2 = 0, rho = -alpha3, ...)."""


class NumericalError(EulerFrontsError, RuntimeError):
    """An iterative method failed to converge."""


class MonotoneCausticError(EulerFrontsError):
    """The caustic branch has no interior extremum of t on the window, hence no cusp."""
