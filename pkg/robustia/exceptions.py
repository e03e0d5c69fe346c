"""Exceptions and warnings raised by robustia.

Use
---

    from robustia.exceptions import InfeasibleSLNRError
    try:
        solution = solve_inner(F, grams, gamma_bar, delta2, P_T)
    except InfeasibleSLNRError:
        ...

"""

from astropy.utils.exceptions import AstropyUserWarning

__all__ = ['RobustIAError', 'NotHermitianError', 'NonFiniteError', 'DimensionError',
           'RankDeficientError', 'SolverFailure', 'SingularCovarianceError',
           'InfeasibleSLNRError', 'ConfigParseError', 'ConfigValidationError',
           'InvariantError', 'NoConvergenceWarning', 'LineSearchWarning']


class RobustIAError(Exception):
    """Base class for all robustia errors."""
    pass


class NotHermitianError(RobustIAError, ValueError):
    pass


class NonFiniteError(RobustIAError, ValueError):
    pass


class DimensionError(RobustIAError, ValueError):
    pass


class RankDeficientError(RobustIAError, ValueError):
    pass


class SolverFailure(RobustIAError, RuntimeError):
    """A dense solver returned a result failing its residual check."""
    pass


class SingularCovarianceError(RobustIAError, RuntimeError):
    pass


class InfeasibleSLNRError(RobustIAError, RuntimeError):
    """The SLNR targets cannot be met with positive powers for this draw."""
    pass


class ConfigParseError(RobustIAError, ValueError):
    """Malformed configuration text.

    Parameters
    ----------
    message : str
    lineno : int or None
        1-based line number in the configuration file.
    key : str or None
        Offending key, if known.

    """

    def __init__(self, message, lineno=None, key=None):
        self.lineno = lineno
        self.key = key
        if lineno is not None:
            message = 'line {}: {}'.format(lineno, message)
        super(ConfigParseError, self).__init__(message)


class ConfigValidationError(RobustIAError, ValueError):
    """A configuration violates one of the NetworkConfig invariants."""

    def __init__(self, invariant, message=None):
        self.invariant = invariant
        if message is None:
            message = 'invariant violated: {}'.format(invariant)
        super(ConfigValidationError, self).__init__(message)


class InvariantError(RobustIAError, AssertionError):
    """A result failed a debug-mode consistency check."""
    pass


class NoConvergenceWarning(AstropyUserWarning):
    """An iterative solver stopped at its iteration limit; best iterate returned."""
    pass


class LineSearchWarning(AstropyUserWarning):
    pass
