"""Exception hierarchy; the CLI maps each class to a stable exit code."""


class BergmanJetError(Exception):
    exit_code = 1


class ConfigError(BergmanJetError, ValueError):
    exit_code = 2


class DomainError(BergmanJetError, ValueError):
    """A point lies outside D, or off S where a point of S is required."""

    exit_code = 2


class ContractViolation(BergmanJetError, ValueError):
    exit_code = 2


class RangeError(BergmanJetError, ValueError):
    """Shell floor ``t`` too large: {G < t + 1} would leave the domain."""

    exit_code = 3

    def __init__(self, message, t_max=None):
        super().__init__(message)
        self.t_max = t_max


class ConditioningError(BergmanJetError, ArithmeticError):
    exit_code = 4

    def __init__(self, message, pivot=None):
        super().__init__(message)
        self.pivot = pivot


class NumericalError(BergmanJetError, ArithmeticError):
    exit_code = 4
