"""Exception hierarchy shared across the package."""


class FHarmonicError(Exception):
    pass


class ConfigurationError(FHarmonicError, ValueError):
    """Invalid parameters for a domain, flow, map or profile."""


class ContractViolation(FHarmonicError, ValueError):
    """A caller broke an operation's precondition (shapes, stencils, ...)."""


class ProfileError(ContractViolation):
    """A profile violated F' > 0 where the formulas need to divide by it."""


class NumericError(FHarmonicError, ArithmeticError):
    pass


class NumericConsistencyError(NumericError):
    """Two independent evaluations of the same quantity disagree."""


class PreconditionError(FHarmonicError):
    """A theorem-level hypothesis (e.g. F-harmonicity) is not met."""
