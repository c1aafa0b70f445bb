"""Exception hierarchy shared across the package."""


class EhrenlabError(Exception):
    pass


class ConfigurationError(EhrenlabError, ValueError):
    """Invalid parameters or scenario configuration."""


class DomainError(EhrenlabError, ValueError):
    """Input outside an operation's mathematical domain."""


class NumericalError(EhrenlabError, RuntimeError):
    """Runtime numerical failure (NaN, leakage, singularity...)."""


class CorruptStateError(NumericalError):
    pass


class LeakageError(NumericalError):
    pass


class SingularityError(NumericalError):
    pass


class DegeneracyError(NumericalError):
    pass


class LevelTrackingError(NumericalError):
    pass


class BasisTruncationError(NumericalError):
    pass


class ExpansionInvalidError(DomainError):
    pass


class LeakageWarning(UserWarning):
    pass


class TruncationWarning(UserWarning):
    pass


class RegimeWarning(UserWarning):
    pass
