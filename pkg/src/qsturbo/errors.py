"""Exception types shared across the package."""


class QsturboError(Exception):
    """Base class for all package errors."""


class ConfigError(QsturboError, ValueError):
    """Malformed code, scheme, or simulation configuration."""


class UsageError(QsturboError, ValueError):
    """Arguments that violate an operation's preconditions (lengths, ranges)."""


class NumericalInputError(QsturboError, ValueError):
    """Non-finite values handed to a decoder."""


class SearchFailure(QsturboError):
    """Threshold search window does not bracket the waterfall.

    Carries the endpoint measurements so callers can widen the window.
    """

    def __init__(self, message, lo_db, hi_db, ber_lo, ber_hi):
        super().__init__(message)
        self.lo_db = lo_db
        self.hi_db = hi_db
        self.ber_lo = ber_lo
        self.ber_hi = ber_hi
