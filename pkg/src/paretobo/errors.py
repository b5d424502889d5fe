"""Exception types shared across the package."""


class ParetoBOError(Exception):
    """Base class for all package errors."""


class BoundsError(ParetoBOError, ValueError):
    """A value fell outside its dimension's bounds or the unit interval."""


class ConfigError(ParetoBOError, ValueError):
    """Invalid configuration (bad dimension spec, bad budget, unknown id)."""


class DataError(ParetoBOError, ValueError):
    """Input data violates a precondition (non-finite targets, too few rows)."""


class NumericError(ParetoBOError, ValueError):
    """Non-finite values reached a numeric kernel."""


class ModelError(ParetoBOError, RuntimeError):
    """Model fitting failed beyond recoverable safeguards."""


class UsageError(ParetoBOError, ValueError):
    """An operation was called in a way its contract forbids."""


class HarnessError(ParetoBOError, RuntimeError):
    """Experiment harness bookkeeping failure (missing traces, mismatched runs)."""


class OutOfTableError(ParetoBOError, LookupError):
    """A tabular black-box was queried outside its recorded rows."""
