"""Exception types mapped to CLI exit codes (usage=1, data=2, numerical=3)."""


class UsageError(Exception):
    """Bad command line or config file contents."""


class DataError(Exception):
    """Malformed or mismatched input data (files, schemas, labels)."""


class NumericalError(Exception):
    """Non-finite values or divergence during computation."""
