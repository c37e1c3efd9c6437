"""Exception taxonomy, mirrored by the CLI exit codes."""


class PriorfitError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(PriorfitError):
    """Invalid parameters or configuration (rejected before any heavy work)."""


class DataError(PriorfitError):
    """Malformed file, corrupt payload, or inconsistent data contents."""


class NumericalError(PriorfitError):
    """Non-finite values encountered where the computation cannot continue."""
