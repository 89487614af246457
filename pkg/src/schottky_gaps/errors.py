"""Exception hierarchy. Each class carries the CLI exit code it maps to."""


class SchottkyError(Exception):
    exit_code = 1


class ConfigError(SchottkyError, ValueError):
    """Invalid group or run configuration."""

    exit_code = 3


class GeometryDomainError(SchottkyError, ValueError):
    """A geometric operation was called outside its domain of validity."""

    exit_code = 4


class InvariantError(SchottkyError, RuntimeError):
    """A numeric invariant was violated during a computation."""

    exit_code = 4


class GuardError(SchottkyError, ValueError):
    """A sampling guard (size or scale separation) failed."""

    exit_code = 4


class OutputError(SchottkyError, OSError):
    """Reading or writing an artifact failed; the message names the path."""

    exit_code = 1


class UsageError(SchottkyError):
    """Command line arguments are inconsistent."""

    exit_code = 2
