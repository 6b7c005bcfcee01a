"""Exception types shared across the package; the CLI maps them to exit codes."""


class ConfigError(ValueError):
    """Invalid or inconsistent configuration (exit code 1)."""


class NumericalAbort(RuntimeError):
    """Training cannot continue because parameters became non-finite (exit code 2)."""


class SizeGuardError(RuntimeError):
    """A request exceeds a resource guard such as the enumeration limit (exit code 3)."""


class ConvergenceError(RuntimeError):
    """An iterative solver ran out of its iteration budget."""
