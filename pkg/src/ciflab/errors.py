"""Exception types shared across the package.

Everything user-facing derives from ValueError or RuntimeError so callers
can catch broadly; the CLI maps them to exit code 1.
"""


class InvalidParameterError(ValueError):
    """A parameter is out of range or of the wrong shape."""


class InvalidFunctionError(ValueError):
    """A sampled function is unusable (non-finite samples, wrong domain)."""


class ContractViolationError(ValueError):
    """A documented precondition of an operation was not met."""


class BuildFailureError(RuntimeError):
    """An operator build produced a matrix violating its structural contract."""


class UnsupportedDimensionError(InvalidParameterError):
    """Torus dimension outside the supported range {1, 2, 3}."""
