"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A parameter violates its documented precondition."""


class DegenerateGramError(RuntimeError):
    """An empirical or asymptotic Gram matrix is not positive definite."""


class StreamFormatError(ValueError):
    """An event-stream file does not follow the expected format."""
