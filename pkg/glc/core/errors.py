class GLCError(Exception):
    """Base class for expected failures; carries the process exit code."""

    exit_code: int = 1


class UsageError(GLCError):
    exit_code = 2


class DataError(GLCError):
    exit_code = 3


class ModelError(DataError):
    """Shape mismatch or unsupported loss spec inside the network layer."""


class NumericError(GLCError):
    exit_code = 4
