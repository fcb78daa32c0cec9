"""Exception types shared across the package.

The CLI maps these onto exit codes: configuration problems exit with 2,
numerical failures with 3.
"""


class DimensionMismatchError(ValueError):
    """Operand shapes are not conformable for the requested operation."""


class FileFormatError(ValueError):
    """A tensor file is malformed (bad magic, header, or payload length)."""


class NonRealResultError(ArithmeticError):
    """An inverse transform left an imaginary residue above tolerance."""


class ParameterError(ValueError):
    """Regularization or step parameters violate a required condition."""


class DegenerateRowError(ValueError):
    """A selected row block of the operator has zero Frobenius norm."""


class DivergenceError(RuntimeError):
    """An iterate became non-finite during a solve."""


class UndefinedMetricError(ValueError):
    """A quality metric is undefined for the given inputs (zero reference)."""


class ConfigError(ValueError):
    """An experiment configuration is invalid."""
