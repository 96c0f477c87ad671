import math

import numpy as np


class DomainError(ValueError):
    """Raised when an argument lies outside the domain of an operation."""


class NonMonotoneError(DomainError):
    """Raised when sampled radii are not monotone where monotonicity is required."""


class NumericError(ArithmeticError):
    """Raised when a LAPACK routine fails; carries a diagnostic string."""

    def __init__(self, message, diagnostic=None):
        super().__init__(message if diagnostic is None else f"{message} ({diagnostic})")
        self.diagnostic = diagnostic


class InternalConsistencyError(RuntimeError):
    """Raised when computed bounds contradict each other (a numerical bug, not a math failure)."""


def check_positive(name, value):
    """Returns value as a float, raising DomainError unless it is a finite positive number."""
    value = float(value)
    if not math.isfinite(value) or value <= 0:
        raise DomainError(f"{name} must be a finite positive number, got {value}")
    return value


def check_positive_int(name, value):
    if isinstance(value, bool) or int(value) != value or value < 1:
        raise DomainError(f"{name} must be a positive integer, got {value}")
    return int(value)


def split_s(s):
    """
    Splits s into its integer part and fractional part.
    Args:
        s: A positive real.
    Returns:
        (floor(s), s - floor(s)) with the fractional part in [0, 1).
    """
    k = math.floor(s)
    return k, s - k


def is_integer_s(s):
    return float(s).is_integer()


def safe_log(x):
    """Natural log with log(0) = -inf and no floating point warning."""
    if x == 0:
        return -math.inf
    return math.log(x)


def safe_exp(x):
    if x == -math.inf:
        return 0.0
    return math.exp(x)


def as_word(symbols):
    """Normalizes a sequence of symbols (ints or a digit string) to a tuple of ints."""
    if isinstance(symbols, str):
        return tuple(int(c) for c in symbols)
    return tuple(int(c) for c in np.asarray(symbols, dtype=int).reshape(-1))


def word_label(word):
    """Digit-string label of a word, e.g. (0, 1) -> '01'."""
    return "".join(str(int(c)) for c in word)
