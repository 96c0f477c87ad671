"""
Finite-rank truncations of compact operators on sequence space.

Two closed-form families are modeled: diagonal operators e_i -> a_i e_i and
weighted shifts e_i -> a_i e_{i+1}, with coefficients a_i = c q^i (geometric) or
a_i = c i^-p (power). Both tend to zero, which is exactly compactness.
"""
import logging
from dataclasses import dataclass

import numpy as np

from linalg_core import Operator, rho_s
from utils import DomainError, check_positive, check_positive_int

log = logging.getLogger(__name__)

KINDS = ("diagonal", "weighted-shift")
FAMILIES = ("geometric", "power")


@dataclass(frozen=True)
class CompactModel:
    kind: str
    family: str
    c: float
    q: float = None
    p: float = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.family not in FAMILIES:
            raise DomainError(f"family must be one of {FAMILIES}, got {self.family!r}")
        if not np.isfinite(self.c):
            raise DomainError(f"c must be finite, got {self.c}")
        if self.family == "geometric":
            if self.q is None or not abs(self.q) < 1:
                raise DomainError(f"geometric family needs |q| < 1, got q={self.q}")
        elif self.p is None or not self.p > 0:
            raise DomainError(f"power family needs p > 0, got p={self.p}")

    @classmethod
    def geometric(cls, kind, c, q):
        return cls(kind=kind, family="geometric", c=float(c), q=float(q))

    @classmethod
    def power(cls, kind, c, p):
        return cls(kind=kind, family="power", c=float(c), p=float(p))

    def coefficient(self, i):
        """a_i for i >= 1."""
        i = check_positive_int("i", i)
        if self.family == "geometric":
            return self.c * self.q ** i
        return self.c * i ** -self.p

    def tail_bound(self, i):
        """sup_{j >= i} |a_j|; both families have non-increasing |a_j|."""
        i = check_positive_int("i", i)
        if self.family == "geometric":
            return abs(self.c) * abs(self.q) ** i
        return abs(self.c) * i ** -self.p


@dataclass(frozen=True)
class Truncation:
    """Leading m x m section of a compact model and its operator-norm error bound."""

    rank: int
    matrix: Operator
    error: float

    def embedded(self, size):
        """The section zero-padded to size x size, for comparing sections of different rank."""
        if size < self.rank:
            raise DomainError(f"cannot embed rank {self.rank} into size {size}")
        out = np.zeros((size, size))
        out[: self.rank, : self.rank] = self.matrix.entries
        return out


@dataclass(frozen=True)
class ConvergenceRow:
    rank: int
    rho_s: float
    error_bound: float


def truncate(model, m):
    """
    Finite section of rank m.

    Diagonal models give diag(a_1..a_m) with error sup_{j > m}|a_j|; weighted shifts
    put a_i at (i+1, i) for i < m with error sup_{j >= m}|a_j|, the largest dropped
    weight.
    """
    m = check_positive_int("m", m)
    coefficients = np.array([model.coefficient(i) for i in range(1, m + 1)])
    if model.kind == "diagonal":
        matrix = np.diag(coefficients)
        error = model.tail_bound(m + 1)
    else:
        matrix = np.diag(coefficients[: m - 1], k=-1)
        error = model.tail_bound(m)
    return Truncation(rank=m, matrix=Operator(matrix), error=float(error))


def spectral_convergence(model, s, ranks):
    """
    rho_s of successive finite sections together with their error bounds.

    Args:
        model: CompactModel.
        s: Positive real.
        ranks: Non-empty strictly increasing ranks.
    Returns:
        List of ConvergenceRow, one per rank.
    """
    s = check_positive("s", s)
    ranks = [check_positive_int("rank", m) for m in ranks]
    if not ranks:
        raise DomainError("ranks must be non-empty")
    if any(b <= a for a, b in zip(ranks, ranks[1:])):
        raise DomainError(f"ranks must be strictly increasing, got {ranks}")

    rows = []
    for m in ranks:
        section = truncate(model, m)
        rows.append(ConvergenceRow(rank=m, rho_s=rho_s(section.matrix, s), error_bound=section.error))
        log.debug("rank %d: rho_%g = %.17g, error <= %.3g", m, s, rows[-1].rho_s, section.error)
    return rows
