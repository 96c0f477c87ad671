"""
Subshifts of finite type, admissible words, periodic orbits and locally constant
(window) cocycles over them.

A point x of the two-sided shift is only ever seen through finite words: a
window cocycle reads x_0 .. x_{w-1}, so an n-step product A^n(x) is determined
by the admissible word x_0 .. x_{n+w-2}.
"""
import logging
from dataclasses import dataclass
from types import MappingProxyType

import numpy as np
import scipy.linalg

from linalg_core import Operator
from utils import DomainError, as_word, check_positive, check_positive_int, word_label

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Subshift:
    """
    Two-sided subshift of finite type on symbols 0..q-1.

    transition[a, b] = 1 iff b may follow a. Every symbol needs a successor and a
    predecessor so that each admissible word extends to a bi-infinite point.
    """

    transition: np.ndarray

    def __post_init__(self):
        T = np.asarray(self.transition)
        if T.ndim != 2 or T.shape[0] != T.shape[1] or T.shape[0] < 1:
            raise DomainError(f"transition must be a non-empty square matrix, got shape {T.shape}")
        if not np.all((T == 0) | (T == 1)):
            raise DomainError("transition entries must be 0 or 1")
        T = T.astype(np.int64)
        dead_out = np.flatnonzero(T.sum(axis=1) == 0)
        dead_in = np.flatnonzero(T.sum(axis=0) == 0)
        if len(dead_out):
            raise DomainError(f"symbols without successor: {dead_out.tolist()}")
        if len(dead_in):
            raise DomainError(f"symbols without predecessor: {dead_in.tolist()}")
        T.setflags(write=False)
        object.__setattr__(self, "transition", T)

    @classmethod
    def full(cls, q):
        q = check_positive_int("q", q)
        return cls(np.ones((q, q), dtype=np.int64))

    @classmethod
    def golden_mean(cls):
        """Binary shift forbidding the word 11."""
        return cls(np.array([[1, 1], [1, 0]]))

    @property
    def alphabet_size(self):
        return self.transition.shape[0]

    def allows(self, a, b):
        return bool(self.transition[a, b])

    def __eq__(self, other):
        return isinstance(other, Subshift) and np.array_equal(self.transition, other.transition)

    def __hash__(self):
        return hash(self.transition.tobytes())


@dataclass(frozen=True)
class PeriodicOrbit:
    """Cyclic word p with f^k(p) = p; the last -> first transition must be admissible too."""

    cycle: tuple

    def __post_init__(self):
        cycle = as_word(self.cycle)
        if len(cycle) < 1:
            raise DomainError("a periodic orbit needs period >= 1")
        object.__setattr__(self, "cycle", cycle)

    @property
    def period(self):
        return len(self.cycle)

    @property
    def label(self):
        return word_label(self.cycle)

    def rotation(self, r):
        r %= self.period
        return PeriodicOrbit(self.cycle[r:] + self.cycle[:r])

    @property
    def is_primitive(self):
        k = self.period
        return not any(k % r == 0 and self.rotation(r).cycle == self.cycle for r in range(1, k))

    def canonical(self):
        """Lexicographically least rotation."""
        return min((self.rotation(r) for r in range(self.period)), key=lambda p: p.cycle)


def is_admissible(S, word):
    word = as_word(word)
    q = S.alphabet_size
    if any(not 0 <= a < q for a in word):
        return False
    return all(S.allows(a, b) for a, b in zip(word, word[1:]))


def is_cyclically_admissible(S, orbit):
    cycle = orbit.cycle
    return is_admissible(S, cycle) and S.allows(cycle[-1], cycle[0])


def extend_words(S, words):
    """
    Appends every allowed successor to each word of a (N, L) array.

    Children of one parent stay together and in symbol order, so a lexicographically
    sorted input gives a lexicographically sorted output.
    Returns:
        (children of shape (N', L+1), index of each child's parent)
    """
    q = S.alphabet_size
    parent = np.repeat(np.arange(len(words)), q)
    successor = np.tile(np.arange(q), len(words))
    allowed = S.transition[words[parent, -1], successor] == 1
    parent, successor = parent[allowed], successor[allowed]
    return np.column_stack([words[parent], successor]), parent


def admissible_word_array(S, n):
    """All admissible words of length n >= 1 as rows of an int array, in lexicographic order."""
    words = np.arange(S.alphabet_size).reshape(-1, 1)
    for _ in range(n - 1):
        words, _ = extend_words(S, words)
    return words


def admissible_words(S, n):
    """Streams the admissible words of length n, each once, in lexicographic order."""
    n = check_positive_int("n", n)
    for row in admissible_word_array(S, n):
        yield tuple(int(a) for a in row)


def periodic_orbits(S, k, distinct=False):
    """
    Streams the cyclically admissible words of length k, in bijection with Fix(f^k).

    With distinct=True only primitive cycles are produced, one per rotation class
    (its least rotation); their count is no longer trace(transition^k).
    """
    k = check_positive_int("k", k)
    words = admissible_word_array(S, k)
    closing = S.transition[words[:, -1], words[:, 0]] == 1
    for row in words[closing]:
        orbit = PeriodicOrbit(tuple(int(a) for a in row))
        if distinct and (not orbit.is_primitive or orbit.canonical() != orbit):
            continue
        yield orbit


def loop_trajectory(orbit, length):
    """The word of the given length read along the periodic point p."""
    reps = -(-length // orbit.period)
    return (orbit.cycle * reps)[:length]


@dataclass(frozen=True, eq=False)
class WindowCocycle:
    """
    Locally constant operator cocycle A(x) = table[x_0 .. x_{w-1}] over a subshift.

    Locally constant maps are Hoelder for every exponent; alpha is carried as
    metadata for the Hoelder norm and the continuity probe.
    """

    subshift: Subshift
    table: dict
    window: int = 1
    alpha: float = 1.0

    def __post_init__(self):
        S = self.subshift
        w = check_positive_int("window", self.window)
        alpha = check_positive("alpha", self.alpha)

        table = {}
        for key, value in self.table.items():
            word = as_word(key)
            if len(word) != w or not is_admissible(S, word):
                raise DomainError(f"table key {word_label(word)!r} is not an admissible {w}-word")
            table[word] = value if isinstance(value, Operator) else Operator(value)

        expected = list(admissible_words(S, w))
        missing = [word_label(u) for u in expected if u not in table]
        if missing:
            raise DomainError(f"no operator for admissible window(s) {missing}")
        dims = {T.dim for T in table.values()}
        if len(dims) != 1:
            raise DomainError(f"operators must share one dimension, got {sorted(dims)}")

        ordered = {u: table[u] for u in expected}
        stack = np.stack([T.entries for T in ordered.values()])
        stack.setflags(write=False)
        q = S.alphabet_size
        lookup = np.full(q ** w, -1, dtype=np.int64)
        for i, u in enumerate(expected):
            lookup[self._code(u, q)] = i

        object.__setattr__(self, "window", w)
        object.__setattr__(self, "alpha", alpha)
        object.__setattr__(self, "table", MappingProxyType(ordered))
        object.__setattr__(self, "_stack", stack)
        object.__setattr__(self, "_lookup", lookup)

    @staticmethod
    def _code(word, q):
        code = 0
        for a in word:
            code = code * q + a
        return code

    @classmethod
    def constant(cls, S, T, window=1, alpha=1.0):
        return cls(S, {u: T for u in admissible_words(S, window)}, window=window, alpha=alpha)

    @classmethod
    def from_matrices(cls, matrices, alpha=1.0):
        """Full shift on len(matrices) symbols with A(x) = matrices[x_0]."""
        S = Subshift.full(len(matrices))
        return cls(S, {(i,): M for i, M in enumerate(matrices)}, window=1, alpha=alpha)

    @property
    def dim(self):
        return self._stack.shape[1]

    @property
    def stack(self):
        """Operators of all admissible windows, in lexicographic window order."""
        return self._stack

    def window_indices(self, windows):
        """Row indices into stack for a (N, w) array of windows."""
        windows = np.asarray(windows, dtype=np.int64)
        q = self.subshift.alphabet_size
        codes = np.zeros(len(windows), dtype=np.int64)
        for i in range(self.window):
            codes = codes * q + windows[:, i]
        return self._lookup[codes]

    def operator(self, window_word):
        try:
            return self.table[tuple(window_word)].entries
        except KeyError:
            raise DomainError(f"window {word_label(window_word)!r} is not admissible") from None

    def is_compatible(self, other):
        return (
            self.subshift == other.subshift
            and self.window == other.window
            and self.dim == other.dim
        )

    def check_compatible(self, other):
        if not self.is_compatible(other):
            raise DomainError(
                "cocycles differ in subshift, window or dimension "
                f"(window {self.window} vs {other.window}, dim {self.dim} vs {other.dim})"
            )

    def perturbed(self, direction, eps):
        """The cocycle x -> A(x) + eps B(x)."""
        self.check_compatible(direction)
        table = {u: T.entries + eps * direction.table[u].entries for u, T in self.table.items()}
        return WindowCocycle(self.subshift, table, window=self.window, alpha=self.alpha)

    def scaled(self, c):
        table = {u: c * T.entries for u, T in self.table.items()}
        return WindowCocycle(self.subshift, table, window=self.window, alpha=self.alpha)

    def widened(self):
        """Re-encodes as a window-(w+1) cocycle that ignores the extra coordinate."""
        table = {u: self.table[u[:-1]] for u in admissible_words(self.subshift, self.window + 1)}
        return WindowCocycle(self.subshift, table, window=self.window + 1, alpha=self.alpha)


def cocycle_product(A, word):
    """
    A^n(x) = A(f^{n-1}x) ... A(fx) A(x) for the point x read from word.

    The word has length n + w - 1; factor i reads the window starting at
    position i, and the factor for position 0 acts first. n = 0 gives Id.
    Raises:
        DomainError: if the word is inadmissible or shorter than w - 1.
    """
    word = as_word(word)
    n = len(word) - A.window + 1
    if n < 0:
        raise DomainError(f"word of length {len(word)} is shorter than window - 1 = {A.window - 1}")
    if not is_admissible(A.subshift, word):
        raise DomainError(f"word {word_label(word)!r} is not admissible")
    product = np.eye(A.dim)
    for i in range(n):
        product = A.operator(word[i:i + A.window]) @ product
    return Operator(product)


def cycle_windows(A, orbit):
    """The k windows read around a periodic orbit, wrapping cyclically."""
    k = orbit.period
    reps = 1 + -(-(A.window - 1) // k)
    extended = orbit.cycle * reps
    return [extended[i:i + A.window] for i in range(k)]


def cycle_product(A, orbit):
    """
    A^k(p) for the periodic point p with the given cycle.

    Raises:
        DomainError: if the cycle is not cyclically admissible.
    """
    if not is_cyclically_admissible(A.subshift, orbit):
        raise DomainError(f"cycle {orbit.label!r} is not cyclically admissible")
    product = np.eye(A.dim)
    for u in cycle_windows(A, orbit):
        product = A.operator(u) @ product
    return Operator(product)


def holder_norm(A, alpha):
    """
    sup_x ||A(x)|| + sup_{x != y} ||A(x) - A(y)|| / d(x, y)^alpha for d(x, y) = 2^-sep.

    Points whose windows first differ at index sep can be chosen to agree on every
    other coordinate up to sep, so the supremum is a finite maximum over window
    pairs with ratio ||A(u) - A(v)|| 2^(alpha sep).
    """
    alpha = check_positive("alpha", alpha)
    words = list(A.table)
    sup_norm = max(scipy.linalg.norm(A.table[u].entries, 2) for u in words)
    seminorm = 0.0
    for i, u in enumerate(words):
        for v in words[i + 1:]:
            sep = next(j for j, (a, b) in enumerate(zip(u, v)) if a != b)
            diff = scipy.linalg.norm(A.table[u].entries - A.table[v].entries, 2)
            seminorm = max(seminorm, diff * 2.0 ** (alpha * sep))
    return float(sup_norm + seminorm)


def uniform_weights(S):
    """Row-normalized transition matrix: the maximal-support Markov chain on S."""
    T = S.transition.astype(float)
    return T / T.sum(axis=1, keepdims=True)


def check_weights(S, weights):
    W = np.asarray(weights, dtype=float)
    q = S.alphabet_size
    if W.shape != (q, q):
        raise DomainError(f"weights must have shape {(q, q)}, got {W.shape}")
    if not np.all(np.isfinite(W)) or np.any(W < 0):
        raise DomainError("weights must be finite and non-negative")
    if not np.allclose(W.sum(axis=1), 1.0, rtol=0, atol=1e-9):
        raise DomainError("weights must be row-stochastic")
    if not np.array_equal(W > 0, S.transition == 1):
        raise DomainError("weights must vanish exactly where the transition matrix does")
    return W


def stationary_distribution(weights):
    """Left eigenvector of the stochastic matrix for eigenvalue 1, normalized to a distribution."""
    W = np.asarray(weights, dtype=float)
    values, vectors = scipy.linalg.eig(W.T)
    i = int(np.argmin(np.abs(values - 1.0)))
    pi = np.abs(np.real(vectors[:, i]))
    return pi / pi.sum()


def sample_trajectory(S, weights, n, seed):
    """
    Samples an admissible word of length n from the stationary Markov measure.

    Args:
        S: Subshift.
        weights: Row-stochastic matrix, positive exactly where S allows a transition.
        n: Word length.
        seed: Anything np.random.default_rng accepts; fixes the output.
    Returns:
        Tuple of symbols.
    """
    W = check_weights(S, weights)
    n = check_positive_int("n", n)
    rng = np.random.default_rng(seed)
    pi = stationary_distribution(W)
    cumulative = np.cumsum(W, axis=1)
    last_allowed = [int(np.flatnonzero(row > 0)[-1]) for row in W]

    draws = rng.random(n)
    start = int(np.searchsorted(np.cumsum(pi), draws[0], side="right"))
    symbols = [min(start, int(np.flatnonzero(pi > 0)[-1]))]
    for u in draws[1:]:
        a = symbols[-1]
        b = int(np.searchsorted(cumulative[a], u, side="right"))
        symbols.append(min(b, last_allowed[a]))
    return tuple(symbols)
