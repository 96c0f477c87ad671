"""
Brackets for the s-joint spectral radius of a window cocycle, and the periodic,
sampled and perturbative quantities that surround it.

The upper end is inf_m (sup_w V_s(A^m(w)))^(1/m) over admissible words, which is
certified by subadditivity of m -> log sup V_s. The lower end is the maximum of
rho_s(A^k(p))^(1/k) over periodic points of period at most K.
"""
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from dynamics import (
    admissible_word_array,
    cycle_product,
    cycle_windows,
    extend_words,
    holder_norm,
    is_admissible,
    periodic_orbits,
    sample_trajectory,
)
from linalg_core import (
    batched_volume_growth,
    eigen_moduli,
    r_s,
    rho_s,
    running_log_volume_growth,
)
from utils import (
    DomainError,
    InternalConsistencyError,
    NonMonotoneError,
    as_word,
    check_positive,
    check_positive_int,
    is_integer_s,
    safe_exp,
    safe_log,
    split_s,
)

log = logging.getLogger(__name__)

SANDWICH_RTOL = 1e-9
PRUNE_SLACK = 1e-12
# Words held per level of the depth-first upper sweep.
BLOCK_WORDS = 1 << 14


class Estimate(NamedTuple):
    value: float
    witness: tuple


@dataclass(frozen=True)
class RadiusBracket:
    """[lower, upper] around the s-joint spectral radius, with the words that realize each end."""

    s: float
    depth: int
    horizon: int
    lower: float
    lower_witness: tuple
    upper: float
    upper_witness: tuple

    @property
    def gap(self):
        return self.upper - self.lower

    @property
    def midpoint(self):
        return 0.5 * (self.lower + self.upper)


@dataclass(frozen=True)
class ContinuityEntry:
    eps: float
    bracket: RadiusBracket
    drift: float
    holder_distance: float


@dataclass(frozen=True)
class ContinuityReport:
    reference: RadiusBracket
    entries: tuple


@dataclass(frozen=True)
class LevelInterval:
    s_low: float
    s_high: float
    bracket_low: RadiusBracket
    bracket_high: RadiusBracket


class GrowthRate(NamedTuple):
    mean: float
    stderr: float
    n: int
    samples: int


def _check_base(A, S):
    if A.subshift != S:
        raise DomainError("cocycle is defined over a different subshift")


def _sweep_depths(A, S, s, n, words, products, m, sups):
    """Records the largest V_s at depth m and below, one block of at most BLOCK_WORDS words at a time."""
    growth = batched_volume_growth(products, s)
    i = int(np.argmax(growth))
    if sups[m - 1] is None or growth[i] > sups[m - 1][0]:
        sups[m - 1] = (float(growth[i]), tuple(int(a) for a in words[i]))
    if m == n:
        return
    w = A.window
    step = max(1, BLOCK_WORDS // S.alphabet_size)
    for start in range(0, len(words), step):
        children, parent = extend_words(S, words[start:start + step])
        child_products = A.stack[A.window_indices(children[:, -w:])] @ products[start:start + step][parent]
        _sweep_depths(A, S, s, n, children, child_products, m + 1, sups)


def upper_estimate(A, S, s, n):
    """
    min over m <= n of (sup over admissible (m+w-1)-words of V_s(A^m))^(1/m).

    Words are extended depth-first in lexicographic blocks, each word reusing its
    parent's product, so memory stays bounded while time grows with the word count.
    Ties go to the lexicographically smallest word and the smallest m.
    Returns:
        Estimate(value, witness word at the minimizing depth).
    """
    _check_base(A, S)
    s = check_positive("s", s)
    n = check_positive_int("n", n)

    words = admissible_word_array(S, A.window)
    sups = [None] * n
    _sweep_depths(A, S, s, n, words, A.stack[A.window_indices(words)], 1, sups)

    best = None
    for m, (growth, witness) in enumerate(sups, start=1):
        value = growth ** (1.0 / m)
        log.debug("depth %d: sup V_s = %.6g, root = %.17g", m, growth, value)
        if best is None or value < best.value:
            best = Estimate(value, witness)
    return best


def orbit_contribution(P, s, k):
    """
    The per-step value of a period-k product P at s.

    Integer s gives rho_s(P)^(1/k); fractional s combines the two neighbouring
    integer radii, exp[(s - [s])/k r_{[s]+1}(P) + (1 - s + [s])/k r_{[s]}(P)] with r_0 = 0.
    """
    if is_integer_s(s):
        return rho_s(P, s) ** (1.0 / k)
    floor, frac = split_s(s)
    upper_log = r_s(P, floor + 1)
    lower_log = r_s(P, floor) if floor > 0 else 0.0
    return safe_exp(frac / k * upper_log + (1.0 - frac) / k * lower_log)


def lower_estimate(A, S, s, K, prune=False):
    """
    max over periods k <= K and periodic points p of the orbit contribution of A^k(p).

    With prune=True a cycle is skipped when the product of its per-window V_s,
    which dominates V_s(A^k(p)) >= rho_s(A^k(p)), cannot beat the incumbent. The
    result is the same either way.
    Returns:
        Estimate(value, witness cycle); ties keep the shortest, then lexicographically smallest cycle.
    """
    _check_base(A, S)
    s = check_positive("s", s)
    K = check_positive_int("K", K)
    if prune:
        window_growth = batched_volume_growth(A.stack, s)

    best = None
    skipped = 0
    for k in range(1, K + 1):
        for orbit in periodic_orbits(S, k):
            if prune and best is not None:
                idx = A.window_indices(cycle_windows(A, orbit))
                bound = float(np.prod(window_growth[idx])) ** (1.0 / k)
                if bound * (1 + PRUNE_SLACK) < best.value:
                    skipped += 1
                    continue
            value = orbit_contribution(cycle_product(A, orbit), s, k)
            if best is None or value > best.value:
                best = Estimate(value, orbit.cycle)
    if prune:
        log.debug("lower estimate pruned %d cycles", skipped)
    return best


def bracket(A, S, s, n, K, prune=False):
    """
    Raises:
        InternalConsistencyError: if the lower end exceeds the upper end beyond rounding.
    """
    upper = upper_estimate(A, S, s, n)
    lower = lower_estimate(A, S, s, K, prune=prune)
    if lower.value > upper.value * (1 + SANDWICH_RTOL):
        raise InternalConsistencyError(
            f"lower bound {lower.value!r} exceeds upper bound {upper.value!r} at s={s}, n={n}, K={K}"
        )
    return RadiusBracket(
        s=float(s),
        depth=int(n),
        horizon=int(K),
        lower=lower.value,
        lower_witness=lower.witness,
        upper=upper.value,
        upper_witness=upper.witness,
    )


def corollary_estimate(A, S, s, n, K):
    """sup over k <= K and p in Fix(f^k) of rho_s((A^k(p))^n)^(1/(nk)); independent of n in exact arithmetic."""
    _check_base(A, S)
    s = check_positive("s", s)
    n = check_positive_int("n", n)
    K = check_positive_int("K", K)
    best = None
    for k in range(1, K + 1):
        for orbit in periodic_orbits(S, k):
            P = cycle_product(A, orbit).entries
            value = rho_s(np.linalg.matrix_power(P, n), s) ** (1.0 / (n * k))
            if best is None or value > best:
                best = value
    return best


def lyapunov_sum_periodic(A, orbit, s):
    """(1/k) r_s(A^k(p)): the sum of the top s Lyapunov exponents of the orbit measure."""
    s = check_positive("s", s)
    return r_s(cycle_product(A, orbit), s) / orbit.period


def lyapunov_spectrum_periodic(A, orbit):
    """All d Lyapunov exponents of the orbit measure, with multiplicity, non-increasing."""
    moduli = eigen_moduli(cycle_product(A, orbit)).flat
    return np.array([safe_log(float(m)) / orbit.period for m in moduli])


def kingman_estimate(A, trajectory, s, checkpoints):
    """
    Subadditive averages (1/n) log V_s(A^n(x)) along one admissible word.

    The product is accumulated on exterior powers (see running_log_volume_growth),
    so every V_k stays accurate however far the singular values spread.
    Args:
        A: WindowCocycle.
        trajectory: Admissible word with at least max(checkpoints) + w - 1 symbols.
        s: Positive real.
        checkpoints: Positive step counts.
    Returns:
        List of (n, average) sorted by n; -inf once the product vanishes.
    """
    s = check_positive("s", s)
    word = as_word(trajectory)
    checkpoints = sorted({check_positive_int("checkpoint", n) for n in checkpoints})
    if not checkpoints:
        raise DomainError("checkpoints must be non-empty")
    steps = len(word) - A.window + 1
    if steps < checkpoints[-1]:
        raise DomainError(f"trajectory supports {max(steps, 0)} steps, checkpoint {checkpoints[-1]} requested")
    if not is_admissible(A.subshift, word):
        raise DomainError("trajectory is not admissible")

    windows = np.lib.stride_tricks.sliding_window_view(np.array(word, dtype=int), A.window)[:checkpoints[-1]]
    logs = running_log_volume_growth(A.stack, A.window_indices(windows), s, checkpoints)
    return [(n, value / n) for n, value in zip(checkpoints, logs)]


def markov_growth_rate(A, S, weights, s, n, samples, seed):
    """
    Monte-Carlo mean of (1/n) log V_s(A^n) under the stationary Markov measure.

    Each sample draws its own trajectory from a spawned child of one SeedSequence,
    so the result depends only on seed. The mean bounds nothing by itself; its
    n -> infinity limit is the exponent sum of the measure, at most log of the radius.
    Returns:
        GrowthRate(mean, standard error, n, samples).
    """
    _check_base(A, S)
    n = check_positive_int("n", n)
    samples = check_positive_int("samples", samples)
    children = np.random.SeedSequence(seed).spawn(samples)
    values = np.array([
        kingman_estimate(A, sample_trajectory(S, weights, n + A.window - 1, child), s, [n])[0][1]
        for child in children
    ])
    if not np.all(np.isfinite(values)):
        return GrowthRate(-math.inf, math.nan, n, samples)
    stderr = float(values.std(ddof=1) / math.sqrt(samples)) if samples > 1 else math.nan
    return GrowthRate(float(values.mean()), stderr, n, samples)


def continuity_probe(A, B, alpha, s, n, K, epsilons):
    """
    Brackets along the segment A + eps B for a decreasing sequence of eps.

    Each entry records the midpoint drift from the unperturbed bracket and the
    Hoelder distance eps ||B||_alpha between the two cocycles.
    """
    A.check_compatible(B)
    epsilons = [check_positive("eps", e) for e in epsilons]
    if not epsilons:
        raise DomainError("epsilons must be non-empty")
    if any(b >= a for a, b in zip(epsilons, epsilons[1:])):
        raise DomainError(f"epsilons must be strictly decreasing, got {epsilons}")
    direction_norm = holder_norm(B, alpha)

    S = A.subshift
    reference = bracket(A, S, s, n, K)
    entries = []
    for eps in epsilons:
        b = bracket(A.perturbed(B, eps), S, s, n, K)
        entries.append(ContinuityEntry(
            eps=eps,
            bracket=b,
            drift=abs(b.midpoint - reference.midpoint),
            holder_distance=eps * direction_norm,
        ))
        log.info("eps=%g: midpoint %.12g, drift %.3g", eps, b.midpoint, entries[-1].drift)
    return ContinuityReport(reference=reference, entries=tuple(entries))


def find_s_for_level(A, S, theta, n, K, s_min, s_max, tolerance=1e-6):
    """
    Bisection for the s where the bracket midpoint crosses theta.

    Args:
        theta: Positive target level.
        s_min, s_max: Search interval; the midpoint must be >= theta at s_min and <= theta at s_max.
        tolerance: Width at which bisection stops.
    Returns:
        LevelInterval with the final interval and the brackets at its ends.
    Raises:
        DomainError: if theta is not crossed between s_min and s_max.
        NonMonotoneError: if a sampled midpoint leaves the range of its neighbours.
    """
    theta = check_positive("theta", theta)
    tolerance = check_positive("tolerance", tolerance)
    s_min = check_positive("s_min", s_min)
    s_max = check_positive("s_max", s_max)
    if s_min >= s_max:
        raise DomainError(f"s_min must be below s_max, got {s_min} >= {s_max}")

    lo, hi = s_min, s_max
    lo_b, hi_b = bracket(A, S, lo, n, K), bracket(A, S, hi, n, K)
    if not lo_b.midpoint >= theta >= hi_b.midpoint:
        raise DomainError(
            f"level {theta} is not crossed: midpoint {lo_b.midpoint!r} at s={lo}, {hi_b.midpoint!r} at s={hi}"
        )
    while hi - lo > tolerance:
        mid = 0.5 * (lo + hi)
        b = bracket(A, S, mid, n, K)
        slack = SANDWICH_RTOL * lo_b.midpoint
        if not hi_b.midpoint - slack <= b.midpoint <= lo_b.midpoint + slack:
            raise NonMonotoneError(
                f"midpoint {b.midpoint!r} at s={mid} lies outside [{hi_b.midpoint!r}, {lo_b.midpoint!r}]"
            )
        if b.midpoint >= theta:
            lo, lo_b = mid, b
        else:
            hi, hi_b = mid, b
    log.debug("level %g crossed in [%.12g, %.12g]", theta, lo, hi)
    return LevelInterval(s_low=lo, s_high=hi, bracket_low=lo_b, bracket_high=hi_b)
