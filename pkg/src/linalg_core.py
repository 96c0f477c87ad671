"""
Spectral primitives on finite-dimensional operators.

All subspace suprema are taken in Euclidean coordinates, where the Gelfand and
Kolmogorov numbers c_k(T), F_k(T) both equal the k-th singular value and the
volume growth V_k(T) is the product of the top k singular values.
"""
import itertools
import math
import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from utils import (
    DomainError,
    NumericError,
    check_positive,
    check_positive_int,
    safe_log,
    split_s,
)

log = logging.getLogger(__name__)

# Eigenvalue moduli closer than this (relative) share one multiplicity group.
MODULUS_GROUPING_RTOL = 1e-9


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense real d x d matrix, the finite-section representation of A(x)."""

    entries: np.ndarray

    def __post_init__(self):
        try:
            entries = np.array(self.entries, dtype=float)
        except (TypeError, ValueError) as e:
            raise DomainError(f"operator entries are not real numbers: {e}") from e
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1] or entries.shape[0] < 1:
            raise DomainError(f"operator must be a non-empty square matrix, got shape {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise DomainError("operator entries must be finite")
        entries.setflags(write=False)
        object.__setattr__(self, "entries", entries)

    @property
    def dim(self):
        return self.entries.shape[0]

    def __matmul__(self, other):
        return Operator(self.entries @ as_matrix(other))

    def __eq__(self, other):
        return isinstance(other, Operator) and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.entries.shape, self.entries.tobytes()))

    def __repr__(self):
        return f"Operator({self.entries.tolist()})"


def as_matrix(T):
    """Validated float matrix behind an Operator or array-like."""
    if isinstance(T, Operator):
        return T.entries
    return Operator(T).entries


@dataclass(frozen=True, eq=False)
class SingularSpectrum:
    """sigma_1 >= ... >= sigma_d >= 0 of one operator."""

    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def __getitem__(self, k):
        """1-based access: spectrum[k] = sigma_k = c_k(T) = F_k(T)."""
        if not 1 <= k <= len(self.values):
            raise DomainError(f"singular value index {k} outside 1..{len(self.values)}")
        return float(self.values[k - 1])


@dataclass(frozen=True, eq=False)
class EigenModuli:
    """
    Eigenvalue moduli of one operator.

    moduli/multiplicities give the grouped view (|lambda_1| > |lambda_2| > ... with
    algebraic multiplicities); flat keeps every modulus repeated by multiplicity,
    sorted non-increasing, which is what xi_j reads.
    """

    moduli: np.ndarray
    multiplicities: np.ndarray
    flat: np.ndarray

    @property
    def dim(self):
        return int(self.multiplicities.sum())


def spectral_product(values, s):
    """
    The interpolated product behind phi^s and rho_s.

    For values v_1 >= v_2 >= ... along the last axis (singular values or eigenvalue
    moduli) returns v_1 ... v_k * v_{k+1}^(s-k) with k = floor(s) when s < d, and
    (v_1 ... v_d)^(s/d) when s >= d. Works on stacked arrays.
    """
    values = np.asarray(values, dtype=float)
    d = values.shape[-1]
    if s >= d:
        return np.prod(values, axis=-1) ** (s / d)
    k, frac = split_s(s)
    return np.prod(values[..., :k], axis=-1) * values[..., k] ** frac


def singular_values(T):
    """
    Singular values of T sorted non-increasing.

    Args:
        T: Operator or square array-like.
    Returns:
        SingularSpectrum with values[k-1] = c_k(T) = F_k(T).
    """
    M = as_matrix(T)
    try:
        values = np.linalg.svd(M, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericError("singular value decomposition failed", diagnostic=f"dim={M.shape[0]}: {e}") from e
    values.setflags(write=False)
    return SingularSpectrum(values)


def batched_singular_values(stack):
    """Singular values of every matrix in a (N, d, d) stack, each row non-increasing."""
    try:
        return np.linalg.svd(stack, compute_uv=False)
    except np.linalg.LinAlgError as e:
        raise NumericError("batched singular value decomposition failed", diagnostic=str(e)) from e


def batched_volume_growth(stack, s):
    """V_s of every matrix in a (N, d, d) stack."""
    s = check_positive("s", s)
    return spectral_product(batched_singular_values(stack), s)


def volume_growth(T, s):
    """
    Maximal s-dimensional volume expansion V_s(T).

    Integer k <= d gives sigma_1 ... sigma_k; fractional s < d interpolates
    V_{k+1}^(s-k) V_k^(1-s+k) with V_0 = 1; s >= d gives |det T|^(s/d).
    """
    s = check_positive("s", s)
    return float(spectral_product(singular_values(T).values, s))


def phi_c(T, s):
    """Singular value function built from Gelfand numbers (= singular values here)."""
    return volume_growth(T, s)


def phi_F(T, s):
    """Singular value function built from Kolmogorov numbers (= singular values here)."""
    return volume_growth(T, s)


def _minor_index(d, k):
    return np.array(list(itertools.combinations(range(d), k)), dtype=int).reshape(-1, k)


def batched_compound(stack, k):
    """
    k-th compound (exterior power) of every matrix in a (..., d, d) stack.

    Entry (I, J) is the k x k minor on rows I and columns J, with I and J running
    over k-subsets of range(d) in lexicographic order, so that compound(S @ T, k)
    equals compound(S, k) @ compound(T, k) and its spectral norm is V_k(T).
    """
    stack = np.asarray(stack, dtype=float)
    d = stack.shape[-1]
    k = check_positive_int("k", k)
    if k > d:
        raise DomainError(f"compound order {k} exceeds dimension {d}")
    rows = _minor_index(d, k)
    minors = stack[..., rows[:, None, :, None], rows[None, :, None, :]]
    return np.linalg.det(minors)


def compound(T, k):
    return batched_compound(as_matrix(T), k)


def _volume_terms(s, d):
    """(order, weight) pairs with log V_s = sum of weight * log V_order."""
    if s >= d:
        return [(d, s / d)]
    k, frac = split_s(s)
    terms = []
    if k > 0:
        terms.append((k, 1.0 - frac))
    if frac > 0:
        terms.append((k + 1, frac))
    return terms


def _running_log_norm(stack, indices, checkpoints):
    wanted = set(checkpoints)
    values = []
    product = np.eye(stack.shape[-1])
    log_scale = 0.0
    dead = False
    for i, idx in enumerate(indices[:checkpoints[-1]]):
        if not dead:
            product = stack[idx] @ product
            norm = np.linalg.norm(product)
            if norm == 0:
                dead = True
            else:
                product /= norm
                log_scale += math.log(norm)
        if i + 1 in wanted:
            values.append(-math.inf if dead else log_scale + safe_log(float(np.linalg.norm(product, 2))))
    return values


def running_log_volume_growth(stack, indices, s, checkpoints):
    """
    log V_s(M_{i_n} ... M_{i_1}) at each checkpoint n, for factors M = stack[indices].

    The product is accumulated on the exterior powers of order floor(s) and
    floor(s) + 1, each renormalized with its own log scale, so V_k is read off as
    the top singular value of one well-scaled matrix at any length.
    Args:
        stack: (N, d, d) array of factors.
        indices: Factor index of each step.
        s: Positive real.
        checkpoints: Positive step counts, at most len(indices).
    Returns:
        List of logs in increasing checkpoint order, -inf once the product vanishes.
    """
    s = check_positive("s", s)
    stack = np.asarray(stack, dtype=float)
    indices = np.asarray(indices, dtype=int).reshape(-1)
    checkpoints = sorted({check_positive_int("checkpoint", n) for n in checkpoints})
    if not checkpoints:
        raise DomainError("checkpoints must be non-empty")
    if checkpoints[-1] > len(indices):
        raise DomainError(f"checkpoint {checkpoints[-1]} exceeds the {len(indices)} available steps")

    terms = _volume_terms(s, stack.shape[-1])
    logs = [_running_log_norm(batched_compound(stack, order), indices, checkpoints) for order, _ in terms]
    values = []
    for i in range(len(checkpoints)):
        parts = [weight * column[i] for (_, weight), column in zip(terms, logs)]
        values.append(-math.inf if any(p == -math.inf for p in parts) else float(sum(parts)))
    return values


def log_power_volume_growth(T, s, n):
    """log V_s(T^n) without forming T^n."""
    M = as_matrix(T)
    n = check_positive_int("n", n)
    return running_log_volume_growth(M[None], np.zeros(n, dtype=int), s, [n])[0]


def abs_det(T):
    """|det T| as the product of singular values."""
    return float(np.prod(singular_values(T).values))


def _is_triangular(M):
    return not np.any(np.tril(M, -1)) or not np.any(np.triu(M, 1))


def eigen_moduli(T):
    """
    Eigenvalue moduli of T with algebraic multiplicities.

    Triangular matrices are read off the diagonal exactly, so nilpotent shifts
    report an exact zero spectrum.
    Raises:
        NumericError: if the eigenvalue solver does not converge.
    """
    M = as_matrix(T)
    if _is_triangular(M):
        moduli = np.abs(np.diag(M))
    else:
        try:
            moduli = np.abs(scipy.linalg.eigvals(M, check_finite=False))
        except scipy.linalg.LinAlgError as e:
            raise NumericError(
                "eigenvalue solver did not converge",
                diagnostic=f"dim={M.shape[0]}, max|entry|={np.abs(M).max():.3g}: {e}",
            ) from e
    flat = np.sort(moduli)[::-1].copy()

    groups, multiplicities = [], []
    for m in flat:
        if groups and abs(groups[-1] - m) <= MODULUS_GROUPING_RTOL * groups[-1]:
            multiplicities[-1] += 1
        else:
            groups.append(m)
            multiplicities.append(1)

    arrays = [np.array(groups, dtype=float), np.array(multiplicities, dtype=int), flat]
    for a in arrays:
        a.setflags(write=False)
    return EigenModuli(*arrays)


def xi(T, j):
    """
    xi_j(T): log of the j-th largest eigenvalue modulus counted with multiplicity.

    Returns -inf when that modulus is zero.
    """
    flat = eigen_moduli(T).flat
    if isinstance(j, bool) or int(j) != j or not 1 <= j <= len(flat):
        raise DomainError(f"j must be an integer in 1..{len(flat)}, got {j}")
    return safe_log(float(flat[int(j) - 1]))


def rho_s(T, s):
    """
    Per-operator s-radius rho_s(T) = lim phi^s(T^n)^(1/n).

    Closed form through the eigenvalue moduli: the same interpolated product as
    phi^s with singular values replaced by |lambda_j|.
    """
    s = check_positive("s", s)
    return float(spectral_product(eigen_moduli(T).flat, s))


def r_s(T, s):
    """log rho_s(T), -inf iff rho_s(T) = 0."""
    return safe_log(rho_s(T, s))


def det_restricted(T, basis):
    """
    Volume distortion det(T|_V) of T on the span V of the given vectors.

    Equal to sqrt(det Gram(Tb_1..Tb_k)) / sqrt(det Gram(b_1..b_k)), evaluated as a
    ratio of singular value products; 0 when T is not injective on V.
    Raises:
        DomainError: if the vectors are dependent or have the wrong length.
    """
    M = as_matrix(T)
    d = M.shape[0]
    B = np.column_stack([np.asarray(v, dtype=float).reshape(-1) for v in basis])
    if B.shape[0] != d:
        raise DomainError(f"basis vectors must have length {d}, got {B.shape[0]}")
    k = B.shape[1]
    if k > d:
        raise DomainError(f"at most {d} basis vectors allowed, got {k}")

    eps = np.finfo(float).eps
    basis_sv = np.linalg.svd(B, compute_uv=False)
    if basis_sv[-1] <= basis_sv[0] * max(B.shape) * eps:
        raise DomainError("basis vectors are linearly dependent")

    image_sv = np.linalg.svd(M @ B, compute_uv=False)
    if image_sv[0] == 0 or image_sv[-1] <= image_sv[0] * max(B.shape) * eps:
        return 0.0
    return float(np.prod(image_sv) / np.prod(basis_sv))


def random_subspaces(d, k, rng, count=1):
    """Orthonormal bases (count, d, k) of uniformly distributed k-planes in R^d."""
    gaussian = rng.standard_normal((count, d, k))
    Q, _ = np.linalg.qr(gaussian)
    return Q


def subspace_oracle(T, k, samples, seed):
    """
    Monte-Carlo estimates of F_k(T) and c_k(T) straight from their definitions.

    F_k is a sup over k-dimensional subspaces of the minimal stretch, so the
    sampled maximum never exceeds it; c_k is an inf over (k-1)-codimensional
    subspaces of the restricted norm, so the sampled minimum never undershoots it.
    Args:
        T: Operator of dimension d <= 4.
        k: 1 <= k <= d.
        samples: Number of random subspaces of each kind.
        seed: Seed for the generator.
    Returns:
        (F_k estimate, c_k estimate).
    """
    M = as_matrix(T)
    d = M.shape[0]
    if d > 4:
        raise DomainError(f"subspace oracle is limited to d <= 4, got d={d}")
    k = check_positive_int("k", k)
    if k > d:
        raise DomainError(f"k must not exceed d={d}, got {k}")
    samples = check_positive_int("samples", samples)
    rng = np.random.default_rng(seed)

    planes = random_subspaces(d, k, rng, samples)
    kolmogorov = np.linalg.svd(M @ planes, compute_uv=False)[:, -1].max()

    cosubspaces = random_subspaces(d, d - k + 1, rng, samples)
    gelfand = np.linalg.svd(M @ cosubspaces, compute_uv=False)[:, 0].min()

    log.debug("subspace oracle d=%d k=%d samples=%d: F=%.6g c=%.6g", d, k, samples, kolmogorov, gelfand)
    return float(kolmogorov), float(gelfand)
