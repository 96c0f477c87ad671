import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "src"))

from dynamics import Subshift, WindowCocycle  # noqa: E402

GOLDEN = (1 + 5 ** 0.5) / 2


def rotation(theta):
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, -s], [s, c]])


def block_diagonal(rng, d):
    """Real block-diagonal matrix with 1x1 and rotation-scaled 2x2 blocks, moduli in [0.5, 1.5]."""
    D = np.zeros((d, d))
    i = 0
    while i < d:
        r = rng.uniform(0.5, 1.5)
        if i + 1 < d and rng.random() < 0.5:
            D[i:i + 2, i:i + 2] = r * rotation(rng.uniform(0.1, 3.0))
            i += 2
        else:
            D[i, i] = r * rng.choice([-1.0, 1.0])
            i += 1
    return D


def gapped_block_diagonal(rng, d):
    """Like block_diagonal, but distinct blocks have moduli at least 0.1 apart."""
    sizes = []
    while sum(sizes) < d:
        sizes.append(2 if sum(sizes) + 1 < d and rng.random() < 0.5 else 1)
    moduli = rng.choice(np.linspace(0.5, 1.5, 11), size=len(sizes), replace=False)
    D = np.zeros((d, d))
    i = 0
    for size, r in zip(sizes, moduli):
        if size == 2:
            D[i:i + 2, i:i + 2] = r * rotation(rng.uniform(0.1, 3.0))
        else:
            D[i, i] = r * rng.choice([-1.0, 1.0])
        i += size
    return D


def random_normal(rng, d):
    """Q D Q^T with Q orthogonal: a real normal matrix."""
    Q, _ = np.linalg.qr(rng.standard_normal((d, d)))
    return Q @ block_diagonal(rng, d) @ Q.T


def random_well_conditioned(rng, d):
    """P D P^-1 with P close to orthogonal, so the eigenvalues are well conditioned."""
    P = np.eye(d) + 0.3 * rng.standard_normal((d, d)) / np.sqrt(d)
    return P @ block_diagonal(rng, d) @ np.linalg.inv(P)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def golden_pair():
    return WindowCocycle.from_matrices([[[1, 1], [0, 1]], [[1, 0], [1, 1]]])


@pytest.fixture
def golden_shift():
    return Subshift.golden_mean()


def constant(T):
    return WindowCocycle.constant(Subshift.full(1), T)
