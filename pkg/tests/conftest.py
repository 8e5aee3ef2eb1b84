from __future__ import annotations

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from cxapprox import ffla, fixtures
from cxapprox.algmod import Module, direct_sum, hom_matrices, injective_module, projective_module, simple_module
from cxapprox.chaincx import Complex

EXAMPLES = Path(__file__).resolve().parents[1] / "examples" / "problems"


@pytest.fixture
def ring():
    """F_2[x]/(x^2) with k and the regular module."""
    return fixtures.a2_fixture(2)


@pytest.fixture
def quiver():
    A = fixtures.a2_path_algebra(2)
    return {
        "A": A,
        "S0": simple_module(A, 0),
        "S1": simple_module(A, 1),
        "P0": projective_module(A, 0),
        "P1": projective_module(A, 1),
        "I0": injective_module(A, 0),
    }


def ring_indecomposables(A):
    return [simple_module(A, 0), projective_module(A, 0)]


def quiver_indecomposables(A):
    return [simple_module(A, 0), simple_module(A, 1), projective_module(A, 0)]


def random_sum(indecs, rng, max_dim: int) -> Module:
    """Direct sum of randomly chosen indecomposables, total dimension in [1, max_dim]."""
    A = indecs[0].algebra
    parts = []
    dim = 0
    while True:
        choices = [m for m in indecs if dim + m.dim <= max_dim]
        if not choices or (parts and rng.random() < 0.4):
            break
        m = choices[int(rng.integers(len(choices)))]
        parts.append(m)
        dim += m.dim
    return direct_sum(parts, A)[0]


def random_complex(indecs, rng, length: int, max_dim: int, lo: int = 0, name: str = "X") -> Complex:
    """Seeded complex on degrees ``lo .. lo+length-1`` with random differentials, ``d^2 = 0`` enforced."""
    A = indecs[0].algebra
    p = A.p
    mods = {lo + i: random_sum(indecs, rng, max_dim) for i in range(length)}
    diffs = {}
    for n in range(lo + 1, lo + length):
        H = hom_matrices(mods[n], mods[n - 1])
        if H.shape[0] == 0:
            continue
        k = H.shape[0]
        if n - 1 in diffs:
            # coefficients c with d_{n-1} (sum c_i h_i) = 0
            comp = np.einsum("ab,kbc->kac", diffs[n - 1], H) % p
            null = ffla.kernel_basis(comp.reshape(k, -1).T, p)
        else:
            null = ffla.identity(k)
        if null.shape[0] == 0:
            continue
        c = rng.integers(0, p, size=null.shape[0]) @ null % p
        diffs[n] = np.einsum("k,kab->ab", c, H) % p
    return Complex(A, mods, diffs, name=name)
