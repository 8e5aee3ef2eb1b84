from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import quiver_indecomposables, random_complex, ring_indecomposables
from cxapprox import fixtures
from cxapprox.algmod import hom_dim, projective_module, simple_module
from cxapprox.chaincx import (
    ChainMap,
    Complex,
    ComplexError,
    WindowError,
    chain_map_space,
    cokernel_complex,
    cone,
    direct_sum_complex,
    disk,
    dualize_chain_map,
    dualize_complex,
    extend_chain_map,
    hom_exactness,
    hom_into_complex_exact,
    homology_dims,
    identity_map,
    kernel_complex,
    lift_chain_map,
    shift,
    stalk,
    truncate_window,
    zero_map,
)


def algebra_and_indecs(which: int):
    if which == 0:
        A = fixtures.truncated_polynomial(2, 2)
        return A, ring_indecomposables(A)
    A = fixtures.a2_path_algebra(2)
    return A, quiver_indecomposables(A)


def random_pair(seed: int, max_dim: int = 3, length: int = 3):
    rng = np.random.default_rng(seed)
    A, indecs = algebra_and_indecs(seed % 2)
    s = random_complex(indecs, rng, int(rng.integers(1, length + 1)), max_dim, lo=int(rng.integers(-1, 2)), name="S")
    t = random_complex(indecs, rng, int(rng.integers(1, length + 1)), max_dim, lo=int(rng.integers(-1, 2)), name="T")
    return rng, s, t


def random_chain_map(rng, s, t) -> ChainMap:
    space = chain_map_space(s, t)
    if space.dim == 0:
        return zero_map(s, t)
    c = rng.integers(0, s.p, size=space.dim)
    return space.unflatten((c @ space.basis) % s.p)


def test_complex_rejects_nonzero_square():
    A = fixtures.truncated_polynomial(2, 2)
    P = projective_module(A, 0)
    x = np.array([[0, 0], [1, 0]])
    Complex(A, {0: P, 1: P, 2: P}, {1: x, 2: x})
    with pytest.raises(ComplexError):
        Complex(A, {0: P, 1: P, 2: P}, {1: np.eye(2, dtype=np.int64), 2: np.eye(2, dtype=np.int64)})


@given(st.integers(0, 10_000))
@settings(max_examples=40, deadline=None)
def test_cones_square_to_zero(seed):
    rng, s, t = random_pair(seed)
    nu = random_chain_map(rng, s, t)
    nu.validate()
    c, inc, rows = cone(nu, "chain")
    c.validate()
    inc.validate()
    assert all(r["formula"] == "(x, y) -> (d x + nu y, -d y)" for r in rows)
    cc, proj, _ = cone(nu, "cochain")
    cc.validate()
    proj.validate()


@given(st.integers(0, 10_000))
@settings(max_examples=30, deadline=None)
def test_cone_differential_formula_on_basis(seed):
    rng, s, t = random_pair(seed)
    nu = random_chain_map(rng, s, t)
    c, _, _ = cone(nu, "chain")
    p = s.p
    for n in c.degrees:
        a, b = t.module(n).dim, s.module(n - 1).dim
        for j in range(a + b):
            v = np.zeros(a + b, dtype=np.int64)
            v[j] = 1
            x, y = v[:a], v[a:]
            got = (c.d(n).mat @ v) % p
            top = (t.d(n).mat @ x + nu[n - 1].mat @ y) % p
            bottom = (-(s.d(n - 1).mat @ y)) % p
            assert np.array_equal(got, np.concatenate([top, bottom]))


@pytest.mark.parametrize("seed", range(8))
def test_chain_map_space_matches_enumeration(seed):
    _, s, t = random_pair(seed, max_dim=2, length=2)
    brute = oracles.chain_maps(oracles.plain(s), oracles.plain(t), 2)
    space = chain_map_space(s, t)
    assert len(brute) == 2**space.dim
    for f in space.maps():
        f.validate()


@pytest.mark.parametrize("which", [0, 1])
def test_maps_from_disks_are_homs_into_one_degree(which):
    A, indecs = algebra_and_indecs(which)
    rng = np.random.default_rng(which)
    x = random_complex(indecs, rng, 3, 4)
    for g in indecs:
        for n in range(-1, 4):
            assert chain_map_space(disk(g, n), x).dim == hom_dim(g, x.module(n))


@pytest.mark.parametrize("seed", range(6))
def test_cone_of_identity_is_split_exact(seed):
    _, s, _ = random_pair(seed)
    c, _, _ = cone(identity_map(s), "chain")
    assert all(v == 0 for v in homology_dims(c).values())
    for g in algebra_and_indecs(seed % 2)[1]:
        assert hom_into_complex_exact(g, c, range(c.lo - 1, c.hi + 2))


def test_disk_and_stalk_homology():
    A = fixtures.truncated_polynomial(3, 2)
    k = simple_module(A, 0)
    assert homology_dims(disk(k, 2)) == {1: 0, 2: 0}
    assert homology_dims(stalk(k, 5)) == {5: 1}


def test_shift_signs_and_inverse():
    rng = np.random.default_rng(4)
    A, indecs = algebra_and_indecs(0)
    x = random_complex(indecs, rng, 3, 3)
    y = shift(x, 1)
    assert y.lo == x.lo - 1
    for n in range(x.lo + 1, x.hi + 1):
        assert np.array_equal(y.d(n - 1).mat, (-x.d(n).mat) % 2)
    assert shift(y, -1).to_dict() == x.to_dict()


def test_cone_of_zero_is_shifted_sum():
    rng, s, t = random_pair(3)
    c, _, _ = cone(zero_map(s, t), "chain")
    ref = direct_sum_complex([t, shift(s, -1)])
    assert c.to_dict() == ref.to_dict()
    assert all(c.module(n) == ref.module(n) for n in c.degrees)


@pytest.mark.parametrize("seed", range(6))
def test_kernel_and_cokernel_complexes(seed):
    rng, s, t = random_pair(seed)
    f = random_chain_map(rng, s, t)
    k, inc = kernel_complex(f)
    k.validate()
    inc.validate()
    assert (f @ inc).is_zero()
    q, proj = cokernel_complex(f)
    q.validate()
    proj.validate()
    assert (proj @ f).is_zero()


@pytest.mark.parametrize("seed", range(6))
def test_dualize_complex_and_maps(seed):
    rng, s, t = random_pair(seed)
    f = random_chain_map(rng, s, t)
    ds = dualize_complex(s)
    ds.validate()
    assert dualize_complex(ds).to_dict() == s.to_dict()
    g = dualize_chain_map(f)
    g.validate()
    assert g.source.algebra == s.algebra.opposite()


def _composes_to(phi: ChainMap, theta: dict, beta: ChainMap) -> bool:
    for n in beta.degrees:
        got = (phi[n].mat @ theta[n]) % 2 if n in theta else np.zeros_like(beta[n].mat)
        if not np.array_equal(got, beta[n].mat):
            return False
    return True


@pytest.mark.parametrize("seed", range(10))
def test_lift_agrees_with_enumeration(seed):
    rng, s, t = random_pair(seed, max_dim=2, length=2)
    phi = random_chain_map(rng, s, t)
    a = truncate_window(t, t.lo, t.lo)
    thetas = oracles.chain_maps(oracles.plain(a), oracles.plain(s), 2)
    for beta in chain_map_space(a, t).maps():
        theta = lift_chain_map(beta, phi)
        assert (theta is None) == (not any(_composes_to(phi, th, beta) for th in thetas))
        if theta is not None:
            assert (phi @ theta).to_dict() == beta.to_dict()


@pytest.mark.parametrize("seed", range(4))
def test_extend_along_identity(seed):
    _, s, t = random_pair(seed)
    for beta in chain_map_space(s, t).maps():
        g = extend_chain_map(beta, identity_map(s))
        assert g is not None and g.to_dict() == beta.to_dict()


def test_exactness_refuses_degrees_past_the_truncation():
    A = fixtures.truncated_polynomial(2, 2)
    P = projective_module(A, 0)
    x = Complex(A, {0: P, 1: P}, {1: np.array([[0, 0], [1, 0]])}, known_above=1)
    assert hom_exactness(P, x, [0]) == {0: False}
    with pytest.raises(WindowError):
        hom_exactness(P, x, [1])
