from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from conftest import quiver_indecomposables, random_sum, ring_indecomposables
from cxapprox import ffla, fixtures
from cxapprox.algmod import (
    Algebra,
    AlgebraError,
    Module,
    ModuleError,
    ModuleMorphism,
    MorphismError,
    cokernel,
    combine,
    direct_sum,
    dualize,
    dualize_morphism,
    extend_through,
    hom_basis,
    hom_dim,
    hom_matrices,
    image,
    injective_module,
    kernel,
    lift_through,
    projective_module,
    radical_submodule,
    regular_module,
    simple_module,
    socle,
)


def scrambled(m: Module, rng) -> Module:
    """``m`` in a random basis, so summands are no longer block-diagonal."""
    p = m.p
    while True:
        g = rng.integers(0, p, size=(m.dim, m.dim))
        ginv = ffla.inverse(g, p)
        if ginv is not None:
            break
    return Module(m.algebra, np.einsum("ab,ibc,cd->iad", g, m.action, ginv) % p)


def random_modules(seed: int, count: int, max_dim: int = 3):
    rng = np.random.default_rng(seed)
    algebras = [fixtures.truncated_polynomial(2, 2), fixtures.a2_path_algebra(2)]
    out = []
    for i in range(count):
        A = algebras[i % 2]
        indecs = ring_indecomposables(A) if i % 2 == 0 else quiver_indecomposables(A)
        out.append(scrambled(random_sum(indecs, rng, max_dim), rng))
    return out


def test_validation_reports_failing_triple():
    mult = np.zeros((3, 3, 3), dtype=np.int64)
    for j in range(3):
        mult[0, j, j] = mult[j, 0, j] = 1
    mult[1, 1, 2] = 1
    mult[2, 1, 1] = 1
    with pytest.raises(AlgebraError, match=r"basis triple \(1, 1, 1\)"):
        Algebra(2, mult, [1, 0, 0], [[0, 1, 0], [0, 0, 1]], [[1, 0, 0]])


def test_validation_rejects_bad_radical_and_idempotents():
    A = fixtures.truncated_polynomial(2, 2)
    with pytest.raises(AlgebraError, match="nilpotent"):
        Algebra(2, A.mult, A.unit, [[1, 0], [0, 1]], [A.unit])
    with pytest.raises(AlgebraError, match="sum to the unit"):
        Algebra(2, A.mult, A.unit, A.radical, [[0, 1]])
    with pytest.raises(ValueError):
        Algebra(4, A.mult, A.unit, A.radical, [A.unit])


def test_module_validation():
    A = fixtures.truncated_polynomial(2, 2)
    with pytest.raises(ModuleError, match="unit"):
        Module(A, np.zeros((2, 1, 1)))
    # x acting invertibly violates x^2 = 0
    with pytest.raises(ModuleError, match=r"basis pair \(1, 1\)"):
        Module(A, np.array([[[1]], [[1]]]))


def test_morphism_validation():
    A = fixtures.truncated_polynomial(2, 2)
    k, reg = simple_module(A, 0), regular_module(A)
    with pytest.raises(MorphismError):
        ModuleMorphism(k, reg, [[1], [0]])
    ModuleMorphism(k, reg, [[0], [1]])


def test_indecomposables_of_the_quiver():
    A = fixtures.a2_path_algebra(3)
    dims = [projective_module(A, 0).dim, projective_module(A, 1).dim, injective_module(A, 0).dim, injective_module(A, 1).dim]
    assert dims == [2, 1, 1, 2]
    assert hom_dim(projective_module(A, 0), injective_module(A, 1)) == 1
    assert all(simple_module(A, i).dim == 1 for i in range(2))


@pytest.mark.parametrize("seed", range(4))
def test_hom_count_matches_enumeration(seed):
    mods = random_modules(seed, 6)
    for m in mods:
        for n in mods:
            if m.algebra != n.algebra:
                continue
            brute = oracles.homs(np.asarray(m.action), np.asarray(n.action), 2)
            assert len(brute) == 2 ** hom_dim(m, n)
            assert len(hom_basis(m, n)) == hom_dim(m, n)


def test_hom_from_projective_is_idempotent_image():
    for m in random_modules(11, 8):
        A = m.algebra
        for i in range(len(A.idempotents)):
            assert hom_dim(projective_module(A, i), m) == ffla.rank(m.act(A.idempotents[i]), 2)


def test_direct_sum_injections_and_projections():
    A = fixtures.truncated_polynomial(3, 3)
    ms = [fixtures.truncated_polynomial_module(A, k) for k in (1, 2, 3)]
    s, incs, projs = direct_sum(ms, A)
    assert s.dim == 6
    for i, (a, b) in enumerate(zip(incs, projs)):
        assert np.array_equal((b @ a).mat, np.eye(ms[i].dim, dtype=np.int64))
    total = sum((a @ b).mat for a, b in zip(incs, projs)) % 3
    assert np.array_equal(total, np.eye(6, dtype=np.int64))


@pytest.mark.parametrize("seed", range(3))
def test_kernel_and_cokernel_universality(seed):
    rng = np.random.default_rng(seed)
    mods = random_modules(seed + 20, 6)
    for m in mods:
        for n in mods:
            if m.algebra != n.algebra:
                continue
            H = hom_matrices(m, n)
            if H.shape[0] == 0:
                continue
            f = combine(m, n, H, rng.integers(0, 2, size=H.shape[0]))
            K, inc = kernel(f)
            Q, proj = cokernel(f)
            I, _ = image(f)
            assert K.dim == m.dim - f.rank() and I.dim == f.rank() and Q.dim == n.dim - f.rank()
            assert (f @ inc).is_zero() and (proj @ f).is_zero()
            assert inc.is_monic() and proj.is_epic()
            # every g with f g = 0 factors through the kernel
            for g in hom_basis(K, m) + hom_basis(m, m):
                if (f @ g).is_zero():
                    assert lift_through(g, inc) is not None
            for g in hom_basis(n, n):
                if (g @ f).is_zero():
                    assert extend_through(g, proj) is not None


def test_dualize_is_an_involution_reversing_composition():
    rng = np.random.default_rng(5)
    mods = random_modules(7, 6)
    for m in mods:
        assert dualize(dualize(m)) == m
        assert dualize(m).algebra == m.algebra.opposite()
    for a in mods:
        for b in mods:
            for c in mods:
                if not (a.algebra == b.algebra == c.algebra):
                    continue
                H1, H2 = hom_matrices(a, b), hom_matrices(b, c)
                if H1.shape[0] == 0 or H2.shape[0] == 0:
                    continue
                f = combine(a, b, H1, rng.integers(0, 2, size=H1.shape[0]))
                g = combine(b, c, H2, rng.integers(0, 2, size=H2.shape[0]))
                lhs = dualize_morphism(g @ f)
                rhs = dualize_morphism(f) @ dualize_morphism(g)
                assert np.array_equal(lhs.mat, rhs.mat)
                lhs.validate()


def test_opposite_of_opposite():
    A = fixtures.a2_path_algebra(2)
    assert A.opposite().opposite() is A
    A.opposite().validate()


def test_radical_and_socle_layers():
    A = fixtures.truncated_polynomial(5, 3)
    reg = regular_module(A)
    assert radical_submodule(reg).shape[0] == 2
    assert socle(reg).shape[0] == 1
    Q = fixtures.a2_path_algebra(2)
    P0 = projective_module(Q, 0)
    assert radical_submodule(P0).shape[0] == 1 and socle(P0).shape[0] == 1


@given(st.integers(0, 3), st.sampled_from([2, 3]))
@settings(max_examples=20, deadline=None)
def test_truncated_polynomial_modules_hom(k, p):
    A = fixtures.truncated_polynomial(p, 3)
    if k == 0:
        return
    m = fixtures.truncated_polynomial_module(A, k)
    for j in range(1, 4):
        n = fixtures.truncated_polynomial_module(A, j)
        assert hom_dim(m, n) == min(k, j)
