from __future__ import annotations

import numpy as np
import pytest

import oracles
from conftest import quiver_indecomposables, random_complex, ring_indecomposables
from cxapprox import fixtures
from cxapprox.algmod import direct_sum, projective_module, simple_module
from cxapprox.approx import AddClosure, Injectives, Projectives
from cxapprox.chaincx import ChainMap, chain_map_space, disk, is_x_star, stalk
from cxapprox.construct import bounded_preenvelope, bounded_precover
from cxapprox.verify import (
    counterexample_is_valid,
    generate_tests,
    is_cover,
    is_envelope,
    is_precover,
    is_preenvelope,
    witness_is_valid,
)


def from_dict(source, target, comps: dict) -> ChainMap:
    return ChainMap(source, target, {int(n): np.array(m, dtype=np.int64) for n, m in comps.items()})


def fold_map(ring):
    A, reg = ring["A"], ring["A2"]
    both = direct_sum([reg, reg], A)[0]
    mat = np.hstack([np.eye(2, dtype=np.int64)] * 2)
    return ChainMap(stalk(both, 0), stalk(reg, 0), {0: mat})


def test_precover_passes_on_generated_family(ring):
    c = bounded_precover(disk(ring["k"], 1), Projectives(), 4)
    tests = generate_tests(Projectives(), c.window, 20, seed=1, algebra=ring["A"])
    rep = is_precover(c.phi, tests, Projectives())
    assert rep.passed and len(rep.outcomes) == 20
    assert all(o["hom_dim"] == o["image_rank"] for o in rep.outcomes)


def test_non_precover_gets_a_checkable_counterexample(ring):
    k, reg = ring["k"], ring["A2"]
    soc = ChainMap(stalk(k, 0), stalk(reg, 0), {0: np.array([[0], [1]])})
    tests = [stalk(reg, 0)]
    rep = is_precover(soc, tests, Projectives())
    assert not rep.passed
    bad = rep.failures()[0]
    beta = from_dict(tests[0], soc.target, bad["counterexample"])
    assert counterexample_is_valid(soc, beta)


def test_non_preenvelope_gets_a_checkable_counterexample(ring):
    k, reg = ring["k"], ring["A2"]
    top = ChainMap(stalk(reg, 0), stalk(k, 0), {0: np.array([[1, 0]])})
    tests = [stalk(reg, 0)]
    rep = is_preenvelope(top, tests, Injectives())
    assert not rep.passed
    beta = from_dict(top.source, tests[0], rep.failures()[0]["counterexample"])
    assert counterexample_is_valid(top, beta, side="preenvelope")


def test_tests_outside_the_class_are_rejected(ring):
    c = bounded_precover(stalk(ring["k"], 0), Projectives(), 2)
    with pytest.raises(ValueError, match="not in C"):
        is_precover(c.phi, [stalk(ring["k"], 0)], Projectives())


@pytest.mark.parametrize("seed", range(6))
def test_precover_verdict_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    A = fixtures.truncated_polynomial(2, 2) if seed % 2 == 0 else fixtures.a2_path_algebra(2)
    indecs = ring_indecomposables(A) if seed % 2 == 0 else quiver_indecomposables(A)
    x = random_complex(indecs, rng, 2, 2)
    d = random_complex(indecs, rng, 2, 2)
    space = chain_map_space(d, x)
    if space.dim == 0:
        return
    phi = space.unflatten((rng.integers(0, 2, size=space.dim) @ space.basis) % 2)
    tests = generate_tests(Projectives(), (0, 1), 6, seed=seed, algebra=A)
    for t in tests:
        got = is_precover(phi, [t]).passed
        brute = oracles.factors_through(
            {n: phi[n].mat for n in phi.degrees}, oracles.plain(d), oracles.plain(x), oracles.plain(t), 2
        )
        assert got == brute


def test_cover_of_simple_stalk_is_exhaustive(ring):
    c = bounded_precover(stalk(ring["k"], 0), Projectives(), 3)
    rep = is_cover(c.phi)
    assert rep.passed and rep.mode == "exhaustive"
    assert rep.outcomes[0]["checked"] == 2 ** rep.outcomes[0]["solution_dim"]


def test_fold_map_is_not_a_cover(ring):
    f = fold_map(ring)
    rep = is_cover(f)
    assert not rep.passed and rep.mode == "exhaustive"
    w = rep.outcomes[0]["witness"]
    assert witness_is_valid(f, from_dict(f.source, f.source, w))


def test_sampling_kicks_in_above_the_budget(ring):
    f = fold_map(ring)
    rep = is_cover(f, budget=4, seed=3, samples=50)
    assert rep.mode == "sampled" and rep.sample_size == 50 and rep.seed == 3
    assert not rep.passed
    again = is_cover(f, budget=4, seed=3, samples=50)
    assert rep.to_json() == again.to_json()


def test_envelopes(ring):
    k, reg = ring["k"], ring["A2"]
    soc = ChainMap(stalk(k, 0), stalk(reg, 0), {0: np.array([[0], [1]])})
    assert is_envelope(soc).passed
    both = direct_sum([reg, reg], ring["A"])[0]
    diag = ChainMap(stalk(k, 0), stalk(both, 0), {0: np.array([[0], [1], [0], [1]])})
    rep = is_envelope(diag)
    assert not rep.passed
    assert witness_is_valid(diag, from_dict(diag.target, diag.target, rep.outcomes[0]["witness"]), side="envelope")


def test_preenvelope_construction_verifies(ring):
    c = bounded_preenvelope(disk(ring["k"], 1), Injectives(), 4)
    tests = generate_tests(Injectives(), c.window, 12, seed=0, algebra=ring["A"])
    assert is_preenvelope(c.phi, tests, Injectives()).passed


def test_generate_tests_is_deterministic_and_in_class():
    Q = fixtures.a2_path_algebra(2)
    cls = AddClosure([simple_module(Q, 1), projective_module(Q, 0)])
    a = generate_tests(cls, (0, 3), 20, seed=42)
    b = generate_tests(cls, (0, 3), 20, seed=42)
    assert [t.name for t in a] == [t.name for t in b]
    assert [t.to_dict() for t in a] == [t.to_dict() for t in b]
    assert len(a) == 20
    for t in a:
        assert is_x_star(t, cls)
        assert 0 <= t.lo and t.hi <= 3
    with pytest.raises(ValueError):
        generate_tests(cls, (0, 3), 0)
