"""Decision procedures for precovers, covers, preenvelopes and envelopes of complexes.

Every verdict is relative to an explicit family of test complexes, which is
recorded in the report.  Failures always carry a concrete map that does not
factor (or a non-invertible endomorphism), so they can be re-checked.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from . import ffla
from .algmod import Algebra
from .approx import ClassDescriptor
from .chaincx import (
    ChainMap,
    Complex,
    chain_map_space,
    chain_maps_basis,
    compose_flat,
    cone,
    direct_sum_complex,
    disk,
    is_x_star,
    lift_chain_map,
    extend_chain_map,
    precompose_flat,
    stalk,
)

DEFAULT_BUDGET = 2**16
DEFAULT_SAMPLES = 1000
_CHUNK = 4096


@dataclass
class VerificationReport:
    subject: str
    property: str
    family: str
    outcomes: list = field(default_factory=list)
    mode: str = "exact"
    sample_size: int | None = None
    seed: int | None = None

    @property
    def passed(self) -> bool:
        return all(o["passed"] for o in self.outcomes)

    def failures(self) -> list[dict]:
        return [o for o in self.outcomes if not o["passed"]]

    def to_dict(self) -> dict:
        return {
            "subject": self.subject,
            "property": self.property,
            "family": self.family,
            "mode": self.mode,
            "sample_size": self.sample_size,
            "seed": self.seed,
            "passed": self.passed,
            "outcomes": self.outcomes,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))


def _first_outside(basis: np.ndarray, rows: np.ndarray, p: int) -> np.ndarray | None:
    """A row of ``basis`` outside the span of ``rows``."""
    base = ffla.canonical_basis(rows, p, n=basis.shape[1]) if rows.size else np.zeros((0, basis.shape[1]), dtype=np.int64)
    for v in basis:
        if not ffla.in_span(base, v, p):
            return v
    return None


def _check_tests(tests, cls):
    if cls is None:
        return
    for t in tests:
        if not is_x_star(t, cls):
            raise ValueError(f"test complex {t.name or t!r} is not in C(X*)")


def is_precover(phi: ChainMap, tests: list[Complex], cls: ClassDescriptor | None = None,
                family: str = "", subject: str = "phi") -> VerificationReport:
    """Every chain map ``A -> X`` from a test complex factors through ``phi: D -> X``."""
    _check_tests(tests, cls)
    report = VerificationReport(subject, "precover", family or f"{len(tests)} test complexes")
    p = phi.p
    for i, a in enumerate(tests):
        want = chain_map_space(a, phi.target)
        have = chain_map_space(a, phi.source)
        _, rows = compose_flat(phi, have)
        got = ffla.rank(rows, p) if rows.size else 0
        outcome = {"test": i, "name": a.name, "hom_dim": want.dim, "image_rank": got, "passed": got == want.dim}
        if got != want.dim:
            beta = want.unflatten(_first_outside(want.basis, rows, p))
            outcome["counterexample"] = beta.to_dict()
        report.outcomes.append(outcome)
    return report


def is_preenvelope(psi: ChainMap, tests: list[Complex], cls: ClassDescriptor | None = None,
                   family: str = "", subject: str = "psi") -> VerificationReport:
    """Every chain map ``X -> A`` into a test complex extends along ``psi: X -> D``."""
    _check_tests(tests, cls)
    report = VerificationReport(subject, "preenvelope", family or f"{len(tests)} test complexes")
    p = psi.p
    for i, a in enumerate(tests):
        want = chain_map_space(psi.source, a)
        have = chain_map_space(psi.target, a)
        _, rows = precompose_flat(have, psi)
        got = ffla.rank(rows, p) if rows.size else 0
        outcome = {"test": i, "name": a.name, "hom_dim": want.dim, "image_rank": got, "passed": got == want.dim}
        if got != want.dim:
            beta = want.unflatten(_first_outside(want.basis, rows, p))
            outcome["counterexample"] = beta.to_dict()
        report.outcomes.append(outcome)
    return report


def _affine_fixers(f: ChainMap, side: str):
    """``(space, c0, null)``: endomorphisms ``c0 + span(null)`` fixing ``f``."""
    d = f.source if side == "cover" else f.target
    space = chain_map_space(d, d)
    if side == "cover":
        degs, rows = compose_flat(f, space)
    else:
        degs, rows = precompose_flat(space, f)
    target = f.flatten(degs)
    if space.dim == 0:
        return space, np.zeros(0, dtype=np.int64), np.zeros((0, 0), dtype=np.int64)
    sol = ffla.solve(rows.T, target.reshape(-1, 1), f.p)
    if sol is None:
        raise ArithmeticError("the identity does not fix the map; inconsistent input")
    c0, null = sol
    return space, c0[:, 0], ffla.as_rows(null, space.dim)


def _invertible_mask(space, flat: np.ndarray, p: int) -> np.ndarray:
    d = space.source
    ok = np.ones(flat.shape[0], dtype=bool)
    pos = 0
    for n in space.degrees:
        r = d.module(n).dim
        block = flat[:, pos : pos + r * r].reshape(flat.shape[0], r, r)
        ok &= ffla.batch_invertible(block, p)
        pos += r * r
    return ok


def _automorphism_check(f: ChainMap, side: str, budget: int, seed: int, samples: int, subject: str) -> VerificationReport:
    prop = "cover" if side == "cover" else "envelope"
    p = f.p
    space, c0, null = _affine_fixers(f, side)
    k = null.shape[0]
    size = p**k
    report = VerificationReport(subject, prop, f"endomorphisms of D fixing the map: {p}^{k} elements")
    if space.dim == 0:
        report.mode = "exhaustive"
        report.outcomes.append({"passed": True, "checked": 0, "solution_dim": 0})
        return report
    # degrees where D is nonzero but missing from the space cannot occur: D -> D hits every degree
    if size <= budget:
        report.mode = "exhaustive"
        coeffs = (np.array(list(itertools.product(range(p), repeat=k)), dtype=np.int64).reshape(-1, k)
                  if k else np.zeros((1, 0), dtype=np.int64))
    else:
        report.mode = "sampled"
        report.sample_size = samples
        report.seed = seed
        rng = np.random.default_rng(seed)
        coeffs = rng.integers(0, p, size=(samples, k), dtype=np.int64)
    witness = None
    checked = 0
    for start in range(0, coeffs.shape[0], _CHUNK):
        lam = coeffs[start : start + _CHUNK]
        c = (c0[None, :] + lam @ null) % p
        flat = (c @ space.basis) % p
        ok = _invertible_mask(space, flat, p)
        checked += lam.shape[0]
        bad = np.flatnonzero(~ok)
        if bad.size:
            witness = space.unflatten(flat[bad[0]])
            break
    outcome = {"passed": witness is None, "checked": checked, "solution_dim": k}
    if witness is not None:
        outcome["witness"] = witness.to_dict()
    report.outcomes.append(outcome)
    return report


def is_cover(phi: ChainMap, budget: int = DEFAULT_BUDGET, seed: int = 0, samples: int = DEFAULT_SAMPLES,
             subject: str = "phi") -> VerificationReport:
    """Every chain map ``theta: D -> D`` with ``phi o theta == phi`` is an automorphism.

    Exhaustive when the affine solution set has at most ``budget`` elements,
    otherwise checked on ``samples`` seeded random elements.
    """
    return _automorphism_check(phi, "cover", budget, seed, samples, subject)


def is_envelope(psi: ChainMap, budget: int = DEFAULT_BUDGET, seed: int = 0, samples: int = DEFAULT_SAMPLES,
                subject: str = "psi") -> VerificationReport:
    """Every chain map ``g: D -> D`` with ``g o psi == psi`` is an automorphism."""
    return _automorphism_check(psi, "envelope", budget, seed, samples, subject)


def witness_is_valid(f: ChainMap, witness: ChainMap, side: str = "cover") -> bool:
    """Re-check a disproof: ``witness`` fixes ``f`` and is not invertible."""
    fixed = (f @ witness) if side == "cover" else (witness @ f)
    return fixed.to_dict() == f.to_dict() and not witness.is_iso()


def counterexample_is_valid(f: ChainMap, beta: ChainMap, side: str = "precover") -> bool:
    """Re-check a failure: ``beta`` does not factor through ``f``."""
    if side == "precover":
        return lift_chain_map(beta, f) is None
    return extend_chain_map(beta, f) is None


# -- test families ------------------------------------------------------------------------


def generate_tests(cls: ClassDescriptor, window: tuple[int, int], count: int, seed: int = 0,
                   algebra: Algebra | None = None) -> list[Complex]:
    """Deterministic family of X*-complexes supported in ``window``.

    Order: stalks of the generators in every degree, disks, then seeded sums
    of two earlier members alternating with cones of seeded random chain maps.
    """
    if count < 1:
        raise ValueError("count must be >= 1")
    if algebra is None:
        if not cls.gens:
            raise ValueError("an algebra is needed for this class")
        algebra = cls.gens[0].algebra
    lo, hi = window
    gens = cls.generators(algebra)
    base = []
    for n in range(lo, hi + 1):
        for i, g in enumerate(gens):
            base.append(stalk(g, n).renamed(f"stalk(G{i},{n})"))
    for n in range(lo + 1, hi + 1):
        for i, g in enumerate(gens):
            base.append(disk(g, n).renamed(f"disk(G{i},{n})"))
    out = [c for c in base if not c.is_zero()]
    rng = np.random.default_rng(seed)
    p = algebra.p
    attempts = 0
    while len(out) < count and attempts < 20 * count:
        attempts += 1
        if len(out) % 2 == 0:
            i, j = rng.integers(0, len(out), size=2)
            s = direct_sum_complex([out[i], out[j]]).renamed(f"sum({i},{j})")
            out.append(s)
            continue
        i, j = rng.integers(0, len(out), size=2)
        src, tgt = out[i], out[j]
        if src.hi + 1 > hi:
            continue
        maps = chain_maps_basis(src, tgt)
        comps = {}
        if maps:
            coeffs = rng.integers(0, p, size=len(maps))
            acc = None
            for c, f in zip(coeffs, maps):
                term = {n: (int(c) * f[n].mat) % p for n in f.degrees}
                acc = term if acc is None else {n: (acc[n] + term[n]) % p for n in acc}
            comps = acc
        nu = ChainMap(src, tgt, comps, check=True)
        c, _, _ = cone(nu, "chain")
        out.append(c.renamed(f"cone({i}->{j})"))
    out = out[:count]
    for t in out:
        assert is_x_star(t, cls)
    return out
