"""Finite-dimensional algebras over F_p, their left modules, and module maps.

An algebra is given by structure constants ``mult[i, j, k]`` with
``b_i * b_j = sum_k mult[i, j, k] b_k``.  A left module is given by one
action matrix per algebra basis element.  Morphisms are matrices of shape
``(target.dim, source.dim)`` acting on column vectors.
"""

from __future__ import annotations

import hashlib
from functools import cached_property

import numpy as np

from . import ffla
from .ffla import PrimeField


class AlgebraError(ValueError):
    """Raised when algebra data violates an axiom; the message names the witness."""


class ModuleError(ValueError):
    pass


class MorphismError(ValueError):
    pass


def _digest(*parts) -> bytes:
    h = hashlib.sha1()
    for part in parts:
        if isinstance(part, np.ndarray):
            h.update(str(part.shape).encode())
            h.update(np.ascontiguousarray(part, dtype=np.int64).tobytes())
        else:
            h.update(repr(part).encode())
    return h.digest()


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=np.int64)
    a.flags.writeable = False
    return a


class Algebra:
    """Associative unital algebra with a designated radical and idempotents.

    Args:
        p: characteristic (prime).
        mult: structure constants, shape ``(d, d, d)``.
        unit: coordinates of 1.
        radical: rows spanning the Jacobson radical J.
        idempotents: rows giving a complete set of primitive orthogonal idempotents.
        name: label used in reports.
        check: validate every axiom (raises :class:`AlgebraError`).
    """

    def __init__(self, p, mult, unit, radical, idempotents, name="", check=True):
        self.field = PrimeField(int(p))
        self.p = self.field.p
        self.mult = _frozen(np.asarray(mult, dtype=np.int64) % self.p)
        d = self.mult.shape[0]
        if self.mult.shape != (d, d, d):
            raise AlgebraError(f"structure constants must have shape (d,d,d), got {self.mult.shape}")
        self.dim = d
        self.unit = _frozen(np.asarray(unit, dtype=np.int64).reshape(d) % self.p)
        self.radical = _frozen(ffla.as_rows(radical, d) % self.p)
        self.idempotents = _frozen(ffla.as_rows(idempotents, d) % self.p)
        self.name = name
        self.key = _digest(self.p, self.mult, self.unit, self.radical, self.idempotents)
        self._opposite = None
        if check:
            self.validate()

    def __eq__(self, other):
        return isinstance(other, Algebra) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    def __repr__(self):
        return f"Algebra({self.name or 'anon'}, p={self.p}, dim={self.dim})"

    # -- arithmetic ---------------------------------------------------------

    def basis_vector(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=np.int64)
        v[i] = 1
        return v

    def product(self, x, y) -> np.ndarray:
        x = np.asarray(x, dtype=np.int64)
        y = np.asarray(y, dtype=np.int64)
        return np.einsum("i,j,ijk->k", x, y, self.mult) % self.p

    def left_mult(self, x) -> np.ndarray:
        """Matrix of ``y -> x*y``."""
        return np.einsum("i,ijk->kj", np.asarray(x, dtype=np.int64), self.mult) % self.p

    def right_mult(self, x) -> np.ndarray:
        """Matrix of ``y -> y*x``."""
        return np.einsum("j,ijk->ki", np.asarray(x, dtype=np.int64), self.mult) % self.p

    def span_products(self, left: np.ndarray, right: np.ndarray) -> np.ndarray:
        """Canonical basis of span{l*r} for rows l of ``left``, r of ``right``."""
        if left.shape[0] == 0 or right.shape[0] == 0:
            return np.zeros((0, self.dim), dtype=np.int64)
        prods = np.einsum("ai,bj,ijk->abk", left, right, self.mult) % self.p
        return ffla.canonical_basis(prods.reshape(-1, self.dim), self.p, n=self.dim)

    # -- validation ---------------------------------------------------------

    def validate(self) -> None:
        p, c, d = self.p, self.mult, self.dim
        # (b_i b_j) b_k versus b_i (b_j b_k)
        lhs = np.einsum("ijl,lkm->ijkm", c, c) % p
        rhs = np.einsum("jkl,ilm->ijkm", c, c) % p
        bad = np.argwhere(np.any(lhs != rhs, axis=3))
        if bad.size:
            i, j, k = (int(v) for v in bad[0])
            raise AlgebraError(f"multiplication is not associative on basis triple ({i}, {j}, {k})")
        for i in range(d):
            e = self.basis_vector(i)
            if not np.array_equal(self.product(self.unit, e), e) or not np.array_equal(self.product(e, self.unit), e):
                raise AlgebraError(f"unit law fails on basis element {i}")
        self._validate_radical()
        self._validate_idempotents()

    def _validate_radical(self) -> None:
        p, d = self.p, self.dim
        J = ffla.canonical_basis(self.radical, p, n=d)
        full = ffla.identity(d)
        for side, prods in (("left", self.span_products(full, J)), ("right", self.span_products(J, full))):
            if not ffla.in_span(J, prods, p):
                raise AlgebraError(f"radical basis is not a {side} ideal")
        power = J
        for _ in range(d):
            if power.shape[0] == 0:
                break
            power = self.span_products(power, J)
        if power.shape[0]:
            raise AlgebraError("radical basis does not span a nilpotent ideal")

    def _validate_idempotents(self) -> None:
        p, d = self.p, self.dim
        es = self.idempotents
        if es.shape[0] == 0:
            raise AlgebraError("at least one idempotent is required")
        if not np.array_equal(es.sum(axis=0) % p, self.unit):
            raise AlgebraError("idempotents do not sum to the unit")
        J = ffla.canonical_basis(self.radical, p, n=d)
        full = ffla.identity(d)
        for i, e in enumerate(es):
            for j, f in enumerate(es):
                prod = self.product(e, f)
                want = e if i == j else np.zeros(d, dtype=np.int64)
                if not np.array_equal(prod, want):
                    raise AlgebraError(f"idempotents {i},{j}: product is {prod.tolist()}, expected {want.tolist()}")
        for i, e in enumerate(es):
            ei = e.reshape(1, -1)
            eAe = self.span_products(self.span_products(ei, full), ei)
            eJe = self.span_products(self.span_products(ei, J), ei) if J.shape[0] else np.zeros((0, d), dtype=np.int64)
            if eAe.shape[0] - eJe.shape[0] != 1:
                raise AlgebraError(
                    f"idempotent {i} fails the split-basic check: dim eAe - dim eJe = {eAe.shape[0] - eJe.shape[0]}"
                )
            for j, f in enumerate(es):
                if i != j:
                    eAf = self.span_products(self.span_products(ei, full), f.reshape(1, -1))
                    if not ffla.in_span(J, eAf, p):
                        raise AlgebraError(f"e{i} A e{j} is not inside the radical; algebra is not basic")

    # -- derived algebras ---------------------------------------------------

    def opposite(self) -> "Algebra":
        if self._opposite is None:
            op = Algebra(
                self.p,
                np.transpose(self.mult, (1, 0, 2)),
                self.unit,
                self.radical,
                self.idempotents,
                name=(self.name[:-3] if self.name.endswith("^op") else self.name + "^op"),
                check=False,
            )
            op._opposite = self
            self._opposite = op
        return self._opposite

    @cached_property
    def radical_basis(self) -> np.ndarray:
        return ffla.canonical_basis(self.radical, self.p, n=self.dim)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "mult": self.mult.tolist(),
            "unit": self.unit.tolist(),
            "radical": self.radical.tolist(),
            "idempotents": self.idempotents.tolist(),
        }


class Module:
    """Finite-dimensional left module; ``action[i]`` is the matrix of ``b_i``."""

    def __init__(self, algebra: Algebra, action, name: str = "", check: bool = True):
        self.algebra = algebra
        p = algebra.p
        action = np.asarray(action, dtype=np.int64)
        if action.size == 0:
            n = action.shape[1] if action.ndim == 3 else 0
            action = np.zeros((algebra.dim, n, n), dtype=np.int64)
        if action.ndim != 3 or action.shape[0] != algebra.dim or action.shape[1] != action.shape[2]:
            raise ModuleError(f"action must have shape ({algebra.dim}, n, n), got {action.shape}")
        self.action = _frozen(action % p)
        self.dim = action.shape[1]
        self.name = name
        self.key = _digest(algebra.key, self.action)
        if check:
            self.validate()

    def __repr__(self):
        return f"Module({self.name or 'anon'}, dim={self.dim})"

    def __eq__(self, other):
        return isinstance(other, Module) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def p(self) -> int:
        return self.algebra.p

    def act(self, x) -> np.ndarray:
        """Matrix by which the algebra element with coordinates ``x`` acts."""
        return np.einsum("i,ijk->jk", np.asarray(x, dtype=np.int64), self.action) % self.p

    def validate(self) -> None:
        p, A = self.p, self.algebra
        if not np.array_equal(self.act(A.unit), ffla.identity(self.dim)):
            raise ModuleError("the unit does not act as the identity")
        # action_i action_j == sum_k c_ijk action_k
        lhs = np.einsum("iab,jbc->ijac", self.action, self.action) % p
        rhs = np.einsum("ijk,kac->ijac", A.mult, self.action) % p
        bad = np.argwhere(np.any(lhs != rhs, axis=(2, 3)))
        if bad.size:
            i, j = (int(v) for v in bad[0])
            raise ModuleError(f"action does not respect multiplication on basis pair ({i}, {j})")

    def to_dict(self) -> dict:
        return {"action": self.action.tolist()}


class ModuleMorphism:
    """A module homomorphism; ``mat`` has shape ``(target.dim, source.dim)``."""

    def __init__(self, source: Module, target: Module, mat, check: bool = True, meta=None):
        if source.algebra != target.algebra:
            raise MorphismError("source and target live over different algebras")
        self.source = source
        self.target = target
        p = source.p
        mat = np.asarray(mat, dtype=np.int64).reshape(target.dim, source.dim) % p
        self.mat = _frozen(mat)
        self.meta = dict(meta or {})
        if check:
            self.validate()

    def __repr__(self):
        return f"ModuleMorphism({self.source.dim}->{self.target.dim})"

    @property
    def p(self) -> int:
        return self.source.p

    def validate(self) -> None:
        p = self.p
        lhs = np.einsum("ab,ibc->iac", self.mat, self.source.action) % p
        rhs = np.einsum("iab,bc->iac", self.target.action, self.mat) % p
        bad = np.flatnonzero(np.any(lhs != rhs, axis=(1, 2)))
        if bad.size:
            raise MorphismError(f"matrix does not commute with the action of basis element {int(bad[0])}")

    def __matmul__(self, other: "ModuleMorphism") -> "ModuleMorphism":
        if other.target.key != self.source.key:
            raise MorphismError("composition mismatch")
        return ModuleMorphism(other.source, self.target, ffla.matmul(self.mat, other.mat, self.p), check=False)

    def __add__(self, other: "ModuleMorphism") -> "ModuleMorphism":
        return ModuleMorphism(self.source, self.target, (self.mat + other.mat) % self.p, check=False)

    def __sub__(self, other: "ModuleMorphism") -> "ModuleMorphism":
        return ModuleMorphism(self.source, self.target, (self.mat - other.mat) % self.p, check=False)

    def scale(self, c: int) -> "ModuleMorphism":
        return ModuleMorphism(self.source, self.target, (self.mat * c) % self.p, check=False)

    def is_zero(self) -> bool:
        return not np.any(self.mat)

    def rank(self) -> int:
        return ffla.rank(self.mat, self.p)

    def is_monic(self) -> bool:
        return self.rank() == self.source.dim

    def is_epic(self) -> bool:
        return self.rank() == self.target.dim

    def is_iso(self) -> bool:
        return self.source.dim == self.target.dim and self.is_monic()


# -- constructors ---------------------------------------------------------------


def zero_module(algebra: Algebra) -> Module:
    return Module(algebra, np.zeros((algebra.dim, 0, 0), dtype=np.int64), name="0", check=False)


def regular_module(algebra: Algebra) -> Module:
    """A as a left module over itself."""
    action = np.stack([algebra.left_mult(algebra.basis_vector(i)) for i in range(algebra.dim)])
    return Module(algebra, action, name=algebra.name or "A", check=False)


def identity(m: Module) -> ModuleMorphism:
    return ModuleMorphism(m, m, ffla.identity(m.dim), check=False)


def zero_morphism(source: Module, target: Module) -> ModuleMorphism:
    return ModuleMorphism(source, target, ffla.zeros(target.dim, source.dim), check=False)


def submodule(m: Module, rows, name: str = "") -> tuple[Module, ModuleMorphism]:
    """Submodule spanned by ``rows`` (which must be invariant) with its inclusion."""
    p = m.p
    basis = ffla.canonical_basis(ffla.as_rows(rows, m.dim), p, n=m.dim)
    B = basis.T
    k = basis.shape[0]
    action = np.zeros((m.algebra.dim, k, k), dtype=np.int64)
    for i in range(m.algebra.dim):
        sol = ffla.solve(B, ffla.matmul(m.action[i], B, p), p)
        if sol is None:
            raise ModuleError(f"subspace is not invariant under basis element {i}")
        action[i] = sol[0]
    sub = Module(m.algebra, action, name=name, check=False)
    return sub, ModuleMorphism(sub, m, B, check=False)


def quotient(m: Module, rows, name: str = "") -> tuple[Module, ModuleMorphism]:
    """Quotient of ``m`` by the invariant span of ``rows``, with its projection."""
    p = m.p
    W = ffla.canonical_basis(ffla.as_rows(rows, m.dim), p, n=m.dim)
    _, _, piv = ffla.rref(W, p) if W.shape[0] else (W, 0, [])
    nonpiv = [c for c in range(m.dim) if c not in set(piv)]
    proj = np.zeros((len(nonpiv), m.dim), dtype=np.int64)
    for r, c in enumerate(nonpiv):
        proj[r, c] = 1
    for r, c in enumerate(piv):
        proj[:, c] = (-W[r, nonpiv]) % p
    section = np.zeros((m.dim, len(nonpiv)), dtype=np.int64)
    for r, c in enumerate(nonpiv):
        section[c, r] = 1
    if W.shape[0]:
        moved = np.einsum("iab,kb->ika", m.action, W) % p
        if not ffla.in_span(W, ffla.as_rows(moved, m.dim), p):
            raise ModuleError("cannot form a quotient by a non-invariant subspace")
    action = np.einsum("ab,ibc,cd->iad", proj, m.action, section) % p
    q = Module(m.algebra, action, name=name, check=False)
    # linear (not A-linear) section, used to lift elements of the quotient
    return q, ModuleMorphism(m, q, proj, check=False, meta={"section": section})


def direct_sum(ms: list[Module], algebra: Algebra | None = None):
    """Block-diagonal direct sum.

    Returns:
        ``(S, injections, projections)``.
    """
    if not ms:
        if algebra is None:
            raise ModuleError("empty direct sum needs an explicit algebra")
        return zero_module(algebra), [], []
    A = ms[0].algebra
    for m in ms:
        if m.algebra != A:
            raise MorphismError("direct sum over different algebras")
    n = sum(m.dim for m in ms)
    action = np.zeros((A.dim, n, n), dtype=np.int64)
    offsets = np.cumsum([0] + [m.dim for m in ms])
    for m, o in zip(ms, offsets):
        action[:, o : o + m.dim, o : o + m.dim] = m.action
    s = Module(A, action, name="+".join(m.name or "?" for m in ms), check=False)
    inj, proj = [], []
    for m, o in zip(ms, offsets):
        e = np.zeros((n, m.dim), dtype=np.int64)
        e[o : o + m.dim] = ffla.identity(m.dim)
        inj.append(ModuleMorphism(m, s, e, check=False))
        proj.append(ModuleMorphism(s, m, e.T, check=False))
    return s, inj, proj


def block_morphism(source: Module, target: Module, blocks) -> ModuleMorphism:
    """Morphism assembled from a nested list of matrix blocks (rows over target summands)."""
    mat = np.block([[np.asarray(b, dtype=np.int64) for b in row] for row in blocks]) if blocks else None
    if mat is None or mat.size == 0:
        mat = ffla.zeros(target.dim, source.dim)
    return ModuleMorphism(source, target, mat, check=False)


def kernel(f: ModuleMorphism) -> tuple[Module, ModuleMorphism]:
    return submodule(f.source, ffla.kernel_basis(f.mat, f.p), name="ker")


def image(f: ModuleMorphism) -> tuple[Module, ModuleMorphism]:
    return submodule(f.target, ffla.image_basis(f.mat, f.p), name="im")


def cokernel(f: ModuleMorphism) -> tuple[Module, ModuleMorphism]:
    return quotient(f.target, ffla.image_basis(f.mat, f.p), name="coker")


def factor_through_mono(g: ModuleMorphism, mono: ModuleMorphism) -> ModuleMorphism | None:
    """The unique ``h`` with ``mono @ h == g``, or ``None`` if ``g`` misses the image."""
    sol = ffla.solve(mono.mat, g.mat, g.p)
    if sol is None:
        return None
    return ModuleMorphism(g.source, mono.source, sol[0], check=False)


def factor_through_epi(g: ModuleMorphism, epi: ModuleMorphism) -> ModuleMorphism | None:
    """The unique ``h`` with ``h @ epi == g``, or ``None``."""
    sol = ffla.solve(epi.mat.T, g.mat.T, g.p)
    if sol is None:
        return None
    return ModuleMorphism(epi.target, g.target, sol[0].T, check=False)


# -- Hom spaces ----------------------------------------------------------------

_HOM_CACHE: dict[tuple[bytes, bytes], np.ndarray] = {}
_HOM_CACHE_LIMIT = 20000


def hom_matrices(m: Module, n: Module) -> np.ndarray:
    """Canonical basis of Hom_A(m, n) as an array of shape ``(k, n.dim, m.dim)``."""
    if m.algebra != n.algebra:
        raise MorphismError("Hom between modules over different algebras")
    key = (m.key, n.key)
    hit = _HOM_CACHE.get(key)
    if hit is not None:
        return hit
    p = m.p
    a, b = m.dim, n.dim
    if a == 0 or b == 0:
        out = np.zeros((0, b, a), dtype=np.int64)
    else:
        eye_a, eye_b = ffla.identity(a), ffla.identity(b)
        # row-major vec: vec(X M_i) = (I (x) M_i^T) vec X ; vec(N_i X) = (N_i (x) I) vec X
        blocks = [
            (np.kron(eye_b, m.action[i].T) - np.kron(n.action[i], eye_a)) % p
            for i in range(m.algebra.dim)
        ]
        ker = ffla.kernel_basis(np.vstack(blocks), p)
        out = ker.reshape(ker.shape[0], b, a)
    out.flags.writeable = False
    if len(_HOM_CACHE) > _HOM_CACHE_LIMIT:
        _HOM_CACHE.clear()
    _HOM_CACHE[key] = out
    return out


def hom_basis(m: Module, n: Module) -> list[ModuleMorphism]:
    return [ModuleMorphism(m, n, h, check=False) for h in hom_matrices(m, n)]


def hom_dim(m: Module, n: Module) -> int:
    return hom_matrices(m, n).shape[0]


def combine(source: Module, target: Module, basis: np.ndarray, coeffs) -> ModuleMorphism:
    """``sum_i coeffs[i] * basis[i]`` as a morphism."""
    p = source.p
    coeffs = np.asarray(coeffs, dtype=np.int64).reshape(-1)
    if basis.shape[0] == 0:
        return zero_morphism(source, target)
    mat = np.einsum("i,iab->ab", coeffs, basis) % p
    return ModuleMorphism(source, target, mat, check=False)


def lift_through(beta: ModuleMorphism, phi: ModuleMorphism) -> ModuleMorphism | None:
    """Canonical ``theta`` with ``phi @ theta == beta``, or ``None`` if none exists."""
    if beta.target.key != phi.target.key:
        raise MorphismError("lift_through needs beta and phi with a common target")
    p = beta.p
    H = hom_matrices(beta.source, phi.source)
    if H.shape[0] == 0:
        return zero_morphism(beta.source, phi.source) if beta.is_zero() else None
    cols = np.einsum("ab,kbc->kac", phi.mat, H) % p
    sol = ffla.solve(cols.reshape(H.shape[0], -1).T, beta.mat.reshape(-1, 1), p)
    if sol is None:
        return None
    return combine(beta.source, phi.source, H, sol[0])


def extend_through(beta: ModuleMorphism, phi: ModuleMorphism) -> ModuleMorphism | None:
    """Canonical ``g`` with ``g @ phi == beta``, or ``None``."""
    if beta.source.key != phi.source.key:
        raise MorphismError("extend_through needs beta and phi with a common source")
    p = beta.p
    H = hom_matrices(phi.target, beta.target)
    if H.shape[0] == 0:
        return zero_morphism(phi.target, beta.target) if beta.is_zero() else None
    cols = np.einsum("kab,bc->kac", H, phi.mat) % p
    sol = ffla.solve(cols.reshape(H.shape[0], -1).T, beta.mat.reshape(-1, 1), p)
    if sol is None:
        return None
    return combine(phi.target, beta.target, H, sol[0])


# -- duality -------------------------------------------------------------------


def opposite(algebra: Algebra) -> Algebra:
    return algebra.opposite()


def dualize(m: Module) -> Module:
    """Vector-space dual, a left module over the opposite algebra."""
    name = m.name[2:-1] if m.name.startswith("D(") else f"D({m.name})"
    return Module(m.algebra.opposite(), np.transpose(m.action, (0, 2, 1)), name=name, check=False)


def dualize_morphism(f: ModuleMorphism, source: Module | None = None, target: Module | None = None) -> ModuleMorphism:
    """Transpose ``D(f): D(target) -> D(source)``."""
    src = source if source is not None else dualize(f.target)
    tgt = target if target is not None else dualize(f.source)
    return ModuleMorphism(src, tgt, f.mat.T, check=False)


# -- radical layers ------------------------------------------------------------


def radical_submodule(m: Module) -> np.ndarray:
    """Canonical basis (rows) of J*M."""
    A, p = m.algebra, m.p
    J = A.radical_basis
    if J.shape[0] == 0 or m.dim == 0:
        return np.zeros((0, m.dim), dtype=np.int64)
    cols = np.hstack([m.act(r) for r in J])
    return ffla.image_basis(cols, p)


def socle(m: Module) -> np.ndarray:
    """Canonical basis (rows) of {v : J v = 0}."""
    A, p = m.algebra, m.p
    J = A.radical_basis
    if J.shape[0] == 0:
        return ffla.identity(m.dim)
    return ffla.kernel_basis(np.vstack([m.act(r) for r in J]), p)


def projective_module(algebra: Algebra, i: int) -> Module:
    """Indecomposable projective A*e_i."""
    reg = regular_module(algebra)
    rows = ffla.image_basis(algebra.right_mult(algebra.idempotents[i]), algebra.p)
    mod, _ = submodule(reg, rows, name=f"P{i}")
    return mod


def projective_basis_in_algebra(algebra: Algebra, i: int) -> np.ndarray:
    return ffla.image_basis(algebra.right_mult(algebra.idempotents[i]), algebra.p)


def injective_module(algebra: Algebra, i: int) -> Module:
    """Indecomposable injective D(e_i*A), built from the opposite algebra's projective."""
    m = dualize(projective_module(algebra.opposite(), i))
    m.name = f"I{i}"
    return m


def simple_module(algebra: Algebra, i: int) -> Module:
    """Top of A*e_i (one-dimensional for split basic algebras)."""
    P = projective_module(algebra, i)
    S, _ = quotient(P, radical_submodule(P), name=f"S{i}")
    return S
