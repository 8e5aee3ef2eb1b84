"""Approximation classes of modules and their precovers, preenvelopes and resolutions."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import ffla
from .algmod import (
    Algebra,
    Module,
    ModuleMorphism,
    cokernel,
    direct_sum,
    dualize,
    hom_dim,
    hom_matrices,
    identity,
    injective_module,
    kernel,
    lift_through,
    projective_basis_in_algebra,
    projective_module,
    quotient,
    radical_submodule,
    socle,
    submodule,
    zero_module,
    zero_morphism,
)


class ApproximationError(RuntimeError):
    pass


class NotMonic(ApproximationError):
    """No monic precover (or epic preenvelope) exists for this module in the class."""


PROJECTIVES = "projectives"
INJECTIVES = "injectives"
ADD = "add"


@dataclass(frozen=True, eq=False)
class ClassDescriptor:
    """The class X: all projectives, all injectives, or add(generators)."""

    kind: str
    gens: tuple = ()

    def __post_init__(self):
        if self.kind not in (PROJECTIVES, INJECTIVES, ADD):
            raise ValueError(f"unknown class kind {self.kind!r}")
        if self.kind == ADD:
            if not self.gens:
                raise ValueError("AddClosure needs at least one generator")
            A = self.gens[0].algebra
            if any(g.algebra != A for g in self.gens):
                raise ValueError("AddClosure generators must share an algebra")

    def __repr__(self):
        if self.kind == ADD:
            return f"Add{{{', '.join(g.name or '?' for g in self.gens)}}}"
        return self.kind.capitalize()

    def generators(self, algebra: Algebra) -> list[Module]:
        if self.kind == PROJECTIVES:
            return [projective_module(algebra, i) for i in range(len(algebra.idempotents))]
        if self.kind == INJECTIVES:
            return [injective_module(algebra, i) for i in range(len(algebra.idempotents))]
        if self.gens[0].algebra != algebra:
            raise ValueError("class generators live over a different algebra")
        return list(self.gens)

    def dual(self) -> "ClassDescriptor":
        """The class D(X) over the opposite algebra."""
        if self.kind == PROJECTIVES:
            return Injectives()
        if self.kind == INJECTIVES:
            return Projectives()
        return AddClosure([dualize(g) for g in self.gens])

    def describe(self) -> dict:
        out = {"kind": self.kind}
        if self.kind == ADD:
            out["generators"] = [g.name for g in self.gens]
        return out


def Projectives() -> ClassDescriptor:
    return ClassDescriptor(PROJECTIVES)


def Injectives() -> ClassDescriptor:
    return ClassDescriptor(INJECTIVES)


def AddClosure(generators) -> ClassDescriptor:
    return ClassDescriptor(ADD, tuple(generators))


def warn_if_not_extension_closed(cls: ClassDescriptor) -> bool:
    """AddClosure classes are not known to be extension closed; warn and report it."""
    if cls.kind == ADD:
        warnings.warn(f"{cls!r} is not known to be extension closed; cover status must be verified", stacklevel=2)
        return True
    return False


# -- projective covers and injective envelopes ---------------------------------------


def projective_cover(m: Module) -> ModuleMorphism:
    """Projective cover P -> M built from the top of M and the idempotents.

    The returned morphism carries ``meta["superfluous_kernel"] = True`` once
    ``ker(phi)`` has been checked to lie in ``J*P``.
    """
    A, p = m.algebra, m.p
    if m.dim == 0:
        z = zero_module(A)
        return ModuleMorphism(z, m, ffla.zeros(0, 0), check=False, meta={"superfluous_kernel": True})
    top, proj = quotient(m, radical_submodule(m))
    section = proj.meta["section"]
    pieces, columns = [], []
    for i, e in enumerate(A.idempotents):
        tops = ffla.image_basis(top.act(e), p)
        if tops.shape[0] == 0:
            continue
        Pi = projective_module(A, i)
        basis_in_A = projective_basis_in_algebra(A, i)
        for u in tops:
            v = ffla.matmul(m.act(e), ffla.matmul(section, u.reshape(-1, 1), p), p)
            cols = [ffla.matmul(m.act(w), v, p) for w in basis_in_A]
            pieces.append(Pi)
            columns.append(np.hstack(cols))
    P, _, _ = direct_sum(pieces)
    phi = ModuleMorphism(P, m, np.hstack(columns), check=True)
    if not phi.is_epic():
        raise ApproximationError("lifted top does not generate the module; idempotent or radical data is inconsistent")
    ker_rows = ffla.kernel_basis(phi.mat, p)
    ok = ffla.in_span(radical_submodule(P), ker_rows, p) if ker_rows.shape[0] else True
    if not ok:
        raise ApproximationError("projective cover kernel is not superfluous")
    phi.meta["superfluous_kernel"] = True
    return phi


def injective_envelope(m: Module) -> ModuleMorphism:
    """Injective envelope M -> I as the dual of a projective cover over A^op.

    Carries ``meta["essential_image"]`` (socle of I inside the image).
    """
    cover = projective_cover(dualize(m))
    target = dualize(cover.source)
    env = ModuleMorphism(m, target, cover.mat.T, check=False)
    soc = socle(target)
    img = ffla.image_basis(env.mat, m.p)
    env.meta["essential_image"] = ffla.in_span(img, soc, m.p) if soc.shape[0] else True
    if not env.meta["essential_image"]:
        raise ApproximationError("injective envelope image is not essential")
    return env


# -- evaluation maps --------------------------------------------------------------


def _copies_into(gens: list[Module], m: Module) -> list[tuple[int, np.ndarray]]:
    return [(i, h) for i, g in enumerate(gens) for h in hom_matrices(g, m)]


def _spans(vectors: list[np.ndarray], dim: int, p: int) -> bool:
    if dim == 0:
        return True
    if not vectors:
        return False
    return ffla.rank(np.vstack(vectors), p) == dim


def evaluation_map(gens: list[Module], m: Module, minimize: bool = True) -> ModuleMorphism:
    """``sum_i G_i^(dim Hom(G_i, M)) -> M`` assembled from canonical Hom bases.

    With ``minimize`` copies are dropped greedily (last first) while every
    Hom(G_j, -) stays surjective, so the result is still a precover.
    """
    p = m.p
    copies = _copies_into(gens, m)
    if minimize and copies:
        # contrib[j][c]: vectors h_c u for u in Hom(G_j, G_i(c))
        contrib = []
        for gj in gens:
            row = []
            for i, h in copies:
                U = hom_matrices(gj, gens[i])
                row.append([(ffla.matmul(h, u, p)).reshape(-1) for u in U])
            contrib.append(row)
        targets = [hom_dim(gj, m) for gj in gens]
        keep = list(range(len(copies)))
        for c in reversed(range(len(copies))):
            trial = [k for k in keep if k != c]
            if all(_spans([v for k in trial for v in contrib[j][k]], targets[j], p) for j in range(len(gens))):
                keep = trial
        copies = [copies[k] for k in keep]
    if not copies:
        return zero_morphism(zero_module(m.algebra), m)
    E, _, _ = direct_sum([gens[i] for i, _ in copies])
    return ModuleMorphism(E, m, np.hstack([h for _, h in copies]), check=False, meta={"minimal": False})


def coevaluation_map(gens: list[Module], m: Module, minimize: bool = True) -> ModuleMorphism:
    """``M -> sum_i G_i^(dim Hom(M, G_i))``; dual of :func:`evaluation_map`."""
    p = m.p
    copies = [(i, h) for i, g in enumerate(gens) for h in hom_matrices(m, g)]
    if minimize and copies:
        contrib = []
        for gj in gens:
            row = []
            for i, h in copies:
                U = hom_matrices(gens[i], gj)
                row.append([(ffla.matmul(u, h, p)).reshape(-1) for u in U])
            contrib.append(row)
        targets = [hom_dim(m, gj) for gj in gens]
        keep = list(range(len(copies)))
        for c in reversed(range(len(copies))):
            trial = [k for k in keep if k != c]
            if all(_spans([v for k in trial for v in contrib[j][k]], targets[j], p) for j in range(len(gens))):
                keep = trial
        copies = [copies[k] for k in keep]
    if not copies:
        return zero_morphism(m, zero_module(m.algebra))
    E, _, _ = direct_sum([gens[i] for i, _ in copies])
    return ModuleMorphism(m, E, np.vstack([h for _, h in copies]), check=False, meta={"minimal": False})


# -- membership and approximations ---------------------------------------------------


def member(cls: ClassDescriptor, m: Module) -> bool:
    """Whether ``m`` lies in the class (split-epimorphism test)."""
    if m.dim == 0:
        return True
    if cls.kind == INJECTIVES:
        return member(Projectives(), dualize(m))
    if cls.kind == PROJECTIVES:
        phi = projective_cover(m)
    else:
        phi = evaluation_map(cls.generators(m.algebra), m)
    return lift_through(identity(m), phi) is not None


def precover(cls: ClassDescriptor, m: Module) -> ModuleMorphism:
    """An X-precover E -> M (projective cover for Projectives)."""
    if cls.kind == PROJECTIVES:
        phi = projective_cover(m)
        phi.meta["minimal"] = True
        return phi
    return evaluation_map(cls.generators(m.algebra), m)


def preenvelope(cls: ClassDescriptor, m: Module, route: str = "direct") -> ModuleMorphism:
    """An X-preenvelope M -> E.

    ``route="direct"`` uses the injective envelope or a co-evaluation map;
    ``route="dual"`` dualizes a precover of D(M) over the opposite algebra.
    """
    if route == "dual":
        pc = precover(cls.dual(), dualize(m))
        out = ModuleMorphism(m, dualize(pc.source), pc.mat.T, check=False, meta=dict(pc.meta))
        return out
    if route != "direct":
        raise ValueError(f"unknown route {route!r}")
    if cls.kind == INJECTIVES:
        env = injective_envelope(m)
        env.meta["minimal"] = True
        return env
    return coevaluation_map(cls.generators(m.algebra), m)


def monic_precover(cls: ClassDescriptor, m: Module) -> ModuleMorphism:
    """The inclusion of the X-trace of M, provided the trace lies in X.

    Any monic precover must be this inclusion, so :class:`NotMonic` is a
    genuine non-existence result.
    """
    if member(cls, m):
        return identity(m)
    ev = precover(cls, m)
    rows = ffla.image_basis(ev.mat, m.p)
    tr, inc = submodule(m, rows, name=f"tr({m.name})")
    if not member(cls, tr):
        raise NotMonic(f"trace of the class in {m.name or 'module'} (dim {tr.dim}) is not in the class")
    return inc


def epic_preenvelope(cls: ClassDescriptor, m: Module) -> ModuleMorphism:
    """Projection onto M / (intersection of kernels of maps into X), if that lies in X."""
    if member(cls, m):
        return identity(m)
    co = preenvelope(cls, m)
    q, proj = quotient(m, ffla.kernel_basis(co.mat, m.p), name=f"rej({m.name})")
    if not member(cls, q):
        raise NotMonic(f"reject quotient of {m.name or 'module'} (dim {q.dim}) is not in the class")
    return proj


def certify_precover(cls: ClassDescriptor, phi: ModuleMorphism) -> bool:
    """Hom(G, E) -> Hom(G, M) is onto for every generator G."""
    p = phi.p
    for g in cls.generators(phi.target.algebra):
        H = hom_matrices(g, phi.source)
        target = hom_dim(g, phi.target)
        vecs = [ffla.matmul(phi.mat, h, p).reshape(-1) for h in H]
        if not _spans(vecs, target, p):
            return False
    return True


def certify_preenvelope(cls: ClassDescriptor, phi: ModuleMorphism) -> bool:
    """Hom(E, G) -> Hom(M, G) is onto for every generator G."""
    p = phi.p
    for g in cls.generators(phi.source.algebra):
        H = hom_matrices(phi.target, g)
        target = hom_dim(phi.source, g)
        vecs = [ffla.matmul(h, phi.mat, p).reshape(-1) for h in H]
        if not _spans(vecs, target, p):
            return False
    return True


def postcompose_rank(g: Module, f: ModuleMorphism) -> int:
    """Rank of ``f_*: Hom(G, source) -> Hom(G, target)``."""
    H = hom_matrices(g, f.source)
    if H.shape[0] == 0:
        return 0
    return ffla.rank(np.einsum("ab,kbc->kac", f.mat, H).reshape(H.shape[0], -1) % f.p, f.p)


def precompose_rank(f: ModuleMorphism, g: Module) -> int:
    """Rank of ``f^*: Hom(target, G) -> Hom(source, G)``."""
    H = hom_matrices(f.target, g)
    if H.shape[0] == 0:
        return 0
    return ffla.rank(np.einsum("kab,bc->kac", H, f.mat).reshape(H.shape[0], -1) % f.p, f.p)


# -- resolvents ---------------------------------------------------------------


@dataclass
class Resolvent:
    """A proper X-resolution ``E_depth -> ... -> E_0 -> M`` (or its dual coresolution).

    ``maps[0]`` is the augmentation and ``maps[i]`` the differential out of
    ``E_i`` (into ``E_{i-1}``) for a resolvent.  For a coresolvent the
    arrows point the other way: ``maps[0]: M -> E_0`` and
    ``maps[i]: E_{i-1} -> E_i``.  ``kernels[i]`` holds the stage kernel
    (or cokernel) and its inclusion (or projection).
    """

    target: Module
    terms: list
    maps: list
    kernels: list
    stage_maps: list
    minimal: bool
    depth: int
    co: bool = False
    notes: list = field(default_factory=list)

    def hom_exact(self, g: Module) -> list[bool]:
        """Exactness flags after applying Hom(G, -) (or Hom(-, G) for coresolvents).

        Entry 0 is surjectivity onto Hom(G, M); entry i+1 is exactness at E_i
        for i < depth.
        """
        out = []
        if not self.co:
            out.append(postcompose_rank(g, self.maps[0]) == hom_dim(g, self.target))
            for i in range(self.depth):
                dim_ker = hom_dim(g, self.terms[i]) - postcompose_rank(g, self.maps[i])
                out.append(postcompose_rank(g, self.maps[i + 1]) == dim_ker)
        else:
            out.append(precompose_rank(self.maps[0], g) == hom_dim(self.target, g))
            for i in range(self.depth):
                dim_ker = hom_dim(self.terms[i], g) - precompose_rank(self.maps[i], g)
                out.append(precompose_rank(self.maps[i + 1], g) == dim_ker)
        return out


def resolvent(cls: ClassDescriptor, m: Module, depth: int) -> Resolvent:
    """Iterated precovers of successive kernels, terms ``E_0..E_depth``."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    terms, maps, kernels, stages = [], [], [], []
    current, incl = m, identity(m)
    for i in range(depth + 1):
        phi = precover(cls, current)
        terms.append(phi.source)
        stages.append(phi)
        maps.append(incl @ phi)
        K, k_incl = kernel(phi)
        kernels.append((K, k_incl))
        current, incl = K, k_incl
    return Resolvent(m, terms, maps, kernels, stages, minimal=(cls.kind == PROJECTIVES), depth=depth)


def coresolvent(cls: ClassDescriptor, m: Module, depth: int) -> Resolvent:
    """Iterated preenvelopes of successive cokernels, terms ``E_0..E_depth``."""
    if depth < 0:
        raise ValueError("depth must be >= 0")
    terms, maps, cokernels, stages = [], [], [], []
    current, proj = m, identity(m)
    for i in range(depth + 1):
        psi = preenvelope(cls, current)
        terms.append(psi.target)
        stages.append(psi)
        maps.append(psi @ proj)
        C, c_proj = cokernel(psi)
        cokernels.append((C, c_proj))
        current, proj = C, c_proj
    return Resolvent(m, terms, maps, cokernels, stages, minimal=(cls.kind == INJECTIVES), depth=depth, co=True)
