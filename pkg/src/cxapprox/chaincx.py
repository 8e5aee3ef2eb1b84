"""Finitely supported chain complexes of modules and chain maps between them.

Grading is homological: ``d_n: C_n -> C_{n-1}``.  A cochain complex
``C^0 -> C^1 -> ...`` is stored with ``C_{-n} = C^n``.

Complexes produced from truncated resolutions carry ``known_above`` /
``known_below``: the last degree whose module is the genuine one.  Degrees
past those markers are absent because of truncation, not because they vanish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import ffla
from .algmod import (
    Algebra,
    Module,
    ModuleMorphism,
    MorphismError,
    direct_sum,
    dualize,
    hom_matrices,
    identity,
    kernel,
    cokernel,
    factor_through_mono,
    factor_through_epi,
    zero_module,
    zero_morphism,
)
from .approx import ClassDescriptor, member


class ComplexError(ValueError):
    pass


class WindowError(ValueError):
    """A requested degree range reaches past what a truncated complex represents."""


class Complex:
    """A chain complex supported on the window ``[lo, hi]``.

    Args:
        algebra: the algebra all modules live over.
        modules: degree -> module.
        diffs: degree n -> matrix (or morphism) ``C_n -> C_{n-1}``; missing ones are zero.
    """

    def __init__(self, algebra: Algebra, modules: dict, diffs: dict | None = None, name: str = "",
                 known_above: int | None = None, known_below: int | None = None, check: bool = True):
        self.algebra = algebra
        self.name = name
        mods = {int(n): m for n, m in modules.items() if m.dim > 0}
        for m in mods.values():
            if m.algebra != algebra:
                raise ComplexError("module over a different algebra")
        if mods:
            self.lo, self.hi = min(mods), max(mods)
        else:
            self.lo, self.hi = 0, -1
        self._zero = zero_module(algebra)
        self._modules = {n: mods.get(n, self._zero) for n in range(self.lo, self.hi + 1)}
        self._diffs: dict[int, ModuleMorphism] = {}
        for n, d in (diffs or {}).items():
            n = int(n)
            src, tgt = self.module(n), self.module(n - 1)
            mat = d.mat if isinstance(d, ModuleMorphism) else d
            mat = np.asarray(mat, dtype=np.int64).reshape(tgt.dim, src.dim) % algebra.p
            if src.dim and tgt.dim:
                self._diffs[n] = ModuleMorphism(src, tgt, mat, check=check)
        self.known_above = known_above
        self.known_below = known_below
        if check:
            self.validate()

    def __repr__(self):
        dims = {n: m.dim for n, m in self._modules.items()}
        return f"Complex({self.name or 'anon'}, {dims})"

    @property
    def p(self) -> int:
        return self.algebra.p

    @property
    def degrees(self) -> range:
        return range(self.lo, self.hi + 1)

    def is_zero(self) -> bool:
        return self.hi < self.lo

    def module(self, n: int) -> Module:
        return self._modules.get(n, self._zero)

    def d(self, n: int) -> ModuleMorphism:
        f = self._diffs.get(n)
        if f is None:
            return zero_morphism(self.module(n), self.module(n - 1))
        return f

    def dims(self) -> dict[int, int]:
        return {n: self.module(n).dim for n in self.degrees}

    def validate(self) -> None:
        p = self.p
        for n in range(self.lo + 1, self.hi + 1):
            dd = ffla.matmul(self.d(n - 1).mat, self.d(n).mat, p)
            if np.any(dd):
                raise ComplexError(f"d_{n - 1} d_{n} != 0")

    def renamed(self, name: str) -> "Complex":
        return Complex(self.algebra, dict(self._modules), dict(self._diffs), name=name,
                       known_above=self.known_above, known_below=self.known_below, check=False)

    def with_markers(self, known_above=None, known_below=None) -> "Complex":
        return Complex(self.algebra, dict(self._modules), dict(self._diffs), name=self.name,
                       known_above=known_above, known_below=known_below, check=False)

    def to_dict(self) -> dict:
        return {
            "dims": {str(n): self.module(n).dim for n in self.degrees},
            "differentials": {str(n): self.d(n).mat.tolist() for n in range(self.lo + 1, self.hi + 1)},
        }


class ChainMap:
    """Degree-preserving chain map; ``components[n]: source_n -> target_n``."""

    def __init__(self, source: Complex, target: Complex, components: dict, check: bool = True):
        if source.algebra != target.algebra:
            raise MorphismError("chain map between complexes over different algebras")
        self.source = source
        self.target = target
        self._comps: dict[int, ModuleMorphism] = {}
        for n, f in components.items():
            n = int(n)
            s, t = source.module(n), target.module(n)
            if s.dim == 0 or t.dim == 0:
                continue
            mat = f.mat if isinstance(f, ModuleMorphism) else f
            self._comps[n] = ModuleMorphism(s, t, np.asarray(mat, dtype=np.int64).reshape(t.dim, s.dim), check=check)
        if check:
            self.validate()

    def __repr__(self):
        return f"ChainMap({self.source.name or 'src'} -> {self.target.name or 'tgt'})"

    @property
    def p(self) -> int:
        return self.source.p

    @property
    def degrees(self) -> range:
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return range(lo, hi + 1)

    def __getitem__(self, n: int) -> ModuleMorphism:
        f = self._comps.get(n)
        if f is None:
            return zero_morphism(self.source.module(n), self.target.module(n))
        return f

    def validate(self) -> None:
        p = self.p
        for n in range(self.degrees.start, self.degrees.stop + 1):
            lhs = ffla.matmul(self[n - 1].mat, self.source.d(n).mat, p)
            rhs = ffla.matmul(self.target.d(n).mat, self[n].mat, p)
            if not np.array_equal(lhs, rhs):
                raise ComplexError(f"square at degree {n} does not commute")

    def __matmul__(self, other: "ChainMap") -> "ChainMap":
        comps = {n: self[n] @ other[n] for n in other.source.degrees if other.source.module(n).dim}
        return ChainMap(other.source, self.target, comps, check=False)

    def __add__(self, other: "ChainMap") -> "ChainMap":
        return ChainMap(self.source, self.target, {n: self[n] + other[n] for n in self.degrees}, check=False)

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        return ChainMap(self.source, self.target, {n: self[n] - other[n] for n in self.degrees}, check=False)

    def is_zero(self) -> bool:
        return all(f.is_zero() for f in self._comps.values())

    def is_monic(self) -> bool:
        return all(self[n].is_monic() for n in self.source.degrees)

    def is_epic(self) -> bool:
        return all(self[n].is_epic() for n in self.target.degrees)

    def is_iso(self) -> bool:
        return all(self[n].is_iso() for n in self.degrees)

    def flatten(self, degrees=None) -> np.ndarray:
        degrees = self.degrees if degrees is None else degrees
        parts = [self[n].mat.reshape(-1) for n in degrees]
        return np.concatenate(parts) if parts else np.zeros(0, dtype=np.int64)

    def to_dict(self) -> dict:
        return {str(n): self[n].mat.tolist() for n in self.degrees}


# -- basic complexes --------------------------------------------------------------


def zero_complex(algebra: Algebra) -> Complex:
    return Complex(algebra, {}, name="0")


def stalk(m: Module, n: int = 0) -> Complex:
    return Complex(m.algebra, {n: m}, name=f"{m.name}[{n}]")


def disk(m: Module, n: int) -> Complex:
    """``m --id--> m`` in degrees ``n, n-1``."""
    return Complex(m.algebra, {n: m, n - 1: m}, {n: ffla.identity(m.dim)}, name=f"disk({m.name},{n})")


def identity_map(x: Complex) -> ChainMap:
    return ChainMap(x, x, {n: identity(x.module(n)) for n in x.degrees}, check=False)


def zero_map(x: Complex, y: Complex) -> ChainMap:
    return ChainMap(x, y, {}, check=False)


def truncate_window(x: Complex, lo: int, hi: int) -> Complex:
    """Brutal truncation keeping degrees in ``[lo, hi]``."""
    mods = {n: x.module(n) for n in x.degrees if lo <= n <= hi}
    diffs = {n: x.d(n) for n in range(lo + 1, hi + 1) if n in mods and n - 1 in mods}
    return Complex(x.algebra, mods, diffs, name=f"{x.name}[{lo},{hi}]", check=False)


def truncate(x: Complex, n: int) -> Complex:
    """``X(n)``: degrees ``0..n`` (a subcomplex when X lives in degrees >= 0)."""
    return truncate_window(x, 0, n)


def tower_truncation(x: Complex, n: int) -> Complex:
    """``Y^n``: degrees ``>= -n`` (a quotient complex of X)."""
    return truncate_window(x, -n, max(x.hi, -n))


def window_inclusion(sub: Complex, x: Complex) -> ChainMap:
    """Degreewise identity from a brutal truncation back into ``x`` (chain map only for lower windows)."""
    return ChainMap(sub, x, {n: identity(x.module(n)) for n in sub.degrees}, check=False)


def shift(x: Complex, k: int) -> Complex:
    """``X[k]_n = X_{n+k}`` with differential ``(-1)^k d``."""
    sign = -1 if k % 2 else 1
    mods = {n - k: x.module(n) for n in x.degrees}
    diffs = {n - k: (sign * x.d(n).mat) % x.p for n in range(x.lo + 1, x.hi + 1)}
    ka = None if x.known_above is None else x.known_above - k
    kb = None if x.known_below is None else x.known_below - k
    return Complex(x.algebra, mods, diffs, name=f"{x.name}[{k}]", known_above=ka, known_below=kb, check=False)


def direct_sum_complex(xs: list[Complex], algebra: Algebra | None = None) -> Complex:
    A = algebra or xs[0].algebra
    if not xs:
        return zero_complex(A)
    lo = min(x.lo for x in xs if not x.is_zero()) if any(not x.is_zero() for x in xs) else 0
    hi = max(x.hi for x in xs if not x.is_zero()) if any(not x.is_zero() for x in xs) else -1
    mods, diffs = {}, {}
    for n in range(lo, hi + 1):
        mods[n] = direct_sum([x.module(n) for x in xs], A)[0]
    for n in range(lo + 1, hi + 1):
        blocks = []
        for i, xi in enumerate(xs):
            row = []
            for j, xj in enumerate(xs):
                if i == j:
                    row.append(xi.d(n).mat)
                else:
                    row.append(np.zeros((xi.module(n - 1).dim, xj.module(n).dim), dtype=np.int64))
            blocks.append(row)
        diffs[n] = np.block(blocks) if blocks else np.zeros((0, 0), dtype=np.int64)
    return Complex(A, mods, diffs, name="+".join(x.name for x in xs), check=False)


def cone(nu: ChainMap, flavor: str = "chain"):
    """Mapping cone of ``nu: S -> T``.

    ``flavor="chain"``: ``C_n = T_n + S_{n-1}`` with ``(x, y) -> (d x + nu y, -d y)``;
    returns ``(C, inclusion T -> C, trace)``.

    ``flavor="cochain"``: ``C_n = S_n + T_{n+1}`` with ``(x, y) -> (d x, nu x - d y)``,
    the transpose of the chain flavour; returns ``(C, projection C -> S, trace)``.
    """
    S, T = nu.source, nu.target
    A, p = S.algebra, S.p
    trace = []
    if flavor == "chain":
        lo = min(T.lo, S.lo + 1) if not (S.is_zero() and T.is_zero()) else 0
        hi = max(T.hi, S.hi + 1) if not (S.is_zero() and T.is_zero()) else -1
        mods = {n: direct_sum([T.module(n), S.module(n - 1)], A)[0] for n in range(lo, hi + 1)}
        diffs = {}
        for n in range(lo + 1, hi + 1):
            top = [T.d(n).mat, nu[n - 1].mat]
            bottom = [np.zeros((S.module(n - 2).dim, T.module(n).dim), dtype=np.int64), (-S.d(n - 1).mat) % p]
            diffs[n] = np.block([top, bottom]) % p
            trace.append({"degree": n, "formula": "(x, y) -> (d x + nu y, -d y)"})
        C = Complex(A, mods, diffs, name=f"cone({nu.source.name}->{nu.target.name})", check=True)
        inc = {}
        for n in T.degrees:
            inc[n] = np.vstack([ffla.identity(T.module(n).dim), np.zeros((S.module(n - 1).dim, T.module(n).dim), dtype=np.int64)])
        return C, ChainMap(T, C, inc, check=False), trace
    if flavor == "cochain":
        lo = min(S.lo, T.lo - 1) if not (S.is_zero() and T.is_zero()) else 0
        hi = max(S.hi, T.hi - 1) if not (S.is_zero() and T.is_zero()) else -1
        mods = {n: direct_sum([S.module(n), T.module(n + 1)], A)[0] for n in range(lo, hi + 1)}
        diffs = {}
        for n in range(lo + 1, hi + 1):
            top = [S.d(n).mat, np.zeros((S.module(n - 1).dim, T.module(n + 1).dim), dtype=np.int64)]
            bottom = [nu[n].mat, (-T.d(n + 1).mat) % p]
            diffs[n] = np.block([top, bottom]) % p
            trace.append({"degree": n, "formula": "(x, y) -> (d x, nu x - d y)"})
        C = Complex(A, mods, diffs, name=f"cocone({nu.source.name}->{nu.target.name})", check=True)
        proj = {}
        for n in S.degrees:
            proj[n] = np.hstack([ffla.identity(S.module(n).dim), np.zeros((S.module(n).dim, T.module(n + 1).dim), dtype=np.int64)])
        return C, ChainMap(C, S, proj, check=False), trace
    raise ValueError(f"unknown cone flavor {flavor!r}")


# -- kernels, cokernels, duality ----------------------------------------------------------


def kernel_complex(f: ChainMap) -> tuple[Complex, ChainMap]:
    """Degreewise kernel of ``f`` with its inclusion."""
    mods, incs = {}, {}
    for n in f.source.degrees:
        K, inc = kernel(f[n])
        mods[n], incs[n] = K, inc
    diffs = {}
    for n in f.source.degrees:
        if n - 1 in incs and mods[n].dim and mods[n - 1].dim:
            g = f.source.d(n) @ incs[n]
            h = factor_through_mono(g, incs[n - 1])
            diffs[n] = h.mat
    src = f.source
    K = Complex(src.algebra, mods, diffs, name="ker", known_above=src.known_above, known_below=src.known_below, check=False)
    return K, ChainMap(K, src, {n: incs[n] for n in K.degrees}, check=False)


def cokernel_complex(f: ChainMap) -> tuple[Complex, ChainMap]:
    """Degreewise cokernel of ``f`` with its projection."""
    mods, projs = {}, {}
    for n in f.target.degrees:
        Q, pr = cokernel(f[n])
        mods[n], projs[n] = Q, pr
    diffs = {}
    for n in f.target.degrees:
        if n - 1 in projs and mods[n].dim and mods[n - 1].dim:
            g = projs[n - 1] @ f.target.d(n)
            diffs[n] = factor_through_epi(g, projs[n]).mat
    tgt = f.target
    Q = Complex(tgt.algebra, mods, diffs, name="coker", known_above=tgt.known_above, known_below=tgt.known_below, check=False)
    return Q, ChainMap(tgt, Q, {n: projs[n] for n in Q.degrees}, check=False)


def dualize_complex(x: Complex) -> Complex:
    """``D(X)_n = D(X_{-n})``, differential the transpose of ``d_{-n+1}``."""
    mods = {-n: dualize(x.module(n)) for n in x.degrees}
    diffs = {-n + 1: x.d(n).mat.T for n in range(x.lo + 1, x.hi + 1)}
    ka = None if x.known_below is None else -x.known_below
    kb = None if x.known_above is None else -x.known_above
    name = x.name[2:-1] if x.name.startswith("D(") else f"D({x.name})"
    return Complex(x.algebra.opposite(), mods, diffs, name=name, known_above=ka, known_below=kb, check=False)


def dualize_chain_map(f: ChainMap, source: Complex | None = None, target: Complex | None = None) -> ChainMap:
    """``D(f): D(target) -> D(source)``."""
    src = source if source is not None else dualize_complex(f.target)
    tgt = target if target is not None else dualize_complex(f.source)
    return ChainMap(src, tgt, {-n: f[n].mat.T for n in f.degrees}, check=False)


# -- chain map spaces -------------------------------------------------------------------


@dataclass
class ChainMapSpace:
    """Basis of degree-0 chain maps A -> X in flattened coordinates.

    ``basis`` rows are concatenations over ``degrees`` of row-major component
    matrices.
    """

    source: Complex
    target: Complex
    degrees: list
    basis: np.ndarray

    @property
    def dim(self) -> int:
        return self.basis.shape[0]

    def unflatten(self, vec) -> ChainMap:
        comps, pos = {}, 0
        for n in self.degrees:
            r, c = self.target.module(n).dim, self.source.module(n).dim
            comps[n] = np.asarray(vec[pos : pos + r * c], dtype=np.int64).reshape(r, c)
            pos += r * c
        return ChainMap(self.source, self.target, comps, check=False)

    def maps(self) -> list[ChainMap]:
        return [self.unflatten(v) for v in self.basis]


def _common_degrees(a: Complex, x: Complex) -> list[int]:
    return [n for n in a.degrees if x.module(n).dim and a.module(n).dim]


def chain_map_space(a: Complex, x: Complex) -> ChainMapSpace:
    """All chain maps A -> X: solve commutation of every square over Hom bases."""
    if a.algebra != x.algebra:
        raise MorphismError("chain maps between complexes over different algebras")
    p = a.p
    degs = _common_degrees(a, x)
    H = {n: hom_matrices(a.module(n), x.module(n)) for n in degs}
    offs, total = {}, 0
    for n in degs:
        offs[n] = total
        total += H[n].shape[0]
    flat_len = sum(x.module(n).dim * a.module(n).dim for n in degs)
    if total == 0:
        return ChainMapSpace(a, x, degs, np.zeros((0, flat_len), dtype=np.int64))
    rows = []
    # square at degree n: d^X_n f_n - f_{n-1} d^A_n = 0, as a map A_n -> X_{n-1}
    for n in range(min(degs), max(degs) + 2):
        src, tgt = a.module(n), x.module(n - 1)
        if src.dim == 0 or tgt.dim == 0:
            continue
        block = np.zeros((tgt.dim * src.dim, total), dtype=np.int64)
        if n in H and H[n].shape[0]:
            vals = np.einsum("ab,kbc->kac", x.d(n).mat, H[n]) % p
            block[:, offs[n] : offs[n] + H[n].shape[0]] = vals.reshape(H[n].shape[0], -1).T
        if n - 1 in H and H[n - 1].shape[0]:
            vals = np.einsum("kab,bc->kac", H[n - 1], a.d(n).mat) % p
            block[:, offs[n - 1] : offs[n - 1] + H[n - 1].shape[0]] = (-vals.reshape(H[n - 1].shape[0], -1).T) % p
        if np.any(block):
            rows.append(block)
    if rows:
        coeffs = ffla.kernel_basis(np.vstack(rows), p)
    else:
        coeffs = ffla.identity(total)
    flat = np.zeros((coeffs.shape[0], flat_len), dtype=np.int64)
    pos = 0
    for n in degs:
        k = H[n].shape[0]
        size = x.module(n).dim * a.module(n).dim
        if k:
            flat[:, pos : pos + size] = (coeffs[:, offs[n] : offs[n] + k] @ H[n].reshape(k, -1)) % p
        pos += size
    return ChainMapSpace(a, x, degs, ffla.canonical_basis(flat, p, n=flat_len))


def chain_maps_basis(a: Complex, x: Complex) -> list[ChainMap]:
    return chain_map_space(a, x).maps()


def compose_flat(phi: ChainMap, space: ChainMapSpace) -> tuple[list[int], np.ndarray]:
    """Rows ``phi o f`` for ``f`` in ``space``, flattened over ``phi.target`` degrees."""
    p = phi.p
    degs = _common_degrees(space.source, phi.target)
    out = np.zeros((space.dim, sum(phi.target.module(n).dim * space.source.module(n).dim for n in degs)), dtype=np.int64)
    src_pos, pos = {}, 0
    for n in space.degrees:
        src_pos[n] = pos
        pos += space.target.module(n).dim * space.source.module(n).dim
    col = 0
    for n in degs:
        r, c = phi.target.module(n).dim, space.source.module(n).dim
        if n in src_pos:
            m = space.target.module(n).dim
            blocks = space.basis[:, src_pos[n] : src_pos[n] + m * c].reshape(space.dim, m, c)
            out[:, col : col + r * c] = (np.einsum("ab,kbc->kac", phi[n].mat, blocks) % p).reshape(space.dim, r * c)
        col += r * c
    return degs, out


def precompose_flat(space: ChainMapSpace, phi: ChainMap) -> tuple[list[int], np.ndarray]:
    """Rows ``f o phi`` for ``f`` in ``space`` (maps phi.target -> X), flattened over phi.source degrees."""
    p = phi.p
    X = space.target
    degs = _common_degrees(phi.source, X)
    out = np.zeros((space.dim, sum(X.module(n).dim * phi.source.module(n).dim for n in degs)), dtype=np.int64)
    src_pos, pos = {}, 0
    for n in space.degrees:
        src_pos[n] = pos
        pos += space.target.module(n).dim * space.source.module(n).dim
    col = 0
    for n in degs:
        r, c = X.module(n).dim, phi.source.module(n).dim
        if n in src_pos:
            m = space.source.module(n).dim
            blocks = space.basis[:, src_pos[n] : src_pos[n] + r * m].reshape(space.dim, r, m)
            out[:, col : col + r * c] = (np.einsum("kab,bc->kac", blocks, phi[n].mat) % p).reshape(space.dim, r * c)
        col += r * c
    return degs, out


# -- class membership and Hom exactness ----------------------------------------------


def is_x_star(x: Complex, cls: ClassDescriptor) -> bool:
    return all(member(cls, x.module(n)) for n in x.degrees)


def _hom_exact_at(g: Module, x: Complex, n: int) -> bool:
    """Hom(G, X_{n+1}) -> Hom(G, X_n) -> Hom(G, X_{n-1}) exact, by comparing canonical bases."""
    p = x.p
    H = hom_matrices(g, x.module(n))
    if H.shape[0] == 0:
        return True
    k = H.shape[0]
    flatH = H.reshape(k, -1)
    # kernel of d_n^*: coefficient vectors c with d_n (sum c_i h_i) = 0
    dn = np.einsum("ab,kbc->kac", x.d(n).mat, H) % p
    coeff_ker = ffla.kernel_basis(dn.reshape(k, -1).T, p) if dn.size else ffla.identity(k)
    ker = ffla.canonical_basis((coeff_ker @ flatH) % p, p, n=flatH.shape[1])
    H1 = hom_matrices(g, x.module(n + 1))
    if H1.shape[0]:
        up = np.einsum("ab,kbc->kac", x.d(n + 1).mat, H1) % p
        img = ffla.canonical_basis(up.reshape(H1.shape[0], -1), p, n=flatH.shape[1])
    else:
        img = np.zeros((0, flatH.shape[1]), dtype=np.int64)
    return img.shape == ker.shape and np.array_equal(img, ker)


def hom_exactness(g: Module, x: Complex, degrees) -> dict[int, bool]:
    """Per-degree exactness of Hom(G, X) over ``degrees``.

    Raises:
        WindowError: a degree needs a neighbour hidden by truncation.
    """
    out = {}
    for n in degrees:
        if x.known_above is not None and n + 1 > x.known_above:
            raise WindowError(f"exactness at degree {n} needs degree {n + 1}, beyond the truncation at {x.known_above}")
        if x.known_below is not None and n - 1 < x.known_below:
            raise WindowError(f"exactness at degree {n} needs degree {n - 1}, beyond the truncation at {x.known_below}")
        out[n] = _hom_exact_at(g, x, n)
    return out


def hom_into_complex_exact(g: Module, l: Complex, degrees) -> bool:
    """Whether Hom(G, L) is exact at every degree in ``degrees``."""
    return all(hom_exactness(g, l, degrees).values())


def hom_from_complex_exact(l: Complex, g: Module, degrees) -> bool:
    """Whether Hom(L, G) is exact at every degree in ``degrees`` (via duality)."""
    dl = dualize_complex(l)
    return hom_into_complex_exact(dualize(g), dl, [-n for n in degrees])


def homology_dims(x: Complex) -> dict[int, int]:
    out = {}
    for n in x.degrees:
        z = x.module(n).dim - x.d(n).rank()
        b = x.d(n + 1).rank()
        out[n] = z - b
    return out


# -- factorization of chain maps --------------------------------------------------------


def lift_chain_map(beta: ChainMap, phi: ChainMap) -> ChainMap | None:
    """Canonical ``theta`` with ``phi o theta == beta`` by one global solve, or ``None``."""
    space = chain_map_space(beta.source, phi.source)
    degs, rows = compose_flat(phi, space)
    target = beta.flatten(degs)
    if rows.shape[0] == 0:
        return space.unflatten(np.zeros(space.basis.shape[1], dtype=np.int64)) if not np.any(target) else None
    sol = ffla.solve(rows.T, target.reshape(-1, 1), phi.p)
    if sol is None:
        return None
    return space.unflatten((sol[0][:, 0] @ space.basis) % phi.p)


def extend_chain_map(beta: ChainMap, psi: ChainMap) -> ChainMap | None:
    """Canonical ``g`` with ``g o psi == beta`` by one global solve, or ``None``."""
    space = chain_map_space(psi.target, beta.target)
    degs, rows = precompose_flat(space, psi)
    target = beta.flatten(degs)
    if rows.shape[0] == 0:
        return space.unflatten(np.zeros(space.basis.shape[1], dtype=np.int64)) if not np.any(target) else None
    sol = ffla.solve(rows.T, target.reshape(-1, 1), psi.p)
    if sol is None:
        return None
    return space.unflatten((sol[0][:, 0] @ space.basis) % psi.p)
