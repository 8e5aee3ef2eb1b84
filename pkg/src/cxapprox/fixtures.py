"""Ready-made split basic algebras and modules used by tests and the CLI."""

from __future__ import annotations

import numpy as np

from .algmod import Algebra, Module, regular_module, simple_module


def truncated_polynomial(p: int, n: int) -> Algebra:
    """F_p[x]/(x^n) on the basis 1, x, ..., x^(n-1)."""
    mult = np.zeros((n, n, n), dtype=np.int64)
    for i in range(n):
        for j in range(n - i):
            mult[i, j, i + j] = 1
    unit = np.eye(n, dtype=np.int64)[0]
    radical = np.eye(n, dtype=np.int64)[1:]
    return Algebra(p, mult, unit, radical, [unit], name=f"F{p}[x]/(x^{n})")


def truncated_polynomial_module(algebra: Algebra, k: int) -> Module:
    """The cyclic module F[x]/(x^k), k <= nilpotency index, on the basis 1, x, ..."""
    n = algebra.dim
    action = np.zeros((n, k, k), dtype=np.int64)
    for i in range(n):
        for j in range(k - i):
            action[i, j + i, j] = 1
    return Module(algebra, action, name=f"F[x]/(x^{k})")


def semisimple(p: int, r: int) -> Algebra:
    """The product F_p x ... x F_p (r factors)."""
    mult = np.zeros((r, r, r), dtype=np.int64)
    for i in range(r):
        mult[i, i, i] = 1
    eye = np.eye(r, dtype=np.int64)
    return Algebra(p, mult, np.ones(r, dtype=np.int64), np.zeros((0, r), dtype=np.int64), eye, name=f"F{p}^{r}")


def _paths(n_vertices: int, arrows: list[tuple[int, int]]) -> list[tuple[int, int, tuple[int, ...]]]:
    """All paths as (source, target, arrow sequence in traversal order)."""
    paths = [(v, v, ()) for v in range(n_vertices)]
    frontier = [(a[0], a[1], (i,)) for i, a in enumerate(arrows)]
    while frontier:
        paths.extend(frontier)
        if len(paths) > 10_000:
            raise ValueError("quiver has oriented cycles or too many paths")
        nxt = []
        for s, t, seq in frontier:
            for i, (a_s, a_t) in enumerate(arrows):
                if a_s == t:
                    nxt.append((s, a_t, seq + (i,)))
        frontier = nxt
    return paths


def path_algebra(p: int, n_vertices: int, arrows: list[tuple[int, int]], name: str = "") -> Algebra:
    """Path algebra of an acyclic quiver, acting on the left.

    The product ``u * v`` is "first v, then u" and vanishes unless
    ``source(u) == target(v)``.  Basis order: trivial paths first, then by length.
    """
    paths = _paths(n_vertices, arrows)
    index = {(s, t, seq): i for i, (s, t, seq) in enumerate(paths)}
    d = len(paths)
    mult = np.zeros((d, d, d), dtype=np.int64)
    for i, (us, ut, useq) in enumerate(paths):
        for j, (vs, vt, vseq) in enumerate(paths):
            if us == vt:
                mult[i, j, index[(vs, ut, vseq + useq)]] = 1
    unit = np.zeros(d, dtype=np.int64)
    unit[:n_vertices] = 1
    eye = np.eye(d, dtype=np.int64)
    return Algebra(p, mult, unit, eye[n_vertices:], eye[:n_vertices], name=name or f"kQ{n_vertices}")


def a2_path_algebra(p: int = 2) -> Algebra:
    """Path algebra of 0 --a--> 1; basis (e0, e1, a)."""
    return path_algebra(p, 2, [(0, 1)], name=f"F{p}A2")


def representation(algebra: Algebra, n_vertices: int, arrows, dims, maps, name: str = "") -> Module:
    """Module of a path algebra from a quiver representation.

    ``maps[i]`` is the matrix ``dims[target] x dims[source]`` of arrow ``i``.
    """
    paths = _paths(n_vertices, arrows)
    offsets = np.cumsum([0] + list(dims))
    n = int(offsets[-1])
    action = np.zeros((algebra.dim, n, n), dtype=np.int64)
    for k, (s, t, seq) in enumerate(paths):
        block = np.eye(dims[s], dtype=np.int64)
        for i in seq:
            block = np.asarray(maps[i], dtype=np.int64).reshape(dims[arrows[i][1]], dims[arrows[i][0]]) @ block
        action[k, offsets[t] : offsets[t + 1], offsets[s] : offsets[s + 1]] = block % algebra.p
    return Module(algebra, action, name=name)


def a2_fixture(p: int = 2) -> dict:
    """The ring F_p[x]/(x^2) with its regular module and simple module."""
    A = truncated_polynomial(p, 2)
    return {"A": A, "A2": regular_module(A), "k": simple_module(A, 0)}
