"""Dense exact linear algebra over prime fields.

Matrices are ``numpy`` int64 arrays whose entries are residues in ``[0, p)``.
Subspaces are carried as 2-D arrays whose *rows* span the subspace; every
basis returned here is in reduced row echelon form, so two bases of the same
subspace compare equal with ``np.array_equal``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MAX_PRIME = 251


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    f = 2
    while f * f <= n:
        if n % f == 0:
            return False
        f += 1
    return True


@dataclass(frozen=True)
class PrimeField:
    """The field F_p for a prime ``2 <= p <= 251``."""

    p: int

    def __post_init__(self):
        if not (2 <= self.p <= MAX_PRIME) or not _is_prime(self.p):
            raise ValueError(f"p must be a prime in [2, {MAX_PRIME}], got {self.p}")

    def inv(self, a: int) -> int:
        a %= self.p
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return pow(a, self.p - 2, self.p)

    def matrix(self, data, shape=None) -> np.ndarray:
        return as_matrix(data, self.p, shape)


def as_matrix(data, p: int, shape=None) -> np.ndarray:
    """Coerce ``data`` into a reduced int64 matrix (1-D input becomes a column)."""
    m = np.array(data, dtype=np.int64)
    if shape is not None:
        m = m.reshape(shape)
    elif m.ndim == 1:
        m = m.reshape(-1, 1)
    elif m.ndim == 0:
        m = m.reshape(1, 1)
    return m % p


def as_rows(data, n: int) -> np.ndarray:
    """``data`` as a matrix with ``n`` columns; works when ``n`` or the row count is zero."""
    a = np.asarray(data, dtype=np.int64)
    if a.size == 0:
        rows = a.shape[0] if a.ndim == 2 and a.shape[1] == n else 0
        return np.zeros((rows, n), dtype=np.int64)
    return a.reshape(-1, n)


def zeros(rows: int, cols: int) -> np.ndarray:
    return np.zeros((rows, cols), dtype=np.int64)


def identity(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def matmul(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    # int64 is safe: every product is < 251**2 and inner dims stay far below 2**40
    return (a @ b) % p


def _eliminate(a: np.ndarray, p: int, full: bool) -> tuple[np.ndarray, list[int]]:
    """In-place Gauss-Jordan (``full``) or forward elimination; returns pivots."""
    rows, cols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        i = r + int(nz[0])
        if i != r:
            a[[r, i]] = a[[i, r]]
        lead = int(a[r, c])
        if lead != 1:
            a[r] = (a[r] * pow(lead, p - 2, p)) % p
        col = a[:, c].copy()
        col[r] = 0
        if not full:
            col[:r] = 0
        hit = np.flatnonzero(col)
        if hit.size:
            a[hit] = (a[hit] - np.outer(col[hit], a[r])) % p
        pivots.append(c)
        r += 1
    return a, pivots


def rref(m: np.ndarray, p: int) -> tuple[np.ndarray, int, list[int]]:
    """Reduced row echelon form of ``m``.

    Returns:
        ``(R, rank, pivot_columns)`` with ``R`` the same shape as ``m``.
    """
    a = np.array(m, dtype=np.int64) % p
    if a.size == 0:
        return a, 0, []
    a, pivots = _eliminate(a, p, full=True)
    return a, len(pivots), pivots


def rank(m: np.ndarray, p: int) -> int:
    a = np.array(m, dtype=np.int64) % p
    if a.size == 0:
        return 0
    # eliminate along the shorter side
    if a.shape[0] > a.shape[1]:
        a = np.ascontiguousarray(a.T)
    return len(_eliminate(a, p, full=False)[1])


def canonical_basis(vectors: np.ndarray, p: int, n: int | None = None) -> np.ndarray:
    """RREF basis (rows) of the span of the rows of ``vectors``."""
    v = np.array(vectors, dtype=np.int64)
    if v.ndim == 1:
        v = v.reshape(1, -1) if v.size else np.zeros((0, n or 0), dtype=np.int64)
    if v.shape[0] == 0:
        return np.zeros((0, v.shape[1] if n is None else n), dtype=np.int64)
    r, k, _ = rref(v, p)
    return r[:k]


def kernel_basis(m: np.ndarray, p: int) -> np.ndarray:
    """Canonical basis (rows) of the right kernel ``{v : m v = 0}``."""
    m = np.asarray(m, dtype=np.int64)
    rows, cols = m.shape
    if cols == 0:
        return np.zeros((0, 0), dtype=np.int64)
    r, k, pivots = rref(m, p)
    free = [c for c in range(cols) if c not in set(pivots)]
    if not free:
        return np.zeros((0, cols), dtype=np.int64)
    basis = np.zeros((len(free), cols), dtype=np.int64)
    for i, f in enumerate(free):
        basis[i, f] = 1
        for row, c in enumerate(pivots):
            basis[i, c] = (-r[row, f]) % p
    return canonical_basis(basis, p)


def image_basis(m: np.ndarray, p: int) -> np.ndarray:
    """Canonical basis (rows) of the column space of ``m``."""
    m = np.asarray(m, dtype=np.int64)
    return canonical_basis(m.T, p, n=m.shape[0])


def solve(a: np.ndarray, b: np.ndarray, p: int):
    """Solve ``a @ x == b``.

    Returns ``None`` when inconsistent, else ``(particular, nullspace)`` where
    ``particular`` has zeros in every free-variable row and ``nullspace`` is
    the canonical kernel basis of ``a`` (rows).
    """
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if b.ndim == 1:
        b = b.reshape(-1, 1)
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: a has {a.shape[0]} rows, b has {b.shape[0]}")
    n = a.shape[1]
    aug = np.hstack([a, b]) % p
    r, k, pivots = rref(aug, p) if aug.size else (aug, 0, [])
    if any(c >= n for c in pivots):
        return None
    x = np.zeros((n, b.shape[1]), dtype=np.int64)
    for row, c in enumerate(pivots):
        x[c] = r[row, n:]
    return x, kernel_basis(a, p) if n else np.zeros((0, 0), dtype=np.int64)


def in_span(basis: np.ndarray, vectors: np.ndarray, p: int) -> bool:
    """True iff every row of ``vectors`` lies in the row span of ``basis``."""
    vectors = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
    if vectors.shape[0] == 0:
        return True
    basis = np.asarray(basis, dtype=np.int64)
    if basis.shape[0] == 0:
        return not np.any(vectors % p)
    return rank(np.vstack([basis, vectors]), p) == rank(basis, p)


def subspace_sum(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    n = a.shape[1] if a.ndim == 2 and a.shape[1] else b.shape[1]
    return canonical_basis(np.vstack([as_rows(a, n), as_rows(b, n)]), p, n=n)


def subspace_intersection(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    """Intersection of two row spans via the kernel of ``[A^T | -B^T]``."""
    n = a.shape[1] if a.ndim == 2 and a.shape[1] else b.shape[1]
    a = as_rows(a, n)
    b = as_rows(b, n)
    if a.shape[0] == 0 or b.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64)
    ker = kernel_basis(np.hstack([a.T, (-b.T) % p]), p)
    if ker.shape[0] == 0:
        return np.zeros((0, n), dtype=np.int64)
    return canonical_basis(matmul(ker[:, : a.shape[0]], a, p), p, n=n)


def inverse(m: np.ndarray, p: int) -> np.ndarray | None:
    """Inverse of a square matrix, or ``None`` if singular."""
    m = np.asarray(m, dtype=np.int64)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("inverse needs a square matrix")
    if n == 0:
        return np.zeros((0, 0), dtype=np.int64)
    r, k, _ = rref(np.hstack([m % p, identity(n)]), p)
    if k < n or not np.array_equal(r[:, :n], identity(n)):
        return None
    return r[:, n:]


def is_invertible(m: np.ndarray, p: int) -> bool:
    m = np.asarray(m)
    return m.shape[0] == m.shape[1] and rank(m, p) == m.shape[0]


def batch_invertible(mats: np.ndarray, p: int) -> np.ndarray:
    """Invertibility of a stack ``(N, n, n)`` of square matrices, vectorised over N."""
    a = np.array(mats, dtype=np.int64) % p
    N, n, _ = a.shape
    ok = np.ones(N, dtype=bool)
    if n == 0:
        return ok
    inv_table = np.zeros(p, dtype=np.int64)
    for x in range(1, p):
        inv_table[x] = pow(x, p - 2, p)
    idx = np.arange(N)
    for c in range(n):
        sub = a[:, c:, c] != 0
        has = sub.any(axis=1)
        ok &= has
        piv = c + np.argmax(sub, axis=1)
        rows_c = a[idx, c].copy()
        a[idx, c] = a[idx, piv]
        a[idx, piv] = rows_c
        lead = inv_table[a[:, c, c]]
        a[:, c] = (a[:, c] * lead[:, None]) % p
        factors = a[:, c + 1 :, c].copy()
        a[:, c + 1 :] = (a[:, c + 1 :] - factors[:, :, None] * a[:, c][:, None, :]) % p
    return ok
