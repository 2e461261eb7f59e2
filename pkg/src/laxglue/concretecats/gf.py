"""Dense linear algebra over a prime field, by Gaussian elimination."""

from __future__ import annotations

from itertools import product

import numpy as np

__all__ = ["as_matrix", "rref", "rank", "kernel", "solve", "inverse", "all_matrices", "kron", "eye", "zeros"]


def as_matrix(a, p: int, shape: tuple | None = None) -> np.ndarray:
    m = np.array(a, dtype=np.int64)
    if shape is not None:
        m = m.reshape(shape)
    return m % p


def eye(n: int) -> np.ndarray:
    return np.eye(n, dtype=np.int64)


def zeros(r: int, c: int) -> np.ndarray:
    return np.zeros((r, c), dtype=np.int64)


def kron(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    return np.kron(a, b) % p


def rref(a: np.ndarray, p: int) -> tuple[np.ndarray, list]:
    """Reduced row echelon form and pivot columns."""
    m = np.array(a, dtype=np.int64) % p
    rows, cols = m.shape
    pivots = []
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(m[r:, c])[0]
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            m[[r, k]] = m[[k, r]]
        inv = pow(int(m[r, c]), -1, p)
        m[r] = (m[r] * inv) % p
        col = m[:, c].copy()
        col[r] = 0
        m = (m - np.outer(col, m[r])) % p
        pivots.append(c)
        r += 1
    return m, pivots


def rank(a: np.ndarray, p: int) -> int:
    if a.size == 0:
        return 0
    return len(rref(a, p)[1])


def kernel(a: np.ndarray, p: int) -> np.ndarray:
    """Basis of the null space as the columns of a (cols x k) matrix."""
    rows, cols = a.shape
    if rows == 0:
        return eye(cols)
    r, pivots = rref(a, p)
    free = [c for c in range(cols) if c not in pivots]
    basis = zeros(cols, len(free))
    for j, f in enumerate(free):
        basis[f, j] = 1
        for i, pc in enumerate(pivots):
            basis[pc, j] = (-r[i, f]) % p
    return basis


def solve(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray | None:
    """Some X with a @ X = b (mod p), or None if inconsistent."""
    rows, cols = a.shape
    bcols = b.shape[1]
    if rows == 0:
        return zeros(cols, bcols)
    aug = np.concatenate([a % p, b % p], axis=1)
    r, pivots = rref(aug, p)
    if any(pc >= cols for pc in pivots):
        return None
    x = zeros(cols, bcols)
    for i, pc in enumerate(pivots):
        x[pc] = r[i, cols:]
    return x


def inverse(a: np.ndarray, p: int) -> np.ndarray | None:
    n, m = a.shape
    if n != m:
        return None
    if n == 0:
        return zeros(0, 0)
    r, pivots = rref(np.concatenate([a % p, eye(n)], axis=1), p)
    if pivots[:n] != list(range(n)) or len(pivots) < n or pivots[n - 1] >= n:
        return None
    return r[:, n:]


def all_matrices(rows: int, cols: int, p: int):
    """Every rows x cols matrix over the field, in a fixed order."""
    for entries in product(range(p), repeat=rows * cols):
        yield np.array(entries, dtype=np.int64).reshape(rows, cols)
