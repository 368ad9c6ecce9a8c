"""Dense GF(2) linear algebra on numpy uint8 matrices.

Matrices are (rows, cols) arrays with entries in {0, 1}. Everything here is
plain Gaussian elimination; the sizes in this package (n <= ~250) never
justify bit packing.
"""

from __future__ import annotations

import numpy as np


def rank(mat: np.ndarray) -> int:
    m = np.array(mat, dtype=np.uint8, copy=True) % 2
    r = 0
    rows, cols = m.shape
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if m[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        m[[r, pivot]] = m[[pivot, r]]
        hits = np.flatnonzero(m[:, c])
        for i in hits:
            if i != r:
                m[i] ^= m[r]
        r += 1
        if r == rows:
            break
    return r


def row_reduce(mat: np.ndarray) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form and the pivot column list."""
    m = np.array(mat, dtype=np.uint8, copy=True) % 2
    rows, cols = m.shape
    pivots: list[int] = []
    r = 0
    for c in range(cols):
        pivot = None
        for i in range(r, rows):
            if m[i, c]:
                pivot = i
                break
        if pivot is None:
            continue
        m[[r, pivot]] = m[[pivot, r]]
        for i in np.flatnonzero(m[:, c]):
            if i != r:
                m[i] ^= m[r]
        pivots.append(c)
        r += 1
        if r == rows:
            break
    return m[:r], pivots


def in_span(basis: np.ndarray, vec: np.ndarray) -> bool:
    """True iff ``vec`` lies in the GF(2) row span of ``basis``."""
    if basis.size == 0:
        return not np.any(np.asarray(vec) % 2)
    stacked = np.vstack([basis, np.asarray(vec, dtype=np.uint8)[None, :]])
    return rank(stacked) == rank(basis)


def solve(mat: np.ndarray, rhs: np.ndarray) -> np.ndarray | None:
    """One solution x of mat @ x = rhs over GF(2), or None if inconsistent."""
    a = np.array(mat, dtype=np.uint8, copy=True) % 2
    b = np.array(rhs, dtype=np.uint8, copy=True) % 2
    rows, cols = a.shape
    aug = np.hstack([a, b[:, None]])
    red, pivots = row_reduce(aug)
    x = np.zeros(cols, dtype=np.uint8)
    for i, c in enumerate(pivots):
        if c == cols:
            return None
        x[c] = red[i, cols]
    return x


def null_space(mat: np.ndarray) -> np.ndarray:
    """Basis (rows) of the right null space of ``mat`` over GF(2)."""
    a = np.asarray(mat, dtype=np.uint8) % 2
    rows, cols = a.shape
    red, pivots = row_reduce(a)
    free = [c for c in range(cols) if c not in pivots]
    basis = np.zeros((len(free), cols), dtype=np.uint8)
    for k, f in enumerate(free):
        basis[k, f] = 1
        for i, c in enumerate(pivots):
            if f < red.shape[1] and red[i, f]:
                basis[k, c] = 1
    return basis
