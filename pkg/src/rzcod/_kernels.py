"""Compiled exact Gram check for restricted designs."""

from __future__ import annotations

import numba
import numpy as np


@numba.njit(cache=True)
def _scan(row_ptr, row_cols, row_slots, row_phases, col_ptr, col_rows, col_slots, col_phases, n, nslots, target):
    # Returns (i, j) of the first non-conforming Gram cell in row-major order, or (-1, -1).
    # acc[key * n + j] packs the Gaussian-integer coefficient as re + im * 2^32.
    npair = nslots * nslots
    acc = np.zeros(npair * n, dtype=np.int64)
    key_stamp = np.full(npair, -1, dtype=np.int64)
    keys = np.empty(npair, dtype=np.int64)
    unit = np.array([1, 1 << 32, -1, -(1 << 32)], dtype=np.int64)
    for i in range(n):
        nkeys = 0
        for q in range(col_ptr[i], col_ptr[i + 1]):
            r = col_rows[q]
            u = col_slots[q] ^ 1
            pu = (4 - col_phases[q]) & 3
            lo = row_ptr[r]
            hi = row_ptr[r + 1]
            # first entry of row r at a column >= i
            b = hi
            while lo < b:
                m = (lo + b) >> 1
                if row_cols[m] < i:
                    lo = m + 1
                else:
                    b = m
            for p in range(lo, hi):
                v = row_slots[p]
                key = u * nslots + v if u <= v else v * nslots + u
                if key_stamp[key] != i:
                    key_stamp[key] = i
                    keys[nkeys] = key
                    nkeys += 1
                acc[key * n + row_cols[p]] += unit[(pu + row_phases[p]) & 3]
        first_bad = n
        diag_hits = 0
        for t in range(nkeys):
            key = keys[t]
            base = key * n
            s1 = key // nslots
            s2 = key - s1 * nslots
            is_diag_key = (s1 & 1) == 0 and s2 == s1 + 1
            for j in range(i, n):
                val = acc[base + j]
                if val != 0:
                    if j == i and is_diag_key and val == target:
                        diag_hits += 1
                    elif j < first_bad:
                        first_bad = j
                    acc[base + j] = 0
        if first_bad == n and diag_hits != nslots // 2:
            first_bad = i
        if first_bad < n:
            return i, first_bad
    return -1, -1


def _csr(slots: np.ndarray, phases: np.ndarray):
    mask = slots >= 0
    rows, cols = np.nonzero(mask)
    ptr = np.concatenate(([0], np.cumsum(mask.sum(axis=1)))).astype(np.int64)
    return ptr, cols.astype(np.int64), slots[rows, cols].astype(np.int64), phases[rows, cols].astype(np.int64)


def first_gram_violation(slots: np.ndarray, phases: np.ndarray, k: int, scale_num: int) -> tuple[int, int] | None:
    """First upper-triangle cell where ``G^H G`` differs from ``(sum |x|^2) I``.

    ``G`` is the restricted design described by ``slots``/``phases`` with
    global factor ``2**(scale_num/2)``.  Only cells ``(i, j)`` with
    ``j >= i`` are scanned; the Gram matrix is Hermitian.
    """
    n = slots.shape[0]
    # the diagonal |x_v|^2 coefficient must equal 2**(-scale_num) before scaling
    if scale_num > 0:
        target = -1  # unreachable by a positive count, so every diagonal fails
    else:
        target = 1 << (-scale_num)
    row_ptr, row_cols, row_slots, row_phases = _csr(slots, phases)
    col_ptr, col_rows, col_slots, col_phases = _csr(slots.T, phases.T)
    # visit the rows of each column grouped by slot; keeps the live part of acc small
    col_of = np.repeat(np.arange(n), np.diff(col_ptr))
    order = np.lexsort((col_rows, col_slots, col_of))
    col_rows, col_slots, col_phases = col_rows[order], col_slots[order], col_phases[order]
    i, j = _scan(
        row_ptr, row_cols, row_slots, row_phases,
        col_ptr, col_rows, col_slots, col_phases,
        n, 2 * k, target,
    )
    if i < 0:
        return None
    return int(i), int(j)
