"""Exact symbolic complex orthogonal designs.

A design is an ``n x n`` grid of entries, each a formal linear combination of
complex variables ``x_1 .. x_k`` and their conjugates, times a global factor
``2**(scale_num / 2)``.  Keeping the square-root-of-two factor as an integer
exponent lets every Gram coefficient stay an exact rational.

Restricted designs (every non-zero entry is ``j**p * x_v`` or
``j**p * x_v*``) are additionally stored as two integer arrays, which is
what makes constructions with thousands of antennas tractable:

* ``slots``: ``-1`` for a zero cell, otherwise ``2 * (v - 1) + conj``
* ``phases``: ``p`` in ``0..3`` so that the coefficient is ``j**p``
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

__all__ = [
    "Coeff",
    "SymbolicTerm",
    "Entry",
    "DesignMatrix",
    "GramForm",
    "SignedMatrix",
    "ScodReport",
    "NonIntersectionError",
    "unit_entry",
    "gram",
    "gram_cell",
    "is_scod",
    "is_restricted",
    "evaluate",
    "dispersion_matrices",
    "conj_transpose",
    "substitute",
    "block_design",
    "signed_times_term",
    "premultiply",
]

_ZERO = Fraction(0)


@dataclass(frozen=True, slots=True)
class Coeff:
    """Exact element of Q(j, sqrt 2): ``(re + j*im) + sqrt(2) * (re2 + j*im2)``.

    Most designs only need the Gaussian-rational part; the sqrt(2) part is
    there for reference designs whose entries mix ``x`` and ``x / sqrt(2)``.
    """

    re: Fraction = _ZERO
    im: Fraction = _ZERO
    re2: Fraction = _ZERO
    im2: Fraction = _ZERO

    def __post_init__(self) -> None:
        for name in ("re", "im", "re2", "im2"):
            value = getattr(self, name)
            if not isinstance(value, Fraction):
                object.__setattr__(self, name, Fraction(value))

    @classmethod
    def unit(cls, phase: int) -> Coeff:
        return _UNITS[phase & 3]

    def __bool__(self) -> bool:
        return bool(self.re or self.im or self.re2 or self.im2)

    def __neg__(self) -> Coeff:
        return Coeff(-self.re, -self.im, -self.re2, -self.im2)

    def __add__(self, other: Coeff) -> Coeff:
        return Coeff(self.re + other.re, self.im + other.im, self.re2 + other.re2, self.im2 + other.im2)

    def __sub__(self, other: Coeff) -> Coeff:
        return self + (-other)

    def __mul__(self, other: Coeff | Fraction | int) -> Coeff:
        if not isinstance(other, Coeff):
            f = Fraction(other)
            return Coeff(self.re * f, self.im * f, self.re2 * f, self.im2 * f)
        # (p + q r2)(s + t r2) = ps + 2qt + (pt + qs) r2, with p, q, s, t Gaussian
        pr, pi, qr, qi = self.re, self.im, self.re2, self.im2
        sr, si, tr, ti = other.re, other.im, other.re2, other.im2
        ps = (pr * sr - pi * si, pr * si + pi * sr)
        qt = (qr * tr - qi * ti, qr * ti + qi * tr)
        pt = (pr * tr - pi * ti, pr * ti + pi * tr)
        qs = (qr * sr - qi * si, qr * si + qi * sr)
        return Coeff(ps[0] + 2 * qt[0], ps[1] + 2 * qt[1], pt[0] + qs[0], pt[1] + qs[1])

    __rmul__ = __mul__

    def conjugate(self) -> Coeff:
        return Coeff(self.re, -self.im, self.re2, -self.im2)

    @property
    def phase(self) -> int | None:
        """``p`` if this coefficient is exactly ``j**p``, else ``None``."""
        if self.re2 or self.im2:
            return None
        return _PHASE_OF.get((self.re, self.im))

    @property
    def has_sqrt2(self) -> bool:
        return bool(self.re2 or self.im2)

    def __complex__(self) -> complex:
        r2 = 2.0 ** 0.5
        return complex(float(self.re) + r2 * float(self.re2), float(self.im) + r2 * float(self.im2))


_UNITS = (
    Coeff(1, 0),
    Coeff(0, 1),
    Coeff(-1, 0),
    Coeff(0, -1),
)
_PHASE_OF = {(Fraction(1), _ZERO): 0, (_ZERO, Fraction(1)): 1, (Fraction(-1), _ZERO): 2, (_ZERO, Fraction(-1)): 3}
ONE = _UNITS[0]


@dataclass(frozen=True, slots=True)
class SymbolicTerm:
    coeff: Coeff
    var: int
    conj: bool = False

    def __post_init__(self) -> None:
        if self.var < 1:
            raise ValueError(f"variable index must be >= 1, got {self.var}")
        if not self.coeff:
            raise ValueError("zero coefficient")

    @property
    def key(self) -> tuple[int, bool]:
        return (self.var, self.conj)


@dataclass(frozen=True, slots=True)
class Entry:
    """One design cell: a canonical sum of terms (empty means zero).

    Construction always canonicalizes, so equal polynomials compare equal.
    """

    terms: tuple[SymbolicTerm, ...] = ()

    def __post_init__(self) -> None:
        terms = self.terms
        if len(terms) == 1 and isinstance(terms, tuple):
            return
        acc: dict[tuple[int, bool], Coeff] = {}
        for t in terms:
            acc[t.key] = acc[t.key] + t.coeff if t.key in acc else t.coeff
        canon = tuple(SymbolicTerm(c, v, cj) for (v, cj), c in sorted(acc.items()) if c)
        object.__setattr__(self, "terms", canon)

    @classmethod
    def of(cls, var: int, conj: bool = False, coeff: Coeff = ONE) -> Entry:
        return cls((SymbolicTerm(coeff, var, conj),))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    @property
    def unit_form(self) -> tuple[int, bool, int] | None:
        """``(var, conj, phase)`` for a single unit-coefficient term, else ``None``."""
        if len(self.terms) != 1:
            return None
        t = self.terms[0]
        p = t.coeff.phase
        return None if p is None else (t.var, t.conj, p)

    @property
    def variables(self) -> frozenset[int]:
        return frozenset(t.var for t in self.terms)

    def __neg__(self) -> Entry:
        return Entry(tuple(SymbolicTerm(-t.coeff, t.var, t.conj) for t in self.terms))

    def __add__(self, other: Entry) -> Entry:
        return Entry(self.terms + other.terms)

    def scaled(self, c: Coeff) -> Entry:
        if not c:
            return ZERO_ENTRY
        return Entry(tuple(SymbolicTerm(t.coeff * c, t.var, t.conj) for t in self.terms))

    def conjugate(self) -> Entry:
        return Entry(tuple(SymbolicTerm(t.coeff.conjugate(), t.var, not t.conj) for t in self.terms))

    def max_var(self) -> int:
        return max((t.var for t in self.terms), default=0)


ZERO_ENTRY = Entry()


@lru_cache(maxsize=None)
def unit_entry(var: int, conj: bool, phase: int) -> Entry:
    """Interned ``j**phase * x_var`` (conjugated if ``conj``)."""
    return Entry.of(var, conj, Coeff.unit(phase))


def _slot_entry(slot: int, phase: int) -> Entry:
    if slot < 0:
        return ZERO_ENTRY
    return unit_entry(slot // 2 + 1, bool(slot & 1), phase & 3)


class DesignMatrix:
    """An ``n x n`` design in ``k`` complex variables with global factor ``2**(scale_num/2)``.

    Treat instances as immutable values.  Restricted designs built through the
    array constructors never materialize their :class:`Entry` grid unless
    :attr:`entries` is read.
    """

    __slots__ = ("n", "k", "scale_num", "_entries", "_slots", "_phases", "_arrays_known")

    def __init__(self, entries: Sequence[Sequence[Entry]], k: int | None = None, scale_num: int = 0):
        grid = tuple(tuple(row) for row in entries)
        n = len(grid)
        if n == 0 or any(len(row) != n for row in grid):
            raise ValueError("design grid must be square and non-empty")
        used = max((e.max_var() for row in grid for e in row), default=0)
        if k is None:
            k = used
        if used > k:
            raise ValueError(f"entry uses x{used} but the design has only {k} variables")
        self.n = n
        self.k = int(k)
        self.scale_num = int(scale_num)
        self._entries: tuple[tuple[Entry, ...], ...] | None = grid
        self._slots: np.ndarray | None = None
        self._phases: np.ndarray | None = None
        self._arrays_known = False

    @classmethod
    def from_arrays(cls, slots: np.ndarray, phases: np.ndarray, k: int, scale_num: int = 0) -> DesignMatrix:
        """Build a restricted design from slot/phase arrays (see module docstring)."""
        slots = np.asarray(slots, dtype=np.int16)
        phases = np.asarray(phases, dtype=np.int8)
        n = slots.shape[0]
        if slots.ndim != 2 or slots.shape != (n, n) or phases.shape != slots.shape or n == 0:
            raise ValueError("slot and phase arrays must be equal-shaped, square and non-empty")
        if slots.size and (slots.max() >= 2 * k or slots.min() < -1):
            raise ValueError("slot index out of range for k variables")
        phases = np.where(slots >= 0, phases & 3, 0).astype(np.int8)
        slots = slots.copy()
        slots.flags.writeable = False
        phases.flags.writeable = False
        self = cls.__new__(cls)
        self.n = int(n)
        self.k = int(k)
        self.scale_num = int(scale_num)
        self._entries = None
        self._slots = slots
        self._phases = phases
        self._arrays_known = True
        return self

    @property
    def entries(self) -> tuple[tuple[Entry, ...], ...]:
        if self._entries is None:
            table = np.empty(8 * self.k + 1, dtype=object)
            table[0] = ZERO_ENTRY
            for s in range(2 * self.k):
                for p in range(4):
                    table[1 + 4 * s + p] = _slot_entry(s, p)
            codes = np.where(self._slots >= 0, 1 + 4 * self._slots.astype(np.int64) + self._phases, 0)
            self._entries = tuple(tuple(row) for row in table[codes].tolist())
        return self._entries

    def restricted_arrays(self) -> tuple[np.ndarray, np.ndarray] | None:
        """``(slots, phases)`` when every non-zero entry is a single unit term."""
        if not self._arrays_known:
            slots = np.full((self.n, self.n), -1, dtype=np.int16)
            phases = np.zeros((self.n, self.n), dtype=np.int8)
            ok = True
            for i, row in enumerate(self._entries):
                for j, e in enumerate(row):
                    if e.is_zero:
                        continue
                    u = e.unit_form
                    if u is None:
                        ok = False
                        break
                    slots[i, j] = 2 * (u[0] - 1) + u[1]
                    phases[i, j] = u[2]
                if not ok:
                    break
            if ok:
                slots.flags.writeable = False
                phases.flags.writeable = False
                self._slots, self._phases = slots, phases
            self._arrays_known = True
        if self._slots is None:
            return None
        return self._slots, self._phases

    def __getitem__(self, ij: tuple[int, int]) -> Entry:
        i, j = ij
        if self._entries is None:
            return _slot_entry(int(self._slots[i, j]), int(self._phases[i, j]))
        return self._entries[i][j]

    def nonzero_mask(self) -> np.ndarray:
        arrays = self.restricted_arrays()
        if arrays is not None:
            return arrays[0] >= 0
        return np.array([[not e.is_zero for e in row] for row in self.entries], dtype=bool)

    def row_support(self, i: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.flatnonzero(self.nonzero_mask()[i]))

    @property
    def rate(self) -> Fraction:
        return Fraction(self.k, self.n)

    def with_scale(self, scale_num: int) -> DesignMatrix:
        arrays = self.restricted_arrays()
        if arrays is not None:
            return DesignMatrix.from_arrays(arrays[0], arrays[1], self.k, scale_num)
        return DesignMatrix(self.entries, self.k, scale_num)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, DesignMatrix):
            return NotImplemented
        if (self.n, self.k, self.scale_num) != (other.n, other.k, other.scale_num):
            return False
        a, b = self.restricted_arrays(), other.restricted_arrays()
        if a is not None and b is not None:
            return bool(np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1]))
        if (a is None) != (b is None):
            return False
        return self.entries == other.entries

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"DesignMatrix(n={self.n}, k={self.k}, scale_num={self.scale_num})"


@dataclass(frozen=True)
class GramForm:
    """Exact quadratic form ``sum c * u * v`` over ``u, v`` in ``{x_i, x_i*}``.

    Monomials are stored as sorted pairs of ``(var, conj)`` keys so that
    ``x1* x2`` and ``x2 x1*`` collapse to the same coefficient.
    """

    terms: tuple[tuple[tuple[tuple[int, bool], tuple[int, bool]], Coeff], ...] = ()

    @classmethod
    def from_dict(cls, coeffs: Mapping[tuple[tuple[int, bool], tuple[int, bool]], Coeff]) -> GramForm:
        merged: dict = {}
        for (u, v), c in coeffs.items():
            key = (u, v) if u <= v else (v, u)
            merged[key] = merged[key] + c if key in merged else c
        return cls(tuple(sorted((m, c) for m, c in merged.items() if c)))

    @classmethod
    def sum_of_squares(cls, k: int) -> GramForm:
        return cls(tuple((((v, False), (v, True)), ONE) for v in range(1, k + 1)))

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def as_dict(self) -> dict:
        return dict(self.terms)

    def conjugate(self) -> GramForm:
        out = {}
        for ((v1, c1), (v2, c2)), c in self.terms:
            out[((v1, not c1), (v2, not c2))] = c.conjugate()
        return GramForm.from_dict(out)


class SignedMatrix:
    """Integer matrix with entries in {-1, 0, +1} and global factor ``2**(scale_num/2)``."""

    __slots__ = ("n", "entries", "scale_num", "_csr")

    def __init__(self, entries, scale_num: int = 0):
        arr = np.array(entries, dtype=np.int8)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise ValueError("signed matrix must be square")
        if arr.size and (arr.max() > 1 or arr.min() < -1):
            raise ValueError("signed matrix entries must lie in {-1, 0, 1}")
        arr.flags.writeable = False
        self.n = int(arr.shape[0])
        self.entries = arr
        self.scale_num = int(scale_num)
        self._csr: sp.csr_matrix | None = None

    @classmethod
    def identity(cls, n: int) -> SignedMatrix:
        return cls(np.eye(n, dtype=np.int8))

    @classmethod
    def from_sparse(cls, m: sp.spmatrix, scale_num: int = 0) -> SignedMatrix:
        m = sp.csr_matrix(m)
        if m.nnz and (m.data.max() > 1 or m.data.min() < -1):
            raise ValueError("product left the signed range {-1, 0, 1}")
        out = cls(m.toarray(), scale_num)
        m = m.astype(np.int64)
        m.eliminate_zeros()
        out._csr = m
        return out

    def to_sparse(self) -> sp.csr_matrix:
        if self._csr is None:
            m = sp.csr_matrix(self.entries.astype(np.int64))
            m.eliminate_zeros()
            self._csr = m
        return self._csr

    def __matmul__(self, other: SignedMatrix) -> SignedMatrix:
        if not isinstance(other, SignedMatrix):
            return NotImplemented
        return SignedMatrix.from_sparse(self.to_sparse() @ other.to_sparse(), self.scale_num + other.scale_num)

    def kron_identity(self, m: int) -> SignedMatrix:
        """``I_m (x) self``."""
        return SignedMatrix.from_sparse(sp.kron(sp.identity(m, dtype=np.int64), self.to_sparse()), self.scale_num)

    @property
    def T(self) -> SignedMatrix:
        return SignedMatrix(self.entries.T, self.scale_num)

    def gram_integer(self) -> np.ndarray:
        """``S^T S`` as a dense integer array (global scale not applied)."""
        s = self.to_sparse()
        return (s.T @ s).toarray()

    def row_support(self, i: int) -> tuple[int, ...]:
        return tuple(int(c) for c in np.flatnonzero(self.entries[i]))

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SignedMatrix):
            return NotImplemented
        return self.scale_num == other.scale_num and np.array_equal(self.entries, other.entries)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"SignedMatrix(n={self.n}, scale_num={self.scale_num})"


class NonIntersectionError(ArithmeticError):
    """A signed row combination would put two terms into one cell."""

    def __init__(self, row: int, col: int):
        super().__init__(f"rows combined into output row {row} collide at column {col}")
        self.row = row
        self.col = col


@dataclass(frozen=True)
class ScodReport:
    """Outcome of :func:`is_scod`; truthy when the design is orthogonal."""

    ok: bool
    cell: tuple[int, int] | None = None
    form: GramForm | None = None

    def __bool__(self) -> bool:
        return self.ok


# ---------------------------------------------------------------------------
# structural operations


def conj_transpose(design: DesignMatrix) -> DesignMatrix:
    """Entrywise conjugate transpose: transpose, conjugate coefficients, flip conj flags."""
    arrays = design.restricted_arrays()
    if arrays is not None:
        slots, phases = arrays
        st = slots.T
        return DesignMatrix.from_arrays(np.where(st >= 0, st ^ 1, -1), (-phases.T) & 3, design.k, design.scale_num)
    grid = design.entries
    n = design.n
    return DesignMatrix([[grid[j][i].conjugate() for j in range(n)] for i in range(n)], design.k, design.scale_num)


def substitute(design: DesignMatrix, rules: Mapping[int, SymbolicTerm], k: int | None = None) -> DesignMatrix:
    """Replace ``x_v`` by ``rules[v]`` (and ``x_v*`` by its conjugate) everywhere.

    Variables without a rule are left alone.  ``H(x1*, -x2, ..., -xk)`` is
    ``substitute(H, {1: SymbolicTerm(ONE, 1, True), 2: SymbolicTerm(-ONE, 2), ...})``.
    """
    k = design.k if k is None else k
    arrays = design.restricted_arrays()
    if arrays is not None and all(r.coeff.phase is not None for r in rules.values()):
        slots, phases = arrays
        new_slot = np.arange(2 * design.k, dtype=np.int64)
        shift = np.zeros(2 * design.k, dtype=np.int64)
        for v, r in rules.items():
            for c in (0, 1):
                s = 2 * (v - 1) + c
                new_slot[s] = 2 * (r.var - 1) + (c ^ int(r.conj))
                shift[s] = r.coeff.phase if c == 0 else -r.coeff.phase
        idx = np.where(slots >= 0, slots, 0)
        out_slots = np.where(slots >= 0, new_slot[idx], -1)
        out_phases = np.where(slots >= 0, phases + shift[idx], 0) & 3
        return DesignMatrix.from_arrays(out_slots, out_phases, k, design.scale_num)

    def sub(e: Entry) -> Entry:
        terms = []
        for t in e.terms:
            r = rules.get(t.var)
            if r is None:
                terms.append(t)
            elif t.conj:
                terms.append(SymbolicTerm(t.coeff * r.coeff.conjugate(), r.var, not r.conj))
            else:
                terms.append(SymbolicTerm(t.coeff * r.coeff, r.var, r.conj))
        return Entry(tuple(terms))

    return DesignMatrix([[sub(e) for e in row] for row in design.entries], k, design.scale_num)


def block_design(blocks: Sequence[Sequence[DesignMatrix]], k: int | None = None) -> DesignMatrix:
    """Assemble equal-scale square blocks into one design."""
    flat = [b for row in blocks for b in row]
    scales = {b.scale_num for b in flat}
    if len(scales) != 1:
        raise ValueError("blocks must share a global scale")
    k = max(b.k for b in flat) if k is None else k
    arrays = [b.restricted_arrays() for b in flat]
    if all(a is not None for a in arrays):
        it = iter(arrays)
        grid = [[next(it) for _ in row] for row in blocks]
        slots = np.block([[a[0] for a in row] for row in grid])
        phases = np.block([[a[1] for a in row] for row in grid])
        return DesignMatrix.from_arrays(slots, phases, k, scales.pop())
    rows = []
    for brow in blocks:
        for i in range(brow[0].n):
            rows.append([e for b in brow for e in b.entries[i]])
    return DesignMatrix(rows, k, scales.pop())


def signed_times_term(s: SignedMatrix, term: SymbolicTerm, k: int, scale_num: int = 0) -> DesignMatrix:
    """The design ``S * term`` (every +-1 of ``S`` becomes +-term)."""
    phase = term.coeff.phase
    if phase is not None:
        slot = 2 * (term.var - 1) + int(term.conj)
        e = s.entries
        slots = np.where(e != 0, slot, -1)
        phases = np.where(e < 0, phase + 2, phase) & 3
        return DesignMatrix.from_arrays(slots, phases, k, scale_num)
    pos = Entry((term,))
    neg = -pos
    return DesignMatrix(
        [[pos if v > 0 else neg if v < 0 else ZERO_ENTRY for v in row] for row in s.entries.tolist()], k, scale_num
    )


def _csr_of_design(slots: np.ndarray, phases: np.ndarray):
    mask = slots >= 0
    counts = mask.sum(axis=1)
    indptr = np.concatenate(([0], np.cumsum(counts))).astype(np.int64)
    rows, cols = np.nonzero(mask)
    return indptr, cols.astype(np.int64), slots[rows, cols].astype(np.int64), phases[rows, cols].astype(np.int64)


def premultiply(q: SignedMatrix, design: DesignMatrix, strict: bool = True) -> DesignMatrix:
    """Signed row accumulation ``Q * design`` with exact global scale.

    With ``strict`` (the default) every output cell may receive at most one
    contribution; rows combined by ``Q`` must be non-intersecting.  A
    violation raises :class:`NonIntersectionError` instead of silently
    producing linear-combination entries.
    """
    if q.n != design.n:
        raise ValueError(f"shape mismatch: {q.n} vs {design.n}")
    n = design.n
    scale = q.scale_num + design.scale_num
    arrays = design.restricted_arrays()
    if arrays is not None and strict:
        g_ptr, g_cols, g_slots, g_phases = _csr_of_design(*arrays)
        qm = q.to_sparse()
        q_rows = np.repeat(np.arange(n, dtype=np.int64), np.diff(qm.indptr))
        q_src = qm.indices.astype(np.int64)
        q_neg = (qm.data < 0).astype(np.int64)
        counts = g_ptr[q_src + 1] - g_ptr[q_src]
        total = int(counts.sum())
        out_rows = np.repeat(q_rows, counts)
        offsets = np.repeat(g_ptr[q_src] - np.concatenate(([0], np.cumsum(counts)[:-1])), counts)
        idx = offsets + np.arange(total, dtype=np.int64)
        cols = g_cols[idx]
        key = out_rows * n + cols
        hits = np.bincount(key, minlength=n * n)
        if hits.max(initial=0) > 1:
            first = int(np.flatnonzero(hits > 1)[0])
            raise NonIntersectionError(first // n, first % n)
        slots = np.full(n * n, -1, dtype=np.int16)
        phases = np.zeros(n * n, dtype=np.int8)
        slots[key] = g_slots[idx]
        phases[key] = (g_phases[idx] + 2 * np.repeat(q_neg, counts)) & 3
        return DesignMatrix.from_arrays(slots.reshape(n, n), phases.reshape(n, n), design.k, scale)

    grid = design.entries
    qe = q.entries
    out = []
    for i in range(n):
        row = [ZERO_ENTRY] * n
        hit = [False] * n
        for r in np.flatnonzero(qe[i]):
            sign = int(qe[i, r])
            for j, e in enumerate(grid[r]):
                if e.is_zero:
                    continue
                if strict and hit[j]:
                    raise NonIntersectionError(i, j)
                hit[j] = True
                row[j] = row[j] + (e if sign > 0 else -e)
        out.append(row)
    return DesignMatrix(out, design.k, scale)


# ---------------------------------------------------------------------------
# numeric views


def _scale_factor(scale_num: int) -> float:
    return 2.0 ** (scale_num / 2)


def evaluate(design: DesignMatrix, values: Sequence[complex]) -> np.ndarray:
    """Substitute numbers for ``x_1..x_k``; conjugated terms use conjugated values."""
    v = np.asarray(values, dtype=complex).ravel()
    if v.shape[0] != design.k:
        raise ValueError(f"expected {design.k} values, got {v.shape[0]}")
    arrays = design.restricted_arrays()
    if arrays is not None:
        slots, phases = arrays
        by_slot = np.empty(2 * design.k + 1, dtype=complex)
        by_slot[0:-1:2] = v
        by_slot[1:-1:2] = v.conj()
        by_slot[-1] = 0.0
        units = np.array([1, 1j, -1, -1j])
        return _scale_factor(design.scale_num) * by_slot[slots] * units[phases]
    out = np.zeros((design.n, design.n), dtype=complex)
    for i, row in enumerate(design.entries):
        for j, e in enumerate(row):
            out[i, j] = sum(complex(t.coeff) * (v[t.var - 1].conjugate() if t.conj else v[t.var - 1]) for t in e.terms)
    return _scale_factor(design.scale_num) * out


def dispersion_matrices(design: DesignMatrix) -> tuple[np.ndarray, np.ndarray]:
    """``(A, B)`` of shape ``(k, n, n)`` with ``design = sum A_k x_k + B_k x_k*`` (scale included)."""
    k, n = design.k, design.n
    a = np.zeros((k, n, n), dtype=complex)
    b = np.zeros((k, n, n), dtype=complex)
    arrays = design.restricted_arrays()
    if arrays is not None:
        slots, phases = arrays
        units = np.array([1, 1j, -1, -1j])
        rows, cols = np.nonzero(slots >= 0)
        s = slots[rows, cols].astype(np.int64)
        vals = units[phases[rows, cols]]
        plain = (s & 1) == 0
        a[s[plain] // 2, rows[plain], cols[plain]] = vals[plain]
        b[s[~plain] // 2, rows[~plain], cols[~plain]] = vals[~plain]
    else:
        for i, row in enumerate(design.entries):
            for j, e in enumerate(row):
                for t in e.terms:
                    (b if t.conj else a)[t.var - 1, i, j] += complex(t.coeff)
    f = _scale_factor(design.scale_num)
    return f * a, f * b


# ---------------------------------------------------------------------------
# Gram forms and orthogonality


def _scale_sq(scale_num: int) -> Fraction:
    return Fraction(2) ** scale_num


def gram_cell(design: DesignMatrix, i: int, j: int) -> GramForm:
    """Entry ``(i, j)`` of ``design^H design`` as an exact form."""
    acc: dict = {}
    for r in range(design.n):
        ei, ej = design[r, i], design[r, j]
        if ei.is_zero or ej.is_zero:
            continue
        for ti in ei.terms:
            u = (ti.var, not ti.conj)
            cu = ti.coeff.conjugate()
            for tj in ej.terms:
                key = (u, tj.key)
                acc[key] = acc[key] + cu * tj.coeff if key in acc else cu * tj.coeff
    f = _scale_sq(design.scale_num)
    return GramForm.from_dict({m: c * f for m, c in acc.items()})


def gram(design: DesignMatrix) -> list[list[GramForm]]:
    """Exact ``design^H design`` including the global scale."""
    n = design.n
    arrays = design.restricted_arrays()
    if arrays is None:
        return [[gram_cell(design, i, j) for j in range(n)] for i in range(n)]
    # restricted: one dense product per pair of variable slots, integers held exactly in float
    slots, phases = arrays
    nslots = 2 * design.k
    units = np.array([1, 1j, -1, -1j])
    disp = np.zeros((nslots, n, n), dtype=complex)
    rows, cols = np.nonzero(slots >= 0)
    disp[slots[rows, cols], rows, cols] = units[phases[rows, cols]]
    present = [s for s in range(nslots) if disp[s].any()]
    cells: list[list[dict]] = [[{} for _ in range(n)] for _ in range(n)]
    f = _scale_sq(design.scale_num)
    for s in present:
        u = (s // 2 + 1, not (s & 1))  # conjugate of the row factor
        left = disp[s].conj().T
        for t in present:
            prod = left @ disp[t]
            v = (t // 2 + 1, bool(t & 1))
            for i, j in zip(*np.nonzero(prod)):
                z = prod[i, j]
                c = Coeff(int(round(z.real)), int(round(z.imag)))
                d = cells[i][j]
                d[(u, v)] = d[(u, v)] + c if (u, v) in d else c
    return [[GramForm.from_dict({m: c * f for m, c in cells[i][j].items()}) for j in range(n)] for i in range(n)]


def is_restricted(design: DesignMatrix) -> bool:
    """Every non-zero entry is a single term with coefficient in {+-1, +-j}."""
    return design.restricted_arrays() is not None


def is_scod(design: DesignMatrix) -> ScodReport:
    """Exact test of ``G^H G == (|x_1|^2 + ... + |x_k|^2) I``.

    On failure the report carries the first offending cell in row-major
    order and its Gram form.
    """
    arrays = design.restricted_arrays()
    if arrays is not None:
        from ._kernels import first_gram_violation

        cell = first_gram_violation(arrays[0], arrays[1], design.k, design.scale_num)
    else:
        cell = None
        target = GramForm.sum_of_squares(design.k)
        zero = GramForm()
        for i in range(design.n):
            for j in range(i, design.n):
                if gram_cell(design, i, j) != (target if i == j else zero):
                    cell = (i, j)
                    break
            if cell is not None:
                break
    if cell is None:
        return ScodReport(True)
    return ScodReport(False, cell, gram_cell(design, *cell))


def sum_entries(entries: Iterable[Entry]) -> Entry:
    terms: list[SymbolicTerm] = []
    for e in entries:
        terms.extend(e.terms)
    return Entry(tuple(terms))
