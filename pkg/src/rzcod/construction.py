"""Constructions of ``G_a``, the premultipliers and the reduced-zero designs ``H_a``."""

from __future__ import annotations

import enum
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .combinatorics import compute_ma, f_map, is_power_of_two, order_d, partition_classes, sylvester_hadamard
from .design import (
    ONE,
    DesignMatrix,
    SignedMatrix,
    SymbolicTerm,
    block_design,
    conj_transpose,
    premultiply,
    substitute,
)

__all__ = [
    "ConstructionRoute",
    "build_g",
    "build_qx",
    "build_qx_tilde",
    "build_q",
    "build_h",
    "build_h_premultiply",
    "build_h_partition",
    "build_h_recursive",
    "partition_permutation",
    "hadamard_blockdiag",
    "unit_pattern",
    "signed_row_match",
]

MAX_A = 16


class ConstructionRoute(enum.Enum):
    PARTITION = "partition"
    PREMULTIPLY = "premultiply"
    RECURSIVE = "recursive"


def _check_a(a: int) -> None:
    if not isinstance(a, (int, np.integer)) or a < 1:
        raise ValueError(f"a must be a positive integer, got {a!r}")
    if a > MAX_A:
        raise ValueError(f"a={a} exceeds the supported maximum {MAX_A}")


def _slot(var: int, conj: bool) -> int:
    return 2 * (var - 1) + int(conj)


@lru_cache(maxsize=None)
def build_g(a: int) -> DesignMatrix:
    """``G_a``: the ``2^a x 2^a`` rate ``(a+1)/2^a`` design built from Alamouti."""
    _check_a(a)
    slots = np.array([[_slot(1, False), _slot(2, True)], [_slot(2, False), _slot(1, True)]], dtype=np.int16)
    phases = np.array([[0, 2], [0, 0]], dtype=np.int8)
    g = DesignMatrix.from_arrays(slots, phases, 2)
    for m in range(2, a + 1):
        h = conj_transpose(g)
        s, p = g.restricted_arrays()
        hs, hp = h.restricted_arrays()
        size = s.shape[0]
        eye = np.eye(size, dtype=bool)
        top_right = np.where(eye, _slot(m + 1, True), -1)
        bottom_left = np.where(eye, _slot(m + 1, False), -1)
        slots = np.block([[s, top_right], [bottom_left, hs]])
        phases = np.block([[p, np.where(eye, 2, 0)], [np.zeros_like(p), hp]])
        g = DesignMatrix.from_arrays(slots, phases, m + 1)
    return g


@lru_cache(maxsize=None)
def build_qx(a: int, x: int) -> SignedMatrix:
    """The ``2^x x 2^x`` premultiplier block attached to ``x`` in ``M_a``."""
    _check_a(a)
    if x not in compute_ma(a).m_a:
        raise ValueError(f"x={x} is not in M_{a} = {sorted(compute_ma(a).m_a)}")
    xp = f_map(x)
    q = np.zeros((1 << x, 1 << x), dtype=np.int8)
    i = np.arange(1 << (x - 1))
    q[i, i] = 1
    q[i, i ^ xp] = 1
    q[i ^ xp, i] = 1
    q[i ^ xp, i ^ xp] = -1
    return SignedMatrix(q)


@lru_cache(maxsize=None)
def build_qx_tilde(a: int, x: int) -> SignedMatrix:
    """``I_{2^(a-x)} (x) Q_x``."""
    return build_qx(a, x).kron_identity(1 << (a - x))


@lru_cache(maxsize=None)
def build_q(a: int) -> SignedMatrix:
    """``Q^(a)``: the product of the ``Q~_x`` over ``M_a`` in ascending ``x``."""
    _check_a(a)
    q = SignedMatrix.from_sparse(sp.identity(1 << a, dtype=np.int64, format="csr"))
    for x in compute_ma(a).m_a:
        q = q @ build_qx_tilde(a, x)
    return q


@lru_cache(maxsize=None)
def build_h_premultiply(a: int) -> DesignMatrix:
    """``H_a = 2^(-(a-d)/2) Q^(a) G_a``."""
    _check_a(a)
    d = order_d(a)
    return premultiply(build_q(a), build_g(a)).with_scale(-(a - d))


def partition_permutation(a: int) -> SignedMatrix:
    """Permutation stacking the rows of ``G_a`` class by class."""
    order = [r for c in partition_classes(a) for r in c.elements]
    n = 1 << a
    p = np.zeros((n, n), dtype=np.int8)
    p[np.arange(n), order] = 1
    return SignedMatrix(p)


def hadamard_blockdiag(a: int) -> SignedMatrix:
    """``I_{2^d} (x) H`` with ``H`` the Sylvester matrix of order ``2^(a-d)``."""
    d = order_d(a)
    return sylvester_hadamard(a - d).kron_identity(1 << d)


@lru_cache(maxsize=None)
def build_h_partition(a: int) -> DesignMatrix:
    """Coset-partition route: Hadamard-combine the rows of each class of ``G_a``."""
    _check_a(a)
    d = order_d(a)
    q = hadamard_blockdiag(a) @ partition_permutation(a)
    return premultiply(q, build_g(a)).with_scale(-(a - d))


def unit_pattern(design: DesignMatrix, var: int, conj: bool) -> DesignMatrix:
    """``design(1, 0, .., 0)`` re-expressed with ``x_var`` (or its conjugate) as the carrier.

    Each cell holding ``c * x_1`` or ``c * x_1*`` becomes ``c * x_var`` (or
    ``c * x_var*``); every other cell becomes zero.  The scale is kept.
    """
    s, p = design.restricted_arrays()
    carrier = (s == 0) | (s == 1)
    k = max(design.k, var)
    return DesignMatrix.from_arrays(np.where(carrier, _slot(var, conj), -1), np.where(carrier, p, 0), k, design.scale_num)


@lru_cache(maxsize=None)
def build_h_recursive(a: int) -> DesignMatrix:
    """Grow ``H_a`` one step at a time from ``H_1 = G_1``."""
    _check_a(a)
    h = build_g(1)
    for b in range(1, a):
        # b -> b + 1; the new variable is x_{b+2}
        new = b + 2
        k = b + 2
        top_right = unit_pattern(h, new, True)
        s, p = top_right.restricted_arrays()
        top_right = DesignMatrix.from_arrays(s, np.where(s >= 0, p + 2, 0), k, h.scale_num)
        bottom_left = unit_pattern(h, new, False)
        rules = {1: SymbolicTerm(ONE, 1, True)}
        rules.update({v: SymbolicTerm(-ONE, v) for v in range(2, b + 2)})
        bottom_right = substitute(h, rules)
        h_prime = block_design([[h, top_right], [bottom_left, bottom_right]], k)
        if is_power_of_two(b + 1):
            h = h_prime
        else:
            h = premultiply(build_qx(b + 1, b + 1), h_prime).with_scale(h.scale_num - 1)
    return h


def build_h(a: int, route: ConstructionRoute | str = ConstructionRoute.PREMULTIPLY) -> DesignMatrix:
    route = ConstructionRoute(route)
    if route is ConstructionRoute.PARTITION:
        return build_h_partition(a)
    if route is ConstructionRoute.RECURSIVE:
        return build_h_recursive(a)
    return build_h_premultiply(a)


def signed_row_match(x: DesignMatrix, y: DesignMatrix) -> list[tuple[int, int]] | None:
    """Match the rows of ``x`` to rows of ``y`` up to a per-row sign.

    Returns ``[(row_in_y, sign), ...]`` indexed by the row of ``x`` when
    ``x = D P y`` for a permutation ``P`` and a diagonal ``D`` of signs, or
    ``None`` when no such matching exists.  Scales and ``k`` must agree.
    """
    if (x.n, x.k, x.scale_num) != (y.n, y.k, y.scale_num):
        return None
    xs, xp = x.restricted_arrays()
    ys, yp = y.restricted_arrays()

    def keys(s, ph, flip):
        ph = np.where(s >= 0, (ph + 2 * flip) & 3, 0)
        return {(s[r].tobytes(), ph[r].tobytes()): r for r in range(s.shape[0])}

    plain, negated = keys(ys, yp, 0), keys(ys, yp, 1)
    used = set()
    out = []
    for r in range(x.n):
        key = (xs[r].tobytes(), xp[r].tobytes())
        if key in plain and plain[key] not in used:
            m = (plain[key], 1)
        elif key in negated and negated[key] not in used:
            m = (negated[key], -1)
        else:
            return None
        used.add(m[0])
        out.append(m)
    return out
