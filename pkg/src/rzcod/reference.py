"""Fixed reference designs used for comparison.

``g_tjc`` and ``g_yuen`` are square complex orthogonal designs obtained from
amicable designs; ``g_twms`` is kept exactly as commonly printed and is only
used to classify entry forms (its coordinate-interleaved entries), not as a
verified design.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .design import Coeff, DesignMatrix, Entry, SymbolicTerm
from .formats import design_from_text

__all__ = ["alamouti", "g_tjc", "g_yuen", "g_twms"]

_YUEN = """\
# scod n=8 k=4 scale_num=-1
  x1*   x1*   x2  -x2   x3  -x3   x4  -x4
  jx1  -jx1 jx2* jx2* jx3* jx3* jx4* jx4*
  -x2    x2  x1*  x1*  x4* -x4* -x3*  x3*
-jx2* -jx2*  jx1 -jx1  jx4  jx4 -jx3 -jx3
  -x3    x3 -x4*  x4*  x1*  x1*  x2* -x2*
-jx3* -jx3* -jx4 -jx4  jx1 -jx1  jx2  jx2
  -x4    x4  x3* -x3* -x2*  x2*  x1*  x1*
-jx4* -jx4*  jx3  jx3 -jx2 -jx2  jx1 -jx1
"""

_HALF = Fraction(1, 2)


def _t(coeff: Coeff, var: int, conj: bool = False) -> SymbolicTerm:
    return SymbolicTerm(coeff, var, conj)


def _e(*terms: SymbolicTerm) -> Entry:
    return Entry(terms)


@lru_cache(maxsize=None)
def alamouti() -> DesignMatrix:
    return design_from_text("# scod n=2 k=2 scale_num=0\nx1 -x2*\nx2 x1*\n")


@lru_cache(maxsize=None)
def g_yuen() -> DesignMatrix:
    """The zero-free rate-1/2 design for 8 antennas, including its 1/sqrt(2) factor."""
    return design_from_text(_YUEN)


@lru_cache(maxsize=None)
def g_tjc() -> DesignMatrix:
    """Zero-free 4-antenna design with ``x3 / sqrt(2)`` and half-integer combination entries."""
    r = Coeff(re2=_HALF)  # 1/sqrt(2)
    h = Coeff(_HALF)
    mh = -h
    x3 = _e(_t(r, 3))
    x3c = _e(_t(r, 3, True))
    rows = [
        [_e(_t(Coeff(1), 1)), _e(_t(Coeff(1), 2)), x3, x3],
        [_e(_t(Coeff(-1), 2, True)), _e(_t(Coeff(1), 1, True)), x3, -x3],
        [x3c, x3c,
         _e(_t(mh, 1), _t(mh, 1, True), _t(h, 2), _t(mh, 2, True)),
         _e(_t(h, 1), _t(mh, 1, True), _t(mh, 2), _t(mh, 2, True))],
        [x3c, -x3c,
         _e(_t(h, 1), _t(mh, 1, True), _t(h, 2), _t(h, 2, True)),
         _e(_t(mh, 1), _t(mh, 1, True), _t(mh, 2), _t(h, 2, True))],
    ]
    return DesignMatrix(rows, 3, 0)


def _interleaved(p: int, q: int) -> Entry:
    # x_pI + j x_qQ = (x_p + x_p*)/2 + (x_q - x_q*)/2
    h = Coeff(_HALF)
    return _e(_t(h, p), _t(h, p, True), _t(h, q), _t(-h, q, True))


@lru_cache(maxsize=None)
def g_twms() -> DesignMatrix:
    """8-antenna design with coordinate-interleaved rows, as printed (classification only)."""
    one, neg = Coeff(1), Coeff(-1)

    def u(var: int, conj: bool = False, c: Coeff = one) -> Entry:
        return _e(_t(c, var, conj))

    top = [
        [u(1), u(1), u(2), u(2), u(3), u(4), u(3), u(4)],
        [u(1), u(1, c=neg), u(2), u(2, c=neg), u(4, True), u(3, True, neg), u(4, True), u(3, True, neg)],
        [u(2, True), u(2, True), u(1, True, neg), u(1, True, neg), u(3), u(4), u(3, c=neg), u(4, c=neg)],
        [u(2, True), u(2, True, neg), u(1, True, neg), u(1, True), u(4, True), u(3, True, neg), u(4, True, neg),
         u(3, True)],
    ]
    a, b, c, d = _interleaved(4, 3), _interleaved(3, 4), _interleaved(2, 1), _interleaved(1, 2)
    bottom = [
        [a, b, a, b, c, c, d, d],
        [b, a, b, a, c, c, d, d],
        [a, b, a, b, d, d, c, c],
        [b, a, b, a, d, d, c, c],
    ]
    return DesignMatrix(top + bottom, 4, -1)

