from __future__ import annotations

import numpy as np
import pytest

from conftest import golden_design, golden_signed
from oracles import naive_g, naive_h, naive_q, naive_qx
from rzcod.analysis import zero_fraction, zero_fraction_formula
from rzcod.combinatorics import compute_ma, nonzero_columns, order_d, span_s
from rzcod.construction import (
    ConstructionRoute,
    build_g,
    build_h,
    build_h_partition,
    build_h_premultiply,
    build_h_recursive,
    build_q,
    build_qx,
    build_qx_tilde,
    hadamard_blockdiag,
    partition_permutation,
    signed_row_match,
)
from rzcod.design import DesignMatrix, evaluate, is_restricted, is_scod, unit_entry


def u(var, conj=False, phase=0):
    return unit_entry(var, conj, phase)


def test_g_examples():
    g1 = build_g(1)
    assert g1[0, 0] == u(1) and g1[0, 1] == u(2, True, 2) and g1[1, 0] == u(2) and g1[1, 1] == u(1, True)
    g2 = build_g(2)
    assert g2[3, 0].is_zero and g2[3, 1] == u(3)
    assert build_g(3)[0, 4] == u(4, True, 2)


@pytest.mark.parametrize("a", range(1, 9))
def test_g_structure(a):
    g = build_g(a)
    assert g == DesignMatrix(naive_g(a), a + 1)
    assert g.scale_num == 0 and g.k == a + 1
    mask = g.nonzero_mask()
    for i in range(0, 2 ** a, max(1, 2 ** a // 16)):
        assert set(np.flatnonzero(mask[i])) == set(nonzero_columns(a, i))
    assert is_scod(g) and is_restricted(g)


def test_qx_examples():
    q3 = build_qx(4, 3).entries
    assert np.array_equal(q3, build_q(3).entries)
    q5 = build_qx(5, 5).entries
    assert set(np.flatnonzero(q5[0])) == {0, 25} and q5[0, 0] == q5[0, 25] == 1
    with pytest.raises(ValueError):
        build_qx(5, 4)
    with pytest.raises(ValueError):
        build_qx(4, 5)


@pytest.mark.parametrize("a", range(3, 11))
def test_qx_properties(a):
    for x in compute_ma(a).m_a:
        q = build_qx(a, x).entries.astype(np.int64)
        assert np.array_equal(q, naive_qx(x))
        assert np.array_equal(q, q.T)
        assert np.array_equal(q.T @ q, 2 * np.eye(2 ** x, dtype=np.int64))


@pytest.mark.parametrize("a", range(3, 9))
def test_tilde_factors_commute(a):
    ms = compute_ma(a).m_a
    for i, x in enumerate(ms):
        for y in ms[i + 1:]:
            qx, qy = build_qx_tilde(a, x), build_qx_tilde(a, y)
            assert (qx @ qy) == (qy @ qx)


@pytest.mark.parametrize("a", range(1, 10))
def test_q_against_oracle(a):
    q = build_q(a)
    assert np.array_equal(q.entries.astype(np.int64), naive_q(a))
    g = q.gram_integer()
    assert np.array_equal(g.toarray() if hasattr(g, "toarray") else g, 2 ** (a - order_d(a)) * np.eye(2 ** a, dtype=np.int64))
    s = set(span_s(a))
    for i in (0, 1, 2 ** a - 1):
        assert set(np.flatnonzero(q.entries[i])) == {v ^ i for v in s}


def test_q_small_cases():
    assert np.array_equal(build_q(2).entries, np.eye(4))
    assert np.array_equal(build_q(4).entries, golden_signed("q4.txt").entries)


def test_h3_premultiply_matches_printed():
    assert build_h(3) == golden_design("h3.txt")


def test_h3_partition_matches_printed_example():
    assert build_h_partition(3) == golden_design("h3_partition.txt")
    assert partition_permutation(3) == golden_signed("perm_a3.txt")
    assert hadamard_blockdiag(3) == golden_signed("hadamard_blockdiag_a3.txt", corrected=True)
    order = [int(np.flatnonzero(r)[0]) for r in partition_permutation(3).entries]
    assert order == [0, 7, 1, 6, 2, 5, 3, 4]


def test_h5_scale_and_zero_fraction():
    h = build_h(5)
    assert h.scale_num == -2
    assert zero_fraction(h) == zero_fraction_formula(5, "h") == pytest.approx(0.25)
    assert zero_fraction(build_h_partition(4)) == zero_fraction_formula(4, "h")


@pytest.mark.parametrize("a", range(1, 8))
def test_routes_agree(a):
    pre = build_h_premultiply(a)
    assert build_h_recursive(a) == pre
    assert signed_row_match(build_h_partition(a), pre) is not None
    assert pre == naive_h(a)


@pytest.mark.parametrize("a", range(1, 8))
@pytest.mark.parametrize("route", list(ConstructionRoute))
def test_h_is_restricted_scod(a, route):
    h = build_h(a, route)
    assert is_scod(h) and is_restricted(h)
    w = (a + 1) * 2 ** (a - order_d(a))
    mask = h.nonzero_mask()
    assert (mask.sum(axis=0) == w).all() and (mask.sum(axis=1) == w).all()


@pytest.mark.parametrize("a", range(1, 9))
def test_scaled_premultiplier_is_unitary(a):
    q = build_q(a).entries.astype(float) * 2 ** (-(a - order_d(a)) / 2)
    assert np.allclose(q.T @ q, np.eye(2 ** a))


def test_h_numerically_orthogonal():
    rng = np.random.default_rng(7)
    for a in (3, 5, 6):
        v = rng.standard_normal(a + 1) + 1j * rng.standard_normal(a + 1)
        m = evaluate(build_h(a), v)
        assert np.allclose(m.conj().T @ m, np.sum(np.abs(v) ** 2) * np.eye(2 ** a))


def test_signed_row_match_detects_mismatch():
    h = build_h(3)
    s, p = h.restricted_arrays()
    p = p.copy()
    p[0, 0] ^= 1
    assert signed_row_match(DesignMatrix.from_arrays(s, p, h.k, h.scale_num), h) is None
    assert signed_row_match(h, h) == [(r, 1) for r in range(8)]


def test_a_range_checked():
    with pytest.raises(ValueError):
        build_g(0)
    with pytest.raises(ValueError):
        build_h(17)
    with pytest.raises(ValueError):
        build_h(3, "sideways")
