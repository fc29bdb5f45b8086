from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import exact_evaluate, naive_g, naive_gram, naive_is_scod
from rzcod.construction import build_g, build_h
from rzcod.design import (
    ONE,
    Coeff,
    DesignMatrix,
    Entry,
    GramForm,
    NonIntersectionError,
    SignedMatrix,
    SymbolicTerm,
    ZERO_ENTRY,
    block_design,
    conj_transpose,
    dispersion_matrices,
    evaluate,
    gram,
    gram_cell,
    is_restricted,
    is_scod,
    premultiply,
    substitute,
    unit_entry,
)
from rzcod.reference import alamouti, g_tjc, g_yuen


def x(var, conj=False, phase=0):
    return unit_entry(var, conj, phase)


# -- coefficients and entries


def test_coeff_arithmetic_with_sqrt2():
    r = Coeff(re2=Fraction(1, 2))  # 1/sqrt(2)
    assert r * r == Coeff(Fraction(1, 2))
    assert Coeff(0, 1) * Coeff(0, 1) == Coeff(-1)
    assert Coeff(1, 2).conjugate() == Coeff(1, -2)
    assert Coeff.unit(3).phase == 3
    assert r.phase is None
    assert abs(complex(r) - 2 ** -0.5) < 1e-15


def test_symbolic_term_rejects_zero_and_bad_index():
    with pytest.raises(ValueError):
        SymbolicTerm(Coeff(), 1)
    with pytest.raises(ValueError):
        SymbolicTerm(ONE, 0)


def test_entry_merges_and_sorts():
    e = Entry((SymbolicTerm(ONE, 2, True), SymbolicTerm(ONE, 1), SymbolicTerm(-ONE, 2, True), SymbolicTerm(ONE, 1)))
    assert e.terms == (SymbolicTerm(Coeff(2), 1),)
    assert Entry((SymbolicTerm(ONE, 1), SymbolicTerm(-ONE, 1))).is_zero


terms = st.builds(
    SymbolicTerm,
    st.builds(Coeff, st.integers(-2, 2).filter(bool), st.integers(-2, 2)),
    st.integers(1, 3),
    st.booleans(),
)


@given(st.lists(terms, max_size=6))
def test_canonicalization_idempotent(ts):
    once = Entry(tuple(ts))
    assert Entry(once.terms) == once
    keys = [t.key for t in once.terms]
    assert keys == sorted(set(keys))


# -- design matrices


def test_design_rejects_bad_shapes_and_variables():
    with pytest.raises(ValueError):
        DesignMatrix([[x(1), x(2)]])
    with pytest.raises(ValueError):
        DesignMatrix([[x(3)]], k=2)


def test_array_and_entry_forms_agree():
    g = build_g(3)
    rebuilt = DesignMatrix(g.entries, g.k, g.scale_num)
    assert rebuilt == g
    assert rebuilt.restricted_arrays()[0].tolist() == g.restricted_arrays()[0].tolist()


def test_conj_transpose_of_alamouti():
    ah = conj_transpose(alamouti())
    assert ah[0, 0] == x(1, True) and ah[0, 1] == x(2, True) and ah[1, 0] == -x(2) and ah[1, 1] == x(1)
    assert conj_transpose(conj_transpose(g_tjc())) == g_tjc()


def test_substitute_realizes_the_conjugate_identity():
    # G_a^H = G_a(x1*, -x2, ..., -x_{a+1})
    for a in (1, 2, 3, 4):
        g = build_g(a)
        rules = {1: SymbolicTerm(ONE, 1, True)}
        rules.update({v: SymbolicTerm(-ONE, v) for v in range(2, a + 2)})
        assert substitute(g, rules) == conj_transpose(g)


def test_block_design_requires_common_scale():
    a = alamouti()
    with pytest.raises(ValueError):
        block_design([[a, a.with_scale(-1)], [a, a]])


def test_premultiply_rejects_intersecting_rows():
    g = build_g(2)
    q = SignedMatrix([[1, 1, 0, 0], [1, -1, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]])  # rows 0 and 1 share columns
    with pytest.raises(NonIntersectionError):
        premultiply(q, g)
    loose = premultiply(q, g, strict=False)
    assert len(loose[0, 0].terms) == 2


def test_premultiply_of_non_intersecting_rows():
    # rows i and i^7 of G_3 have disjoint supports
    g = build_g(3)
    q = np.zeros((8, 8), dtype=np.int8)
    for i in range(8):
        q[i, i] = 1
        q[i, i ^ 7] = 1 if i < 4 else -1
    h = premultiply(SignedMatrix(q), g)
    assert h[0, 7] == g[7, 7] and h[7, 0] == -g[0, 0]
    assert h.scale_num == 0
    assert is_scod(h.with_scale(-1))


def test_signed_matrix_checks_range():
    with pytest.raises(ValueError):
        SignedMatrix([[2, 0], [0, 1]])
    s = SignedMatrix([[1, 1], [1, -1]])
    assert s.gram_integer().tolist() == [[2, 0], [0, 2]]


# -- Gram forms and orthogonality


def test_gram_of_alamouti():
    cells = gram(alamouti())
    assert cells[0][0] == GramForm.sum_of_squares(2)
    assert cells[0][1].is_zero and cells[1][0].is_zero


def test_gram_of_scaled_h3_is_identity_form():
    h3 = build_h(3)
    cells = gram(h3)
    target = GramForm.sum_of_squares(4)
    assert all(cells[i][j] == (target if i == j else GramForm()) for i in range(8) for j in range(8))


def test_sign_flip_breaks_orthogonality():
    g = build_g(2)
    grid = [list(r) for r in g.entries]
    grid[0][1] = -grid[0][1]
    bad = DesignMatrix(grid, 3)
    rep = is_scod(bad)
    assert not rep and rep.cell == (0, 1)
    assert not rep.form.is_zero
    assert not gram(bad)[0][1].is_zero


def test_repeated_variable_in_a_column_is_not_orthogonal():
    d = DesignMatrix([[x(1), ZERO_ENTRY], [x(1), x(1)]], 1)
    assert not is_scod(d)


def test_identity_design_is_a_rate_one_over_n_scod():
    d = DesignMatrix([[x(1), ZERO_ENTRY], [ZERO_ENTRY, x(1)]], 1)
    assert is_scod(d)


def test_wrong_scale_fails():
    assert not is_scod(build_h(3).with_scale(0))
    assert not is_scod(build_g(2).with_scale(1))


@pytest.mark.parametrize("design", [alamouti(), g_tjc(), g_yuen(), build_g(3)], ids=["g1", "tjc", "yuen", "g3"])
def test_scod_references(design):
    assert is_scod(design)


def test_restricted_predicate():
    assert is_restricted(build_g(3))
    assert is_restricted(g_yuen())
    assert not is_restricted(g_tjc())


def test_gram_is_conjugate_symmetric():
    for d in (g_tjc(), build_h(3), g_yuen()):
        cells = gram(d)
        for i in range(d.n):
            for j in range(d.n):
                assert cells[i][j] == cells[j][i].conjugate()


def test_gram_cell_matches_oracle():
    d = build_h(4)
    oracle = naive_gram(d)
    for i, j in [(0, 0), (0, 5), (3, 11), (15, 15)]:
        assert gram_cell(d, i, j).as_dict() == oracle[i][j]


@st.composite
def restricted_designs(draw):
    n = draw(st.sampled_from([2, 4]))
    k = draw(st.integers(1, 3))
    slots = np.array(draw(st.lists(st.integers(-1, 2 * k - 1), min_size=n * n, max_size=n * n))).reshape(n, n)
    phases = np.array(draw(st.lists(st.integers(0, 3), min_size=n * n, max_size=n * n))).reshape(n, n)
    scale = draw(st.integers(-2, 0))
    return DesignMatrix.from_arrays(slots, phases, k, scale)


@settings(max_examples=300, deadline=None)
@given(restricted_designs())
def test_compiled_check_agrees_with_oracle(d):
    assert bool(is_scod(d)) == naive_is_scod(d)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 7), st.integers(0, 3), st.sampled_from([1, 2, 3]))
def test_single_cell_corruption_of_g_is_detected(cell, phase_shift, a):
    g = build_g(a)
    s, p = g.restricted_arrays()
    nz = np.argwhere(s >= 0)
    i, j = nz[cell % len(nz)]
    p2 = p.copy()
    p2[i, j] = (p2[i, j] + 1 + phase_shift % 3) & 3
    bad = DesignMatrix.from_arrays(s, p2, g.k)
    assert not is_scod(bad)


# -- numeric views


def test_evaluate_examples():
    assert np.array_equal(evaluate(alamouti(), [1, 1j]), np.array([[1, 1j], [1j, 1]]))
    assert np.array_equal(evaluate(build_g(3), [1, 0, 0, 0]), np.eye(8))
    with pytest.raises(ValueError):
        evaluate(alamouti(), [1])


def test_evaluate_h_at_unit_is_scaled_premultiplier():
    from rzcod.construction import build_q

    for a in (3, 4, 5):
        h = build_h(a)
        q = build_q(a).entries
        assert np.allclose(evaluate(h, [1] + [0] * a), q * 2.0 ** (h.scale_num / 2))


@settings(max_examples=25, deadline=None)
@given(st.lists(st.tuples(st.fractions(-3, 3, max_denominator=4), st.fractions(-3, 3, max_denominator=4)),
                min_size=4, max_size=4))
def test_exact_unitarity_of_evaluated_scod(vals):
    # (D(v))^H D(v) = sum |v|^2 I in exact arithmetic, with the 2^scale factor applied to the squares
    d = build_h(3)
    m = exact_evaluate(d, list(vals))
    f = Fraction(2) ** d.scale_num
    norm = sum(r * r + i * i for r, i in vals)
    for i in range(8):
        for j in range(8):
            re = sum(m[r][i][0] * m[r][j][0] + m[r][i][1] * m[r][j][1] for r in range(8))
            im = sum(m[r][i][0] * m[r][j][1] - m[r][i][1] * m[r][j][0] for r in range(8))
            assert (re * f, im * f) == ((norm, 0) if i == j else (0, 0))


def test_dispersion_reconstructs_design():
    rng = np.random.default_rng(3)
    for d in (g_tjc(), build_h(4)):
        v = rng.standard_normal(d.k) + 1j * rng.standard_normal(d.k)
        a, b = dispersion_matrices(d)
        assert np.allclose(np.einsum("knm,k->nm", a, v) + np.einsum("knm,k->nm", b, v.conj()), evaluate(d, v))


def test_naive_g_oracle_matches_constructed():
    for a in range(1, 6):
        assert DesignMatrix(naive_g(a), a + 1) == build_g(a)
