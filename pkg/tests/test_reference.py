from __future__ import annotations

import numpy as np

from conftest import golden_design
from rzcod.analysis import zero_fraction
from rzcod.design import evaluate, is_restricted, is_scod
from rzcod.reference import alamouti, g_tjc, g_twms, g_yuen


def test_alamouti_is_g1():
    from rzcod.construction import build_g

    assert alamouti() == build_g(1)


def test_yuen_matches_golden_file():
    assert g_yuen() == golden_design("yuen8.txt")


def test_zero_free_references_are_scods():
    for d in (g_tjc(), g_yuen()):
        assert is_scod(d)
        assert zero_fraction(d) == 0
    assert is_restricted(g_yuen()) and not is_restricted(g_tjc())


def test_tjc_numeric_orthogonality():
    v = np.array([1 + 2j, -0.5 + 1j, 0.25 - 3j])
    m = evaluate(g_tjc(), v)
    assert np.allclose(m.conj().T @ m, np.sum(np.abs(v) ** 2) * np.eye(4))


def test_twms_is_classification_only():
    d = g_twms()
    assert d.n == 8 and d.k == 4
    assert not is_restricted(d)
    assert not is_scod(d)
    # the interleaved entries of the lower half touch two variables each
    assert all(len(e.variables) == 2 for row in d.entries[4:] for e in row)
