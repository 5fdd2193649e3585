import itertools
from math import comb

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from rstab.errors import EmptyField, NonSymmetricInput
from rstab.newton import (
    CurvatureSpectrum,
    admissibility,
    classify_definiteness,
    elementary_symmetric,
    elementary_symmetric_all,
    newton_tensor,
    newton_tensors,
    restricted_symmetric,
    trace_identities_report,
)


def brute_S(k, r):
    return sum(np.prod(c) for c in itertools.combinations(k, r)) if r else 1.0


def recursion_P(A, r):
    n = len(A)
    P = np.eye(n)
    k = np.linalg.eigvalsh(A)
    for s in range(1, r + 1):
        P = brute_S(k, s) * np.eye(n) - A @ P
    return P


def sym(entries):
    return 0.5 * (entries + entries.T)


spectra = st.integers(1, 7).flatmap(
    lambda n: arrays(np.float64, n, elements=st.floats(-3, 3, allow_nan=False)))
matrices = st.integers(2, 6).flatmap(
    lambda n: arrays(np.float64, (n, n), elements=st.floats(-2, 2, allow_nan=False))).map(sym)


@pytest.mark.parametrize("k,r,expected", [
    ((1, 1, 1), 2, 3.0),
    ((1, 2, 3), 2, 11.0),
    ((0.3, -1.7, 2.2, 0.9), 3, 0.3 * -1.7 * 2.2 + 0.3 * -1.7 * 0.9 + 0.3 * 2.2 * 0.9 + -1.7 * 2.2 * 0.9),
    ((1, 2, 3), 0, 1.0),
    ((1, 2, 3), 4, 0.0),
])
def test_elementary_symmetric_examples(k, r, expected):
    assert elementary_symmetric(k, r) == pytest.approx(expected, abs=1e-14)


def test_spectrum_object():
    s = CurvatureSpectrum((1.0, 3.0))
    assert s.n == 2
    assert elementary_symmetric(s, 2) == 3.0


@given(spectra, st.integers(0, 8))
def test_elementary_symmetric_matches_subsets(k, r):
    assert elementary_symmetric(k, r) == pytest.approx(brute_S(k, r) if r <= len(k) else 0.0,
                                                     abs=1e-9 * (1 + np.max(np.abs(k))) ** max(r, 1))


@given(spectra)
def test_flip_sign_parity(k):
    S = elementary_symmetric_all(k)
    Sm = elementary_symmetric_all(-k)
    signs = (-1.0) ** np.arange(len(S))
    assert np.allclose(Sm, signs * S, atol=1e-10 * (1 + np.max(np.abs(k))) ** len(k))


def test_restricted_examples():
    # zero-based index: i=1 removes the second curvature
    assert restricted_symmetric((1, 2, 3), 1, 2) == pytest.approx(3.0)
    assert restricted_symmetric((1, 2, 3, 4), 0, 3) == pytest.approx(24.0)
    for n, r in [(3, 1), (4, 2), (5, 3)]:
        assert restricted_symmetric((0.7,) * n, n - 1, r) == pytest.approx(comb(n - 1, r) * 0.7**r)
    with pytest.raises(IndexError):
        restricted_symmetric((1, 2, 3), 3, 1)


def test_newton_tensor_examples(rng):
    k = np.array([0.5, -1.0, 2.0])
    P1 = newton_tensor(np.diag(k), 1).matrix
    assert np.allclose(P1, np.diag([k[1] + k[2], k[0] + k[2], k[0] + k[1]]))
    for n in (2, 3, 5):
        for r in range(n):
            assert np.allclose(newton_tensor(np.eye(n), r).matrix, comb(n - 1, r) * np.eye(n))
    A = sym(rng.standard_normal((5, 5)))
    k, Q = np.linalg.eigh(A)
    P3 = newton_tensor(A, 3).matrix
    expected = [restricted_symmetric(k, i, 3) for i in range(5)]
    assert np.allclose(np.diag(Q.T @ P3 @ Q), expected, atol=1e-10)


@settings(max_examples=60)
@given(matrices, st.data())
def test_newton_matches_recursion(A, data):
    r = data.draw(st.integers(0, len(A) - 1))
    P = newton_tensor(A, r).matrix
    assert np.allclose(P, recursion_P(A, r), atol=1e-9)
    assert np.allclose(P, P.T)
    assert np.allclose(newton_tensor(-A, r).matrix, (-1) ** r * P, atol=1e-9)
    assert np.allclose(A @ P, P @ A, atol=1e-9)


def test_newton_field_shape():
    out = newton_tensors(np.zeros((7, 2, 2)), 3)
    assert out.shape == (4, 7, 2, 2)
    assert np.allclose(out[1:], 0.0)
    with pytest.raises(NonSymmetricInput):
        newton_tensors(np.array([[0.0, 1.0], [0.0, 0.0]]), 1)


def test_trace_identity_examples():
    A = np.diag([1.0, 2.0, 3.0])
    res = trace_identities_report(A, 1)
    assert res.max() <= 1e-12
    P1 = newton_tensor(A, 1).matrix
    assert np.trace(A @ A @ P1) == pytest.approx(48.0)
    for r in range(4):
        assert trace_identities_report(np.zeros((4, 4)), r).max() == 0.0


@settings(max_examples=100)
@given(matrices, st.data())
def test_trace_identities_property(A, data):
    r = data.draw(st.integers(0, len(A) - 1))
    assert trace_identities_report(A, r).max() <= 1e-10


def test_classify_definiteness():
    P = np.stack([np.eye(2)] * 3)
    assert classify_definiteness(P, 1e-9).tag == "positive"
    mixed = np.stack([np.eye(2), -np.eye(2)])
    assert classify_definiteness(mixed, 1e-9).tag == "indefinite"
    singular = np.stack([np.eye(2), np.diag([1.0, 0.0])])
    assert classify_definiteness(singular, 1e-9).tag == "degenerate"
    neg = classify_definiteness(-2 * P, 1e-9)
    assert neg.tag == "negative" and neg.sign == -1 and neg.margin == pytest.approx(2.0)
    with pytest.raises(EmptyField):
        admissibility(np.zeros((0, 2, 2)), 1)


@pytest.mark.parametrize("rho", [0.5, 1.0, 3.0])
def test_sphere_admissibility(rho):
    shape = np.stack([np.eye(2) / rho] * 10)
    adm = admissibility(shape, 1)
    assert adm.admissible and adm.sign == 1
    assert set(adm.criteria) >= {"a", "b"}
    assert adm.definiteness.margin == pytest.approx(1.0 / rho)


def test_degenerate_admissibility():
    plane = admissibility(np.zeros((5, 2, 2)), 1)
    assert not plane.admissible and plane.criteria == ()
    cyl = admissibility(np.stack([np.diag([1.0, 0.0])] * 5), 1)
    assert not cyl.admissible
    assert cyl.definiteness.tag == "degenerate"
    # r = 0 is always admissible (P_0 = I)
    assert admissibility(np.zeros((3, 2, 2)), 0).admissible


def test_flipped_orientation_is_admissible_with_negative_sign():
    adm = admissibility(np.stack([-np.eye(2)] * 4), 1)
    assert adm.admissible and adm.sign == -1
