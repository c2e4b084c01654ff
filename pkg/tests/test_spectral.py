import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from smoothsign import (
    IdentifiabilityError,
    InvalidDimensionError,
    acf1,
    build_m,
    eigenpairs,
    rho_max,
    spectral_weights,
)


def test_build_m_quadratic_forms():
    assert np.array([1.0, 1.0]) @ build_m(2) @ np.array([1.0, 1.0]) == 1.0
    b = np.array([1.0, 1.0, 0.0])
    M = build_m(3)
    assert b @ M @ b == 1.0
    assert b @ b == 2.0
    assert acf1(b) == 0.5
    b = np.array([1.0, 0.0, -1.0])
    assert b @ M @ b == 0.0


def test_build_m_structure():
    M = build_m(6)
    assert np.all(np.diag(M) == 0)
    assert np.all(np.diag(M, 1) == 0.5)
    assert np.all(np.diag(M, -1) == 0.5)
    assert np.count_nonzero(M) == 10


def test_build_m_rejects_zero_length():
    with pytest.raises(InvalidDimensionError):
        build_m(0)
    with pytest.raises(InvalidDimensionError):
        eigenpairs(0)


def test_eigenpairs_l3():
    basis = eigenpairs(3)
    np.testing.assert_allclose(basis.eigenvalues, [np.sqrt(0.5), 0.0, -np.sqrt(0.5)], atol=1e-15)
    np.testing.assert_allclose(basis.eigenvectors[:, 0], [0.5, np.sqrt(0.5), 0.5], atol=1e-15)


def test_eigenpairs_l3_against_dense_solver():
    vals, vecs = np.linalg.eigh(build_m(3))
    top = vecs[:, np.argmax(vals)]
    top = top * np.sign(top[0])
    np.testing.assert_allclose(eigenpairs(3).eigenvectors[:, 0], top, atol=1e-12)


def test_rho_max_l101():
    assert rho_max(101) == pytest.approx(np.cos(np.pi / 102))
    assert rho_max(101) == pytest.approx(0.99953, abs=5e-6)
    assert eigenpairs(101).rho_max == rho_max(101)


def test_basis_is_read_only():
    basis = eigenpairs(5)
    with pytest.raises(ValueError):
        basis.eigenvalues[0] = 1.0


@pytest.mark.parametrize("L", [1, 2, 3, 7, 50, 200])
def test_basis_invariants(L):
    basis = eigenpairs(L)
    V, lam = basis.eigenvectors, basis.eigenvalues
    np.testing.assert_allclose(V.T @ V, np.eye(L), atol=1e-12)
    np.testing.assert_allclose(build_m(L) @ V, V * lam, atol=1e-12)
    assert np.all(np.diff(lam) < 0)
    assert lam[0] == pytest.approx(-lam[-1], abs=1e-15)
    assert np.all(V[0] > 0)


def test_analytic_matches_dense_eigensolver_all_lengths():
    for L in range(1, 201):
        vals, vecs = np.linalg.eigh(build_m(L))
        basis = eigenpairs(L)
        np.testing.assert_allclose(basis.eigenvalues, vals[::-1], atol=1e-9)
        dense = vecs[:, ::-1]
        # equal up to column sign
        overlap = np.abs(np.sum(dense * basis.eigenvectors, axis=0))
        np.testing.assert_allclose(overlap, 1.0, atol=1e-9)


def test_rho_max_never_exceeded():
    L = 9
    rng = np.random.default_rng(11)
    b = rng.standard_normal((10_000, L))
    M = build_m(L)
    ratios = np.einsum("ij,jk,ik->i", b, M, b) / np.einsum("ij,ij->i", b, b)
    assert ratios.max() <= rho_max(L)
    assert ratios.min() >= -rho_max(L)
    assert acf1(eigenpairs(L).eigenvectors[:, 0]) == pytest.approx(rho_max(L), abs=1e-14)


def test_eigenvector_target_has_unit_weight():
    basis = eigenpairs(6)
    sw = spectral_weights(basis.eigenvectors[:, 1], basis)
    np.testing.assert_allclose(sw.w, np.eye(6)[1], atol=1e-14)
    assert sw.nz_set == (1,)


def test_bandlimited_support(bandlimited_target):
    sw = spectral_weights(bandlimited_target)
    assert sw.nz_set == tuple(range(3, 10))
    np.testing.assert_allclose(sw.w[3:], 1 / np.sqrt(7), atol=1e-14)
    assert 1 / np.sqrt(7) == pytest.approx(0.378, abs=5e-4)
    assert not sw.complete


def test_zero_target_is_not_identifiable():
    with pytest.raises(IdentifiabilityError):
        spectral_weights(np.zeros(4))


def test_dimension_mismatch():
    with pytest.raises(InvalidDimensionError):
        spectral_weights(np.ones(4), eigenpairs(5))


@settings(max_examples=60, deadline=None)
@given(st.integers(1, 40), st.integers(0, 2**32 - 1))
def test_roundtrip_and_parseval(L, seed):
    g = np.random.default_rng(seed).standard_normal(L)
    basis = eigenpairs(L)
    w = spectral_weights(g, basis).w
    np.testing.assert_allclose(basis.eigenvectors @ w, g, atol=1e-12)
    assert w @ w == pytest.approx(g @ g, abs=1e-12 * max(1.0, g @ g))


def test_roundtrip_l8():
    g = np.random.default_rng(8).standard_normal(8)
    basis = eigenpairs(8)
    np.testing.assert_allclose(basis.eigenvectors @ (basis.eigenvectors.T @ g), g, atol=1e-12)
