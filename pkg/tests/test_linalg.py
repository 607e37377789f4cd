import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_hermitian, random_psd
from lkhverify.errors import DomainError, IllConditioned, NonConvergence, NonHermitian, ShapeMismatch
from lkhverify.linalg import (
    add,
    adjoint,
    eig_hermitian,
    frobenius_norm,
    loewner_leq,
    mat_fn,
    min_eigenvalue,
    mul,
    scale,
    trace,
)


def test_trace_identity():
    assert trace(np.eye(3)) == 3


def test_adjoint_involution(rng):
    a = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    np.testing.assert_array_equal(adjoint(adjoint(a)), a)


def test_mul_identity(rng):
    a = random_hermitian(rng, 4)
    np.testing.assert_array_equal(mul(a, np.eye(4)), a)


def test_add_scale_frobenius():
    a = np.array([[1, 2j], [-2j, 3]])
    np.testing.assert_array_equal(add(a, a), scale(a, 2))
    assert frobenius_norm(a) == pytest.approx(np.sqrt(1 + 4 + 4 + 9))


def test_shape_errors():
    with pytest.raises(ShapeMismatch):
        add(np.eye(2), np.eye(3))
    with pytest.raises(ShapeMismatch):
        mul(np.eye(2), np.eye(3))
    with pytest.raises(ShapeMismatch):
        trace(np.ones((2, 3)))
    with pytest.raises(ValueError):
        trace(np.array([[np.nan]]))


def test_eig_diagonal_input():
    e = eig_hermitian(np.diag([3.0, 1.0, 2.0]))
    np.testing.assert_array_equal(e.eigenvalues, [1.0, 2.0, 3.0])
    np.testing.assert_array_equal(np.abs(e.eigenvectors), np.eye(3)[:, [1, 2, 0]])


def test_eig_pauli_x():
    e = eig_hermitian([[0, 1], [1, 0]])
    np.testing.assert_allclose(e.eigenvalues, [-1.0, 1.0], atol=1e-15)


def test_eig_seed_42_residual():
    a = random_hermitian(np.random.default_rng(42), 8)
    e = eig_hermitian(a)
    norm = np.linalg.norm(a)
    assert np.linalg.norm(a - e.reconstruct()) <= 1e-12 * norm
    assert abs(e.eigenvalues.sum() - np.trace(a).real) <= 1e-12 * norm
    np.testing.assert_allclose(e.eigenvalues, np.linalg.eigvalsh(a), atol=1e-12 * norm)


def test_eig_rejects_non_hermitian():
    a = np.array([[1.0, 1.0], [0.0, 1.0]])
    with pytest.raises(NonHermitian):
        eig_hermitian(a)
    np.testing.assert_allclose(eig_hermitian(a, symmetrize=True).eigenvalues, [0.5, 1.5])


def test_eig_nonconvergence_cap(rng):
    with pytest.raises(NonConvergence):
        eig_hermitian(random_hermitian(rng, 6), max_sweeps=1)


def test_eig_zero_and_scalar():
    assert eig_hermitian(np.zeros((3, 3))).eigenvalues.tolist() == [0, 0, 0]
    assert eig_hermitian([[2.5]]).eigenvalues.tolist() == [2.5]


def test_eig_degenerate_spectrum(rng):
    q, _ = np.linalg.qr(rng.standard_normal((6, 6)) + 1j * rng.standard_normal((6, 6)))
    a = (q * np.array([1, 1, 1, 2, 2, 5.0])) @ q.conj().T
    a = 0.5 * (a + a.conj().T)
    e = eig_hermitian(a)
    np.testing.assert_allclose(e.eigenvalues, [1, 1, 1, 2, 2, 5], atol=1e-13)
    assert np.linalg.norm(a - e.reconstruct()) <= 1e-12 * np.linalg.norm(a)


def test_eig_residual_and_unitarity_many():
    rng = np.random.default_rng(1000)
    for _ in range(1000):
        n = int(rng.integers(2, 65))
        a = random_hermitian(rng, n, scale=10.0 ** rng.uniform(-3, 3))
        e = eig_hermitian(a)
        u = e.eigenvectors
        norm = np.linalg.norm(a)
        assert np.linalg.norm(a - e.reconstruct()) <= 1e-12 * max(1.0, norm)
        assert np.linalg.norm(u.conj().T @ u - np.eye(n)) <= 1e-12
        assert np.all(np.diff(e.eigenvalues) >= 0)
        assert abs(e.eigenvalues.sum() - np.trace(a).real) <= 1e-12 * norm


@settings(max_examples=60, deadline=None)
@given(n=st.integers(1, 12), seed=st.integers(0, 2**32 - 1))
def test_eig_matches_lapack(n, seed):
    a = random_hermitian(np.random.default_rng(seed), n)
    e = eig_hermitian(a)
    np.testing.assert_allclose(e.eigenvalues, np.linalg.eigvalsh(a), atol=1e-12 * max(1.0, np.linalg.norm(a)))


def test_mat_fn_identity_inverse():
    np.testing.assert_allclose(mat_fn(np.eye(3), "inverse"), np.eye(3))


def test_mat_fn_sqrt_diagonal():
    np.testing.assert_allclose(mat_fn(np.diag([4.0, 1.0]), "sqrt"), np.diag([2.0, 1.0]))


def test_mat_fn_log_roundtrip_via_expm(rng):
    g = random_psd(rng, 4)
    rho = g / np.trace(g).real
    np.testing.assert_allclose(scipy.linalg.expm(mat_fn(rho, "log")), rho, atol=1e-10)


def test_mat_fn_inverse_sqrt(rng):
    a = random_psd(rng, 5) + np.eye(5)
    s = mat_fn(a, "inverse_sqrt")
    np.testing.assert_allclose(s @ a @ s, np.eye(5), atol=1e-12)


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 10), seed=st.integers(0, 2**32 - 1))
def test_inverse_involution_and_sqrt_square(n, seed):
    rng = np.random.default_rng(seed)
    a = random_psd(rng, n) + 0.1 * np.eye(n)
    norm = np.linalg.norm(a)
    back = mat_fn(mat_fn(a, "inverse"), "inverse")
    assert np.linalg.norm(back - a) <= 1e-9 * norm
    root = mat_fn(a, "sqrt")
    assert np.linalg.norm(root @ root - a) <= 1e-10 * norm


def test_mat_fn_clamp_policy():
    # tiny negative eigenvalue from roundoff: clamped for sqrt, refused for inverse/log
    a = np.diag([1.0, -1e-14])
    np.testing.assert_allclose(mat_fn(a, "sqrt"), np.diag([1.0, 0.0]))
    for f in ("inverse", "log", "inverse_sqrt"):
        with pytest.raises(IllConditioned):
            mat_fn(a, f)
    with pytest.raises(IllConditioned):
        mat_fn(np.diag([1.0, 1e-11]), "inverse")


def test_mat_fn_domain_errors():
    a = np.diag([1.0, -0.5])
    for f in ("sqrt", "log", "inverse_sqrt"):
        with pytest.raises(DomainError):
            mat_fn(a, f)
    with pytest.raises(IllConditioned):
        mat_fn(a, "inverse")
    with pytest.raises(ValueError):
        mat_fn(np.eye(2), "exp")


def test_min_eigenvalue_examples():
    assert min_eigenvalue(np.eye(4)) == 1.0
    assert min_eigenvalue(np.diag([0.2, 0.8])) == pytest.approx(0.2)


def test_loewner_examples():
    assert loewner_leq(np.zeros((2, 2)), np.eye(2)) == (True, 1.0)
    assert loewner_leq(np.eye(2), np.zeros((2, 2))) == (False, -1.0)
    with pytest.raises(ShapeMismatch):
        loewner_leq(np.eye(2), np.eye(3))
    with pytest.raises(NonHermitian):
        loewner_leq(np.eye(2), np.array([[1.0, 1.0], [0.0, 1.0]]))


@settings(max_examples=40, deadline=None)
@given(n=st.integers(1, 8), seed=st.integers(0, 2**32 - 1))
def test_loewner_reflexive_antisymmetric(n, seed):
    rng = np.random.default_rng(seed)
    a = random_hermitian(rng, n)
    ok, gap = loewner_leq(a, a)
    assert ok and abs(gap) < 1e-12 * max(1.0, np.linalg.norm(a))
    b = a + random_psd(rng, n)
    assert loewner_leq(a, b)[0]
    c = random_hermitian(rng, n)
    if loewner_leq(a, c)[0] and loewner_leq(c, a)[0]:
        assert np.linalg.norm(a - c) < 1e-6
