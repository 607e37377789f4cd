import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import entropy_oracle, random_unit
from lkhverify.errors import AncillaTooSmall, IllConditioned
from lkhverify.states import (
    DensityMatrix,
    StateVector,
    entropy_of_purification_identities,
    ghz,
    make_rng,
    maximally_mixed,
    product_vector,
    purify,
    random_density,
    random_invertible_density,
    random_pure,
    reduced_from_vector,
    reduced_spectra_equal,
    schmidt_decompose,
)
from lkhverify.tensor import partial_trace

BELL = StateVector(np.array([1, 0, 0, 1]) / np.sqrt(2), (2, 2))


def test_make_rng_substreams_are_independent_of_order():
    a = make_rng(5, 3).standard_normal(4)
    make_rng(5, 0).standard_normal(100)
    np.testing.assert_array_equal(make_rng(5, 3).standard_normal(4), a)
    assert not np.array_equal(make_rng(5, 4).standard_normal(4), a)


@pytest.mark.parametrize("dims", [(2,), (2, 2), (2, 3, 2), (3, 2, 4)])
def test_random_density_full_rank_invariants(dims):
    rho = random_density(dims, None, 3)
    rho.validate()
    assert rho.eigenvalues[0] > 0


def test_random_density_rank_one_is_pure():
    rho = random_density((2, 3), 1, 9)
    assert abs(rho.purity() - 1.0) <= 1e-12


def test_random_density_seed_7():
    rho = random_density((2, 2), 4, 7)
    w = np.linalg.eigvalsh(rho.mat)
    assert abs(w.sum() - 1.0) <= 1e-12
    assert np.all(w > 0)


def test_random_density_deterministic_and_rank_checked():
    np.testing.assert_array_equal(random_density((2, 2), 2, 11).mat, random_density((2, 2), 2, 11).mat)
    with pytest.raises(ValueError):
        random_density((2, 2), 5, 0)
    with pytest.raises(ValueError):
        random_density((2, 2), 0, 0)


def test_random_invertible_density_filter():
    rho = random_invertible_density((2, 3), 1, 0)
    assert rho.eigenvalues[0] >= 1e-6 / 6
    with pytest.raises(IllConditioned):
        random_invertible_density((2, 2), 1, 0, min_eig=0.3, attempts=5)


def test_density_matrix_validation():
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([0.5, 0.6]), (2,))
    with pytest.raises(ValueError):
        DensityMatrix(np.diag([1.2, -0.2]), (2,))
    with pytest.raises(ValueError):
        DensityMatrix(np.array([[0.5, 0.1], [0.2, 0.5]]), (2,))
    with pytest.raises(ValueError):
        DensityMatrix(np.eye(4) / 4, (2, 3))


def test_random_pure_examples():
    psi = random_pure((2, 3), 1)
    assert abs(np.linalg.norm(psi.vec) - 1.0) <= 1e-12
    rho = psi.density()
    assert np.count_nonzero(rho.eigenvalues > 1e-12) == 1
    other = random_pure((2, 3), 2)
    assert abs(np.vdot(psi.vec, other.vec)) < 1


def test_schmidt_product_vector(rng):
    phi = product_vector(random_unit(rng, 3), random_unit(rng, 2))
    sd = schmidt_decompose(phi, 1)
    assert sd.rank == 1
    assert sd.coeffs[0] == pytest.approx(1.0, abs=1e-12)


def test_schmidt_bell():
    sd = schmidt_decompose(BELL, 1)
    np.testing.assert_allclose(sd.coeffs, [0.5, 0.5], atol=1e-14)


def test_schmidt_random_3x4_matches_partial_trace_spectrum():
    phi = random_pure((3, 4), 17)
    sd = schmidt_decompose(phi, 1)
    assert np.linalg.norm(sd.reconstruct() - phi.vec) <= 1e-10
    reduced = partial_trace(np.outer(phi.vec, phi.vec.conj()), (3, 4), [1])
    np.testing.assert_allclose(np.sort(sd.coeffs), np.linalg.eigvalsh(reduced), atol=1e-10)


def test_schmidt_invariants_many():
    rng = np.random.default_rng(500)
    for trial in range(500):
        dl, dr = (int(x) for x in rng.integers(1, 9, size=2))
        phi = random_pure((dl, dr), make_rng(500, trial))
        sd = schmidt_decompose(phi, 1)
        r = sd.rank
        assert abs(sd.coeffs.sum() - 1.0) <= 1e-12
        assert np.linalg.norm(sd.left.conj().T @ sd.left - np.eye(r)) <= 1e-10
        assert np.linalg.norm(sd.right.conj().T @ sd.right - np.eye(r)) <= 1e-10
        assert np.linalg.norm(sd.reconstruct() - phi.vec) <= 1e-10


def test_schmidt_multipartite_cut():
    phi = ghz(3)
    sd = schmidt_decompose(phi, 2)
    np.testing.assert_allclose(sd.coeffs, [0.5, 0.5], atol=1e-14)
    with pytest.raises(ValueError):
        schmidt_decompose(phi, 3)


def test_reduced_spectra_examples(rng):
    left, right = reduced_spectra_equal(BELL)
    np.testing.assert_allclose(left, [0.5, 0.5])
    np.testing.assert_allclose(right, [0.5, 0.5])
    left, right = reduced_spectra_equal(product_vector(random_unit(rng, 2), random_unit(rng, 3)))
    np.testing.assert_allclose(left, [1.0])
    np.testing.assert_allclose(right, [1.0])


@settings(max_examples=60, deadline=None)
@given(dl=st.integers(1, 6), dr=st.integers(1, 6), seed=st.integers(0, 2**32 - 1))
def test_reduced_spectra_agree(dl, dr, seed):
    left, right = reduced_spectra_equal(random_pure((dl, dr), seed))
    assert left.size == right.size
    np.testing.assert_allclose(left, right, atol=1e-10)
    assert abs(entropy_oracle(np.diag(left)) - entropy_oracle(np.diag(right))) < 1e-10


def test_reduced_spectra_2x5():
    left, right = reduced_spectra_equal(random_pure((2, 5), 3))
    np.testing.assert_allclose(left, right, atol=1e-10)


def test_purify_pure_state():
    psi = random_pure((2, 2), 4)
    big = purify(psi.density())
    assert big.dims == (2, 2, 1)
    rho = reduced_from_vector(big.vec, big.dims, [0, 1])
    assert np.linalg.norm(rho - psi.density().mat) <= 1e-12


def test_purify_maximally_mixed_qubit():
    big = purify(maximally_mixed((2,)), 2)
    np.testing.assert_allclose(partial_trace(np.outer(big.vec, big.vec.conj()), (2, 2), [1]), np.eye(2) / 2, atol=1e-15)
    np.testing.assert_allclose(schmidt_decompose(big, 1).coeffs, [0.5, 0.5], atol=1e-14)


def test_purify_random_full_rank():
    rho = random_density((2, 2), None, 21)
    big = purify(rho, 4)
    back = partial_trace(np.outer(big.vec, big.vec.conj()), big.dims, [2])
    assert np.linalg.norm(back - rho.mat) <= 1e-10
    np.testing.assert_allclose(np.sort(schmidt_decompose(big, 2).coeffs), rho.eigenvalues, atol=1e-10)


def test_purify_ancilla_too_small():
    with pytest.raises(AncillaTooSmall):
        purify(random_density((2, 2), 3, 1), 2)


@settings(max_examples=40, deadline=None)
@given(n1=st.integers(1, 3), n2=st.integers(1, 3), data=st.data())
def test_purify_roundtrip_property(n1, n2, data):
    rank = data.draw(st.integers(1, n1 * n2))
    rho = random_density((n1, n2), rank, data.draw(st.integers(0, 2**32 - 1)))
    big = purify(rho)
    assert big.dims[-1] == rank
    assert np.linalg.norm(reduced_from_vector(big.vec, big.dims, [0, 1]) - rho.mat) <= 1e-10


def test_purification_identities():
    s123, s4, s23, s14 = entropy_of_purification_identities(product_vector([1, 0], [0, 1], [1, 1]).density())
    assert max(abs(s123), abs(s4), abs(s23), abs(s14)) < 1e-12
    s123, s4, _, _ = entropy_of_purification_identities(ghz(3).density())
    assert abs(s123) < 1e-12 and abs(s4) < 1e-12
    rho = random_density((2, 2, 2), 3, 8)
    s123, s4, s23, s14 = entropy_of_purification_identities(rho)
    assert abs(s123 - s4) <= 1e-9
    assert abs(s23 - s14) <= 1e-9
    assert abs(s123 - entropy_oracle(rho.mat)) <= 1e-9
    assert abs(s23 - entropy_oracle(partial_trace(rho.mat, (2, 2, 2), [0]))) <= 1e-9
