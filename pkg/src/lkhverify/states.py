"""Density matrices, pure states, seeded random generation, Schmidt
decompositions and purifications."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import AncillaTooSmall, IllConditioned, ShapeMismatch
from .linalg import HermitianEigen, as_matrix, eig_hermitian, frobenius_norm, hermitian_deviation
from .tensor import DEFAULT_MAX_DIM, check_dims, check_subsystems, complement, partial_trace, permute_vector

HERMITIAN_TOL = 1e-12
TRACE_TOL = 1e-12
PSD_TOL = 1e-11
NORM_TOL = 1e-12
RANK_TOL = 1e-12
INVERTIBLE_ATTEMPTS = 100


def make_rng(seed, *stream: int) -> np.random.Generator:
    """PCG64 generator for ``seed`` restricted to substream ``stream``.

    Substreams come from ``SeedSequence(seed, spawn_key=stream)``, so the
    draws for trial ``i`` depend only on ``(seed, i)`` and never on how many
    other trials ran before it. A ``Generator`` passed as ``seed`` is
    returned unchanged.
    """
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=tuple(stream))))


@dataclass(frozen=True)
class DensityMatrix:
    """Positive semidefinite unit-trace operator on ``prod(dims)``."""

    mat: np.ndarray
    dims: tuple[int, ...]
    check: bool = field(default=True, repr=False, compare=False)

    def __post_init__(self):
        mat = as_matrix(self.mat)
        dims = check_dims(self.dims)
        if mat.shape[0] != prod(dims):
            raise ShapeMismatch(f"matrix of size {mat.shape[0]} does not match dims {dims}")
        object.__setattr__(self, "mat", mat)
        object.__setattr__(self, "dims", dims)
        if self.check:
            self.validate()

    def validate(self) -> None:
        norm = frobenius_norm(self.mat)
        dev = hermitian_deviation(self.mat)
        if dev > HERMITIAN_TOL * max(1.0, norm):
            raise ValueError(f"density matrix not Hermitian (deviation {dev:.3e})")
        tr = np.trace(self.mat)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density matrix trace {tr} != 1")
        lo = self.eigenvalues[0]
        if lo < -PSD_TOL:
            raise ValueError(f"density matrix has eigenvalue {lo:.3e} < 0")

    @property
    def n(self) -> int:
        return self.mat.shape[0]

    @cached_property
    def eig(self) -> HermitianEigen:
        return eig_hermitian(self.mat, symmetrize=True)

    @property
    def eigenvalues(self) -> np.ndarray:
        return self.eig.eigenvalues

    def ptrace(self, out: Iterable[int]) -> "DensityMatrix":
        """Reduced state after tracing out the factors in ``out``."""
        out = check_subsystems(out, len(self.dims))
        keep = complement(out, len(self.dims))
        mat = partial_trace(self.mat, self.dims, out)
        return DensityMatrix(0.5 * (mat + mat.conj().T), tuple(self.dims[i] for i in keep), check=False)

    def keep(self, *factors: int) -> "DensityMatrix":
        """Reduced state on ``factors``, e.g. ``rho.keep(0, 1)`` for rho_12."""
        return self.ptrace(complement(factors, len(self.dims)))

    def purity(self) -> float:
        return float(np.sum(np.abs(self.mat) ** 2))


@dataclass(frozen=True)
class StateVector:
    vec: np.ndarray
    dims: tuple[int, ...]

    def __post_init__(self):
        vec = np.asarray(self.vec, dtype=np.complex128).ravel().copy()
        dims = check_dims(self.dims)
        if vec.size != prod(dims):
            raise ShapeMismatch(f"vector of length {vec.size} does not match dims {dims}")
        norm = np.linalg.norm(vec)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state vector norm {norm} != 1")
        object.__setattr__(self, "vec", vec)
        object.__setattr__(self, "dims", dims)

    def density(self) -> DensityMatrix:
        return DensityMatrix(np.outer(self.vec, self.vec.conj()), self.dims, check=False)

    def reduced(self, keep: Sequence[int]) -> np.ndarray:
        return reduced_from_vector(self.vec, self.dims, keep)


def reduced_from_vector(vec, dims: Sequence[int], keep: Sequence[int]) -> np.ndarray:
    """Reduced density matrix of a pure state on the factors ``keep`` (in
    ascending order), computed as ``C C^H`` from the coefficient matrix
    without forming the full projector."""
    dims = check_dims(dims)
    keep = check_subsystems(keep, len(dims))
    rest = complement(keep, len(dims))
    v = permute_vector(vec, dims, keep + rest)
    c = v.reshape(prod(dims[i] for i in keep), -1)
    return c @ c.conj().T


def normalized(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=np.complex128).ravel()
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError("cannot normalize the zero vector")
    return v / norm


def _ginibre(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return (rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))) / np.sqrt(2.0)


def random_density(dims: Sequence[int], rank: int | None = None, seed=0, max_dim: int = DEFAULT_MAX_DIM) -> DensityMatrix:
    """Induced-measure random state ``G G^H / Tr(G G^H)`` with ``G`` an
    ``n x rank`` complex Ginibre matrix drawn from ``make_rng(seed)``."""
    dims = check_dims(dims)
    n = prod(dims)
    if n > max_dim:
        raise ValueError(f"dimension {n} exceeds cap {max_dim}")
    rank = n if rank is None else int(rank)
    if not 1 <= rank <= n:
        raise ValueError(f"rank {rank} out of range 1..{n}")
    g = _ginibre(make_rng(seed), n, rank)
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return DensityMatrix(rho / np.trace(rho).real, dims)


def random_invertible_density(
    dims: Sequence[int],
    seed: int,
    *stream: int,
    min_eig: float | None = None,
    attempts: int = INVERTIBLE_ATTEMPTS,
) -> DensityMatrix:
    """Full-rank random state whose smallest eigenvalue is at least
    ``min_eig`` (default ``1e-6 / n``).

    Attempt ``k`` draws from substream ``stream + (k,)``; after ``attempts``
    rejections :class:`IllConditioned` is raised.
    """
    dims = check_dims(dims)
    n = prod(dims)
    floor = 1e-6 / n if min_eig is None else min_eig
    for k in range(attempts):
        rho = random_density(dims, n, make_rng(seed, *stream, k))
        if rho.eigenvalues[0] >= floor:
            return rho
    raise IllConditioned(f"no state with min eigenvalue >= {floor:.1e} in {attempts} attempts")


def random_pure(dims: Sequence[int], seed=0) -> StateVector:
    dims = check_dims(dims)
    g = _ginibre(make_rng(seed), prod(dims), 1).ravel()
    return StateVector(normalized(g), dims)


def product_vector(*factors) -> StateVector:
    """Normalized tensor product of the given local vectors."""
    vecs = [normalized(f) for f in factors]
    out = vecs[0]
    for v in vecs[1:]:
        out = np.kron(out, v)
    return StateVector(out, tuple(v.size for v in vecs))


def product_density(*factors: DensityMatrix) -> DensityMatrix:
    mat = factors[0].mat
    for f in factors[1:]:
        mat = np.kron(mat, f.mat)
    return DensityMatrix(mat, sum((f.dims for f in factors), ()), check=False)


def maximally_mixed(dims: Sequence[int]) -> DensityMatrix:
    dims = check_dims(dims)
    n = prod(dims)
    return DensityMatrix(np.eye(n) / n, dims)


def ghz(k: int = 3, d: int = 2) -> StateVector:
    """(|0...0> + ... + |d-1...d-1>)/sqrt(d) on k qudits."""
    vec = np.zeros(d**k, dtype=np.complex128)
    step = sum(d**i for i in range(k))
    vec[::step] = 1.0
    return StateVector(vec / np.sqrt(d), (d,) * k)


@dataclass(frozen=True)
class SchmidtDecomposition:
    """``phi = sum_j sqrt(coeffs[j]) left[:, j] (x) right[:, j]`` with
    coefficients in descending order."""

    coeffs: np.ndarray
    left: np.ndarray
    right: np.ndarray

    @property
    def rank(self) -> int:
        return self.coeffs.size

    def reconstruct(self) -> np.ndarray:
        out = np.zeros(self.left.shape[0] * self.right.shape[0], dtype=np.complex128)
        for lam, u, v in zip(self.coeffs, self.left.T, self.right.T):
            out += np.sqrt(lam) * np.kron(u, v)
        return out


def _split(dims: tuple[int, ...], cut: int) -> tuple[int, int]:
    if not 0 < cut < len(dims):
        raise ValueError(f"cut {cut} must split {len(dims)} factors into two non-empty blocks")
    return prod(dims[:cut]), prod(dims[cut:])


def schmidt_decompose(phi: StateVector, cut: int = 1) -> SchmidtDecomposition:
    """Schmidt decomposition across factors ``[:cut] | [cut:]``.

    With ``C`` the ``d_left x d_right`` coefficient matrix of ``phi``, the
    left vectors and coefficients come from the eigendecomposition of
    ``C C^H``; the right partners are ``v_j = C^T conj(u_j) / sqrt(lambda_j)``
    for every ``lambda_j > 1e-12 * lambda_max``.
    """
    dl, dr = _split(phi.dims, cut)
    c = phi.vec.reshape(dl, dr)
    eig = eig_hermitian(c @ c.conj().T, symmetrize=True)
    w = eig.eigenvalues[::-1]
    u = eig.eigenvectors[:, ::-1]
    keep = w > RANK_TOL * w[0]
    w, u = w[keep], u[:, keep]
    v = (c.T @ u.conj()) / np.sqrt(w)
    return SchmidtDecomposition(w, u, v)


def nonzero_spectrum(mat) -> np.ndarray:
    """Eigenvalues above ``1e-12 * lambda_max``, ascending."""
    w = eig_hermitian(mat, symmetrize=True).eigenvalues
    return w[w > RANK_TOL * w[-1]]


def reduced_spectra_equal(phi: StateVector, cut: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Nonzero spectra of both reductions of ``|phi><phi|`` across ``cut``,
    each computed from an independent partial trace and eigensolve."""
    _split(phi.dims, cut)
    k = len(phi.dims)
    proj = np.outer(phi.vec, phi.vec.conj())
    left = partial_trace(proj, phi.dims, range(cut, k))
    right = partial_trace(proj, phi.dims, range(cut))
    return nonzero_spectrum(left), nonzero_spectrum(right)


def purify(rho: DensityMatrix, ancilla_dim: int | None = None) -> StateVector:
    """Pure state ``sum_j sqrt(lambda_j) u_j (x) e_j`` on ``dims + (ancilla_dim,)``
    whose reduction to the original factors is ``rho``.

    ``ancilla_dim`` defaults to the numerical rank of ``rho``.
    """
    w = rho.eigenvalues[::-1]
    u = rho.eig.eigenvectors[:, ::-1]
    r = int(np.count_nonzero(w > RANK_TOL * w[0]))
    if ancilla_dim is None:
        ancilla_dim = r
    if ancilla_dim < r:
        raise AncillaTooSmall(f"ancilla dimension {ancilla_dim} < rank {r}")
    psi = np.zeros((rho.n, ancilla_dim), dtype=np.complex128)
    psi[:, :r] = u[:, :r] * np.sqrt(w[:r])
    return StateVector(normalized(psi.ravel()), rho.dims + (ancilla_dim,))


def entropy_of_purification_identities(rho123: DensityMatrix) -> tuple[float, float, float, float]:
    """Entropies ``(S_123, S_4, S_23, S_14)`` read off the purification of a
    tripartite state on ``H1 H2 H3 H4``. Pure-state symmetry makes the first
    two and the last two agree."""
    from .entropy import spectrum_entropy

    if len(rho123.dims) != 3:
        raise ValueError("expected a tripartite state")
    psi = purify(rho123)

    def s(*keep):
        return spectrum_entropy(eig_hermitian(psi.reduced(keep), symmetrize=True).eigenvalues).value

    return s(0, 1, 2), s(3), s(1, 2), s(0, 3)
