"""Checks for ``rho1^{-1} (x) sigma23 <= rho12^{-1} (x) sigma3``, its log
form, the reduction of strong subadditivity to it, and the lemma used to
prove it.

Three-party operators always act on ``H1 (x) H2 (x) H3`` in that order.
``rho12`` lives on ``(d1, d2)`` and ``sigma23`` on ``(d2, d3)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import prod, sqrt
from typing import Sequence

import numpy as np

from .entropy import lkh3_gap, spectrum_entropy, ssa_gap
from .errors import EpsilonTooLarge, IllConditioned, ShapeMismatch
from .linalg import (
    LOEWNER_TOL,
    as_matrix,
    eig_hermitian,
    frobenius_norm,
    loewner_leq,
    mat_fn,
    max_eigenvalue,
    min_eigenvalue,
)
from .states import (
    RANK_TOL,
    DensityMatrix,
    StateVector,
    make_rng,
    purify,
    random_invertible_density,
    random_pure,
    schmidt_decompose,
)
from .tensor import embed, kron, partial_trace

INVERTIBLE_TOL = 1e-6
REGULARIZE_ETA = 1e-6
LINEARITY_TOL = 1e-11
STRICT_GAP = 1e-12
MU_ATTEMPTS = 100


@dataclass
class GapReport:
    """Outcome of one operator-inequality check.

    ``verdict`` is ``min_eig_gap >= -relative_tol``.
    """

    min_eig_gap: float
    relative_tol: float
    verdict: bool
    diagnostics: dict = field(default_factory=dict)

    @classmethod
    def from_gap(cls, gap: float, relative_tol: float, **diagnostics) -> "GapReport":
        return cls(float(gap), float(relative_tol), bool(gap >= -relative_tol), diagnostics)


# -- Theorem-level instances -------------------------------------------------


@dataclass(frozen=True)
class LkhInstance:
    rho12: DensityMatrix
    sigma23: DensityMatrix

    def __post_init__(self):
        if len(self.rho12.dims) != 2 or len(self.sigma23.dims) != 2:
            raise ShapeMismatch("rho12 and sigma23 must both be bipartite")
        if self.rho12.dims[1] != self.sigma23.dims[0]:
            raise ShapeMismatch(f"middle dimensions differ: {self.rho12.dims} vs {self.sigma23.dims}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.rho12.dims + self.sigma23.dims[1:]

    @cached_property
    def rho1(self) -> DensityMatrix:
        return self.rho12.keep(0)

    @cached_property
    def sigma3(self) -> DensityMatrix:
        return self.sigma23.keep(1)

    def require_invertible(self) -> None:
        floor = INVERTIBLE_TOL / self.rho12.n
        lo = self.rho12.eigenvalues[0]
        if lo <= floor:
            raise IllConditioned(f"rho12 min eigenvalue {lo:.3e} <= {floor:.1e}")


def random_lkh_instance(dims: Sequence[int], seed: int, index: int = 0) -> LkhInstance:
    """Both states full rank and filtered for invertibility, drawn from the
    substreams ``(index, 0, *)`` and ``(index, 1, *)`` of ``seed``."""
    d1, d2, d3 = dims
    return LkhInstance(
        random_invertible_density((d1, d2), seed, index, 0),
        random_invertible_density((d2, d3), seed, index, 1),
    )


def lkh_sides(x12, y23, dims: Sequence[int]) -> tuple[np.ndarray, np.ndarray]:
    """``(x1^{-1} (x) y23, x12^{-1} (x) y3)`` for positive operators on
    ``(d1, d2)`` and ``(d2, d3)``; no normalization is assumed."""
    d1, d2, d3 = dims
    x12, y23 = as_matrix(x12), as_matrix(y23)
    x1 = partial_trace(x12, (d1, d2), [1])
    y3 = partial_trace(y23, (d2, d3), [0])
    lhs = kron(mat_fn(x1, "inverse"), y23)
    rhs = kron(mat_fn(x12, "inverse"), y3)
    return lhs, rhs


def check_lkh_operator(inst: LkhInstance, tol: float = LOEWNER_TOL) -> GapReport:
    """``rho1^{-1} (x) sigma23 <= rho12^{-1} (x) sigma3`` on ``H1 H2 H3``."""
    inst.require_invertible()
    lhs, rhs = lkh_sides(inst.rho12.mat, inst.sigma23.mat, inst.dims)
    verdict, gap = loewner_leq(lhs, rhs, tol)
    w12 = inst.rho12.eigenvalues
    w1 = inst.rho1.eigenvalues
    return GapReport(
        gap,
        tol * max(1.0, frobenius_norm(rhs - lhs)),
        verdict,
        {
            "mu": float(inst.sigma3.eigenvalues[0]),
            "cond_rho12": float(w12[-1] / w12[0]),
            "cond_rho1": float(w1[-1] / w1[0]),
            "dim": prod(inst.dims),
        },
    )


def _log_operator(rho12: DensityMatrix, sigma23: DensityMatrix) -> np.ndarray:
    """log rho12 + log sigma23 - log rho1 - log sigma3, each placed on its
    factors of ``H1 H2 H3``."""
    dims = rho12.dims + sigma23.dims[1:]
    rho1 = rho12.keep(0)
    sigma3 = sigma23.keep(1)
    return (
        embed(mat_fn(rho12.mat, "log", eig=rho12.eig), dims, [0, 1])
        + embed(mat_fn(sigma23.mat, "log", eig=sigma23.eig), dims, [1, 2])
        - embed(mat_fn(rho1.mat, "log", eig=rho1.eig), dims, [0])
        - embed(mat_fn(sigma3.mat, "log", eig=sigma3.eig), dims, [2])
    )


def check_lkh_log(inst: LkhInstance, tol: float = LOEWNER_TOL) -> GapReport:
    """Largest eigenvalue of the log-form operator must be ``<= tol``."""
    top = max_eigenvalue(_log_operator(inst.rho12, inst.sigma23), symmetrize=True)
    return GapReport.from_gap(-top, tol, max_eig=top)


def mix_with_identity(rho: DensityMatrix, eta: float = REGULARIZE_ETA) -> DensityMatrix:
    return DensityMatrix((1.0 - eta) * rho.mat + eta * np.eye(rho.n) / rho.n, rho.dims, check=False)


def lkh3_from_trace(rho123: DensityMatrix, eta: float = REGULARIZE_ETA) -> float:
    """``-Tr[rho123 (log rho12 + log rho23 - log rho1 - log rho3)]``.

    If a reduction is too ill-conditioned for the logarithm, the state is
    first replaced by ``(1 - eta) rho123 + eta I/n``; compare the result
    with ``lkh3_gap`` of that mixed state.
    """
    if len(rho123.dims) != 3:
        raise ValueError("expected a tripartite state")
    try:
        op = _log_operator(rho123.keep(0, 1), rho123.keep(1, 2))
    except IllConditioned:
        rho123 = mix_with_identity(rho123, eta)
        op = _log_operator(rho123.keep(0, 1), rho123.keep(1, 2))
    return float(-np.trace(rho123.mat @ op).real)


def reduce_ssa_to_lkh3(rho123: DensityMatrix) -> tuple[float, float]:
    """SSA slack computed directly and via the four-party purification,
    where it reads ``S(rho12) + S(rho14) - S(rho4) - S(rho2)``."""
    direct = ssa_gap(rho123)
    psi = purify(rho123)

    def s(*keep):
        return spectrum_entropy(eig_hermitian(psi.reduced(keep), symmetrize=True).eigenvalues).value

    return direct, s(0, 1) + s(0, 3) - s(3) - s(1)


# -- Lemma ------------------------------------------------------------------


def epsilon_star(mu: float, d2: int, d3: int) -> float:
    """Regularization below which the lemma's estimate closes:
    ``(mu / (2 d2 d3^2))^2``."""
    return (mu / (2.0 * d2 * d3 * d3)) ** 2


@dataclass(frozen=True)
class LemmaInstance:
    psi: StateVector
    phi: StateVector
    epsilon: float

    def __post_init__(self):
        if len(self.psi.dims) != 2 or len(self.phi.dims) != 2:
            raise ShapeMismatch("psi and phi must both be bipartite")
        if self.psi.dims[1] != self.phi.dims[0]:
            raise ShapeMismatch(f"middle dimensions differ: {self.psi.dims} vs {self.phi.dims}")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        floor = INVERTIBLE_TOL / self.dims[2]
        if self.mu <= floor:
            raise IllConditioned(f"sigma3 min eigenvalue {self.mu:.3e} <= {floor:.1e}")

    @property
    def dims(self) -> tuple[int, int, int]:
        return self.psi.dims + self.phi.dims[1:]

    @cached_property
    def rho12(self) -> np.ndarray:
        return np.outer(self.psi.vec, self.psi.vec.conj())

    @cached_property
    def rho1(self) -> np.ndarray:
        return self.psi.reduced([0])

    @cached_property
    def sigma3(self) -> np.ndarray:
        return self.phi.reduced([1])

    @cached_property
    def mu(self) -> float:
        return min_eigenvalue(self.sigma3, symmetrize=True)

    @property
    def epsilon_star(self) -> float:
        _, d2, d3 = self.dims
        return epsilon_star(self.mu, d2, d3)

    def with_epsilon(self, epsilon: float) -> "LemmaInstance":
        return LemmaInstance(self.psi, self.phi, epsilon)


def random_lemma_instance(dims: Sequence[int], seed: int, index: int = 0, epsilon: float | None = None) -> LemmaInstance:
    """Random unit vectors with sigma3 invertible; ``epsilon`` defaults to
    the instance's ``epsilon_star``."""
    d1, d2, d3 = dims
    if d3 > d2:
        raise IllConditioned(f"sigma3 cannot be invertible when d3={d3} > d2={d2}")
    psi = random_pure((d1, d2), make_rng(seed, index, 0))
    for k in range(MU_ATTEMPTS):
        phi = random_pure((d2, d3), make_rng(seed, index, 1, k))
        try:
            inst = LemmaInstance(psi, phi, 1.0)
        except IllConditioned:
            continue
        return inst.with_epsilon(inst.epsilon_star if epsilon is None else epsilon)
    raise IllConditioned(f"no phi with invertible sigma3 in {MU_ATTEMPTS} attempts")


def lemma_construct_X23(phi: StateVector, epsilon: float) -> np.ndarray:
    """``|phi><phi| + epsilon (I - |phi><phi|)``."""
    proj = np.outer(phi.vec, phi.vec.conj())
    return proj + epsilon * (np.eye(proj.shape[0]) - proj)


def lemma_X23_inverse(phi: StateVector, epsilon: float) -> np.ndarray:
    proj = np.outer(phi.vec, phi.vec.conj())
    return proj + (np.eye(proj.shape[0]) - proj) / epsilon


def lemma_operators(inst: LemmaInstance) -> tuple[np.ndarray, np.ndarray]:
    """``A = rho12 (x) sigma3^{-1}`` and ``B = rho1 (x) X23(eps)^{-1}``."""
    a = kron(inst.rho12, mat_fn(inst.sigma3, "inverse"))
    b = kron(inst.rho1, lemma_X23_inverse(inst.phi, inst.epsilon))
    return a, b


def lemma_bound_check(
    inst: LemmaInstance,
    tol: float = LOEWNER_TOL,
    with_factor: bool = True,
    enforce_threshold: bool = True,
) -> GapReport:
    """``A <= (1 + sqrt(eps)) B``, or ``A <= B`` when ``with_factor`` is off.

    Raises :class:`EpsilonTooLarge` for ``eps > epsilon_star`` unless
    ``enforce_threshold`` is off (used for empirical sweeps).
    """
    eps, eps_star = inst.epsilon, inst.epsilon_star
    if enforce_threshold and eps > eps_star:
        raise EpsilonTooLarge(f"epsilon {eps:.3e} exceeds epsilon* {eps_star:.3e}")
    a, b = lemma_operators(inst)
    factor = 1.0 + sqrt(eps) if with_factor else 1.0
    verdict, gap = loewner_leq(a, factor * b, tol)
    return GapReport(
        gap,
        tol * max(1.0, frobenius_norm(factor * b - a)),
        verdict,
        {"mu": inst.mu, "epsilon": eps, "epsilon_star": eps_star, "dim": prod(inst.dims)},
    )


def _basis_with_first(phi: np.ndarray) -> np.ndarray:
    """Orthonormal basis (columns) whose first column is ``phi``."""
    n = phi.size
    eig = eig_hermitian(np.eye(n) - np.outer(phi, phi.conj()), symmetrize=True)
    basis = eig.eigenvectors.copy()
    basis[:, 0] = phi
    return basis


def lemma_internals(inst: LemmaInstance, w1, delta: float | None = None, varphi=None) -> dict:
    """Quantities from the lemma's proof for one test vector ``w1`` on H1.

    ``lhs61``/``rhs61`` are ``<w1 (x) Phi, A w1 (x) Phi>`` and
    ``<w1, rho1 w1>``; ``lhs61_gram`` re-evaluates the former as
    ``<a, M a>`` through the Gram matrix ``M = V^H X X^H V`` of the two
    Schmidt families. If a vector ``varphi`` on ``H1 H2 H3`` is supplied,
    the Cauchy-Schwarz split with parameter ``delta`` (default
    ``sqrt(eps)/(d2 d3)``) is evaluated against ``<varphi, A varphi>``.
    """
    d1, d2, d3 = inst.dims
    w1 = np.asarray(w1, dtype=np.complex128).ravel()
    if w1.size != d1:
        raise ShapeMismatch(f"w1 has length {w1.size}, expected {d1}")
    if np.linalg.norm(w1) > 1.0 + 1e-12:
        raise ValueError("w1 must have norm at most 1")
    if delta is None:
        delta = sqrt(inst.epsilon) / (d2 * d3)

    sp = schmidt_decompose(inst.psi, 1)
    sf = schmidt_decompose(inst.phi, 1)
    gram = sp.right.conj().T @ sf.left @ sf.left.conj().T @ sp.right
    gram_w = eig_hermitian(gram, symmetrize=True).eigenvalues
    coef = np.sqrt(sp.coeffs) * (w1.conj() @ sp.left)

    a_op, _ = lemma_operators(inst)
    x = np.kron(w1, inst.phi.vec)
    out = {
        "lhs61": float(np.vdot(x, a_op @ x).real),
        "lhs61_gram": float(np.vdot(coef, gram @ coef).real),
        "rhs61": float(np.vdot(w1, inst.rho1 @ w1).real),
        "gram": gram,
        "gram_min": float(gram_w[0]),
        "gram_max": float(gram_w[-1]),
        "delta": float(delta),
        "head_coeff": 1.0 + delta * d2 * d3,
        "tail_coeff": d3 / inst.mu * (1.0 / delta + d2 * d3),
    }
    if varphi is not None:
        varphi = np.asarray(varphi, dtype=np.complex128).ravel()
        basis = _basis_with_first(inst.phi.vec)
        # w_l = (I (x) <Phi_l|) varphi
        ws = varphi.reshape(d1, d2 * d3) @ basis.conj()
        head = np.kron(ws[:, 0], inst.phi.vec)
        tail = sum(float(np.vdot(ws[:, l], inst.rho1 @ ws[:, l]).real) for l in range(1, d2 * d3))
        out["split_lhs"] = float(np.vdot(varphi, a_op @ varphi).real)
        out["split_rhs"] = out["head_coeff"] * float(np.vdot(head, a_op @ head).real) + out["tail_coeff"] * tail
    return out


# -- Extensions used in the proof of the theorem -------------------------------


def _lkh_difference(inv12: np.ndarray, inv1: np.ndarray, sigma23: np.ndarray, d2: int, d3: int) -> np.ndarray:
    sigma3 = partial_trace(sigma23, (d2, d3), [0])
    return kron(inv12, sigma3) - kron(inv1, sigma23)


def pure_to_mixed_extension_check(sigma23_mixed: DensityMatrix, rho12: DensityMatrix, tol: float = LINEARITY_TOL) -> GapReport:
    """Compare the inequality's difference operator for a mixed ``sigma23``
    with the eigenvalue-weighted sum of the differences for its pure
    eigenstates.

    The reported gap is minus the largest entrywise deviation, and the
    tolerance is ``tol * max(1, max|entry|)``.
    """
    d1, d2 = rho12.dims
    d3 = sigma23_mixed.dims[1]
    inv12 = mat_fn(rho12.mat, "inverse", eig=rho12.eig)
    inv1 = mat_fn(rho12.keep(0).mat, "inverse")
    mixed = _lkh_difference(inv12, inv1, sigma23_mixed.mat, d2, d3)

    w = sigma23_mixed.eigenvalues
    vecs = sigma23_mixed.eig.eigenvectors
    combo = np.zeros_like(mixed)
    pure_gaps = []
    for p, v in zip(w, vecs.T):
        if p <= RANK_TOL * w[-1]:
            continue
        diff = _lkh_difference(inv12, inv1, np.outer(v, v.conj()), d2, d3)
        combo += p * diff
        pure_gaps.append(min_eigenvalue(diff, symmetrize=True))

    dev = float(np.max(np.abs(mixed - combo)))
    rel = tol * max(1.0, float(np.max(np.abs(mixed))))
    return GapReport.from_gap(
        -dev,
        rel,
        max_deviation=dev,
        mixed_gap=min_eigenvalue(mixed, symmetrize=True),
        min_pure_gap=min(pure_gaps),
        ensemble_size=len(pure_gaps),
    )


def embed_and_regularize(rho12: DensityMatrix, d2_tilde: int, epsilon: float) -> np.ndarray:
    """``rho12`` placed in ``H1 (x) H2~`` (with ``H2`` the first ``d2`` basis
    vectors of ``H2~``) plus ``epsilon * I1 (x) Q``, where ``Q`` projects
    onto the orthogonal complement of ``H2`` in ``H2~``."""
    d1, d2 = rho12.dims
    if d2_tilde <= d2:
        raise ValueError(f"d2_tilde={d2_tilde} must exceed d2={d2}")
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    t = np.zeros((d1, d2_tilde, d1, d2_tilde), dtype=np.complex128)
    t[:, :d2, :, :d2] = rho12.mat.reshape(d1, d2, d1, d2)
    q = np.diag(np.r_[np.zeros(d2), np.ones(d2_tilde - d2)])
    return t.reshape(d1 * d2_tilde, -1) + epsilon * np.kron(np.eye(d1), q)


def regularized_lkh_gap(inst: LkhInstance, d2_tilde: int, epsilon: float) -> float:
    """Smallest eigenvalue of the enlarged-space difference
    ``rho12(eps)^{-1} (x) sigma3 - rho1(eps)^{-1} (x) sigma23`` compressed
    back to ``H1 H2 H3``. Decreases to the direct gap as ``eps -> 0``."""
    d1, d2, d3 = inst.dims
    big12 = embed_and_regularize(inst.rho12, d2_tilde, epsilon)
    big1 = partial_trace(big12, (d1, d2_tilde), [1])
    s = np.zeros((d2_tilde, d3, d2_tilde, d3), dtype=np.complex128)
    s[:d2, :, :d2, :] = inst.sigma23.mat.reshape(d2, d3, d2, d3)
    big23 = s.reshape(d2_tilde * d3, -1)
    diff = _lkh_difference(mat_fn(big12, "inverse"), mat_fn(big1, "inverse"), big23, d2_tilde, d3)
    i1, i2, i3 = np.meshgrid(np.arange(d1), np.arange(d2), np.arange(d3), indexing="ij")
    idx = ((i1 * d2_tilde + i2) * d3 + i3).ravel()
    return min_eigenvalue(diff[np.ix_(idx, idx)], symmetrize=True)


def normalize_positive(x, dims: Sequence[int] | None = None) -> tuple[DensityMatrix, float]:
    """``(x / Tr x, Tr x)`` for a positive semidefinite ``x``."""
    x = as_matrix(x)
    tr = np.trace(x)
    if abs(tr.imag) > 1e-12 * max(1.0, abs(tr)) or tr.real <= 0:
        raise ValueError(f"trace {tr} must be real and positive")
    scale = float(tr.real)
    return DensityMatrix(x / scale, tuple(dims) if dims is not None else (x.shape[0],)), scale


# -- Cases of equality ---------------------------------------------------------


def inverse_trace_check(b) -> float:
    """``Tr[B^{-1}] Tr[B]``; at least ``d^2`` for positive definite ``B``."""
    b = as_matrix(b)
    return float(np.trace(mat_fn(b, "inverse")).real * np.trace(b).real)


def _restrict_to_support(sigma23: DensityMatrix) -> DensityMatrix:
    """Discard the kernel of sigma3 from H3."""
    d2, d3 = sigma23.dims
    sigma3 = sigma23.keep(1)
    w = sigma3.eigenvalues
    keep = w > RANK_TOL * w[-1]
    if keep.all():
        return sigma23
    iso = np.kron(np.eye(d2), sigma3.eig.eigenvectors[:, keep])
    return DensityMatrix(iso.conj().T @ sigma23.mat @ iso, (d2, int(keep.sum())), check=False)


def equality_gap_check(inst: LkhInstance) -> dict:
    """Diagnostics for the absence of equality in the operator inequality.

    With ``X = sigma3^{-1/2} sigma23 sigma3^{-1/2}`` and
    ``Y = rho1^{-1/2} rho12 rho1^{-1/2}``, equality would force
    ``X = I (x) A (x) I = Y^{-1}`` with ``Y = I (x) B (x) I``. The middle
    factors are estimated here as ``A = Tr_3[X]/d3`` and
    ``B = Tr_1[Y]/d1`` (both of unit trace), and ``Tr[B^{-1}] Tr[B]``
    exceeds one whenever ``d2 > 1``.
    """
    sigma23 = _restrict_to_support(inst.sigma23)
    inst = LkhInstance(inst.rho12, sigma23)
    d1, d2, d3 = inst.dims
    report = check_lkh_operator(inst)

    s3 = mat_fn(inst.sigma3.mat, "inverse_sqrt", eig=inst.sigma3.eig)
    r1 = mat_fn(inst.rho1.mat, "inverse_sqrt", eig=inst.rho1.eig)
    left = np.kron(np.eye(d2), s3)
    x = left @ sigma23.mat @ left
    right = np.kron(r1, np.eye(d2))
    y = right @ inst.rho12.mat @ right
    a = partial_trace(x, (d2, d3), [1]) / d3
    b = partial_trace(y, (d1, d2), [0]) / d1

    x_full = embed(x, (d1, d2, d3), [1, 2])
    y_full = embed(y, (d1, d2, d3), [0, 1])
    return {
        "gap": report.min_eig_gap,
        "verdict": report.verdict,
        "d2": d2,
        "X": x,
        "Y": y,
        "A": a,
        "B": b,
        "tr2_X_deviation": frobenius_norm(partial_trace(x, (d2, d3), [0]) - np.eye(d3)),
        "tr2_Y_deviation": frobenius_norm(partial_trace(y, (d1, d2), [1]) - np.eye(d1)),
        "trace_A": float(np.trace(a).real),
        "trace_B": float(np.trace(b).real),
        "inv_trace_product": inverse_trace_check(b),
        "inv_trace_product_A": inverse_trace_check(a),
        "equality_residual": frobenius_norm(y_full @ x_full - np.eye(d1 * d2 * d3)),
        "cond_rho12": report.diagnostics["cond_rho12"],
        "mu": report.diagnostics["mu"],
    }
