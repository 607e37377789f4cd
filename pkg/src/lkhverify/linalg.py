"""Dense complex matrix arithmetic, a cyclic Jacobi Hermitian eigensolver,
spectral matrix functions and Loewner-order checks.

Matrices are plain ``numpy`` arrays of dtype ``complex128``; every public
function returns a fresh array and never mutates its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import DomainError, IllConditioned, NonConvergence, NonHermitian, ShapeMismatch

HERMITIAN_TOL = 1e-10
JACOBI_TOL = 1e-14
MAX_SWEEPS = 100
COND_TOL = 1e-10
NEG_CLAMP = 1e-12
LOEWNER_TOL = 1e-9

MATRIX_FUNCTIONS = ("inverse", "log", "sqrt", "inverse_sqrt")


def as_matrix(a, square: bool = True) -> np.ndarray:
    """Coerce ``a`` to a finite 2-d complex128 array."""
    m = np.array(a, dtype=np.complex128)
    if m.ndim == 0:
        m = m.reshape(1, 1)
    if m.ndim != 2:
        raise ShapeMismatch(f"expected a matrix, got array of shape {m.shape}")
    if square and m.shape[0] != m.shape[1]:
        raise ShapeMismatch(f"expected a square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    return m


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatch(f"shape mismatch: {a.shape} vs {b.shape}")


def add(a, b) -> np.ndarray:
    a, b = as_matrix(a, square=False), as_matrix(b, square=False)
    _same_shape(a, b)
    return a + b


def scale(a, c: complex) -> np.ndarray:
    return complex(c) * as_matrix(a, square=False)


def mul(a, b) -> np.ndarray:
    a, b = as_matrix(a, square=False), as_matrix(b, square=False)
    if a.shape[1] != b.shape[0]:
        raise ShapeMismatch(f"cannot multiply {a.shape} by {b.shape}")
    return a @ b


def adjoint(a) -> np.ndarray:
    return as_matrix(a, square=False).conj().T


def trace(a) -> complex:
    return complex(np.trace(as_matrix(a)))


def frobenius_norm(a) -> float:
    return float(np.linalg.norm(as_matrix(a, square=False)))


def hermitian_deviation(a) -> float:
    a = as_matrix(a)
    return float(np.linalg.norm(a - a.conj().T))


@dataclass(frozen=True)
class HermitianEigen:
    """Eigenvalues in ascending order; eigenvector ``k`` is column ``k``."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


@njit(cache=True)
def _jacobi(a, tol, max_sweeps):
    """Cyclic-by-row Jacobi on a Hermitian complex matrix (modified in place).

    Each rotation G = [[c, s], [-s conj(e), c conj(e)]] on the (p, q) plane,
    with e the phase of a[p, q], zeroes a[p, q] under a <- G^H a G.
    Returns (eigenvector matrix, sweeps), or sweeps = -1 on non-convergence.
    """
    n = a.shape[0]
    v = np.eye(n, dtype=np.complex128)
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += a[i, j].real ** 2 + a[i, j].imag ** 2
    threshold = (tol * np.sqrt(total)) ** 2
    sweeps = 0
    while True:
        off = 0.0
        for i in range(n):
            for j in range(n):
                if i != j:
                    off += a[i, j].real ** 2 + a[i, j].imag ** 2
        if off <= threshold:
            return v, sweeps
        if sweeps == max_sweeps:
            return v, -1
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                b = abs(apq)
                if b == 0.0:
                    continue
                e = apq / b
                zeta = (a[q, q].real - a[p, p].real) / (2.0 * b)
                t = 1.0 / (abs(zeta) + np.hypot(1.0, zeta))
                if zeta < 0.0:
                    t = -t
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                g_qp = -s * e.conjugate()
                g_qq = c * e.conjugate()
                for k in range(n):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp + g_qp * akq
                    a[k, q] = s * akp + g_qq * akq
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp + g_qp * vkq
                    v[k, q] = s * vkp + g_qq * vkq
                for k in range(n):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk + g_qp.conjugate() * aqk
                    a[q, k] = s * apk + g_qq.conjugate() * aqk
                a[p, q] = 0.0
                a[q, p] = 0.0
                a[p, p] = a[p, p].real
                a[q, q] = a[q, q].real


def eig_hermitian(
    a,
    symmetrize: bool = False,
    tol: float = JACOBI_TOL,
    max_sweeps: int = MAX_SWEEPS,
) -> HermitianEigen:
    """Eigendecomposition of a Hermitian matrix by cyclic Jacobi rotations.

    The input must be Hermitian to within ``1e-10 * max(1, ||a||_F)`` unless
    ``symmetrize`` is set, in which case ``(a + a^H)/2`` is used instead.
    Iteration stops once the off-diagonal Frobenius mass drops to
    ``tol * ||a||_F``; more than ``max_sweeps`` sweeps raises
    :class:`NonConvergence`.
    """
    a = as_matrix(a)
    if not symmetrize:
        dev = hermitian_deviation(a)
        if dev > HERMITIAN_TOL * max(1.0, frobenius_norm(a)):
            raise NonHermitian(f"Hermitian deviation {dev:.3e} exceeds tolerance")
    a = 0.5 * (a + a.conj().T)
    v, sweeps = _jacobi(a, float(tol), int(max_sweeps))
    if sweeps < 0:
        raise NonConvergence(f"Jacobi did not converge in {max_sweeps} sweeps (n={a.shape[0]})")
    w = np.diag(a).real.copy()
    order = np.argsort(w, kind="stable")
    return HermitianEigen(w[order], v[:, order], sweeps)


def eigvalsh(a, symmetrize: bool = False) -> np.ndarray:
    return eig_hermitian(a, symmetrize=symmetrize).eigenvalues


def min_eigenvalue(a, symmetrize: bool = False) -> float:
    return float(eig_hermitian(a, symmetrize=symmetrize).eigenvalues[0])


def max_eigenvalue(a, symmetrize: bool = False) -> float:
    return float(eig_hermitian(a, symmetrize=symmetrize).eigenvalues[-1])


def apply_spectral(eig: HermitianEigen, values: np.ndarray) -> np.ndarray:
    u = eig.eigenvectors
    return (u * values) @ u.conj().T


def _checked_spectrum(w: np.ndarray, f: str, norm: float) -> np.ndarray:
    floor = -NEG_CLAMP * norm
    lo, hi = float(w[0]), float(w[-1])
    if f == "sqrt":
        if lo < floor:
            raise DomainError(f"sqrt of matrix with eigenvalue {lo:.3e}")
        return np.clip(w, 0.0, None)
    if f != "inverse" and lo < floor:
        raise DomainError(f"{f} of matrix with eigenvalue {lo:.3e}")
    if lo <= 0.0 or lo <= COND_TOL * hi:
        raise IllConditioned(f"{f}: smallest eigenvalue {lo:.3e} vs largest {hi:.3e}")
    return w


def mat_fn(a, f: str, eig: HermitianEigen | None = None) -> np.ndarray:
    """Apply ``f`` in {"inverse", "log", "sqrt", "inverse_sqrt"} to the
    spectrum of a Hermitian matrix.

    Eigenvalues in ``[-1e-12 ||a||, 0)`` are clamped to zero for ``sqrt``;
    for the other functions any eigenvalue at or below ``1e-10 * lambda_max``
    raises :class:`IllConditioned`. A precomputed ``eig`` of ``a`` may be
    passed to skip the eigensolve.
    """
    if f not in MATRIX_FUNCTIONS:
        raise ValueError(f"unknown matrix function {f!r}; expected one of {MATRIX_FUNCTIONS}")
    a = as_matrix(a)
    if eig is None:
        eig = eig_hermitian(a)
    w = _checked_spectrum(eig.eigenvalues, f, frobenius_norm(a))
    if f == "inverse":
        values = 1.0 / w
    elif f == "log":
        values = np.log(w)
    elif f == "sqrt":
        values = np.sqrt(w)
    else:
        values = 1.0 / np.sqrt(w)
    return apply_spectral(eig, values)


def loewner_leq(a, b, tol: float = LOEWNER_TOL) -> tuple[bool, float]:
    """Check ``a <= b`` in operator order.

    Returns ``(verdict, gap)`` with ``gap = lambda_min(b - a)`` and
    ``verdict = gap >= -tol * max(1, ||b - a||_F)``.
    """
    a, b = as_matrix(a), as_matrix(b)
    _same_shape(a, b)
    for m in (a, b):
        dev = hermitian_deviation(m)
        if dev > HERMITIAN_TOL * max(1.0, frobenius_norm(m)):
            raise NonHermitian(f"Hermitian deviation {dev:.3e} exceeds tolerance")
    diff = b - a
    gap = min_eigenvalue(diff, symmetrize=True)
    return gap >= -tol * max(1.0, frobenius_norm(diff)), gap
