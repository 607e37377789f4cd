"""Von Neumann and Renyi-2 entropies and the tripartite entropy gaps.

All logarithms are natural (nats). Gaps are ordered so that a nonnegative
value means the inequality holds on the given state.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import eig_hermitian
from .states import DensityMatrix

ENTROPY_CLAMP = 1e-15


@dataclass(frozen=True)
class EntropyReport:
    value: float
    clamped_mass: float = 0.0

    def __float__(self) -> float:
        return self.value


def spectrum_entropy(w) -> EntropyReport:
    """-sum w ln w over eigenvalues above 1e-15; the rest is reported as
    clamped mass."""
    w = np.asarray(w, dtype=float)
    small = w <= ENTROPY_CLAMP
    big = w[~small]
    return EntropyReport(float(-np.sum(big * np.log(big))), float(np.sum(np.abs(w[small]))))


def von_neumann(rho) -> EntropyReport:
    if isinstance(rho, DensityMatrix):
        return spectrum_entropy(rho.eigenvalues)
    return spectrum_entropy(eig_hermitian(rho, symmetrize=True).eigenvalues)


def _S(rho: DensityMatrix) -> float:
    return von_neumann(rho).value


def renyi2_log_purity(rho) -> float:
    """ln Tr[rho^2]; equals minus the Renyi-2 entropy."""
    mat = rho.mat if isinstance(rho, DensityMatrix) else np.asarray(rho)
    return float(np.log(np.sum(np.abs(mat) ** 2)))


def _tripartite(rho123: DensityMatrix) -> None:
    if len(rho123.dims) != 3:
        raise ValueError(f"expected a tripartite state, got dims {rho123.dims}")


def ssa_gap(rho123: DensityMatrix) -> float:
    """S(rho_12) + S(rho_23) - S(rho_123) - S(rho_2)."""
    _tripartite(rho123)
    return _S(rho123.keep(0, 1)) + _S(rho123.keep(1, 2)) - _S(rho123) - _S(rho123.keep(1))


def lkh3_gap(rho123: DensityMatrix) -> float:
    """S(rho_12) + S(rho_23) - S(rho_1) - S(rho_3)."""
    _tripartite(rho123)
    return _S(rho123.keep(0, 1)) + _S(rho123.keep(1, 2)) - _S(rho123.keep(0)) - _S(rho123.keep(2))


def araki_lieb_weak_gap(rho123: DensityMatrix) -> float:
    """SSA slack with S(rho_2) replaced by ln Tr[rho_2^2].

    Always at least :func:`ssa_gap`, since ln Tr[rho^2] <= 0 <= S(rho).
    """
    _tripartite(rho123)
    rho2 = rho123.keep(1)
    return _S(rho123.keep(0, 1)) + _S(rho123.keep(1, 2)) - _S(rho123) - renyi2_log_purity(rho2)
