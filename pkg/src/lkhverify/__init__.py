"""Numerical verification of the operator inequality
``rho1^{-1} (x) sigma23 <= rho12^{-1} (x) sigma3`` and strong subadditivity
of von Neumann entropy on small multipartite systems."""

from .errors import (
    AncillaTooSmall,
    DomainError,
    EpsilonTooLarge,
    IllConditioned,
    NonConvergence,
    NonHermitian,
    ShapeMismatch,
    VerificationError,
)

__version__ = "0.1.0"

__all__ = [
    "AncillaTooSmall",
    "DomainError",
    "EpsilonTooLarge",
    "IllConditioned",
    "NonConvergence",
    "NonHermitian",
    "ShapeMismatch",
    "VerificationError",
]
