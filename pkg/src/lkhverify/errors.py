"""Exception hierarchy shared by all modules."""


class VerificationError(Exception):
    """Base class for every error raised by this package."""


class ShapeMismatch(VerificationError, ValueError):
    pass


class NonHermitian(VerificationError, ValueError):
    pass


class NonConvergence(VerificationError, ArithmeticError):
    pass


class IllConditioned(VerificationError, ArithmeticError):
    """Smallest eigenvalue too close to zero for inverse, log or inverse sqrt."""


class DomainError(VerificationError, ValueError):
    """Eigenvalue clearly negative where the scalar function needs x >= 0."""


class AncillaTooSmall(VerificationError, ValueError):
    pass


class EpsilonTooLarge(VerificationError, ValueError):
    """Regularization parameter above the range in which the lemma bound is proved."""
