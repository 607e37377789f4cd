import itertools
from math import prod

import numpy as np
import pytest

ACCEPTANCE_LINES: list[str] = []


def random_hermitian(rng, n, scale=1.0):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (g + g.conj().T)


def random_psd(rng, n, rank=None):
    g = rng.standard_normal((n, rank or n)) + 1j * rng.standard_normal((n, rank or n))
    return g @ g.conj().T


def random_unit(rng, n):
    v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    return v / np.linalg.norm(v)


def naive_partial_trace(a, dims, out):
    """Entry-by-entry index-sum partial trace, independent of the library's
    offset arithmetic."""
    k = len(dims)
    keep = [i for i in range(k) if i not in out]
    keep_ranges = [range(dims[i]) for i in keep]
    out_ranges = [range(dims[i]) for i in out]
    m = prod(dims[i] for i in keep)

    def flat(multi):
        idx = 0
        for d, x in zip(dims, multi):
            idx = idx * d + x
        return idx

    result = np.zeros((m, m), dtype=complex)
    for r, row in enumerate(itertools.product(*keep_ranges)):
        for c, col in enumerate(itertools.product(*keep_ranges)):
            total = 0j
            for t in itertools.product(*out_ranges):
                ri, ci = [0] * k, [0] * k
                for pos, x, y in zip(keep, row, col):
                    ri[pos], ci[pos] = x, y
                for pos, x in zip(out, t):
                    ri[pos] = ci[pos] = x
                total += a[flat(ri), flat(ci)]
            result[r, c] = total
    return result


def entropy_oracle(mat):
    """Von Neumann entropy through LAPACK's eigvalsh, independent of the Jacobi path."""
    w = np.linalg.eigvalsh(0.5 * (mat + mat.conj().T))
    w = w[w > 1e-15]
    return float(-np.sum(w * np.log(w)))


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES.append


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
