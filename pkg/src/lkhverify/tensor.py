"""Tensor-product structure on dense operators.

A multipartite system is described by its ordered tuple of local dimensions
``dims = (d_0, ..., d_{k-1})``. Composite indices are row-major with factor
0 varying slowest, which is the ordering produced by ``np.kron(a, b)``.
"""

from __future__ import annotations

from math import prod
from typing import Iterable, Sequence

import numpy as np

from .errors import ShapeMismatch
from .linalg import as_matrix

DEFAULT_MAX_DIM = 512


def check_dims(dims: Iterable[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise ValueError(f"invalid subsystem dimensions {dims}")
    return dims


def check_subsystems(indices: Iterable[int], k: int) -> tuple[int, ...]:
    """Normalize a subsystem set to a sorted tuple of unique positions < k."""
    raw = [int(i) for i in indices]
    idx = sorted(set(raw))
    if len(idx) != len(raw):
        raise ValueError(f"repeated subsystem index in {raw}")
    if any(i < 0 or i >= k for i in idx):
        raise ValueError(f"subsystem indices {idx} out of range for {k} factors")
    return tuple(idx)


def complement(indices: Iterable[int], k: int) -> tuple[int, ...]:
    out = set(check_subsystems(indices, k))
    return tuple(i for i in range(k) if i not in out)


def _check_operator(a, dims: Sequence[int]) -> tuple[np.ndarray, tuple[int, ...]]:
    dims = check_dims(dims)
    a = as_matrix(a)
    if a.shape[0] != prod(dims):
        raise ShapeMismatch(f"matrix of size {a.shape[0]} does not match dims {dims}")
    return a, dims


def _check_cap(n: int, max_dim: int) -> None:
    if n > max_dim:
        raise ValueError(f"dimension {n} exceeds cap {max_dim}")


def kron(*factors, max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor slowest."""
    if not factors:
        raise ValueError("kron needs at least one factor")
    mats = [as_matrix(f, square=False) for f in factors]
    _check_cap(prod(m.shape[0] for m in mats), max_dim)
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def _strides(dims: Sequence[int]) -> list[int]:
    strides = [1] * len(dims)
    for i in range(len(dims) - 2, -1, -1):
        strides[i] = strides[i + 1] * dims[i + 1]
    return strides


def _offsets(dims: Sequence[int], positions: Sequence[int]) -> np.ndarray:
    """Composite-index contributions of every multi-index on ``positions``
    (row-major among those positions)."""
    strides = _strides(dims)
    off = np.zeros(1, dtype=np.intp)
    for i in positions:
        off = (off[:, None] + strides[i] * np.arange(dims[i])[None, :]).ravel()
    return off


def partial_trace(a, dims: Sequence[int], out: Iterable[int]) -> np.ndarray:
    """Trace out the factors listed in ``out``.

    The result acts on the remaining factors in their original order, i.e.
    on ``[dims[i] for i in complement(out)]``. Implemented by index
    arithmetic: entry (i, j) of the result sums ``a[i + t, j + t]`` over
    the composite offsets ``t`` of the traced factors.
    """
    a, dims = _check_operator(a, dims)
    out = check_subsystems(out, len(dims))
    keep = _offsets(dims, complement(out, len(dims)))
    traced = _offsets(dims, out)
    result = np.zeros((keep.size, keep.size), dtype=np.complex128)
    for t in traced:
        idx = keep + t
        result += a[np.ix_(idx, idx)]
    return result


def reduced_dims(dims: Sequence[int], out: Iterable[int]) -> tuple[int, ...]:
    dims = check_dims(dims)
    return tuple(dims[i] for i in complement(out, len(dims)))


def permute_systems(a, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors: factor ``perm[i]`` of ``a`` becomes factor ``i``.

    With ``dims = (m, n)`` and ``perm = (1, 0)``, ``kron(x, y)`` maps to
    ``kron(y, x)``. The inverse permutation is ``np.argsort(perm)``.
    """
    a, dims = _check_operator(a, dims)
    perm = tuple(int(p) for p in perm)
    k = len(dims)
    if sorted(perm) != list(range(k)):
        raise ValueError(f"{perm} is not a permutation of 0..{k - 1}")
    n = a.shape[0]
    t = a.reshape(dims + dims)
    t = t.transpose(perm + tuple(k + p for p in perm))
    return t.reshape(n, n).copy()


def permute_vector(v, dims: Sequence[int], perm: Sequence[int]) -> np.ndarray:
    """Vector counterpart of :func:`permute_systems`."""
    dims = check_dims(dims)
    v = np.asarray(v, dtype=np.complex128).ravel()
    if v.size != prod(dims):
        raise ShapeMismatch(f"vector of length {v.size} does not match dims {dims}")
    perm = tuple(int(p) for p in perm)
    if sorted(perm) != list(range(len(dims))):
        raise ValueError(f"{perm} is not a permutation of 0..{len(dims) - 1}")
    return v.reshape(dims).transpose(perm).ravel().copy()


def embed(a, dims: Sequence[int], at: Iterable[int], max_dim: int = DEFAULT_MAX_DIM) -> np.ndarray:
    """Place ``a`` on the factors ``at`` with the identity everywhere else.

    ``at`` need not be contiguous: the operator is first built as
    ``a (x) I`` on the reordered system ``at + rest`` and then moved into
    place with :func:`permute_systems`.
    """
    dims = check_dims(dims)
    at = check_subsystems(at, len(dims))
    if not at:
        raise ValueError("embed needs at least one target subsystem")
    a = as_matrix(a)
    if a.shape[0] != prod(dims[i] for i in at):
        raise ShapeMismatch(f"operator of size {a.shape[0]} does not fit subsystems {at} of {dims}")
    _check_cap(prod(dims), max_dim)
    lo, hi = at[0], at[-1]
    if at == tuple(range(lo, hi + 1)):
        left = np.eye(prod(dims[:lo]))
        right = np.eye(prod(dims[hi + 1 :]))
        return np.kron(np.kron(left, a), right)
    rest = complement(at, len(dims))
    order = at + rest
    big = np.kron(a, np.eye(prod(dims[i] for i in rest)))
    return permute_systems(big, [dims[i] for i in order], np.argsort(order))
