"""Posterior similarity matrices and the partition type used throughout."""

from __future__ import annotations

from collections.abc import Iterable, Sequence

import numpy as np


class InputShapeError(ValueError):
    """Label samples or matrices whose shape cannot be interpreted."""


class ValidationError(ValueError):
    """A similarity matrix violates symmetry, unit diagonal or range."""

    def __init__(self, message: str, entry: tuple[int, int]):
        super().__init__(message)
        self.entry = entry


def canonical_labels(labels) -> np.ndarray:
    """Relabel by order of first appearance, giving 0, 1, 2, ..."""
    labels = np.asarray(labels)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    # rank of each distinct value by where it first shows up
    order = np.argsort(first, kind="stable")
    rank = np.empty_like(order)
    rank[order] = np.arange(order.size)
    return rank[inverse.reshape(-1)].astype(np.int64)


class Partition:
    """Hard assignment of n observations to clusters.

    Labels are arbitrary integers; two partitions compare equal iff they
    induce the same grouping.
    """

    __slots__ = ("labels", "_canon")

    def __init__(self, labels: Iterable[int] | np.ndarray):
        arr = np.array(labels, copy=True)
        if arr.ndim != 1:
            raise InputShapeError(f"labels must be a 1-D vector, got shape {arr.shape}")
        if arr.size and not np.issubdtype(arr.dtype, np.integer):
            if not np.all(np.equal(np.mod(arr, 1), 0)):
                raise InputShapeError("labels must be integers")
        arr = arr.astype(np.int64)
        arr.setflags(write=False)
        self.labels = arr
        canon = canonical_labels(arr) if arr.size else arr
        canon.setflags(write=False)
        self._canon = canon

    @property
    def n(self) -> int:
        return int(self.labels.size)

    @property
    def K(self) -> int:
        return int(self._canon.max()) + 1 if self.n else 0

    def canonical(self) -> "Partition":
        return Partition(self._canon)

    @property
    def canonical_labels(self) -> np.ndarray:
        return self._canon

    def key(self) -> tuple[int, ...]:
        return tuple(int(v) for v in self._canon)

    def sizes(self) -> np.ndarray:
        return np.bincount(self._canon)

    def __len__(self) -> int:
        return self.n

    def __eq__(self, other) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.n == other.n and bool(np.array_equal(self._canon, other._canon))

    def __hash__(self) -> int:
        return hash(self.key())

    def __repr__(self) -> str:
        return f"Partition({self.labels.tolist()})"


def as_partition(c) -> Partition:
    return c if isinstance(c, Partition) else Partition(c)


def _as_sample_matrix(samples) -> np.ndarray:
    if isinstance(samples, np.ndarray):
        arr = samples
    else:
        rows = [list(r) for r in samples]
        if not rows:
            raise InputShapeError("no draws: at least one MCMC sample is required")
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            lengths = [len(r) for r in rows]
            bad = next(i for i, w in enumerate(lengths) if w != lengths[0])
            raise InputShapeError(
                f"ragged label samples: row 0 has {lengths[0]} entries, row {bad} has {lengths[bad]}"
            )
        arr = np.array(rows)
    if arr.ndim == 1:
        arr = arr[None, :]
    if arr.ndim != 2:
        raise InputShapeError(f"label samples must be M x n, got shape {arr.shape}")
    if arr.shape[0] < 1:
        raise InputShapeError("no draws: at least one MCMC sample is required")
    if arr.shape[1] < 2:
        raise InputShapeError("label samples need n >= 2 observations per draw")
    return arr


def build_similarity(samples, chunk: int = 256) -> np.ndarray:
    """Fraction of draws in which each pair of observations shares a label.

    Parameters
    ----------
    samples : array-like of shape (M, n)
        One MCMC draw of the allocation vector per row. Labels only need to
        be comparable within a row.
    chunk : int
        Number of draws one-hot encoded at a time.

    Returns
    -------
    ndarray of shape (n, n)
        Symmetric, unit diagonal, entries are exact multiples of 1/M.
    """
    arr = _as_sample_matrix(samples)
    M, n = arr.shape
    counts = np.zeros((n, n))
    for start in range(0, M, chunk):
        block = arr[start:start + chunk]
        cols = []
        for row in block:
            _, inv = np.unique(row, return_inverse=True)
            inv = inv.reshape(-1)
            onehot = np.zeros((n, int(inv.max()) + 1))
            onehot[np.arange(n), inv] = 1.0
            cols.append(onehot)
        Z = np.hstack(cols)
        # integer-valued sums: exact in binary64, hence exactly symmetric
        counts += Z @ Z.T
    return counts / M


def partition_affinity(c) -> np.ndarray:
    """Binary co-clustering matrix of a single partition."""
    labels = as_partition(c).labels
    return (labels[:, None] == labels[None, :]).astype(float)


def validate_similarity(values, tolerance: float = 1e-9) -> np.ndarray:
    """Check (and lightly repair) a candidate similarity matrix.

    Asymmetry up to `tolerance` is averaged away, the diagonal is set to one
    and entries are clipped to [0, 1] when the deviation is within
    `tolerance`. Anything larger raises :class:`ValidationError` naming the
    first offending entry in row-major order.
    """
    A = np.array(values, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise InputShapeError(f"similarity matrix must be square, got shape {A.shape}")
    if not np.all(np.isfinite(A)):
        i, j = np.argwhere(~np.isfinite(A))[0]
        raise ValidationError(f"non-finite entry at ({i}, {j})", (int(i), int(j)))

    asym = np.abs(A - A.T)
    bad = np.argwhere(np.triu(asym > tolerance, 1))
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise ValidationError(
            f"asymmetric entry ({i}, {j}): {A[i, j]!r} vs {A[j, i]!r} exceeds tolerance {tolerance}",
            (i, j),
        )
    if np.any(asym > 0):
        A = 0.5 * (A + A.T)

    diag = np.abs(np.diag(A) - 1.0)
    bad = np.flatnonzero(diag > tolerance)
    if bad.size:
        i = int(bad[0])
        raise ValidationError(f"diagonal entry ({i}, {i}) = {A[i, i]!r} is not 1", (i, i))
    np.fill_diagonal(A, 1.0)

    out_of_range = (A < -tolerance) | (A > 1.0 + tolerance)
    bad = np.argwhere(out_of_range)
    if bad.size:
        i, j = (int(v) for v in bad[0])
        raise ValidationError(f"entry ({i}, {j}) = {A[i, j]!r} outside [0, 1]", (i, j))
    np.clip(A, 0.0, 1.0, out=A)
    return A


def block_similarity(sizes: Sequence[int]) -> np.ndarray:
    """Noiseless block-diagonal similarity for consecutive blocks of the given sizes."""
    labels = np.repeat(np.arange(len(sizes)), sizes)
    return partition_affinity(labels)
