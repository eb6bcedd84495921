"""External indices comparing an estimated partition with a reference one."""

from __future__ import annotations

import math

import numpy as np

from .similarity import InputShapeError, as_partition


def _pair(a, b):
    a, b = as_partition(a), as_partition(b)
    if a.n != b.n:
        raise InputShapeError(f"partitions have different lengths: {a.n} vs {b.n}")
    return a, b


def contingency(a, b) -> np.ndarray:
    """Counts n_rs of observations in cluster r of `a` and cluster s of `b`.

    Rows and columns follow first-appearance order of the labels.
    """
    a, b = _pair(a, b)
    table = np.zeros((a.K, b.K), dtype=np.int64)
    np.add.at(table, (a.canonical_labels, b.canonical_labels), 1)
    return table


def _choose2(x):
    x = np.asarray(x, dtype=np.int64)
    return x * (x - 1) // 2


def _pair_counts(a, b):
    table = contingency(a, b)
    both = int(_choose2(table).sum())
    in_a = int(_choose2(table.sum(axis=1)).sum())
    in_b = int(_choose2(table.sum(axis=0)).sum())
    return in_a, in_b, both


def binder_loss(a, b) -> int:
    """Number of pairs on which the two partitions disagree (equal unit weights)."""
    in_a, in_b, both = _pair_counts(a, b)
    return in_a + in_b - 2 * both


def rand(a, b) -> float:
    a, b = _pair(a, b)
    n_pairs = math.comb(a.n, 2)
    if n_pairs == 0:
        return 1.0
    return 1.0 - binder_loss(a, b) / n_pairs


def adjusted_rand(a, b) -> float:
    """Adjusted Rand index.

    Where the formula is 0/0 (e.g. both partitions all-singletons) the
    result is 1 for identical groupings and 0 otherwise.
    """
    a, b = _pair(a, b)
    if a.n < 2:
        raise InputShapeError("adjusted Rand needs n >= 2")
    in_a, in_b, both = _pair_counts(a, b)
    n_pairs = math.comb(a.n, 2)
    chance = in_a * in_b / n_pairs
    den = 0.5 * (in_a + in_b) - chance
    if den == 0:
        return 1.0 if a == b else 0.0
    return (both - chance) / den


def variation_of_information(a, b, base: float | None = None) -> float:
    a, b = _pair(a, b)
    n = a.n
    table = contingency(a, b)

    def plogp(counts):
        p = counts[counts > 0] / n
        return float(np.sum(p * np.log(p)))

    vi = plogp(table.sum(axis=1)) + plogp(table.sum(axis=0)) - 2.0 * plogp(table.ravel())
    if base is not None:
        vi /= math.log(base)
    return max(vi, 0.0)


def compare(estimate, truth, base: float | None = None) -> dict[str, float]:
    return {
        "rand": rand(estimate, truth),
        "adjusted_rand": adjusted_rand(estimate, truth),
        "vi": variation_of_information(estimate, truth, base=base),
    }
