"""Conventional partition estimators over restricted or exhaustive search spaces."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import penalties
from .similarity import Partition

MAX_ENUMERATE = 12
LINKAGES = ("average", "complete")


@dataclass(frozen=True)
class CandidateSet:
    partitions: tuple[Partition, ...]
    provenance: str

    def __post_init__(self):
        seen = {}
        for p in self.partitions:
            seen.setdefault(p.key(), p.canonical())
        object.__setattr__(self, "partitions", tuple(seen.values()))
        lengths = {p.n for p in self.partitions}
        if len(lengths) > 1:
            raise ValueError(f"candidates have different lengths: {sorted(lengths)}")

    def __len__(self):
        return len(self.partitions)

    def __iter__(self):
        return iter(self.partitions)

    def label_matrix(self) -> np.ndarray:
        return np.array([p.canonical_labels for p in self.partitions])

    @classmethod
    def from_labels(cls, rows, provenance: str = "user-supplied") -> "CandidateSet":
        return cls(tuple(Partition(r) for r in rows), provenance)


def agglomerate(pi, linkage: str = "average"):
    """Agglomerative clustering of the dissimilarity 1 - pi.

    Returns the merge heights and, for every level, the label vector after
    that many merges (level 0 is all singletons). A cluster lives in the slot
    of its smallest member; among equal distances the pair of slots that is
    smallest in (i, j) lexicographic order merges first.
    """
    if linkage not in LINKAGES:
        raise ValueError(f"linkage must be one of {LINKAGES}, got {linkage!r}")
    D = 1.0 - np.asarray(pi, dtype=float)
    n = D.shape[0]
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, np.inf)
    sizes = np.ones(n)
    active = np.ones(n, dtype=bool)
    labels = np.arange(n)
    levels = [labels.copy()]
    heights = []
    for _ in range(n - 1):
        # D is symmetric, so the first row-major minimum is the
        # lexicographically smallest (i, j) with i < j
        i, j = divmod(int(np.argmin(D)), n)
        heights.append(float(D[i, j]))
        if linkage == "average":
            merged = (sizes[i] * D[i] + sizes[j] * D[j]) / (sizes[i] + sizes[j])
        else:
            merged = np.maximum(D[i], D[j])
        active[j] = False
        sizes[i] += sizes[j]
        merged[~active] = np.inf
        merged[i] = np.inf
        D[i, :] = merged
        D[:, i] = merged
        D[j, :] = np.inf
        D[:, j] = np.inf
        labels = np.where(labels == j, i, labels)
        levels.append(labels.copy())
    return np.array(heights), levels


def hclust_candidates(pi, linkage: str = "average") -> CandidateSet:
    """Every distinct cut of the dendrogram built on 1 - pi."""
    _, levels = agglomerate(pi, linkage)
    return CandidateSet(tuple(Partition(lv) for lv in levels), f"dendrogram-{linkage}")


def best_in_set(pi, candidates: CandidateSet, penalty="binder", base=None) -> tuple[Partition, float]:
    """Minimize a penalty over a candidate set.

    Ties go to the candidate with fewer clusters, then to the earliest one in
    canonical (lexicographic label) order.
    """
    if len(candidates) == 0:
        raise ValueError("candidate set is empty")
    L = candidates.label_matrix()
    values = penalties.evaluate_many(penalty, pi, L, base=base)
    best = values.min()
    tied = np.flatnonzero(values == best)
    if tied.size > 1:
        keys = [(int(L[t].max()) + 1, tuple(L[t].tolist())) for t in tied]
        winner = int(tied[min(range(len(tied)), key=keys.__getitem__)])
    else:
        winner = int(tied[0])
    return candidates.partitions[winner], float(values[winner])


def min_binder(pi) -> tuple[Partition, float]:
    return best_in_set(pi, hclust_candidates(pi, "average"), "binder")


def max_pear(pi) -> tuple[Partition, float]:
    return best_in_set(pi, hclust_candidates(pi, "average"), "pear")


def min_vi(pi) -> tuple[Partition, float]:
    return best_in_set(pi, hclust_candidates(pi, "average"), "vi")


def medvedovic(pi, cut: float = 0.99) -> Partition:
    """Complete-linkage dendrogram on 1 - pi, cut at dissimilarity height `cut`.

    Merges at heights <= cut are applied.
    """
    if not 0.0 < cut <= 1.0:
        raise ValueError(f"cut must lie in (0, 1], got {cut}")
    heights, levels = agglomerate(pi, "complete")
    applied = int(np.searchsorted(heights, cut, side="right"))
    return Partition(levels[applied]).canonical()


def restricted_growth_strings(n: int) -> np.ndarray:
    """All set partitions of n items as canonical label rows, lexicographic."""
    if n == 0:
        return np.zeros((1, 0), dtype=np.int8)
    rows = np.zeros((1, 1), dtype=np.int8)
    maxes = np.zeros(1, dtype=np.int8)
    for _ in range(1, n):
        # each prefix extends with any label up to (its max + 1)
        reps = (maxes + 2).astype(np.int64)
        parent = np.repeat(np.arange(rows.shape[0]), reps)
        offsets = np.arange(parent.size) - np.repeat(np.cumsum(reps) - reps, reps)
        new_label = offsets.astype(np.int8)
        rows = np.hstack([rows[parent], new_label[:, None]])
        maxes = np.maximum(maxes[parent], new_label)
    return rows


def enumerate_partitions(n: int) -> CandidateSet:
    """All Bell(n) partitions of n items; refuses n > 12."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if n > MAX_ENUMERATE:
        raise ValueError(
            f"exhaustive enumeration is limited to n <= {MAX_ENUMERATE} "
            f"(Bell({MAX_ENUMERATE}) = {bell(MAX_ENUMERATE):,}); got n = {n}"
        )
    rows = restricted_growth_strings(n)
    # rows are already canonical and distinct; skip the dedup pass
    cs = object.__new__(CandidateSet)
    object.__setattr__(cs, "partitions", tuple(Partition(r) for r in rows))
    object.__setattr__(cs, "provenance", "exhaustive")
    return cs


def oracle(pi, penalty="binder", base=None) -> tuple[Partition, float]:
    """Global minimizer over every partition of n <= 12 items."""
    pi = np.asarray(pi, dtype=float)
    n = pi.shape[0]
    if n > MAX_ENUMERATE:
        enumerate_partitions(n)
    L = restricted_growth_strings(n)
    values = penalties.evaluate_many(penalty, pi, L, base=base)
    best = values.min()
    tied = np.flatnonzero(values == best)
    # rows are lexicographic, so the first tied row with fewest clusters wins
    k = L[tied].max(axis=1)
    winner = int(tied[np.argmin(k)])
    return Partition(L[winner]), float(values[winner])


def stirling2(n: int, K: int) -> int:
    """Stirling number of the second kind by the alternating-sum formula, exactly."""
    if n < 0 or K < 0:
        raise ValueError("n and K must be non-negative")
    if K > n:
        return 0
    total = sum((-1) ** (K - j) * math.comb(K, j) * j ** n for j in range(K + 1))
    value, rem = divmod(total, math.factorial(K))
    assert rem == 0
    return value


def bell(n: int) -> int:
    return sum(stirling2(n, K) for K in range(n + 1))

