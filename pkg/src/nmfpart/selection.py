"""Rank and partition selection: NMF proposes one hard partition per rank,
a penalty picks among them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import penalties
from .nmf import NmfConfig, NmfSolution, NmfVariant, extract_hard, extract_soft, multi_start
from .penalties import PenaltyKind
from .similarity import Partition

DEFAULT_K_RANGE = (2, 12)


@dataclass
class RankResult:
    K: int
    partition: Partition
    penalty: float
    objective: float
    iterations: int
    converged: bool
    seed: int
    soft: np.ndarray | None = None

    @property
    def n_clusters(self) -> int:
        return self.partition.K

    def summary(self) -> dict:
        return {
            "K": self.K,
            "n_clusters": self.n_clusters,
            "penalty": self.penalty,
            "objective": self.objective,
            "iterations": self.iterations,
            "converged": self.converged,
            "seed": self.seed,
        }


@dataclass
class SelectionReport:
    per_k: list[RankResult]
    chosen_k: int
    chosen_partition: Partition
    chosen_soft: np.ndarray
    penalty_kind: PenaltyKind
    variant: NmfVariant
    chosen_solution: NmfSolution = field(repr=False)

    @property
    def chosen_penalty(self) -> float:
        return next(r.penalty for r in self.per_k if r.K == self.chosen_k)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.per_k)

    def to_dict(self) -> dict:
        return {
            "variant": self.variant.name,
            "theta": self.variant.theta,
            "penalty": self.penalty_kind.value,
            "chosen_k": self.chosen_k,
            "chosen_n_clusters": self.chosen_partition.K,
            "chosen_penalty": self.chosen_penalty,
            "labels": [int(v) + 1 for v in self.chosen_partition.canonical_labels],
            "soft_matrix": self.chosen_soft.tolist(),
            "per_k": [r.summary() for r in self.per_k],
        }


def _k_values(k_range, n: int) -> list[int]:
    lo, hi = k_range
    ks = list(range(int(lo), int(hi) + 1))
    if not ks:
        raise ValueError(f"empty K range {k_range}")
    if ks[0] < 1 or ks[-1] > n:
        raise ValueError(f"K range {k_range} must lie within [1, {n}]")
    return ks


def fit_ranks(pi, k_range=DEFAULT_K_RANGE, variant="ls", starts: int = 10,
              config: NmfConfig | None = None, threads: int = 1) -> dict[int, NmfSolution]:
    """Best-of-`starts` NMF fit at every rank; reusable across penalties."""
    pi = np.asarray(pi, dtype=float)
    variant = NmfVariant.parse(variant)
    return {K: multi_start(pi, K, variant, starts, config, threads=threads)
            for K in _k_values(k_range, pi.shape[0])}


def select(pi, k_range=DEFAULT_K_RANGE, variant="ls", penalty="binder", starts: int = 10,
           config: NmfConfig | None = None, keep_soft: bool = False, threads: int = 1,
           base: float | None = None, fits: dict[int, NmfSolution] | None = None) -> SelectionReport:
    """Fit the NMF model at every rank in `k_range` and keep the rank whose
    hardened partition has the lowest penalty (ties: smallest K).

    Parameters
    ----------
    pi : (n, n) similarity matrix
    k_range : inclusive (kmin, kmax)
    keep_soft : retain the soft assignment of every rank, not only the chosen one
    threads : worker threads for the random starts of each rank
    fits : output of :func:`fit_ranks` to score instead of refitting
    """
    pi = np.asarray(pi, dtype=float)
    kind = PenaltyKind.parse(penalty)
    if fits is None:
        fits = fit_ranks(pi, k_range, variant, starts, config, threads)
    variant = next(iter(fits.values())).variant
    rows = []
    for K, sol in sorted(fits.items()):
        part = extract_hard(sol)
        rows.append(RankResult(
            K=K, partition=part, penalty=penalties.evaluate(kind, pi, part, base=base),
            objective=sol.objective, iterations=sol.iterations, converged=sol.converged,
            seed=sol.seed, soft=extract_soft(sol) if keep_soft else None,
        ))
    best = min(rows, key=lambda r: (r.penalty, r.K))
    return SelectionReport(
        per_k=rows, chosen_k=best.K, chosen_partition=best.partition,
        chosen_soft=extract_soft(fits[best.K]), penalty_kind=kind, variant=variant,
        chosen_solution=fits[best.K],
    )


def penalty_curve(report: SelectionReport) -> list[tuple[int, float]]:
    return [(r.K, r.penalty) for r in report.per_k]
