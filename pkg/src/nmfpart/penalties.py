"""Posterior expected-loss penalties evaluated from a similarity matrix.

Every penalty replaces the expected co-clustering indicator with the
estimated similarity, and all of them are minimized. The diagonal of the
similarity matrix only enters the VI lower bound, whose inner sums run over
every j including j = i.
"""

from __future__ import annotations

import enum
import logging
import math

import numpy as np

from .similarity import InputShapeError, as_partition

log = logging.getLogger(__name__)

# bound on candidates x n x n cells held at once in evaluate_many
_CELLS = 4_000_000


class PenaltyKind(str, enum.Enum):
    BINDER = "binder"
    DAHL = "dahl"
    PEAR = "pear"
    VI = "vi"

    @classmethod
    def parse(cls, value) -> "PenaltyKind":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "").replace("_", "")
        aliases = {"binder": cls.BINDER, "dahl": cls.DAHL, "dahlquadratic": cls.DAHL,
                   "pear": cls.PEAR, "vi": cls.VI, "vilowerbound": cls.VI}
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown penalty {value!r}; expected one of binder, dahl, pear, vi") from None


class DimensionError(InputShapeError):
    pass


def _log(x, base):
    out = np.log(x)
    return out if base is None else out / math.log(base)


def _check(pi, labels: np.ndarray) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
        raise DimensionError(f"similarity matrix must be square, got {pi.shape}")
    if labels.shape[-1] != pi.shape[0]:
        raise DimensionError(
            f"partition has {labels.shape[-1]} observations but similarity matrix is {pi.shape[0]} x {pi.shape[0]}"
        )
    return pi


def _pair_terms(pi, L):
    """Upper-triangle similarities and co-clustering indicators, row-major."""
    n = pi.shape[0]
    iu, ju = np.triu_indices(n, 1)
    return pi[iu, ju], (L[:, iu] == L[:, ju]).astype(float)


def _pear_from_sums(sum_ind, sum_pi, sum_cross, n_pairs):
    chance = sum_ind * sum_pi / n_pairs
    num = sum_cross - chance
    den = 0.5 * (sum_ind + sum_pi) - chance
    degenerate = den == 0.0
    with np.errstate(divide="ignore", invalid="ignore"):
        value = np.where(degenerate, 1.0, 1.0 - num / np.where(degenerate, 1.0, den))
    return value, degenerate


def _evaluate_block(kind: PenaltyKind, pi, L, base):
    n = pi.shape[0]
    if kind is PenaltyKind.VI:
        same = (L[:, :, None] == L[:, None, :])
        sizes = same.sum(axis=2)
        mass = (same * pi[None, :, :]).sum(axis=2)
        return _log(sizes, base).sum(axis=1) - 2.0 * _log(mass, base).sum(axis=1), None
    p, ind = _pair_terms(pi, L)
    if kind is PenaltyKind.BINDER:
        return np.abs(p[None, :] - ind).sum(axis=1), None
    if kind is PenaltyKind.DAHL:
        return ((ind - p[None, :]) ** 2).sum(axis=1), None
    n_pairs = n * (n - 1) / 2
    return _pear_from_sums(ind.sum(axis=1), p.sum(), (ind * p[None, :]).sum(axis=1), n_pairs)


def evaluate_many(kind, pi, labels, base: float | None = None) -> np.ndarray:
    """Penalty of every row of an (m, n) label matrix against one similarity matrix."""
    kind = PenaltyKind.parse(kind)
    L = np.atleast_2d(np.asarray(labels))
    pi = _check(pi, L)
    if kind is PenaltyKind.PEAR and pi.shape[0] < 2:
        raise DimensionError("PEAR needs n >= 2")
    out = np.empty(L.shape[0])
    block = max(1, _CELLS // (pi.shape[0] ** 2))
    for s in range(0, L.shape[0], block):
        out[s:s + block] = _evaluate_block(kind, pi, L[s:s + block], base)[0]
    return out


def binder_penalty(pi, c) -> float:
    """Sum over pairs i < j of |pi_ij - 1{c_i = c_j}|."""
    return float(evaluate_many(PenaltyKind.BINDER, pi, as_partition(c).labels)[0])


def dahl_penalty(pi, c) -> float:
    return float(evaluate_many(PenaltyKind.DAHL, pi, as_partition(c).labels)[0])


def pear_penalty(pi, c, return_degenerate: bool = False):
    """One minus the posterior expected adjusted Rand index.

    When the adjusted-Rand denominator is exactly zero the penalty is 1
    (expected adjusted Rand 0). Pass ``return_degenerate=True`` to also get
    that flag.
    """
    labels = as_partition(c).labels[None, :]
    pi = _check(pi, labels)
    if pi.shape[0] < 2:
        raise DimensionError("PEAR needs n >= 2")
    value, degenerate = _evaluate_block(PenaltyKind.PEAR, pi, labels, None)
    value, degenerate = float(value[0]), bool(degenerate[0])
    if degenerate:
        log.debug("PEAR denominator is zero; returning penalty 1")
    return (value, degenerate) if return_degenerate else value


def vi_penalty(pi, c, base: float | None = None) -> float:
    """Lower bound on the posterior expected variation of information.

    Natural log unless `base` is given (e.g. 2).
    """
    return float(evaluate_many(PenaltyKind.VI, pi, as_partition(c).labels, base)[0])


def evaluate(kind, pi, c, base: float | None = None) -> float:
    kind = PenaltyKind.parse(kind)
    if kind is PenaltyKind.BINDER:
        return binder_penalty(pi, c)
    if kind is PenaltyKind.DAHL:
        return dahl_penalty(pi, c)
    if kind is PenaltyKind.PEAR:
        return pear_penalty(pi, c)
    return vi_penalty(pi, c, base=base)
