"""Non-negative factorization of a similarity matrix by multiplicative updates.

Four models are supported:

``ls``      pi ~ W H, squared Frobenius error
``kl``      pi ~ W H, generalized Kullback-Leibler divergence
``ns``      pi ~ W S H with S = (1 - theta) I + (theta / K) 11^T, squared error
``offset``  pi ~ W H + b 1^T with a non-negative row offset b, squared error

Each update is the Lee-Seung style ratio of the negative to the positive
part of the gradient, so every objective is non-increasing. All factors are
floored at ``EPS`` after each update.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .similarity import InputShapeError, Partition

log = logging.getLogger(__name__)

EPS = 1e-12

VARIANTS = ("ls", "kl", "ns", "offset")


@dataclass(frozen=True)
class NmfVariant:
    name: str
    theta: float | None = None

    def __post_init__(self):
        if self.name not in VARIANTS:
            raise ValueError(f"unknown NMF variant {self.name!r}; expected one of {VARIANTS}")
        if self.name == "ns":
            theta = 0.5 if self.theta is None else float(self.theta)
            if not 0.0 <= theta <= 1.0:
                raise ValueError(f"theta must lie in [0, 1], got {theta}")
            object.__setattr__(self, "theta", theta)
        elif self.theta is not None:
            raise ValueError("theta only applies to the non-smooth variant")

    @classmethod
    def parse(cls, value, theta: float | None = None) -> "NmfVariant":
        if isinstance(value, cls):
            return value
        key = str(value).lower()
        key = key[4:] if key.startswith("nmf-") else key
        aliases = {"leastsquares": "ls", "kullbackleibler": "kl", "nonsmooth": "ns"}
        key = aliases.get(key, key)
        return cls(key, theta if key == "ns" else None)

    @property
    def label(self) -> str:
        return f"NMF-{self.name}"


@dataclass(frozen=True)
class NmfConfig:
    max_iters: int = 2000
    rel_tolerance: float = 1e-6
    seed: int = 0
    # relative decrease is measured over this many iterations
    window: int = 10


@dataclass
class NmfSolution:
    W: np.ndarray
    H: np.ndarray
    variant: NmfVariant
    objective_trace: np.ndarray
    iterations: int
    seed: int
    converged: bool
    offset: np.ndarray | None = None
    extras: dict = field(default_factory=dict)

    @property
    def K(self) -> int:
        return self.H.shape[0]

    @property
    def objective(self) -> float:
        return float(self.objective_trace[-1])

    @property
    def smoothing(self) -> np.ndarray | None:
        if self.variant.name != "ns":
            return None
        return smoothing_matrix(self.K, self.variant.theta)

    def reconstruction(self) -> np.ndarray:
        return _reconstruct(self.W, self.H, self.variant, self.offset)


def smoothing_matrix(K: int, theta: float) -> np.ndarray:
    return (1.0 - theta) * np.eye(K) + (theta / K) * np.ones((K, K))


def _reconstruct(W, H, variant, offset=None):
    if variant.name == "ns":
        return W @ smoothing_matrix(H.shape[0], variant.theta) @ H
    WH = W @ H
    if variant.name == "offset":
        WH = WH + offset[:, None]
    return WH


def kl_divergence(pi, approx) -> float:
    """Generalized KL divergence D(pi || approx) with 0 log 0 = 0."""
    pos = pi > 0
    terms = np.zeros_like(pi)
    terms[pos] = pi[pos] * np.log(pi[pos] / approx[pos])
    return float(np.sum(terms - pi + approx))


def objective(pi, W, H, variant: NmfVariant, offset=None) -> float:
    approx = _reconstruct(W, H, variant, offset)
    if variant.name == "kl":
        return kl_divergence(pi, approx)
    return float(np.sum((pi - approx) ** 2))


def update_step_ls(pi, W, H):
    """One multiplicative least-squares sweep: H first, then W with the new H."""
    pi = np.asarray(pi, dtype=float)
    W, H, _ = _sweep_ls(pi, W, H, float(np.sum(pi * pi)))
    return W, H


def update_step_kl(pi, W, H):
    """One multiplicative generalized-KL sweep (H, then W)."""
    pi = np.asarray(pi, dtype=float)
    W, H, _, _ = _sweep_kl(pi, W, H, W @ H, _KLState(pi))
    return W, H


def update_step_ns(pi, W, H, theta: float):
    """Least-squares sweep with the smoothing matrix folded into the factors.

    W S acts as the basis when updating H and S H as the weights when
    updating W.
    """
    pi = np.asarray(pi, dtype=float)
    S = smoothing_matrix(H.shape[0], theta)
    W, H, _ = _sweep_ns(pi, W, H, S, float(np.sum(pi * pi)))
    return W, H


def update_step_offset(pi, W, H, b):
    """Least-squares sweep for pi ~ W H + b 1^T, updating H, W, then b."""
    pi = np.asarray(pi, dtype=float)
    W, H, b, _ = _sweep_offset(pi, W, H, b, float(np.sum(pi * pi)), pi.sum(axis=1))
    return W, H, b


def _sweep_ls(pi, W, H, sq_norm):
    """Least-squares sweep that also returns the new objective.

    The objective is expanded as ||pi||^2 - 2<W, pi H^T> + <W^T W, H H^T> so
    it reuses the products of the W update instead of forming W H.
    """
    H = np.maximum(H * (W.T @ pi) / (W.T @ W @ H), EPS)
    piHt = pi @ H.T
    HHt = H @ H.T
    W = np.maximum(W * piHt / (W @ HHt), EPS)
    value = sq_norm - 2.0 * np.sum(W * piHt) + np.sum((W.T @ W) * HHt)
    return W, H, max(value, 0.0)


def _sweep_ns(pi, W, H, S, sq_norm):
    WS = W @ S
    H = np.maximum(H * (WS.T @ pi) / (WS.T @ WS @ H), EPS)
    SH = S @ H
    piSHt = pi @ SH.T
    SHSHt = SH @ SH.T
    W = np.maximum(W * piSHt / (W @ SHSHt), EPS)
    value = sq_norm - 2.0 * np.sum(W * piSHt) + np.sum((W.T @ W) * SHSHt)
    return W, H, max(value, 0.0)


def _sweep_offset(pi, W, H, b, sq_norm, row_sums):
    H = np.maximum(H * (W.T @ pi) / (W.T @ (W @ H + b[:, None])), EPS)
    piHt = pi @ H.T
    HHt = H @ H.T
    h1 = H.sum(axis=1)
    W = np.maximum(W * piHt / (W @ HHt + np.outer(b, h1)), EPS)
    Wh1 = W @ h1
    n = pi.shape[1]
    b = np.maximum(b * row_sums / (Wh1 + n * b), EPS)
    value = (sq_norm - 2.0 * np.sum(W * piHt) - 2.0 * (b @ row_sums)
             + np.sum((W.T @ W) * HHt) + 2.0 * (b @ Wh1) + n * (b @ b))
    return W, H, b, max(value, 0.0)


class _KLState:
    """Constants of the divergence: sum(pi log pi - pi) and the support of pi."""

    def __init__(self, pi):
        flat = pi.ravel()
        self.support = np.flatnonzero(flat > 0)
        p = flat[self.support]
        self.p = p
        self.const = float(np.sum(p * np.log(p)) - np.sum(flat))

    def value(self, WH, W, H):
        total = W.sum(axis=0) @ H.sum(axis=1)
        return self.const - float(self.p @ np.log(WH.ravel()[self.support])) + float(total)


def _sweep_kl(pi, W, H, WH, state):
    H = np.maximum(H * (W.T @ (pi / WH)) / W.sum(axis=0)[:, None], EPS)
    WH = W @ H
    W = np.maximum(W * ((pi / WH) @ H.T) / H.sum(axis=1)[None, :], EPS)
    WH = W @ H
    return W, H, WH, state.value(WH, W, H)


def _check_input(pi, K: int) -> np.ndarray:
    pi = np.asarray(pi, dtype=float)
    if pi.ndim != 2 or pi.shape[0] != pi.shape[1]:
        raise InputShapeError(f"similarity matrix must be square, got {pi.shape}")
    if not np.all(np.isfinite(pi)):
        raise ValueError("similarity matrix has non-finite entries")
    if np.any(pi < 0):
        raise ValueError("similarity matrix has negative entries")
    n = pi.shape[0]
    if not 1 <= K <= n:
        raise ValueError(f"rank K={K} must satisfy 1 <= K <= n={n}")
    return pi


def initialize(pi, K: int, seed: int):
    """Uniform (0, 1] factors scaled by sqrt(mean(pi) / K)."""
    n = pi.shape[0]
    rng = np.random.default_rng(seed)
    scale = np.sqrt(max(pi.mean(), EPS) / K)
    W = scale * (1.0 - rng.random((n, K)))
    H = scale * (1.0 - rng.random((K, n)))
    return W, H


def factorize(pi, K: int, variant="ls", config: NmfConfig | None = None,
              init: tuple[np.ndarray, np.ndarray] | None = None) -> NmfSolution:
    """Fit one model from one random start (or from `init`).

    Stops once the objective falls by less than ``rel_tolerance`` (relative)
    over ``window`` iterations, or after ``max_iters``. The best iterate seen
    is returned either way; ``converged`` tells which.
    """
    config = config or NmfConfig()
    variant = NmfVariant.parse(variant)
    pi = _check_input(pi, K)
    if init is None:
        W, H = initialize(pi, K, config.seed)
    else:
        W = np.maximum(np.array(init[0], dtype=float), EPS)
        H = np.maximum(np.array(init[1], dtype=float), EPS)
    b = np.maximum(0.1 * pi.mean(axis=1), EPS) if variant.name == "offset" else None

    sq_norm = float(np.sum(pi * pi))
    if variant.name == "kl":
        state = _KLState(pi)
        WH = W @ H
        start = state.value(WH, W, H)
    else:
        start = objective(pi, W, H, variant, b)
        S = smoothing_matrix(K, variant.theta) if variant.name == "ns" else None
        row_sums = pi.sum(axis=1)

    trace = [start]
    best = (start, W, H, b)
    converged = False
    it = 0
    while it < config.max_iters:
        if variant.name == "ls":
            W, H, value = _sweep_ls(pi, W, H, sq_norm)
        elif variant.name == "kl":
            W, H, WH, value = _sweep_kl(pi, W, H, WH, state)
        elif variant.name == "ns":
            W, H, value = _sweep_ns(pi, W, H, S, sq_norm)
        else:
            W, H, b, value = _sweep_offset(pi, W, H, b, sq_norm, row_sums)
        it += 1
        trace.append(value)
        if value <= best[0]:
            best = (value, W, H, b)
        if it >= config.window:
            before = trace[-1 - config.window]
            if before - value <= config.rel_tolerance * before:
                converged = True
                break

    if not converged:
        log.info("%s K=%d seed=%d did not converge in %d iterations",
                 variant.label, K, config.seed, config.max_iters)
    _, W, H, b = best
    return NmfSolution(W=W, H=H, variant=variant, objective_trace=np.array(trace),
                       iterations=it, seed=config.seed, converged=converged, offset=b)


def extract_hard(solution: NmfSolution) -> Partition:
    """Assign each observation to the row of H holding its column maximum.

    Ties go to the lowest row; unused rows simply disappear, and the result
    is relabeled by first appearance.
    """
    H = solution.H if isinstance(solution, NmfSolution) else np.asarray(solution)
    return Partition(np.argmax(H, axis=0)).canonical()


def extract_soft(solution: NmfSolution) -> np.ndarray:
    """n x K membership probabilities: the columns of H normalized to sum to one."""
    H = solution.H if isinstance(solution, NmfSolution) else np.asarray(solution)
    return (H / H.sum(axis=0, keepdims=True)).T


def multi_start(pi, K: int, variant="ls", starts: int = 10, config: NmfConfig | None = None,
                threads: int = 1) -> NmfSolution:
    """Best of `starts` runs seeded seed, seed+1, ... by final objective.

    Ties on the objective go to the smaller seed, so the result does not
    depend on `threads`.
    """
    if starts < 1:
        raise ValueError("starts must be >= 1")
    config = config or NmfConfig()
    variant = NmfVariant.parse(variant)
    pi = _check_input(pi, K)
    configs = [NmfConfig(config.max_iters, config.rel_tolerance, config.seed + s, config.window)
               for s in range(starts)]

    def run(cfg):
        return factorize(pi, K, variant, cfg)

    if threads > 1 and starts > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(run, configs))
    else:
        runs = [run(cfg) for cfg in configs]
    return min(runs, key=lambda s: (s.objective, s.seed))
