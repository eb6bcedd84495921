"""Gaussian-mixture simulation, a collapsed Gibbs sampler for cluster labels,
and the benchmark that scores every estimator against the truth."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from . import baselines, metrics
from .nmf import NmfConfig, NmfVariant
from .selection import fit_ranks, select
from .similarity import Partition, build_similarity

log = logging.getLogger(__name__)

CONFIG_NAMES = ("TTT", "TTF", "TFT", "TFF", "FTT", "FTF", "FFT", "FFF")
# letter prefixes used for the eight panels of the simulation table
PANEL = dict(zip(CONFIG_NAMES, "abcdefgh"))

_NON_SPHERICAL = (
    ((2.0, -0.8), (-0.8, 1.0)),
    ((1.0, 0.8), (0.8, 2.0)),
    ((1.0, 0.4), (0.4, 1.0)),
    ((2.0, 0.0), (0.0, 2.0)),
)
_QUADRANTS = ((1, 1), (-1, 1), (-1, -1), (1, -1))


@dataclass(frozen=True)
class MixtureConfig:
    separateness: bool
    balancedness: bool
    sphericity: bool

    @classmethod
    def from_name(cls, name: str) -> "MixtureConfig":
        key = name.upper().split("-")[-1]
        if len(key) != 3 or set(key) - {"T", "F"}:
            raise ValueError(f"config must be three T/F letters such as 'TTT', got {name!r}")
        return cls(*(ch == "T" for ch in key))

    @property
    def name(self) -> str:
        return "".join("T" if f else "F" for f in (self.separateness, self.balancedness, self.sphericity))

    @property
    def means(self) -> np.ndarray:
        r = 3.0 if self.separateness else 1.5
        return r * np.array(_QUADRANTS, dtype=float)

    @property
    def sizes(self) -> tuple[int, ...]:
        return (100, 100, 100, 100) if self.balancedness else (150, 50, 100, 30)

    @property
    def covariances(self) -> np.ndarray:
        if self.sphericity:
            return np.stack([np.eye(2)] * 4)
        return np.array(_NON_SPHERICAL)


def generate(config: MixtureConfig, seed: int) -> tuple[np.ndarray, Partition]:
    """Draw one data set; rows are grouped by component in order."""
    rng = np.random.default_rng(seed)
    blocks, labels = [], []
    for k, (mu, n_k, cov) in enumerate(zip(config.means, config.sizes, config.covariances)):
        L = np.linalg.cholesky(cov)
        z = rng.standard_normal((n_k, 2))
        blocks.append(mu + z @ L.T)
        labels.append(np.full(n_k, k))
    return np.vstack(blocks), Partition(np.concatenate(labels))


def soft_dataset(seed: int, centre: float = 4.0, spread: float = 0.5, height: float = 3.0,
                 minor_spread: float = 0.2) -> tuple[np.ndarray, Partition]:
    """Two major groups of 15 at (+-centre, 0) and two minor groups of 3 at
    (0, +-height), placed between the majors so their membership is ambiguous.

    Rows: 15 left, 15 right, 3 upper minor, 3 lower minor.
    """
    rng = np.random.default_rng(seed)
    groups = [((-centre, 0.0), 15, spread), ((centre, 0.0), 15, spread),
              ((0.0, height), 3, minor_spread), ((0.0, -height), 3, minor_spread)]
    X = np.vstack([mu + s * rng.standard_normal((m, 2)) for mu, m, s in groups])
    labels = np.repeat(np.arange(4), [m for _, m, _ in groups])
    return X, Partition(labels)


@dataclass(frozen=True)
class GibbsConfig:
    """Finite Gaussian mixture sampler settings.

    The mixture weights get a symmetric Dirichlet(alpha / components) prior,
    and each component a Normal-Inverse-Wishart prior centred on the data
    mean with scale matrix ``psi_factor`` times the empirical covariance.
    """

    components: int = 8
    burn_in: int = 500
    kept: int = 2000
    thin: int = 1
    seed: int = 0
    alpha: float = 1.0
    kappa0: float = 0.1
    nu0: float | None = None
    psi_factor: float = 2.0

    def __post_init__(self):
        if self.burn_in < 0 or self.kept < 1 or self.thin < 1:
            raise ValueError("need burn_in >= 0, kept >= 1 and thin >= 1")
        if self.components < 1:
            raise ValueError("components must be >= 1")


@numba.njit(cache=True)
def _log_student(x, stats_n, stats_sum, stats_sq, kappa0, nu0, psi0, d):
    kn = kappa0 + stats_n
    vn = nu0 + stats_n
    mun = stats_sum / kn
    psin = psi0 + stats_sq - kn * np.outer(mun, mun)
    df = vn - d + 1.0
    scale = psin * ((kn + 1.0) / (kn * df))
    chol = np.linalg.cholesky(scale)
    diff = x - mun
    # solve chol y = diff by forward substitution
    y = np.empty(d)
    for r in range(d):
        acc = diff[r]
        for c in range(r):
            acc -= chol[r, c] * y[c]
        y[r] = acc / chol[r, r]
    maha = 0.0
    logdet = 0.0
    for r in range(d):
        maha += y[r] * y[r]
        logdet += 2.0 * math.log(chol[r, r])
    return (math.lgamma(0.5 * (df + d)) - math.lgamma(0.5 * df)
            - 0.5 * d * math.log(df * math.pi) - 0.5 * logdet
            - 0.5 * (df + d) * math.log1p(maha / df))


@numba.njit(cache=True)
def _sweep(X, z, order, counts, sums, sqs, uniforms, alpha_k, kappa0, nu0, psi0):
    n, d = X.shape
    K = counts.shape[0]
    logp = np.empty(K)
    for t in range(n):
        i = order[t]
        x = X[i]
        k_old = z[i]
        # a negative label marks a point not yet allocated
        if k_old >= 0:
            counts[k_old] -= 1
            sums[k_old] -= x
            sqs[k_old] -= np.outer(x, x)
        for k in range(K):
            logp[k] = math.log(counts[k] + alpha_k) + _log_student(
                x, counts[k], sums[k], sqs[k], kappa0, nu0, psi0, d)
        top = logp.max()
        total = 0.0
        for k in range(K):
            logp[k] = math.exp(logp[k] - top)
            total += logp[k]
        target = uniforms[t] * total
        acc = 0.0
        k_new = K - 1
        for k in range(K):
            acc += logp[k]
            if target < acc:
                k_new = k
                break
        z[i] = k_new
        counts[k_new] += 1
        sums[k_new] += x
        sqs[k_new] += np.outer(x, x)


def gibbs_labels(data, gc: GibbsConfig | None = None) -> np.ndarray:
    """Collapsed Gibbs sampling of the allocation vector.

    Returns
    -------
    ndarray of shape (kept, n)
        Component labels of each retained sweep.
    """
    gc = gc or GibbsConfig()
    X = np.asarray(data, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, d = X.shape
    if n < gc.components:
        raise ValueError(f"need at least as many observations ({n}) as components ({gc.components})")
    if not np.all(np.isfinite(X)):
        raise ValueError("data contain non-finite values")

    # centre on the data mean so the prior mean is the origin
    X = np.ascontiguousarray(X - X.mean(axis=0))
    emp = np.atleast_2d(np.cov(X, rowvar=False))
    psi0 = gc.psi_factor * emp
    nu0 = float(d + 2) if gc.nu0 is None else float(gc.nu0)
    K = gc.components

    rng = np.random.default_rng(gc.seed)
    z = np.full(n, -1, dtype=np.int64)
    counts = np.zeros(K)
    sums = np.zeros((K, d))
    sqs = np.zeros((K, d, d))
    args = (gc.alpha / K, gc.kappa0, nu0, psi0)
    # sequential allocation in random order: each point is drawn from its
    # conditional given the points placed before it
    _sweep(X, z, rng.permutation(n), counts, sums, sqs, rng.random(n), *args)

    scan = np.arange(n)
    total = gc.burn_in + gc.kept * gc.thin
    out = np.empty((gc.kept, n), dtype=np.int64)
    kept = 0
    for sweep in range(total):
        _sweep(X, z, scan, counts, sums, sqs, rng.random(n), *args)
        if sweep >= gc.burn_in and (sweep - gc.burn_in) % gc.thin == gc.thin - 1:
            out[kept] = z
            kept += 1
    return out


METHODS = ("nmf-ls", "nmf-kl", "nmf-ns", "nmf-offset", "minbinder", "maxpear", "minvi", "medv")


@dataclass
class BenchmarkSettings:
    k_range: tuple[int, int] = (2, 12)
    starts: int = 10
    nmf: NmfConfig = field(default_factory=NmfConfig)
    theta: float = 0.5
    medv_cut: float = 0.99
    threads: int = 1


def _parse_method(method: str) -> tuple[str, str | None]:
    name, _, loss = method.lower().partition(":")
    if name.startswith("nmf-"):
        return name, loss or "binder"
    if name not in ("minbinder", "maxpear", "minvi", "medv", "oracle", "truth"):
        raise ValueError(f"unknown method {method!r}")
    return name, loss or None


def estimate(pi, methods, settings: BenchmarkSettings | None = None, truth: Partition | None = None) -> dict[str, Partition]:
    """Partition chosen by each method on one similarity matrix.

    NMF methods are written ``nmf-<variant>[:<loss>]`` (loss defaults to
    binder); methods sharing a variant share the same fits.
    """
    settings = settings or BenchmarkSettings()
    n = pi.shape[0]
    k_range = (min(settings.k_range[0], n), min(settings.k_range[1], n))
    fits = {}
    out = {}
    for method in methods:
        name, loss = _parse_method(method)
        if name.startswith("nmf-"):
            variant = NmfVariant.parse(name, settings.theta)
            if variant not in fits:
                fits[variant] = fit_ranks(pi, k_range, variant, settings.starts, settings.nmf,
                                          threads=settings.threads)
            out[method] = select(pi, penalty=loss, fits=fits[variant]).chosen_partition
        elif name == "minbinder":
            out[method] = baselines.min_binder(pi)[0]
        elif name == "maxpear":
            out[method] = baselines.max_pear(pi)[0]
        elif name == "minvi":
            out[method] = baselines.min_vi(pi)[0]
        elif name == "medv":
            out[method] = baselines.medvedovic(pi, settings.medv_cut)
        elif name == "oracle":
            out[method] = baselines.oracle(pi, loss or "binder")[0]
        else:
            if truth is None:
                raise ValueError("the 'truth' method needs the true partition")
            out[method] = truth
    return out


@dataclass
class BenchmarkResult:
    rows: list[dict]

    def summary(self) -> list[dict]:
        """Mean and standard error of each index per (config, method)."""
        groups: dict[tuple[str, str], list[dict]] = {}
        for r in self.rows:
            groups.setdefault((r["config"], r["method"]), []).append(r)
        out = []
        for (cfg, method), rs in groups.items():
            entry = {"config": cfg, "method": method, "reps": len(rs)}
            for key in ("rand", "adjusted_rand", "vi"):
                vals = np.array([r[key] for r in rs])
                se = vals.std(ddof=1) / math.sqrt(len(vals)) if len(vals) > 1 else 0.0
                entry[key] = float(vals.mean())
                entry[f"{key}_se"] = float(se)
            out.append(entry)
        return out

    def k_distribution(self, cap: int = 8) -> list[dict]:
        """Counts of the estimated number of clusters, values above `cap` shown as `cap`."""
        counts: dict[tuple[str, str, int], int] = {}
        for r in self.rows:
            key = (r["config"], r["method"], min(r["n_clusters"], cap))
            counts[key] = counts.get(key, 0) + 1
        return [{"config": c, "method": m, "k": k, "count": v} for (c, m, k), v in counts.items()]

    def chosen_k(self, config: str, method: str) -> list[int]:
        return [r["n_clusters"] for r in self.rows if r["config"] == config and r["method"] == method]


def rep_seeds(seed: int, config_index: int, rep: int) -> tuple[int, int]:
    """Independent data and sampler seeds for one replication."""
    data_seed, chain_seed = np.random.SeedSequence([seed, config_index, rep]).generate_state(2)
    return int(data_seed), int(chain_seed)


def run_benchmark(configs, reps: int, methods=METHODS, gc: GibbsConfig | None = None, seed: int = 0,
                  settings: BenchmarkSettings | None = None, progress=None) -> BenchmarkResult:
    """generate -> Gibbs -> similarity -> every method -> indices against the truth."""
    if reps < 1:
        raise ValueError("reps must be >= 1")
    gc = gc or GibbsConfig()
    settings = settings or BenchmarkSettings()
    configs = [MixtureConfig.from_name(c) if isinstance(c, str) else c for c in configs]
    rows = []
    for cfg in configs:
        # seeds depend on the configuration's name, not its position in `configs`
        ci = CONFIG_NAMES.index(cfg.name)
        for rep in range(reps):
            data_seed, chain_seed = rep_seeds(seed, ci, rep)
            data, truth = generate(cfg, data_seed)
            chain = gibbs_labels(data, GibbsConfig(**{**gc.__dict__, "seed": chain_seed}))
            pi = build_similarity(chain)
            estimates = estimate(pi, methods, settings, truth)
            for method, part in estimates.items():
                rows.append({"config": cfg.name, "rep": rep, "method": method,
                             "n_clusters": part.K, **metrics.compare(part, truth)})
            if progress is not None:
                progress(cfg.name, rep)
            log.info("config %s rep %d done", cfg.name, rep)
    return BenchmarkResult(rows)
