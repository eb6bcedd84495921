"""Command-line entry point.

Exit codes: 0 success, 2 input or validation error, 3 output written but
some NMF fit hit the iteration cap before converging.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import baselines, io, metrics, penalties
from .nmf import NmfConfig, NmfVariant, extract_hard, extract_soft, factorize, multi_start
from .selection import penalty_curve, select
from .similarity import InputShapeError, Partition, build_similarity, validate_similarity
from .simulate import (CONFIG_NAMES, METHODS, PANEL, BenchmarkSettings, GibbsConfig,
                       run_benchmark)

log = logging.getLogger("nmfpart")

EXIT_OK, EXIT_INPUT, EXIT_NOT_CONVERGED = 0, 2, 3


def _emit(obj, out):
    if out is None:
        json.dump(obj, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    else:
        io.write_json(out, obj)


def _manifest_path(out) -> Path:
    out = Path(out)
    return out.with_name(out.name + ".manifest.json") if out.suffix else out / "manifest.json"


def _write_manifest(args, out, inputs):
    if out is None:
        return
    flags = {k: v for k, v in vars(args).items() if k not in ("func",)}
    io.write_json(_manifest_path(out), io.manifest(args.command, flags, inputs, getattr(args, "seed", None)))


def _load_psm(args):
    return validate_similarity(io.read_matrix(args.psm, header=args.header), args.tolerance)


def _nmf_config(args) -> NmfConfig:
    return NmfConfig(max_iters=args.max_iters, rel_tolerance=args.tol, seed=args.seed)


def _labels_out(part: Partition) -> list[int]:
    return [int(v) + 1 for v in part.canonical_labels]


def cmd_psm(args) -> int:
    samples = io.read_labels(args.labels, header=args.header)
    pi = build_similarity(samples)
    if args.out is None:
        np.savetxt(sys.stdout, pi, delimiter=",", fmt=io.FLOAT_FORMAT)
    else:
        io.write_matrix(args.out, pi)
        _write_manifest(args, args.out, [args.labels])
    return EXIT_OK


def cmd_nmf(args) -> int:
    pi = _load_psm(args)
    variant = NmfVariant.parse(args.variant, args.theta)
    sol = multi_start(pi, args.rank, variant, args.starts, _nmf_config(args), threads=args.threads)
    part = extract_hard(sol)
    result = {
        "variant": variant.name,
        "theta": variant.theta,
        "rank": args.rank,
        "labels": _labels_out(part),
        "soft_matrix": extract_soft(sol).tolist(),
        "objective": sol.objective,
        "iterations": sol.iterations,
        "converged": sol.converged,
        "seed": sol.seed,
    }
    if sol.offset is not None:
        result["offset"] = sol.offset.tolist()
    _emit(result, args.out)
    _write_manifest(args, args.out, [args.psm])
    return EXIT_OK if sol.converged else EXIT_NOT_CONVERGED


def cmd_report(report, out_dir) -> dict[str, Path]:
    """Penalty curve, hard labels, soft matrix and the full report under `out_dir`."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    paths = {
        "curve": io.write_table(out_dir / "penalty_curve.csv",
                                [{"K": k, "penalty": v} for k, v in penalty_curve(report)]),
        "labels": io.write_labels(out_dir / "labels.csv", _labels_out(report.chosen_partition)),
        "soft": io.write_matrix(out_dir / "soft.csv", report.chosen_soft),
        "report": io.write_json(out_dir / "report.json", report.to_dict()),
    }
    for r in report.per_k:
        if r.soft is not None:
            paths[f"soft_K{r.K}"] = io.write_matrix(out_dir / f"soft_K{r.K}.csv", r.soft)
    return paths


def cmd_select(args) -> int:
    pi = _load_psm(args)
    variant = NmfVariant.parse(args.variant, args.theta)
    kmax = min(args.kmax, pi.shape[0])
    report = select(pi, (args.kmin, kmax), variant, args.loss, args.starts, _nmf_config(args),
                    keep_soft=args.keep_soft, threads=args.threads, base=args.log_base)
    _emit(report.to_dict(), args.out)
    _write_manifest(args, args.out, [args.psm])
    if args.curve is not None:
        io.write_table(args.curve, [{"K": k, "penalty": v} for k, v in penalty_curve(report)])
    if args.report_dir is not None:
        cmd_report(report, args.report_dir)
        _write_manifest(args, Path(args.report_dir), [args.psm])
    return EXIT_OK if report.converged else EXIT_NOT_CONVERGED


def cmd_baseline(args) -> int:
    pi = _load_psm(args)
    method = args.method
    if method == "medv":
        part = baselines.medvedovic(pi, args.cut)
        value = penalties.evaluate(args.loss, pi, part, base=args.log_base)
    elif method == "oracle":
        part, value = baselines.oracle(pi, args.loss, base=args.log_base)
    else:
        loss = {"minbinder": "binder", "maxpear": "pear", "minvi": "vi"}[method]
        part, value = baselines.best_in_set(pi, baselines.hclust_candidates(pi, args.linkage), loss,
                                            base=args.log_base)
    _emit({"method": method, "labels": _labels_out(part), "n_clusters": part.K,
           "penalty": value, "loss": args.loss if method in ("medv", "oracle") else loss},
          args.out)
    _write_manifest(args, args.out, [args.psm])
    return EXIT_OK


def cmd_evaluate(args) -> int:
    est = io.read_partition(args.estimate)
    truth = io.read_partition(args.truth)
    _emit(metrics.compare(est, truth, base=args.log_base), args.out)
    _write_manifest(args, args.out, [args.estimate, args.truth])
    return EXIT_OK


def table3_rows(summary: list[dict], configs: list[str], methods: list[str]) -> list[dict]:
    """One row per method, (Rand, AR, VI) mean and standard error per configuration."""
    by = {(s["config"], s["method"]): s for s in summary}
    rows = []
    for m in methods:
        row = {"method": m}
        for c in configs:
            s = by[(c, m)]
            tag = f"{PANEL[c]}-{c}"
            for key, short in (("rand", "Rand"), ("adjusted_rand", "AR"), ("vi", "VI")):
                row[f"{tag} {short}"] = s[key]
                row[f"{tag} {short} se"] = s[f"{key}_se"]
        rows.append(row)
    return rows


def cmd_simulate(args) -> int:
    configs = args.config or list(CONFIG_NAMES)
    methods = args.methods.split(",") if args.methods else list(METHODS)
    gc = GibbsConfig(components=args.components, burn_in=args.burnin, kept=args.kept,
                     thin=args.thin)
    settings = BenchmarkSettings(k_range=(args.kmin, args.kmax), starts=args.starts,
                                 nmf=NmfConfig(max_iters=args.max_iters, rel_tolerance=args.tol),
                                 theta=args.theta, threads=args.threads)
    result = run_benchmark(configs, args.reps, methods, gc, args.seed, settings,
                           progress=lambda c, r: log.info("%s replication %d finished", c, r))
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    io.write_table(out / "replications.csv", result.rows)
    io.write_table(out / "summary.csv", result.summary())
    io.write_table(out / "table.csv", table3_rows(result.summary(), [c.upper() for c in configs], methods))
    io.write_table(out / "k_distribution.csv", result.k_distribution())
    _write_manifest(args, out, [])
    return EXIT_OK


def random_similarity(n: int, seed: int) -> np.ndarray:
    """Unstructured symmetric matrix with uniform off-diagonal entries and unit diagonal."""
    rng = np.random.default_rng(seed)
    A = rng.random((n, n))
    A = np.triu(A, 1)
    A = A + A.T
    np.fill_diagonal(A, 1.0)
    return A


def timing_table(sizes, ranks, variant="ls", iters: int = 50, repeats: int = 3, seed: int = 0,
                 theta: float | None = None) -> list[dict]:
    """Seconds per multiplicative-update iteration on random similarity matrices.

    Each cell runs exactly `iters` iterations; the fastest of `repeats` runs
    is reported.
    """
    variant = NmfVariant.parse(variant, theta)
    # a negative tolerance never triggers the stopping rule
    cfg = NmfConfig(max_iters=iters, rel_tolerance=-np.inf, seed=seed)
    rows = []
    for n in sizes:
        pi = random_similarity(n, seed)
        for K in ranks:
            best = np.inf
            for _ in range(repeats):
                t0 = time.perf_counter()
                sol = factorize(pi, K, variant, cfg)
                best = min(best, time.perf_counter() - t0)
            rows.append({"variant": variant.name, "n": n, "K": K, "iterations": sol.iterations,
                         "seconds": best, "seconds_per_iter": best / sol.iterations})
    return rows


def cmd_timing(args) -> int:
    rows = timing_table(args.sizes, args.ranks, args.variant, args.iters, args.repeats, args.seed,
                        args.theta)
    if args.out is None:
        io.write_table("/dev/stdout", rows)
    else:
        io.write_table(args.out, rows)
        _write_manifest(args, args.out, [])
    return EXIT_OK


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nmfpart", description=__doc__.splitlines()[0])
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1,
                   help="worker threads for random starts (results do not depend on it)")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def psm_input(sp):
        sp.add_argument("--psm", required=True, type=Path, help="n x n similarity CSV")
        sp.add_argument("--header", action="store_true", help="skip the first CSV row")
        sp.add_argument("--tolerance", type=float, default=1e-9,
                        help="repairable asymmetry / diagonal / range deviation")

    def nmf_flags(sp):
        sp.add_argument("--variant", choices=["ls", "kl", "ns", "offset"], default="ls")
        sp.add_argument("--theta", type=float, default=None, help="smoothing for --variant ns (default 0.5)")
        sp.add_argument("--starts", type=int, default=10)
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--max-iters", type=int, default=2000)
        sp.add_argument("--tol", type=float, default=1e-6)

    def log_base(sp):
        sp.add_argument("--log-base", type=float, default=None, help="VI logarithm base (default e)")

    sp = sub.add_parser("psm", help="posterior similarity matrix from label draws")
    sp.add_argument("--labels", required=True, type=Path, help="CSV, one draw per row")
    sp.add_argument("--header", action="store_true")
    sp.add_argument("--out", type=Path)
    sp.set_defaults(func=cmd_psm)

    sp = sub.add_parser("nmf", help="factorize at one rank")
    psm_input(sp)
    nmf_flags(sp)
    sp.add_argument("--rank", type=int, required=True)
    sp.add_argument("--out", type=Path)
    sp.set_defaults(func=cmd_nmf)

    sp = sub.add_parser("select", help="choose rank and partition under a penalty")
    psm_input(sp)
    nmf_flags(sp)
    log_base(sp)
    sp.add_argument("--loss", choices=["binder", "dahl", "pear", "vi"], default="binder")
    sp.add_argument("--kmin", type=int, default=2)
    sp.add_argument("--kmax", type=int, default=12)
    sp.add_argument("--keep-soft", action="store_true", help="also write every rank's soft matrix")
    sp.add_argument("--curve", type=Path, help="penalty curve CSV")
    sp.add_argument("--report-dir", type=Path, help="write curve, labels, soft matrix and report here")
    sp.add_argument("--out", type=Path)
    sp.set_defaults(func=cmd_select)

    sp = sub.add_parser("baseline", help="dendrogram, Medvedovic or exhaustive estimators")
    psm_input(sp)
    log_base(sp)
    sp.add_argument("--method", choices=["minbinder", "maxpear", "minvi", "medv", "oracle"], required=True)
    sp.add_argument("--cut", type=float, default=0.99)
    sp.add_argument("--loss", choices=["binder", "dahl", "pear", "vi"], default="binder")
    sp.add_argument("--linkage", choices=list(baselines.LINKAGES), default="average")
    sp.add_argument("--out", type=Path)
    sp.set_defaults(func=cmd_baseline)

    sp = sub.add_parser("evaluate", help="Rand, adjusted Rand and VI against a reference")
    sp.add_argument("--estimate", required=True, type=Path)
    sp.add_argument("--truth", required=True, type=Path)
    log_base(sp)
    sp.add_argument("--out", type=Path)
    sp.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("simulate", help="Gaussian-mixture benchmark")
    sp.add_argument("--config", action="append", choices=list(CONFIG_NAMES),
                    help="repeatable; default all eight")
    sp.add_argument("--reps", type=int, default=10)
    sp.add_argument("--burnin", type=int, default=500)
    sp.add_argument("--kept", type=int, default=2000)
    sp.add_argument("--thin", type=int, default=1)
    sp.add_argument("--components", type=int, default=8)
    sp.add_argument("--methods", default=None,
                    help="comma list, e.g. nmf-ls,nmf-kl:vi,minbinder,maxpear,minvi,medv")
    sp.add_argument("--kmin", type=int, default=2)
    sp.add_argument("--kmax", type=int, default=12)
    sp.add_argument("--starts", type=int, default=10)
    sp.add_argument("--theta", type=float, default=0.5)
    sp.add_argument("--max-iters", type=int, default=2000)
    sp.add_argument("--tol", type=float, default=1e-6)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out-dir", type=Path, required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("timing", help="per-iteration NMF cost on random similarity matrices")
    sp.add_argument("--sizes", type=_int_list, default=[200, 400, 800])
    sp.add_argument("--ranks", type=_int_list, default=[3, 6, 9, 12])
    sp.add_argument("--variant", choices=["ls", "kl", "ns", "offset"], default="ls")
    sp.add_argument("--theta", type=float, default=None)
    sp.add_argument("--iters", type=int, default=50)
    sp.add_argument("--repeats", type=int, default=3)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--out", type=Path)
    sp.set_defaults(func=cmd_timing)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (InputShapeError, ValueError, FileNotFoundError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
