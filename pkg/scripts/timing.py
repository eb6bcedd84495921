"""Per-iteration NMF cost on random similarity matrices, with the ratios
between successive sizes and ranks.

    python scripts/timing.py --sizes 200 400 800 --ranks 3 6 12 --variant ls
"""

import argparse
import sys
from pathlib import Path

from nmfpart.cli import timing_table
from nmfpart.io import write_table


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("--sizes", type=int, nargs="+", default=[200, 400, 800])
    p.add_argument("--ranks", type=int, nargs="+", default=[3, 6, 12])
    p.add_argument("--variant", default="ls", choices=["ls", "kl", "ns", "offset"])
    p.add_argument("--iters", type=int, default=40)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out", type=Path)
    args = p.parse_args(argv)

    rows = timing_table(args.sizes, args.ranks, args.variant, args.iters, args.repeats)
    cell = {(r["n"], r["K"]): r["seconds_per_iter"] for r in rows}
    for K in args.ranks:
        line = "  ".join(f"n={n}: {1e3 * cell[n, K]:.3f} ms" for n in args.sizes)
        ratios = [cell[b, K] / cell[a, K] for a, b in zip(args.sizes, args.sizes[1:])]
        print(f"K={K:<3} {line}   n ratios {', '.join(f'{r:.2f}' for r in ratios)}")
    for n in args.sizes:
        ratios = [cell[n, b] / cell[n, a] for a, b in zip(args.ranks, args.ranks[1:])]
        print(f"n={n:<4} K ratios {', '.join(f'{r:.2f}' for r in ratios)}")
    if args.out:
        write_table(args.out, rows)
    return 0


if __name__ == "__main__":
    sys.exit(main())
