#!/usr/bin/env python3
"""Sweep the MM template over PU counts and problem sizes.

Prints a table of simulated wall time, throughput, and the speedup
relative to the single-PU run at each size.
"""

import argparse

from ea4rca.sim import CostModel, simulate
from ea4rca.workloads import Mm, TemplateParams, template_design


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--sizes", default="768,1536,3072,6144",
        help="comma-separated cube sides (default: 768,1536,3072,6144)",
    )
    parser.add_argument(
        "--pus", default="6,3,1", help="comma-separated PU counts (default: 6,3,1)"
    )
    args = parser.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]
    pu_counts = [int(p) for p in args.pus.split(",")]
    cm = CostModel()

    print(f"{'size':>6} {'pus':>4} {'time':>12} {'GOPS':>10} {'speedup':>8}")
    for side in sizes:
        w = Mm(side, side, side)
        base = None
        rows = []
        for n in sorted(pu_counts):
            design = template_design("mm", TemplateParams(pu_count=n))
            r = simulate(design, w, cost_model=cm)
            rows.append((n, r))
            if n == min(pu_counts):
                base = r.total_time_s
        for n, r in sorted(rows, reverse=True):
            speedup = base / r.total_time_s if base else float("nan")
            print(
                f"{side:>6} {n:>4} {r.total_time_s * 1e3:>10.3f}ms "
                f"{r.ops_per_sec / 1e9:>10.2f} {speedup:>8.2f}"
            )


if __name__ == "__main__":
    main()
