#!/usr/bin/env python3
"""Print a compact summary of experiment outputs found under a results directory.

For regret/rate runs: final mean +- stderr per agent, and the per-step regret
over the last tenth relative to the first tenth. For curves and sweeps: a few
rows of the CSV.
"""
import csv
import sys
from collections import defaultdict
from pathlib import Path


def read_agg(path):
    series = defaultdict(list)
    with open(path) as fh:
        for row in csv.DictReader(fh):
            series[row["agent"]].append((float(row["mean"]), float(row["stderr"])))
    return series


def regret_table(path):
    print(f"  {'agent':<22} {'final':>10} {'stderr':>8} {'late/early':>11}")
    for agent, rows in read_agg(path).items():
        means = [m for m, _ in rows]
        steps = [b - a for a, b in zip([0.0] + means[:-1], means)]
        n = max(1, len(steps) // 10)
        early = sum(steps[:n]) / n
        late = sum(steps[-n:]) / n
        ratio = late / early if early > 0 else float("nan")
        print(f"  {agent:<22} {means[-1]:>10.3f} {rows[-1][1]:>8.3f} {ratio:>11.3f}")


def rate_table(path):
    print(f"  {'agent':<22} {'rate t=1':>9} {'rate mid':>9} {'rate end':>9}")
    for agent, rows in read_agg(path).items():
        m = [x for x, _ in rows]
        print(f"  {agent:<22} {m[0]:>9.4f} {m[len(m) // 2]:>9.4f} {m[-1]:>9.4f}")


def head(path, n=6):
    with open(path) as fh:
        for i, line in enumerate(fh):
            if i > n:
                print("  ...")
                break
            print("  " + line.rstrip())


def main(root="results"):
    root = Path(root)
    for d in sorted(p for p in root.iterdir() if p.is_dir()):
        print(f"== {d.name}")
        if (d / "regret_agg.csv").exists():
            regret_table(d / "regret_agg.csv")
        if (d / "rate_agg.csv").exists():
            rate_table(d / "rate_agg.csv")
        for name in ("rd_curve.csv", "marginal.csv"):
            if (d / name).exists():
                head(d / name)


if __name__ == "__main__":
    main(*sys.argv[1:])
