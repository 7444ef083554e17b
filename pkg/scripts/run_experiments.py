#!/usr/bin/env python3
"""Run bundled experiment configs through the CLI, one output directory each.

    python3 scripts/run_experiments.py                      # every bundled config
    python3 scripts/run_experiments.py bernoulli_regret --seeds 10
    python3 scripts/run_experiments.py --quick              # small sizes, for a smoke run
"""
import argparse
import os
import sys
import time

from capbayes.cli import bundled_configs, main
from capbayes.config import load_config
from capbayes.cli import resolve_config

QUICK = {
    "marginal-sweep": ["--set", "z_samples=5000", "--set", "ts_samples=20000"],
    "rd-curve": ["--set", "z_samples=300"],
    "bandit-regret": ["--seeds", "5", "--set", "horizon=300"],
    "bandit-rate": ["--seeds", "5", "--set", "horizon=300"],
    "mdp-regret": ["--seeds", "3", "--set", "episodes=50"],
}


def main_(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("names", nargs="*", help="bundled config names (default: all)")
    ap.add_argument("--out", default="results", help="parent directory for outputs")
    ap.add_argument("--seeds", type=int, help="override the seed count")
    ap.add_argument("--quick", action="store_true", help="shrink every experiment")
    args = ap.parse_args(argv)

    names = args.names or bundled_configs()
    status = 0
    for name in names:
        kind = load_config(resolve_config(name)).kind
        cli_args = ["run", "--config", name, "--out", os.path.join(args.out, name)]
        if args.quick:
            cli_args += QUICK[kind]
        if args.seeds:
            cli_args += ["--seeds", str(args.seeds)]
        t0 = time.perf_counter()
        code = main(cli_args)
        print(f"{name}: exit {code} in {time.perf_counter() - t0:.1f}s", flush=True)
        status = max(status, code)
    return status


if __name__ == "__main__":
    sys.exit(main_())
