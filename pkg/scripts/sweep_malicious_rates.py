#!/usr/bin/env python3
"""Fairness under increasing adversarial share: sweep malicious_percent over
{0.10, 0.15, 0.20, 0.25, 0.30} across several seeds and report the final
Gini of cumulative rewards plus the honest/malicious reward ratio.

Usage:
    python scripts/sweep_malicious_rates.py [--seeds 0:5] [--out DIR]

With --out, the long-format per-round metrics CSV is exported via the CLI
sweep subcommand (one row per grid point, seed, and round).
"""

import argparse
import dataclasses
import statistics

from flmech.cli import main as cli_main
from flmech.core import SystemConfig
from flmech.engine import run_simulation

PERCENTS = [0.10, 0.15, 0.20, 0.25, 0.30]


def parse_seeds(raw):
    if ":" in raw:
        lo, _, hi = raw.partition(":")
        return list(range(int(lo), int(hi)))
    return [int(tok) for tok in raw.split(",")]


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--seeds", default="0:5")
    parser.add_argument("--out", help="also export the long-format CSV here")
    args = parser.parse_args()
    seeds = parse_seeds(args.seeds)

    print(f"{'m':>5} {'gini(total)':>12} {'honest gini':>12} {'reward ratio':>13}")
    for m in PERCENTS:
        cfg = dataclasses.replace(SystemConfig(), malicious_percent=m)
        ginis, honest_ginis, ratios = [], [], []
        for seed in seeds:
            s = run_simulation(cfg, seed=seed).summary()
            ginis.append(s["cumulative_reward_gini"])
            honest_ginis.append(s["honest_reward_gini"])
            ratios.append(s["honest_total_reward"] / max(s["malicious_total_reward"], 1e-12))
        print(f"{m:5.2f} {statistics.mean(ginis):12.3f} "
              f"{statistics.mean(honest_ginis):12.3f} {statistics.mean(ratios):13.2f}")

    if args.out:
        grid = ",".join(str(m) for m in PERCENTS)
        cli_main(["sweep", "--grid", f"malicious_percent={grid}",
                  "--seeds", args.seeds, "--out", args.out])


if __name__ == "__main__":
    main()
