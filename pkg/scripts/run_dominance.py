#!/usr/bin/env python3
"""Throughput gain of the optimal schedule at each baseline's own peak memory."""
import argparse
import statistics

from chainckpt.chain import random_chain
from chainckpt.experiments import dominance


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--profiles", type=int, default=20)
    ap.add_argument("--slots", type=int, default=500)
    args = ap.parse_args()
    lengths = (20, 50, 100)
    print("profile            strategy      checks  mean_gain  min_gain  holds")
    for i in range(args.profiles):
        spec = random_chain(lengths[i % 3], seed=1000 + i, overhead_range=(0.0, 2.0))
        recs = dominance(spec, args.slots)
        for kind in ("periodic", "revolve"):
            sub = [r for r in recs if r.strategy.startswith(kind)]
            if not sub:
                continue
            gains = [r.improvement for r in sub]
            print(f"{spec.name:<18} {kind:<12} {len(sub):>7} {100 * statistics.mean(gains):>9.2f}% "
                  f"{100 * min(gains):>8.2f}%  {all(r.holds for r in sub)}")


if __name__ == "__main__":
    main()
