#!/usr/bin/env python3
"""Persistent vs. general optimum on the counterexample family, budget 8 slots."""
import argparse

from chainckpt.chain import discretize
from chainckpt.oracle import SearchConfig, brute_force_general, brute_force_persistent, counterexample_chain
from chainckpt.solver import solve_chain


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--max-n", type=int, default=5)
    args = ap.parse_args()
    print("n  dp  persistent  general")
    for n in range(1, args.max_n + 1):
        spec = counterexample_chain(n)
        chain = discretize(spec, 8, 8)
        _, dp = solve_chain(chain, 8)
        bf, _ = brute_force_persistent(chain, 8, max_length=spec.length)
        gen, _ = brute_force_general(chain, SearchConfig(8, max_recompute=spec.length, max_length=spec.length))
        print(f"{n:<2} {dp:>3g} {bf:>11g} {gen:>8g}")


if __name__ == "__main__":
    main()
