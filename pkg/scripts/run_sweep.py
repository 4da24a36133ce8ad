#!/usr/bin/env python3
"""Memory sweep over random heterogeneous chains; writes one CSV per chain."""
import argparse
import pathlib

from chainckpt.chain import random_chain
from chainckpt.experiments import STRATEGIES, sweep, sweep_csv


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--lengths", default="20,50,100")
    ap.add_argument("--seeds", type=int, default=3)
    ap.add_argument("--points", type=int, default=10)
    ap.add_argument("--slots", type=int, default=500)
    ap.add_argument("--out", default="sweeps")
    args = ap.parse_args()
    out = pathlib.Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for L in (int(x) for x in args.lengths.split(",")):
        for seed in range(args.seeds):
            spec = random_chain(L, seed)
            path = out / f"{spec.name}.csv"
            path.write_text(sweep_csv(sweep(spec, STRATEGIES, args.points, args.slots)))
            print(path)


if __name__ == "__main__":
    main()
