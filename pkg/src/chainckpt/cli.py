"""Command-line front end.

Exit codes: 0 success, 1 input error, 2 infeasible budget, 3 invalid schedule.
"""
from __future__ import annotations

import argparse
import re
import sys

from .chain import ProfileError, discretize, emit_profile, homogeneous_chain, random_chain, read_profile
from .experiments import STRATEGIES, compare, sweep, sweep_csv
from .oracle import InstanceTooLarge, SearchConfig, brute_force_general, brute_force_persistent, counterexample_chain
from .simulator import ScheduleParseError, format_schedule, parse_schedule, simulate
from .solver import Infeasible, solve_chain

EXIT_OK, EXIT_INPUT, EXIT_INFEASIBLE, EXIT_INVALID = 0, 1, 2, 3

_UNITS = {"": 1, "b": 1, "kib": 2 ** 10, "mib": 2 ** 20, "gib": 2 ** 30}


def parse_bytes(text: str) -> float:
    """``"512"``, ``"1.5GiB"``, ``"64 KiB"`` -> bytes."""
    m = re.fullmatch(r"\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*([A-Za-z]*)\s*", text)
    if not m or m.group(2).lower() not in _UNITS:
        raise argparse.ArgumentTypeError(f"invalid memory size {text!r} (use bytes or KiB/MiB/GiB)")
    return float(m.group(1)) * _UNITS[m.group(2).lower()]


def _write(args, text: str) -> None:
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _budget_chain(args):
    spec = read_profile(args.profile)
    if args.memory <= 0:
        return spec, None
    return spec, discretize(spec, args.memory, args.slots)


def cmd_solve(args) -> int:
    spec, chain = _budget_chain(args)
    if chain is None:
        print("infeasible: memory must be positive", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        sched, cost = solve_chain(chain, args.slots, restricted=args.revolve)
    except Infeasible as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    rep = simulate(sched, chain, args.slots)
    text = format_schedule(sched)
    text += f"# predicted_cost: {cost!r}\n# simulated_makespan: {rep.makespan!r}\n"
    text += f"# peak_slots: {rep.peak_slots}\n# peak_bytes: {rep.peak_bytes!r}\n# valid: {str(rep.valid).lower()}\n"
    _write(args, text)
    return EXIT_OK


def cmd_simulate(args) -> int:
    spec = read_profile(args.profile)
    with open(args.schedule, encoding="utf-8") as fh:
        sched = parse_schedule(fh.read())
    if args.memory > 0:
        chain = discretize(spec, args.memory, args.slots)
        budget = args.slots
    else:
        # no memory at all: keep the byte-scale slots so the report stays meaningful
        chain = discretize(spec, 1, 1)
        budget = 0
    rep = simulate(sched, chain, budget)
    _write(args, rep.render())
    return EXIT_OK if rep.valid else EXIT_INVALID


def cmd_sweep(args) -> int:
    spec = read_profile(args.profile)
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    try:
        points = sweep(spec, strategies, args.points, args.slots)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    _write(args, sweep_csv(points))
    return EXIT_OK


def cmd_compare(args) -> int:
    spec = read_profile(args.profile)
    if args.memory <= 0:
        print("infeasible: memory must be positive", file=sys.stderr)
        return EXIT_INFEASIBLE
    result = compare(spec, args.memory, args.slots)
    _write(args, result.render())
    return EXIT_OK if result.any_feasible else EXIT_INFEASIBLE


def cmd_oracle(args) -> int:
    spec, chain = _budget_chain(args)
    if chain is None:
        print("infeasible: memory must be positive", file=sys.stderr)
        return EXIT_INFEASIBLE
    try:
        if args.general:
            cost, sched = brute_force_general(chain, SearchConfig(args.slots, args.max_recompute,
                                                                  max_length=args.max_length))
        else:
            cost, sched = brute_force_persistent(chain, args.slots, max_length=args.max_length)
    except InstanceTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if sched is None:
        print("infeasible", file=sys.stderr)
        return EXIT_INFEASIBLE
    _write(args, "".join(f"{op}\n" for op in sched) + f"# cost: {cost!r}\n")
    return EXIT_OK


def cmd_gen(args) -> int:
    if args.kind == "homogeneous":
        spec = homogeneous_chain(args.length, args.time, args.size)
    elif args.kind == "random-heterogeneous":
        spec = random_chain(args.length, args.seed, time_range=(args.time_min, args.time_max),
                            size_range=(args.size_min, args.size_max))
    else:
        spec = counterexample_chain(args.n)
    _write(args, emit_profile(spec))
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    # usage errors are input errors; exit code 2 is reserved for infeasible budgets
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="chainckpt", description="Checkpointing schedules for back-propagation chains.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, memory=True):
        sp.add_argument("profile", help="chain profile (JSON)")
        if memory:
            sp.add_argument("--memory", "-M", type=parse_bytes, required=True, help="memory budget, e.g. 8GiB")
        sp.add_argument("--slots", "-S", type=int, default=500, help="memory slots (default 500)")
        sp.add_argument("--output", "-o", help="write to file instead of stdout")

    sp = sub.add_parser("solve", help="optimal persistent schedule for a budget")
    common(sp)
    sp.add_argument("--revolve", action="store_true", help="use the activation-only baseline instead")
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("simulate", help="check a schedule file against a profile")
    sp.add_argument("profile")
    sp.add_argument("schedule", help="schedule file, one operation per line")
    sp.add_argument("--memory", "-M", type=parse_bytes, required=True)
    sp.add_argument("--slots", "-S", type=int, default=500)
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("sweep", help="CSV of every strategy over a range of budgets")
    common(sp, memory=False)
    sp.add_argument("--strategies", default=",".join(STRATEGIES))
    sp.add_argument("--points", type=int, default=10)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("compare", help="all strategies at one budget")
    common(sp)
    sp.set_defaults(func=cmd_compare)

    sp = sub.add_parser("oracle", help="exhaustive search on a tiny chain (debugging)")
    common(sp)
    sp.add_argument("--general", action="store_true", help="allow evictions (non-persistent)")
    sp.add_argument("--max-recompute", type=int, default=3)
    sp.add_argument("--max-length", type=int, default=5)
    sp.set_defaults(func=cmd_oracle)

    sp = sub.add_parser("gen", help="write a synthetic profile")
    sp.add_argument("kind", choices=["homogeneous", "random-heterogeneous", "counterexample"])
    sp.add_argument("--length", "-L", type=int, default=10)
    sp.add_argument("--time", type=float, default=1.0)
    sp.add_argument("--size", type=float, default=1.0)
    sp.add_argument("--time-min", type=float, default=1.0)
    sp.add_argument("--time-max", type=float, default=10.0)
    sp.add_argument("--size-min", type=float, default=1.0)
    sp.add_argument("--size-max", type=float, default=10.0)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("-n", type=int, default=5, help="counterexample size")
    sp.add_argument("--output", "-o")
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "slots", 1) < 1:
        print("error: --slots must be >= 1", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except (OSError, ProfileError, ScheduleParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
