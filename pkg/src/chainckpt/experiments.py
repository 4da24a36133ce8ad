"""Strategy evaluation: memory sweeps, single-budget comparisons, dominance checks."""
from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .baselines import (equal_segments, periodic_schedule, periodic_segment_counts,
                        revolve_schedule, store_all_schedule)
from .chain import ChainSpec, DiscreteChain, discretize
from .simulator import simulate
from .solver import Infeasible, reconstruct, solve, solve_chain, top_budget

STRATEGIES = ("optimal", "revolve", "periodic", "store-all")
CSV_COLUMNS = ["strategy", "budget_bytes", "feasible", "makespan_s", "peak_bytes", "throughput"]


@dataclass(frozen=True)
class SweepPoint:
    budget_bytes: float
    strategy: str
    feasible: bool
    makespan: float  # nan when infeasible
    peak_bytes: float
    throughput: float

    def row(self) -> list[str]:
        if not self.feasible:
            return [self.strategy, repr(self.budget_bytes), "false", "", "", ""]
        return [self.strategy, repr(self.budget_bytes), "true", repr(self.makespan),
                repr(self.peak_bytes), repr(self.throughput)]


def _throughput(spec: ChainSpec, makespan: float) -> float:
    return spec.batch_size / makespan if makespan > 0 else math.inf


def _point(spec: ChainSpec, strategy: str, budget: float, makespan: float | None, peak: float) -> SweepPoint:
    if makespan is None:
        return SweepPoint(budget, strategy, False, math.nan, math.nan, math.nan)
    return SweepPoint(budget, strategy, True, makespan, peak, _throughput(spec, makespan))


def store_all_budget(spec: ChainSpec, slots: int = 500, max_iter: int = 100) -> float:
    """Smallest budget (in bytes) found at which store-all fits once sizes are rounded to slots."""
    sched = store_all_schedule(spec)
    # byte peak at 1/1024-byte resolution (exact for integer sizes)
    fine = discretize(spec, 1, 1024)
    budget = Fraction(simulate(sched, fine, 0).peak_slots) * fine.slot_size
    if budget == 0:
        return 1.0
    for _ in range(max_iter):
        chain = discretize(spec, budget, slots)
        peak = simulate(sched, chain, slots).peak_slots
        if peak <= slots:
            return float(budget)
        budget = max(budget * peak / slots, budget * (1 + Fraction(1, slots)))
    raise RuntimeError("store-all budget did not converge")


def evaluate_optimal(spec: ChainSpec, budget: float, slots: int, restricted: bool = False):
    """Returns (schedule, makespan, peak_bytes) or None when infeasible."""
    chain = discretize(spec, budget, slots)
    try:
        sched, cost = solve_chain(chain, slots, restricted=restricted)
    except Infeasible:
        return None
    rep = simulate(sched, chain, slots)
    assert rep.valid, rep.failure
    return sched, rep.makespan, float(rep.peak_slots * chain.slot_size)


def sweep(spec: ChainSpec, strategies: Sequence[str] = STRATEGIES, points: int = 10,
          slots: int = 500) -> list[SweepPoint]:
    """Evaluate each strategy at ``points`` budgets spaced up to the store-all peak."""
    unknown = set(strategies) - set(STRATEGIES)
    if unknown:
        raise ValueError(f"unknown strategies: {', '.join(sorted(unknown))}")
    if points < 1:
        raise ValueError("points must be >= 1")
    full = store_all_budget(spec, slots)
    budgets = [full * i / points for i in range(1, points + 1)]
    out: list[SweepPoint] = []
    for strategy in strategies:
        rows: list[SweepPoint] = []
        if strategy in ("optimal", "revolve"):
            for b in budgets:
                res = evaluate_optimal(spec, b, slots, restricted=strategy == "revolve")
                rows.append(_point(spec, strategy, b, *(res[1:] if res else (None, math.nan))))
        elif strategy == "store-all":
            sched = store_all_schedule(spec)
            for b in budgets:
                chain = discretize(spec, b, slots)
                rep = simulate(sched, chain, slots)
                peak = float(rep.peak_slots * chain.slot_size)
                rows.append(_point(spec, strategy, b, rep.makespan if rep.valid else None, peak))
        else:
            chain = discretize(spec, full, slots)
            for n in periodic_segment_counts(spec):
                rep = simulate(periodic_schedule(spec, equal_segments(spec, n)), chain, 2 ** 62)
                peak = float(rep.peak_slots * chain.slot_size)
                rows.append(_point(spec, f"periodic-{n}", peak, rep.makespan, peak))
            rows.sort(key=lambda p: (p.budget_bytes, p.strategy))
        out += rows
    return out


def sweep_csv(points: Iterable[SweepPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for p in points:
        writer.writerow(p.row())
    return buf.getvalue()


@dataclass(frozen=True)
class Comparison:
    budget_bytes: float
    rows: list[SweepPoint]
    improvement: float | None  # best baseline makespan / optimal makespan

    @property
    def any_feasible(self) -> bool:
        return any(r.feasible for r in self.rows)

    def render(self) -> str:
        lines = [f"budget_bytes: {self.budget_bytes!r}",
                 f"{'strategy':<14} {'feasible':<9} {'makespan_s':>14} {'peak_bytes':>16} {'throughput':>12}"]
        for r in self.rows:
            if r.feasible:
                lines.append(f"{r.strategy:<14} {'yes':<9} {r.makespan:>14.6g} {r.peak_bytes:>16.6g} {r.throughput:>12.6g}")
            else:
                lines.append(f"{r.strategy:<14} {'no':<9} {'-':>14} {'-':>16} {'-':>12}")
        if self.improvement is None:
            lines.append("improvement: n/a")
        else:
            lines.append(f"improvement: {self.improvement:.4f} (best baseline makespan / optimal makespan)")
        return "\n".join(lines) + "\n"


def compare(spec: ChainSpec, budget: float, slots: int = 500) -> Comparison:
    """All strategies at one budget; periodic reports its fastest segment count that fits."""
    chain = discretize(spec, budget, slots)
    rows = []
    res = evaluate_optimal(spec, budget, slots)
    rows.append(_point(spec, "optimal", budget, *(res[1:] if res else (None, math.nan))))
    res = evaluate_optimal(spec, budget, slots, restricted=True)
    rows.append(_point(spec, "revolve", budget, *(res[1:] if res else (None, math.nan))))
    best = None
    for n in periodic_segment_counts(spec):
        rep = simulate(periodic_schedule(spec, equal_segments(spec, n)), chain, slots)
        if rep.valid and (best is None or rep.makespan < best[1].makespan):
            best = (n, rep)
    if best is None:
        rows.append(_point(spec, "periodic", budget, None, math.nan))
    else:
        n, rep = best
        rows.append(_point(spec, f"periodic-{n}", budget, rep.makespan, float(rep.peak_slots * chain.slot_size)))
    rep = simulate(store_all_schedule(spec), chain, slots)
    rows.append(_point(spec, "store-all", budget, rep.makespan if rep.valid else None,
                       float(rep.peak_slots * chain.slot_size)))
    opt = rows[0]
    baselines = [r for r in rows[1:] if r.feasible]
    improvement = None
    if opt.feasible and baselines:
        best_base = min(r.makespan for r in baselines)
        improvement = best_base / opt.makespan if opt.makespan > 0 else 1.0
    return Comparison(budget, rows, improvement)


@dataclass(frozen=True)
class DominanceRecord:
    strategy: str
    peak_slots: int
    baseline_makespan: float
    optimal_makespan: float

    @property
    def holds(self) -> bool:
        return self.optimal_makespan <= self.baseline_makespan * (1 + 1e-12)

    @property
    def improvement(self) -> float:
        """Relative throughput gain of the optimal schedule at the baseline's own peak."""
        return self.baseline_makespan / self.optimal_makespan - 1.0


def _optimal_at(table, chain: DiscreteChain, peak_slots: int) -> float:
    m = top_budget(chain, peak_slots)
    return table.cost(1, chain.n_stages, m)


def dominance(spec: ChainSpec, slots: int = 500, budgets: int = 10) -> list[DominanceRecord]:
    """Optimal makespan at each baseline's simulated peak, against the baseline's own makespan.

    Periodic is checked for every segment count, revolve at ``budgets``
    evenly spaced budgets; both sides always share one discretization.
    """
    full = store_all_budget(spec, slots)
    records = []
    chain = discretize(spec, full, slots)
    table = solve(chain, top_budget(chain, slots))
    for n in periodic_segment_counts(spec):
        rep = simulate(periodic_schedule(spec, equal_segments(spec, n)), chain, slots)
        assert rep.valid, rep.failure
        records.append(DominanceRecord(f"periodic-{n}", rep.peak_slots, rep.makespan,
                                       _optimal_at(table, chain, rep.peak_slots)))
    for i in range(1, budgets + 1):
        chain = discretize(spec, full * i / budgets, slots)
        try:
            sched, _ = revolve_schedule(chain, slots)
        except Infeasible:
            continue
        rep = simulate(sched, chain, slots)
        assert rep.valid, rep.failure
        table = solve(chain, top_budget(chain, slots))
        records.append(DominanceRecord(f"revolve@{i}/{budgets}", rep.peak_slots, rep.makespan,
                                       _optimal_at(table, chain, rep.peak_slots)))
    return records
