"""Exhaustive reference searches on tiny chains.

Both searches are shortest-path (Dijkstra) runs over memory states, with the
operation rules re-implemented on bitmasks so that they do not share code
with :mod:`chainckpt.simulator`. The persistent search forbids running
forward without saving from an activation that has already been kept by a
checkpointing or save-all forward; the general search drops that rule and
may also evict activations at zero cost.
"""
from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass

from .chain import ChainSpec, DiscreteChain
from .simulator import Act, B, Drop, Fall, Fck, Fnull, Full, Grad, Op, OpKind

DEFAULT_MAX_LENGTH = 5


class InstanceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class SearchConfig:
    budget_slots: int
    max_recompute: int = 3
    cost_bound: float | None = None
    max_length: int = 8

    def __post_init__(self) -> None:
        if self.max_recompute < 1:
            raise ValueError("max_recompute must be >= 1")


class _Layout:
    """Bit positions: a^i -> i, ā^i -> L+i, δ^i -> 2L+2+i."""

    def __init__(self, chain: DiscreteChain):
        L = chain.length
        self.L = L
        self.act = [i for i in range(L + 1)]
        self.full = [None] + [L + i for i in range(1, L + 2)]
        self.grad = [2 * L + 2 + i for i in range(L + 2)]
        nbits = 3 * L + 4
        self.size = [0] * nbits
        self.item = [None] * nbits
        for i in range(L + 1):
            self.size[self.act[i]] = int(chain.wx[i])
            self.item[self.act[i]] = Act(i)
        for i in range(1, L + 2):
            self.size[self.full[i]] = int(chain.wbx[i])
            self.item[self.full[i]] = Full(i)
        for i in range(L + 2):
            self.size[self.grad[i]] = int(chain.wy[i])
            self.item[self.grad[i]] = Grad(i)

        self._cache: dict[int, int] = {}

    def slots(self, mask: int) -> int:
        hit = self._cache.get(mask)
        if hit is not None:
            return hit
        key = mask
        total = 0
        while mask:
            low = mask & -mask
            total += self.size[low.bit_length() - 1]
            mask ^= low
        self._cache[key] = total
        return total


def _moves(chain: DiscreteChain, lay: _Layout, items: int, kept: int, persistent: bool, allow_drop: bool):
    """Yield (op, new_items, new_kept, mem_during, time, forward_stage)."""
    L = lay.L
    bit = lambda b: 1 << b  # noqa: E731
    for ell in range(1, L + 2):
        a_in = bit(lay.act[ell - 1]) if items & bit(lay.act[ell - 1]) else 0
        f_in = bit(lay.full[ell - 1]) if ell >= 2 and items & bit(lay.full[ell - 1]) else 0
        if a_in or f_in:
            of, uf = int(chain.of[ell]), float(chain.uf[ell])
            # keeping the source marks a plain activation as a checkpoint
            keep_mark = kept | a_in
            out = bit(lay.full[ell])
            if not items & out:
                new = items | out
                yield Fall(ell), new, keep_mark, lay.slots(new) + of, uf, ell
            if ell <= L:
                out = bit(lay.act[ell])
                if not items & out:
                    new = items | out
                    yield Fck(ell), new, keep_mark, lay.slots(new) + of, uf, ell
                    if a_in and not (persistent and kept & a_in):
                        yield (Fnull(ell), new & ~a_in, kept & ~a_in,
                               lay.slots(new) + of, uf, ell)
        g, fl = bit(lay.grad[ell]), bit(lay.full[ell])
        if items & g and items & fl and (a_in or f_in):
            out = bit(lay.grad[ell - 1])
            during = items | out
            consumed = g | fl | (a_in if a_in else 0)
            yield (B(ell), during & ~consumed, kept & ~consumed,
                   lay.slots(during) + int(chain.ob[ell]), float(chain.ub[ell]), 0)
    if allow_drop:
        for b in range(3 * L + 4):
            if items & bit(b) and lay.item[b].kind.value != "delta":
                yield Drop(lay.item[b]), items & ~bit(b), kept & ~bit(b), lay.slots(items), 0.0, 0


def _search(chain: DiscreteChain, budget_slots: int, persistent: bool, allow_drop: bool,
            max_recompute: int | None, cost_bound: float | None, start: int = 1, stop: int | None = None):
    lay = _Layout(chain)
    stop = chain.length + 1 if stop is None else stop
    init_items = (1 << lay.act[start - 1]) | (1 << lay.grad[stop])
    init_kept = 1 << lay.act[start - 1]
    goal = 1 << lay.grad[start - 1]
    n_st = chain.length + 2
    init_counts = (0,) * n_st if max_recompute is not None else None
    if lay.slots(init_items) > budget_slots:
        return float("inf"), None
    counter = itertools.count()
    start_key = (init_items, init_kept, init_counts)
    best = {start_key: 0.0}
    parent: dict = {start_key: None}
    heap = [(0.0, next(counter), start_key)]
    while heap:
        cost, _, key = heapq.heappop(heap)
        if cost > best.get(key, float("inf")):
            continue
        items, kept, counts = key
        if items & goal:
            ops = []
            while parent[key] is not None:
                key, op = parent[key]
                ops.append(op)
            return cost, ops[::-1]
        for op, new_items, new_kept, mem, dt, fstage in _moves(chain, lay, items, kept, persistent, allow_drop):
            if mem > budget_slots:
                continue
            new_counts = counts
            if counts is not None and fstage:
                if counts[fstage] >= max_recompute:
                    continue
                new_counts = counts[:fstage] + (counts[fstage] + 1,) + counts[fstage + 1:]
            new_cost = cost + dt
            if cost_bound is not None and new_cost > cost_bound:
                continue
            nkey = (new_items, new_kept if persistent else 0, new_counts)
            if new_cost < best.get(nkey, float("inf")):
                best[nkey] = new_cost
                parent[nkey] = (key, op)
                heapq.heappush(heap, (new_cost, next(counter), nkey))
    return float("inf"), None


def brute_force_persistent(chain: DiscreteChain, budget_slots: int, *, max_length: int = DEFAULT_MAX_LENGTH,
                           start: int = 1, stop: int | None = None) -> tuple[float, list[Op] | None]:
    """Least makespan over valid persistent schedules; ``(inf, None)`` if none fits.

    ``budget_slots`` bounds total memory, the stored input included.
    """
    if chain.length > max_length:
        raise InstanceTooLarge(f"chain length {chain.length} exceeds search limit {max_length}")
    return _search(chain, budget_slots, True, False, None, None, start, stop)


def brute_force_general(chain: DiscreteChain, config: SearchConfig) -> tuple[float, list | None]:
    """Least makespan over all valid schedules with evictions, each forward run at most ``max_recompute`` times."""
    if chain.length > config.max_length:
        raise InstanceTooLarge(f"chain length {chain.length} exceeds search limit {config.max_length}")
    # the uncapped optimum is a lower bound; if its witness respects the cap it is the answer
    cost, ops = _search(chain, config.budget_slots, False, True, None, config.cost_bound)
    if ops is None or _max_forward_runs(ops) <= config.max_recompute:
        return cost, ops
    return _search(chain, config.budget_slots, False, True, config.max_recompute, config.cost_bound)


def _max_forward_runs(ops) -> int:
    runs: dict[int, int] = {}
    for op in ops:
        if isinstance(op, Op) and op.kind is not OpKind.BWD:
            runs[op.stage] = runs.get(op.stage, 0) + 1
    return max(runs.values(), default=0)


def counterexample_chain(n: int) -> ChainSpec:
    """Chain on which every persistent schedule is slower than the best one (budget 8)."""
    if n < 1:
        raise ValueError("n must be >= 1")
    L = n + 2
    k = n - 1
    uf = [0.0] * (L + 1)
    uf[0], uf[1] = float(k), 2.0
    wx = [0.0, 1.0, 2.0] + [3.0] * (L - 3) + [4.0]
    # full records: 1 for the first stage, 3 everywhere else (loss included)
    wbx = [1.0] + [3.0] * L
    return ChainSpec(
        length=L,
        fwd_time=uf,
        bwd_time=[0.0] * (L + 1),
        act_size=wx,
        full_size=wbx,
        grad_size=[0.0] * (L + 2),
        fwd_overhead=[0.0] * (L + 1),
        bwd_overhead=[0.0] * (L + 1),
        name=f"counterexample-{n}",
    )
