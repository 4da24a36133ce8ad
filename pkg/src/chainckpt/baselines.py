"""Comparison strategies expressed in the same operation vocabulary.

* store-all: every forward saves everything, then all backwards run.
* periodic: the chain is cut into segments; only segment inputs are kept
  during the forward phase and each earlier segment is replayed before its
  backward steps.
* revolve: optimal schedule when full forward records may only be taken
  right before the matching backward step (activation-only checkpointing).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .chain import DiscreteChain
from .simulator import B, Fall, Fck, Fnull, Op
from .solver import solve_chain


@dataclass(frozen=True)
class SegmentPlan:
    """Contiguous segments covering stages ``1..n_stages``, given by their first stages."""

    starts: tuple[int, ...]
    n_stages: int

    def __post_init__(self) -> None:
        starts = tuple(int(s) for s in self.starts)
        object.__setattr__(self, "starts", starts)
        if not starts or starts[0] != 1:
            raise ValueError("first segment must start at stage 1")
        if any(b <= a for a, b in zip(starts, starts[1:])):
            raise ValueError("segment starts must be strictly increasing")
        if starts[-1] > self.n_stages:
            raise ValueError(f"segment start {starts[-1]} beyond last stage {self.n_stages}")

    @property
    def segments(self) -> list[tuple[int, int]]:
        ends = [s - 1 for s in self.starts[1:]] + [self.n_stages]
        return list(zip(self.starts, ends))

    def __len__(self) -> int:
        return len(self.starts)


def store_all_schedule(chain) -> list[Op]:
    n = chain.length + 1
    return [Fall(i) for i in range(1, n + 1)] + [B(i) for i in range(n, 0, -1)]


def equal_segments(chain, n: int) -> SegmentPlan:
    """Split the stages into ``n`` segments whose lengths differ by at most one, longer first."""
    total = chain.length + 1
    if not 1 <= n <= total:
        raise ValueError(f"segment count must be in 1..{total}, got {n}")
    base, extra = divmod(total, n)
    starts, pos = [], 1
    for i in range(n):
        starts.append(pos)
        pos += base + (1 if i < extra else 0)
    return SegmentPlan(tuple(starts), total)


def periodic_schedule(chain, plan: SegmentPlan) -> list[Op]:
    if plan.n_stages != chain.length + 1:
        raise ValueError(f"plan covers {plan.n_stages} stages, chain has {chain.length + 1}")
    segs = plan.segments
    ops: list[Op] = []
    for first, last in segs[:-1]:
        ops.append(Fck(first))
        ops += [Fnull(k) for k in range(first + 1, last + 1)]
    first, last = segs[-1]
    ops += [Fall(k) for k in range(first, last + 1)]
    ops += [B(k) for k in range(last, first - 1, -1)]
    for first, last in reversed(segs[:-1]):
        ops += [Fall(k) for k in range(first, last + 1)]
        ops += [B(k) for k in range(last, first - 1, -1)]
    return ops


def periodic_segment_counts(chain) -> list[int]:
    """Segment counts tried in sweeps: 2 up to twice the rounded-up square root of ``L``."""
    hi = min(2 * math.ceil(math.sqrt(chain.length)), chain.length + 1)
    return list(range(2, hi + 1))


def revolve_schedule(chain: DiscreteChain, budget_slots: int) -> tuple[list[Op], float]:
    """Raises :class:`~chainckpt.solver.Infeasible` when nothing fits."""
    return solve_chain(chain, budget_slots, restricted=True)
