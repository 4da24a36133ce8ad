"""Optimal persistent checkpointing schedules by dynamic programming.

``C[s, t, m]`` is the least time to turn ``δ^t`` into ``δ^{s-1}`` for the
sub-chain ``s..t`` when ``a^{s-1}`` is held outside the budget and at most ``m``
further slots may be used. A sub-chain either starts by checkpointing its
input and running forward without saving up to some ``s'`` (then solving
``s'..t`` and ``s..s'-1``), or by saving everything for stage ``s`` (then
solving ``s+1..t`` and running ``B^s``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numba
import numpy as np

from .chain import ChainSpec, DiscreteChain, discretize, slots_for
from .simulator import Op, Fall, Fck, Fnull, B

INF = math.inf

# decision codes; values >= 2 mean Checkpoint(s')
NONE = -1
USE_ALL = 0
LEAF = 1


class Infeasible(Exception):
    """No schedule fits in the requested memory."""


@dataclass(frozen=True)
class Limits:
    """Memory thresholds per sub-chain, in slots, indexed ``[s, t]``.

    ``nomem[s, t]`` (``s < t``) is the peak of running forward from ``s`` to
    ``t-1`` without saving; ``emem[s, t]`` is the peak of ``Fall(s)`` with
    ``δ^t`` held and of ``B(s)``. Entries outside their domain are -1.
    """

    nomem: np.ndarray
    emem: np.ndarray

    def no_save(self, s: int, t: int) -> int:
        if not s < t:
            raise IndexError(f"nomem[{s},{t}] is only defined for s < t")
        return int(self.nomem[s, t])

    def save_all(self, s: int, t: int) -> int:
        if not s <= t:
            raise IndexError(f"emem[{s},{t}] is only defined for s <= t")
        return int(self.emem[s, t])


def compute_limits(chain: DiscreteChain) -> Limits:
    n = chain.n_stages
    wx, wbx, wy, of, ob = chain.wx, chain.wbx, chain.wy, chain.of, chain.ob
    nomem = np.full((n + 1, n + 1), -1, dtype=np.int64)
    emem = np.full((n + 1, n + 1), -1, dtype=np.int64)
    for s in range(1, n + 1):
        bwd_peak = wy[s] + wbx[s] + ob[s] + wy[s - 1]
        running = wx[s] + of[s]
        for t in range(s, n + 1):
            emem[s, t] = max(wy[t] + wbx[s] + of[s], bwd_peak)
            if t > s:
                # running covers Fck(s) and Fnull(j) for s < j < t
                nomem[s, t] = wy[t] + running
                running = max(running, wx[t - 1] + wx[t] + of[t])
    return Limits(nomem, emem)


def _pair_offsets(n: int) -> np.ndarray:
    # row of (s, t) in the packed table is offsets[s] + t - s
    offsets = np.zeros(n + 2, dtype=np.int64)
    for s in range(1, n + 1):
        offsets[s + 1] = offsets[s] + (n - s + 1)
    return offsets


@numba.njit(cache=True)
def _fill(n, S, uf, ub, wx, wbx, wy, of, emem, offsets, all_interior):
    rows = offsets[n + 1]
    C = np.full((rows, S + 1), np.inf)
    D = np.full((rows, S + 1), -1, dtype=np.int16)
    for s in range(1, n + 1):
        row = offsets[s]
        for m in range(emem[s, s], S + 1):
            C[row, m] = uf[s] + ub[s]
            D[row, m] = 1
    for d in range(1, n):
        for s in range(1, n - d + 1):
            t = s + d
            row = offsets[s] + d
            prefix_row = 0
            fsum = 0.0
            fwd_peak = wx[s] + of[s]
            # checkpoint branch: Fck(s), Fnull(s+1..s'-1), then s'..t, then s..s'-1
            for sp in range(s + 1, t + 1):
                fsum += uf[sp - 1]
                if sp > s + 1:
                    fwd_peak = max(fwd_peak, wx[sp - 2] + wx[sp - 1] + of[sp - 1])
                need = wy[t] + fwd_peak
                suffix_row = offsets[sp] + (t - sp)
                prefix_row = offsets[s] + (sp - 1 - s)
                shift = wx[sp - 1]
                for m in range(max(need, shift), S + 1):
                    c = fsum + C[suffix_row, m - shift] + C[prefix_row, m]
                    if c < C[row, m]:
                        C[row, m] = c
                        D[row, m] = sp
            # save-all branch: Fall(s), then s+1..t, then B(s)
            if all_interior:
                inner_row = offsets[s + 1] + (t - s - 1)
                shift = wbx[s]
                for m in range(max(emem[s, t], shift), S + 1):
                    c = uf[s] + C[inner_row, m - shift] + ub[s]
                    if c <= C[row, m] and c < np.inf:
                        C[row, m] = c
                        D[row, m] = 0
    return C, D


@dataclass(frozen=True, eq=False)
class DpTable:
    """Filled cost and decision tables for one chain and slot budget."""

    chain: DiscreteChain
    budget_slots: int
    cost_table: np.ndarray  # (pairs, budget_slots + 1)
    decision_table: np.ndarray
    offsets: np.ndarray
    limits: Limits
    restricted: bool = False

    def _row(self, s: int, t: int) -> int:
        n = self.chain.n_stages
        if not 1 <= s <= t <= n:
            raise IndexError(f"sub-chain ({s}, {t}) outside 1..{n}")
        return int(self.offsets[s]) + t - s

    def cost(self, s: int, t: int, m: int) -> float:
        if m < 0:
            return INF
        return float(self.cost_table[self._row(s, t), min(m, self.budget_slots)])

    def decision(self, s: int, t: int, m: int) -> int:
        if m < 0:
            return NONE
        return int(self.decision_table[self._row(s, t), min(m, self.budget_slots)])

    def dump(self) -> str:
        """One line per finite cell: ``s t m cost decision``."""
        names = {USE_ALL: "all", LEAF: "leaf"}
        lines = ["# s t m cost decision"]
        n = self.chain.n_stages
        for s in range(1, n + 1):
            for t in range(s, n + 1):
                row = self._row(s, t)
                for m in range(self.budget_slots + 1):
                    c = float(self.cost_table[row, m])
                    if math.isfinite(c):
                        d = int(self.decision_table[row, m])
                        lines.append(f"{s} {t} {m} {c!r} {names.get(d, f'ck{d}')}")
        return "\n".join(lines) + "\n"


def solve(chain: DiscreteChain, budget_slots: int, *, restricted: bool = False) -> DpTable:
    """Fill the table for all sub-chains and every budget ``0..budget_slots``.

    ``restricted`` forbids saving everything for a stage unless its backward
    runs next, which gives the activation-only baseline.
    """
    if budget_slots < 0:
        raise ValueError("budget_slots must be >= 0")
    n = chain.n_stages
    limits = compute_limits(chain)
    offsets = _pair_offsets(n)
    C, D = _fill(n, int(budget_slots),
                 np.asarray(chain.uf, dtype=np.float64), np.asarray(chain.ub, dtype=np.float64),
                 np.asarray(chain.wx), np.asarray(chain.wbx), np.asarray(chain.wy),
                 np.asarray(chain.of), limits.emem, offsets, not restricted)
    return DpTable(chain, int(budget_slots), C, D, offsets, limits, restricted)


def reconstruct(table: DpTable, s: int, t: int, m: int) -> list[Op]:
    """Expand the recorded decisions into an operation sequence."""
    if not math.isfinite(table.cost(s, t, m)):
        raise Infeasible(f"no schedule for stages {s}..{t} within {m} slots")
    wx, wbx = table.chain.wx, table.chain.wbx
    out: list[Op] = []
    stack: list = [(s, t, m)]
    while stack:
        task = stack.pop()
        if isinstance(task, Op):
            out.append(task)
            continue
        s, t, m = task
        d = table.decision(s, t, m)
        if d == LEAF:
            out += [Fall(s), B(s)]
        elif d == USE_ALL:
            out.append(Fall(s))
            stack += [B(s), (s + 1, t, m - int(wbx[s]))]
        elif d >= 2:
            sp = d
            out.append(Fck(s))
            out += [Fnull(k) for k in range(s + 1, sp)]
            stack += [(s, sp - 1, m), (sp, t, m - int(wx[sp - 1]))]
        else:  # pragma: no cover - guarded by the finiteness check
            raise AssertionError(f"inconsistent table at ({s}, {t}, {m})")
    return out


def top_budget(chain: DiscreteChain, budget_slots: int) -> int:
    """Slots left for the top-level problem once ``a^0`` is stored."""
    return budget_slots - int(chain.wx[0])


def solve_chain(chain: DiscreteChain, budget_slots: int, *, restricted: bool = False) -> tuple[list[Op], float]:
    """Schedule for the whole chain within ``budget_slots`` (``a^0`` included)."""
    m = top_budget(chain, budget_slots)
    if m < 0:
        raise Infeasible(f"input a^0 needs {int(chain.wx[0])} slots, budget is {budget_slots}")
    table = solve(chain, m, restricted=restricted)
    n = chain.n_stages
    cost = table.cost(1, n, m)
    if not math.isfinite(cost):
        raise Infeasible(f"no persistent schedule fits in {budget_slots} slots")
    return reconstruct(table, 1, n, m), cost


def optimal_schedule(spec: ChainSpec, budget: float, slots: int = 500) -> tuple[list[Op], float]:
    """Discretize ``spec`` for ``budget`` bytes and return the optimal schedule and its time."""
    chain = discretize(spec, budget, slots)
    return solve_chain(chain, slots)
