"""Step-by-step execution of a schedule against a discretized chain.

Memory items are activations ``a^i`` (:attr:`ItemKind.ACT`), full forward
records ``ā^i`` (:attr:`ItemKind.FULL`) and gradients ``δ^i``
(:attr:`ItemKind.GRAD`). An operation's memory footprint is everything in
memory plus its outputs plus its overhead.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple, Sequence

from .chain import DiscreteChain


class ItemKind(str, Enum):
    ACT = "a"
    FULL = "abar"
    GRAD = "delta"


class Item(NamedTuple):
    kind: ItemKind
    index: int

    def __str__(self) -> str:
        return f"{self.kind.value}^{self.index}"


def Act(i: int) -> Item:
    return Item(ItemKind.ACT, i)


def Full(i: int) -> Item:
    return Item(ItemKind.FULL, i)


def Grad(i: int) -> Item:
    return Item(ItemKind.GRAD, i)


class OpKind(str, Enum):
    FALL = "Fall"
    FCK = "Fck"
    FNULL = "Fnull"
    BWD = "B"


class Op(NamedTuple):
    kind: OpKind
    stage: int

    def __str__(self) -> str:
        return f"{self.kind.value} {self.stage}"


class Drop(NamedTuple):
    """Zero-time eviction of an item; only produced by the general oracle search."""

    item: Item

    def __str__(self) -> str:
        return f"Drop {self.item}"


def Fall(stage: int) -> Op:
    return Op(OpKind.FALL, stage)


def Fck(stage: int) -> Op:
    return Op(OpKind.FCK, stage)


def Fnull(stage: int) -> Op:
    return Op(OpKind.FNULL, stage)


def B(stage: int) -> Op:
    return Op(OpKind.BWD, stage)


Schedule = list  # list[Op]; Drop only appears in oracle witnesses


class ScheduleError(Exception):
    """Base class for errors raised while stepping a schedule."""


class MissingInput(ScheduleError):
    def __init__(self, op, item: Item):
        super().__init__(f"{op}: missing input {item}")
        self.op = op
        self.item = item


class InvalidOperation(ScheduleError):
    pass


class ScheduleParseError(ValueError):
    pass


# --- schedule text format ---------------------------------------------------

_KINDS = {k.value: k for k in OpKind}


def format_schedule(schedule: Iterable[Op]) -> str:
    lines = []
    for op in schedule:
        if not isinstance(op, Op):
            raise ValueError(f"{op} has no text representation")
        lines.append(f"{op.kind.value} {op.stage}\n")
    return "".join(lines)


def parse_schedule(text: str) -> list[Op]:
    """Parse one ``<kind> <stage>`` per line; blank lines and ``#`` comments are skipped."""
    ops = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2 or parts[0] not in _KINDS:
            raise ScheduleParseError(f"line {lineno}: expected '<Fall|Fck|Fnull|B> <stage>', got {raw!r}")
        try:
            stage = int(parts[1])
        except ValueError:
            raise ScheduleParseError(f"line {lineno}: stage must be an integer, got {parts[1]!r}") from None
        if stage < 1:
            raise ScheduleParseError(f"line {lineno}: stage must be >= 1, got {stage}")
        ops.append(Op(_KINDS[parts[0]], stage))
    return ops


# --- stepping ---------------------------------------------------------------

def item_size(item: Item, chain: DiscreteChain) -> int:
    if item.kind is ItemKind.ACT:
        return int(chain.wx[item.index])
    if item.kind is ItemKind.FULL:
        return int(chain.wbx[item.index])
    return int(chain.wy[item.index])


def state_slots(state: Iterable[Item], chain: DiscreteChain) -> int:
    return sum(item_size(it, chain) for it in state)


def _check_item(item: Item, chain: DiscreteChain) -> None:
    L = chain.length
    lo, hi = {ItemKind.ACT: (0, L), ItemKind.FULL: (1, L + 1), ItemKind.GRAD: (0, L + 1)}[item.kind]
    if not lo <= item.index <= hi:
        raise InvalidOperation(f"item {item} out of range {lo}..{hi}")


def _forward_source(op: Op, state: frozenset[Item]) -> Item:
    a, abar = Act(op.stage - 1), Full(op.stage - 1)
    if a in state:
        return a
    if op.kind is not OpKind.FNULL and abar in state:
        return abar
    raise MissingInput(op, a)


def step(state: frozenset[Item], op: Op | Drop, chain: DiscreteChain) -> tuple[frozenset[Item], int, float]:
    """Apply one operation; returns the new state, the memory used while it runs and its duration."""
    if isinstance(op, Drop):
        if op.item not in state:
            raise MissingInput(op, op.item)
        return state - {op.item}, state_slots(state, chain), 0.0

    ell = op.stage
    L = chain.length
    if not 1 <= ell <= L + 1:
        raise InvalidOperation(f"{op}: stage out of range 1..{L + 1}")
    if op.kind in (OpKind.FCK, OpKind.FNULL) and ell == L + 1:
        raise InvalidOperation(f"{op}: the loss stage has no activation output")

    if op.kind is OpKind.BWD:
        for needed in (Grad(ell), Full(ell)):
            if needed not in state:
                raise MissingInput(op, needed)
        if Act(ell - 1) in state:
            consumed = {Grad(ell), Full(ell), Act(ell - 1)}
        elif Full(ell - 1) in state:
            consumed = {Grad(ell), Full(ell)}
        else:
            raise MissingInput(op, Act(ell - 1))
        outputs = {Grad(ell - 1)}
        overhead, time = int(chain.ob[ell]), float(chain.ub[ell])
    else:
        src = _forward_source(op, state)
        if op.kind is OpKind.FALL:
            consumed, outputs = set(), {Full(ell)}
        elif op.kind is OpKind.FCK:
            consumed, outputs = set(), {Act(ell)}
        else:
            consumed, outputs = {src}, {Act(ell)}
        overhead, time = int(chain.of[ell]), float(chain.uf[ell])

    during = state | outputs
    mem = state_slots(during, chain) + overhead
    return frozenset(during - consumed), mem, time


# --- whole-schedule simulation ---------------------------------------------

@dataclass(frozen=True)
class Failure:
    step: int  # 1-based; 0 for the end-of-schedule check
    reason: str  # "missing-input" | "budget-exceeded" | "invalid-op" | "incomplete"
    item: Item | None = None
    observed_slots: int | None = None
    message: str = ""

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "reason": self.reason,
            "item": str(self.item) if self.item is not None else None,
            "observed_slots": self.observed_slots,
            "message": self.message,
        }


@dataclass(frozen=True)
class SimReport:
    valid: bool
    peak_slots: int
    makespan: float
    op_count: int
    failure: Failure | None = None
    final_state: frozenset = field(default_factory=frozenset, compare=False)
    slot_size: float = 1.0

    @property
    def peak_bytes(self) -> float:
        return self.peak_slots * self.slot_size

    def to_dict(self) -> dict:
        return {
            "valid": self.valid,
            "peak_slots": self.peak_slots,
            "peak_bytes": self.peak_bytes,
            "makespan": self.makespan,
            "op_count": self.op_count,
            "failure": self.failure.to_dict() if self.failure else None,
            "leftover": sorted(str(it) for it in self.final_state if it.kind is not ItemKind.GRAD or it.index != 0),
        }

    def render(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"


def initial_state(chain: DiscreteChain, start: int = 1, stop: int | None = None,
                  extra: Iterable[Item] = ()) -> frozenset[Item]:
    stop = chain.length + 1 if stop is None else stop
    return frozenset({Act(start - 1), Grad(stop), *extra})


def simulate(
    schedule: Sequence[Op | Drop],
    chain: DiscreteChain,
    budget_slots: int,
    initial_extra: Iterable[Item] = (),
    *,
    start: int = 1,
    stop: int | None = None,
) -> SimReport:
    """Run ``schedule`` from ``{a^{start-1}, δ^{stop}} ∪ initial_extra``.

    The schedule is valid if every input is present when needed, no step uses
    more than ``budget_slots`` and ``δ^{start-1}`` is in memory at the end.
    A budget overrun does not stop the run so that the full peak is reported;
    a missing input does.
    """
    if budget_slots < 0:
        raise ValueError("budget_slots must be >= 0")
    for it in initial_extra:
        _check_item(it, chain)
    state = initial_state(chain, start, stop, initial_extra)
    peak = 0
    makespan = 0.0
    failure = None
    slot_size = float(chain.slot_size)
    for i, op in enumerate(schedule, 1):
        try:
            state, mem, t = step(state, op, chain)
        except MissingInput as exc:
            return SimReport(False, peak, makespan, len(schedule),
                             Failure(i, "missing-input", exc.item, message=str(exc)), state, slot_size)
        except InvalidOperation as exc:
            return SimReport(False, peak, makespan, len(schedule),
                             Failure(i, "invalid-op", message=str(exc)), state, slot_size)
        peak = max(peak, mem)
        makespan += t
        if mem > budget_slots and failure is None:
            failure = Failure(i, "budget-exceeded", observed_slots=mem,
                              message=f"step {i} ({op}) needs {mem} slots, budget is {budget_slots}")
    if failure is None and Grad(start - 1) not in state:
        failure = Failure(0, "incomplete", Grad(start - 1), message=f"{Grad(start - 1)} not computed")
    return SimReport(failure is None, peak, makespan, len(schedule), failure, state, slot_size)
