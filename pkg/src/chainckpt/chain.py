"""Chain profiles: per-stage times and sizes, slot discretization, synthetic chains.

Stage ``l`` runs forward ``F^l`` and backward ``B^l``; stage ``L+1`` is the loss.
All arrays in :class:`DiscreteChain` are padded to length ``L+2`` so that they
can be indexed directly by stage number; entries outside the documented range
are zero.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Mapping, Sequence

import numpy as np

# name in the profile document -> (short name, first stage index, length offset from L)
PROFILE_FIELDS: dict[str, tuple[str, int, int]] = {
    "fwd_time": ("uf", 1, 1),
    "bwd_time": ("ub", 1, 1),
    "act_size": ("wx", 0, 1),
    "full_size": ("wbx", 1, 1),
    "grad_size": ("wy", 0, 2),
    "fwd_overhead": ("of", 1, 1),
    "bwd_overhead": ("ob", 1, 1),
}
SIZE_FIELDS = ("act_size", "full_size", "grad_size", "fwd_overhead", "bwd_overhead")


class ProfileError(ValueError):
    """Malformed or invalid chain profile."""

    def __init__(self, message: str, field: str | None = None, index: int | None = None):
        super().__init__(message)
        self.field = field
        self.index = index


@dataclass(frozen=True)
class ChainSpec:
    """Profile of a chain of ``length`` stages plus the loss stage.

    Each array holds the values of its stages in order: ``fwd_time[0]`` is the
    time of ``F^1``, while ``act_size[0]`` is the size of the input ``a^0``.
    """

    length: int
    fwd_time: tuple[float, ...]
    bwd_time: tuple[float, ...]
    act_size: tuple[float, ...]
    full_size: tuple[float, ...]
    grad_size: tuple[float, ...]
    fwd_overhead: tuple[float, ...]
    bwd_overhead: tuple[float, ...]
    batch_size: float = 1.0
    name: str = ""

    def __post_init__(self) -> None:
        if isinstance(self.length, bool) or not isinstance(self.length, (int, np.integer)):
            raise ProfileError("length must be an integer", "length")
        if self.length < 1:
            raise ProfileError(f"length must be >= 1, got {self.length}", "length")
        object.__setattr__(self, "length", int(self.length))
        for fname, (short, first, extra) in PROFILE_FIELDS.items():
            values = getattr(self, fname)
            try:
                values = tuple(float(v) for v in values)
            except (TypeError, ValueError) as exc:
                raise ProfileError(f"{fname} ({short}) must be an array of numbers", fname) from exc
            expected = self.length + extra
            if len(values) != expected:
                raise ProfileError(
                    f"{fname} ({short}) must have {expected} entries for stages "
                    f"{first}..{first + expected - 1}, got {len(values)}",
                    fname,
                )
            for pos, v in enumerate(values):
                stage = first + pos
                if not math.isfinite(v) or v < 0:
                    raise ProfileError(
                        f"{fname}[{stage}] ({short}[{stage}]) must be a finite non-negative number, got {v}",
                        fname,
                        stage,
                    )
            object.__setattr__(self, fname, values)
        if not (self.batch_size > 0 and math.isfinite(self.batch_size)):
            raise ProfileError("batch_size must be positive", "batch_size")

    @property
    def n_stages(self) -> int:
        """Number of stages including the loss, ``L+1``."""
        return self.length + 1

    def padded(self, fname: str) -> list[float]:
        """Values of ``fname`` indexed by stage number, length ``L+2``."""
        _, first, _ = PROFILE_FIELDS[fname]
        values = getattr(self, fname)
        out = [0.0] * (self.length + 2)
        out[first:first + len(values)] = values
        return out

    def lower_bound_time(self) -> float:
        """Makespan with no recomputation at all."""
        return math.fsum(self.fwd_time) + math.fsum(self.bwd_time)

    def to_dict(self) -> dict[str, Any]:
        doc: dict[str, Any] = {"length": self.length}
        if self.name:
            doc["name"] = self.name
        if self.batch_size != 1.0:
            doc["batch_size"] = self.batch_size
        for fname in PROFILE_FIELDS:
            doc[fname] = list(getattr(self, fname))
        return doc

    @classmethod
    def from_dict(cls, doc: Mapping[str, Any]) -> "ChainSpec":
        if not isinstance(doc, Mapping):
            raise ProfileError("profile document must be an object")
        missing = [k for k in ("length", *PROFILE_FIELDS) if k not in doc]
        if missing:
            raise ProfileError(f"profile is missing field(s): {', '.join(missing)}", missing[0])
        unknown = set(doc) - {"length", "name", "batch_size", *PROFILE_FIELDS}
        if unknown:
            raise ProfileError(f"unknown profile field(s): {', '.join(sorted(unknown))}", sorted(unknown)[0])
        for fname in PROFILE_FIELDS:
            if not isinstance(doc[fname], list):
                raise ProfileError(f"{fname} must be an array", fname)
        return cls(
            length=doc["length"],
            name=str(doc.get("name", "")),
            batch_size=float(doc.get("batch_size", 1.0)),
            **{fname: doc[fname] for fname in PROFILE_FIELDS},
        )


def load_profile(text: str) -> ChainSpec:
    """Parse a JSON profile document into a validated :class:`ChainSpec`."""
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ProfileError(f"malformed profile document: {exc}") from exc
    return ChainSpec.from_dict(doc)


def emit_profile(spec: ChainSpec) -> str:
    # repr-based float formatting in json round-trips exactly
    return json.dumps(spec.to_dict(), indent=2) + "\n"


def read_profile(path: str) -> ChainSpec:
    with open(path, encoding="utf-8") as fh:
        return load_profile(fh.read())


def slots_for(size: float | Fraction, slot_size: Fraction) -> int:
    """Number of slots needed to hold ``size`` bytes, rounded up exactly."""
    if size == 0:
        return 0
    return math.ceil(Fraction(size) / slot_size)


def _frozen(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class DiscreteChain:
    """A chain whose sizes are expressed in integer memory slots.

    ``uf``/``ub`` are float arrays and ``wx``/``wbx``/``wy``/``of``/``ob`` are
    int64 arrays, all of length ``L+2`` and indexed by stage.
    """

    spec: ChainSpec
    slot_count: int
    slot_size: Fraction
    uf: np.ndarray = field(repr=False)
    ub: np.ndarray = field(repr=False)
    wx: np.ndarray = field(repr=False)
    wbx: np.ndarray = field(repr=False)
    wy: np.ndarray = field(repr=False)
    of: np.ndarray = field(repr=False)
    ob: np.ndarray = field(repr=False)

    @property
    def length(self) -> int:
        return self.spec.length

    @property
    def n_stages(self) -> int:
        return self.spec.length + 1

    def slots_to_bytes(self, slots: int) -> float:
        return float(slots * self.slot_size)


def discretize(spec: ChainSpec, budget: float, slots: int) -> DiscreteChain:
    """Express every size of ``spec`` in slots of ``budget / slots`` bytes, rounded up."""
    if not budget > 0:
        raise ValueError(f"budget must be positive, got {budget}")
    if slots < 1:
        raise ValueError(f"slot count must be >= 1, got {slots}")
    slot_size = Fraction(budget) / slots

    def ints(fname: str) -> np.ndarray:
        return _frozen(np.array([slots_for(v, slot_size) for v in spec.padded(fname)], dtype=np.int64))

    def floats(fname: str) -> np.ndarray:
        return _frozen(np.array(spec.padded(fname), dtype=np.float64))

    return DiscreteChain(
        spec=spec,
        slot_count=int(slots),
        slot_size=slot_size,
        uf=floats("fwd_time"),
        ub=floats("bwd_time"),
        wx=ints("act_size"),
        wbx=ints("full_size"),
        wy=ints("grad_size"),
        of=ints("fwd_overhead"),
        ob=ints("bwd_overhead"),
    )


def unit_chain(spec: ChainSpec) -> DiscreteChain:
    """Discretize with one-byte slots; exact when all sizes are integers."""
    return discretize(spec, 1, 1)


# --- synthetic chains -------------------------------------------------------

def homogeneous_chain(length: int, time: float = 1.0, size: float = 1.0) -> ChainSpec:
    n = length + 1
    return ChainSpec(
        length=length,
        fwd_time=[time] * n,
        bwd_time=[time] * n,
        act_size=[size] * n,
        full_size=[size] * n,
        grad_size=[size] * (n + 1),
        fwd_overhead=[0.0] * n,
        bwd_overhead=[0.0] * n,
        name=f"homogeneous-{length}",
    )


def random_chain(
    length: int,
    seed: int | None = None,
    *,
    time_range: tuple[float, float] = (1.0, 10.0),
    size_range: tuple[float, float] = (1.0, 10.0),
    overhead_range: tuple[float, float] = (0.0, 0.0),
    integer: bool = False,
    nested: bool = True,
) -> ChainSpec:
    """Random heterogeneous chain, deterministic for a given seed.

    With ``nested`` the stored-all size of a stage is its activation size plus
    an independent draw (the full set contains the output); otherwise every
    size is drawn independently. ``integer`` draws inclusive integers.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    for lo, hi in (time_range, size_range, overhead_range):
        if lo < 0 or hi < lo:
            raise ValueError(f"invalid range ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    n = length + 1

    def draw(rng_range: tuple[float, float], count: int) -> list[float]:
        lo, hi = rng_range
        if integer:
            return [float(v) for v in rng.integers(int(lo), int(hi) + 1, size=count)]
        return [float(v) for v in rng.uniform(lo, hi, size=count)]

    uf = draw(time_range, n)
    ub = draw(time_range, n)
    wx = draw(size_range, n)
    extra = draw(size_range, n)
    wbx = [wx[i] + extra[i - 1] if nested and i <= length else extra[i - 1] for i in range(1, n + 1)]
    wy = draw(size_range, n + 1)
    of = draw(overhead_range, n)
    ob = draw(overhead_range, n)
    return ChainSpec(
        length=length,
        fwd_time=uf,
        bwd_time=ub,
        act_size=wx,
        full_size=wbx,
        grad_size=wy,
        fwd_overhead=of,
        bwd_overhead=ob,
        name=f"random-{length}-{seed}",
    )


SYNTHETIC_KINDS = ("homogeneous", "random-heterogeneous", "counterexample")


def synthetic_chain(kind: str, params: Mapping[str, Any] | None = None, seed: int | None = None) -> ChainSpec:
    """Dispatch to one of the synthetic generators by name."""
    params = dict(params or {})
    try:
        if kind == "homogeneous":
            return homogeneous_chain(**params)
        if kind == "random-heterogeneous":
            return random_chain(seed=seed, **params)
        if kind == "counterexample":
            from .oracle import counterexample_chain

            return counterexample_chain(**params)
    except TypeError as exc:
        raise ValueError(f"invalid parameters for {kind}: {exc}") from exc
    raise ValueError(f"unknown synthetic chain kind {kind!r}; expected one of {SYNTHETIC_KINDS}")


def chain_from_arrays(
    uf: Sequence[float],
    ub: Sequence[float],
    wx: Sequence[float],
    wbx: Sequence[float],
    wy: Sequence[float],
    of: Sequence[float] | None = None,
    ob: Sequence[float] | None = None,
    **kwargs: Any,
) -> ChainSpec:
    """Build a spec from short-named arrays (``uf`` has ``L+1`` entries)."""
    n = len(uf)
    return ChainSpec(
        length=n - 1,
        fwd_time=uf,
        bwd_time=ub,
        act_size=wx,
        full_size=wbx,
        grad_size=wy,
        fwd_overhead=of if of is not None else [0.0] * n,
        bwd_overhead=ob if ob is not None else [0.0] * n,
        **kwargs,
    )
