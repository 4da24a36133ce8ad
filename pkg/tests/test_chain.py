import json
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from chainckpt.chain import (ChainSpec, ProfileError, discretize, emit_profile, homogeneous_chain,
                             load_profile, random_chain, slots_for, synthetic_chain)

DOC = {"length": 1, "fwd_time": [3, 1], "bwd_time": [2, 1], "act_size": [1, 1], "full_size": [2, 2],
       "grad_size": [1, 1, 0], "fwd_overhead": [0, 0], "bwd_overhead": [0, 0]}


def test_load_profile_l1():
    spec = load_profile(json.dumps(DOC))
    assert spec.length == 1
    assert spec.fwd_time == (3.0, 1.0)
    assert spec.padded("grad_size") == [1.0, 1.0, 0.0]
    assert spec.padded("fwd_time") == [0.0, 3.0, 1.0]


def test_missing_loss_stage_names_uf():
    doc = dict(DOC, fwd_time=[3])
    with pytest.raises(ProfileError, match=r"uf") as exc:
        load_profile(json.dumps(doc))
    assert exc.value.field == "fwd_time"


def test_negative_size_names_index():
    doc = dict(DOC, length=2, fwd_time=[1, 1, 1], bwd_time=[1, 1, 1], act_size=[1, 1, -1],
               full_size=[1, 1, 1], grad_size=[1] * 4, fwd_overhead=[0] * 3, bwd_overhead=[0] * 3)
    with pytest.raises(ProfileError, match=r"wx\[2\]") as exc:
        load_profile(json.dumps(doc))
    assert exc.value.index == 2


@pytest.mark.parametrize("text", ["{", "[]", json.dumps(dict(DOC, extra=1)),
                                  json.dumps({k: v for k, v in DOC.items() if k != "act_size"})])
def test_bad_documents(text):
    with pytest.raises(ProfileError):
        load_profile(text)


def test_profile_round_trip():
    spec = random_chain(6, seed=3, overhead_range=(0, 2))
    assert load_profile(emit_profile(spec)) == spec


@pytest.mark.parametrize("size,expected", [(0, 0), (3, 2), (2, 1), (2.5, 2), (1000, 500)])
def test_slot_rounding(size, expected):
    assert slots_for(size, Fraction(1000, 500)) == expected


def test_discretize_padding():
    chain = discretize(homogeneous_chain(3), 10, 10)
    assert list(chain.wx) == [1, 1, 1, 1, 0]
    assert list(chain.wbx) == [0, 1, 1, 1, 1]
    assert list(chain.wy) == [1] * 5
    assert list(chain.uf) == [0, 1, 1, 1, 1]
    assert chain.slot_size == 1


def test_discretize_rejects_bad_args():
    spec = homogeneous_chain(2)
    with pytest.raises(ValueError):
        discretize(spec, 0, 10)
    with pytest.raises(ValueError):
        discretize(spec, 10, 0)


@given(st.floats(0, 1e6), st.integers(1, 1000), st.floats(1, 1e6))
def test_rounding_bounds(size, slots, budget):
    spec = homogeneous_chain(1, size=size)
    chain = discretize(spec, budget, slots)
    k = int(chain.wx[0])
    # never underestimates, overestimates by less than one slot
    assert k * chain.slot_size >= Fraction(size)
    assert (k - 1) * chain.slot_size < Fraction(size) or k == 0


@given(st.floats(0, 100), st.floats(0, 100), st.integers(1, 64))
def test_rounding_monotone(a, b, slots):
    lo, hi = sorted((a, b))
    sz = Fraction(100, slots)
    assert slots_for(lo, sz) <= slots_for(hi, sz)


def test_homogeneous_values():
    spec = synthetic_chain("homogeneous", {"length": 3, "time": 1, "size": 1})
    assert spec.fwd_time == spec.bwd_time == (1.0,) * 4
    assert spec.act_size == spec.full_size == (1.0,) * 4
    assert spec.grad_size == (1.0,) * 5
    assert spec.fwd_overhead == spec.bwd_overhead == (0.0,) * 4


def test_random_is_deterministic():
    a = synthetic_chain("random-heterogeneous", {"length": 4}, seed=11)
    b = synthetic_chain("random-heterogeneous", {"length": 4}, seed=11)
    assert a == b
    assert a != synthetic_chain("random-heterogeneous", {"length": 4}, seed=12)


def test_random_nested_sizes():
    spec = random_chain(8, seed=0)
    for i in range(spec.length):
        assert spec.full_size[i] >= spec.act_size[i + 1]


def test_counterexample_values():
    spec = synthetic_chain("counterexample", {"n": 5})
    assert spec.length == 7
    assert spec.fwd_time == (4, 2, 0, 0, 0, 0, 0, 0)
    assert spec.act_size == (0, 1, 2, 3, 3, 3, 3, 4)
    assert synthetic_chain("counterexample", {"n": 1}).length == 3


def test_unknown_kind():
    with pytest.raises(ValueError):
        synthetic_chain("spiral")
    with pytest.raises(ValueError):
        synthetic_chain("homogeneous", {"width": 3})


def test_spec_is_immutable():
    spec = homogeneous_chain(2)
    with pytest.raises(AttributeError):
        spec.length = 3
    assert isinstance(spec, ChainSpec)
