import random

import numpy as np
import pytest
from conftest import example_trace, explicit_sel_violated, frame_states, value_pred
from hypothesis import given, settings
from hypothesis import strategies as st

from kavymc.bench import bad_state_mask, gen_counter, gen_passthrough, gen_random_aig, gen_stuck, image, random_extendable_trace
from kavymc.cnf import InvalidSel
from kavymc.kavy import max_sel_exhaustive
from kavymc.trace import (
    FrameSolver,
    InductiveTrace,
    Sel,
    closed_level,
    is_closed,
    is_k_inductive_relative,
    is_monotone,
    is_safe,
    is_sel,
    is_stronger,
    is_trace,
    max_extension_level,
    pdr_push,
)


def test_init_only_trace():
    tr = InductiveTrace(gen_counter(), 0)
    assert is_trace(tr) and is_safe(tr) and is_monotone(tr)
    assert is_closed(tr) is None


def test_counter_example_trace_predicates():
    tr = example_trace()
    assert is_trace(tr) and is_safe(tr) and is_monotone(tr)
    assert max_extension_level(tr) == 0
    assert is_sel(tr, 1, 2)
    assert not is_sel(tr, 1, 1)


def test_too_strong_frame_is_not_a_trace():
    p = value_pred(8, lambda v: v < 2)
    assert is_trace(InductiveTrace.from_frames(gen_counter(), [p]))
    # c = 1 steps to c = 2
    assert not is_trace(InductiveTrace.from_frames(gen_counter(), [p, p]))


def test_no_extension_when_bad_is_one_step_away():
    tr = InductiveTrace(gen_passthrough(), 0)
    assert max_extension_level(tr) is None


def test_equal_frames_close():
    p = value_pred(8, lambda v: v < 66)
    tr = InductiveTrace.from_frames(gen_counter(), [p, p])
    assert is_closed(tr) == 2


def test_sel_side_condition():
    with pytest.raises(InvalidSel):
        is_sel(example_trace(), 1, 3)


def test_sel_ordering():
    assert Sel(1, 2) > Sel(0, 1)
    assert max([Sel(1, 2), Sel(1, 1), Sel(0, 1)], key=lambda s: (s.i, -s.k)) == Sel(1, 1)


def test_push_inductive_frame_closes():
    ts = gen_stuck()
    tr = InductiveTrace(ts, 3)
    tr.add_clause((-1,), 1)
    pdr_push(tr)
    assert tr.level_of((-1,)) == 3
    assert is_closed(tr) is not None


def test_push_stops_at_non_inductive_predicate():
    tr = example_trace()
    tr.new_level()
    pdr_push(tr)
    # single clauses such as c < 128 move up, c < 66 as a whole does not (65 steps to 66)
    assert 66 in frame_states(tr, 2)
    assert 128 not in frame_states(tr, 2)
    assert frame_states(tr, 1).tolist() == list(range(66))


def test_dump_is_stable():
    tr = example_trace()
    assert tr.dump() == example_trace().dump()
    assert tr.dump().startswith("trace N=1\nlevel 0 (init)\n")


def test_subsumption_on_add():
    tr = InductiveTrace(gen_counter(), 2)
    tr.add_clause((1, 2, 3), 1)
    tr.add_clause((1, 2), 2)
    assert tr.frame(1) == [(1, 2)]
    assert not tr.add_clause((1, 2, 4), 1)


def _random_trace(seed):
    rng = random.Random(seed)
    ts = gen_random_aig(seed, rng.randint(1, 4), rng.randint(0, 14), rng.randint(0, 2), bad_terms=rng.randint(1, 3))
    n = ts.num_latches
    frames = []
    for _ in range(rng.randint(1, 3)):
        frames.append([tuple(rng.choice([-1, 1]) * v for v in rng.sample(range(1, n + 1), rng.randint(1, n)))
                       for _ in range(rng.randint(0, 3))])
    return InductiveTrace.from_frames(ts, frames)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_predicates_match_explicit_states(seed):
    tr = _random_trace(seed)
    ts, N = tr.ts, tr.size
    S = [frame_states(tr, i) for i in range(N + 1)]
    bad = bad_state_mask(ts)
    sub = lambda a, b: bool(np.isin(a, b).all())
    assert is_trace(tr) == all(sub(image(ts, S[i]), S[i + 1]) for i in range(N))
    assert is_safe(tr) == (not any(bad[s].any() for s in S))
    assert is_monotone(tr) == all(sub(S[i], S[i + 1]) for i in range(N))
    closed = next((i for i in range(1, N + 1) if sub(S[i], S[i - 1])), None)
    assert is_closed(tr) == closed
    for i in range(N + 1):
        for k in range(1, i + 2):
            assert is_sel(tr, i, k) == (not explicit_sel_violated(tr, i, k))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_push_is_idempotent_and_stronger(seed):
    ts = gen_random_aig(seed, 4, 16, 1, bad_terms=2)
    tr = random_extendable_trace(ts, random.Random(seed))
    if tr is None:
        return
    orig = tr.copy()
    pdr_push(tr)
    assert is_stronger(tr, orig) and is_trace(tr) and is_monotone(tr)
    once = tr.dump()
    pdr_push(tr)
    assert tr.dump() == once
    fs = FrameSolver(tr)
    assert closed_level(tr, fs) == is_closed(tr)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_deeper_induction_only_helps(seed):
    ts = gen_random_aig(seed, 4, 16, 1, bad_terms=2)
    tr = random_extendable_trace(ts, random.Random(seed))
    if tr is None:
        return
    for i in range(tr.size + 1):
        for k in range(1, i + 1):
            if is_sel(tr, i, k):
                assert is_sel(tr, i, k + 1)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_max_sel_reaches_extension_level(seed):
    ts = gen_random_aig(seed, 4, 16, 1, bad_terms=2)
    tr = random_extendable_trace(ts, random.Random(seed))
    if tr is None:
        return
    assert max_sel_exhaustive(tr).i >= max_extension_level(tr)


def test_relative_induction_depth_of_counter_property():
    ts = gen_counter()
    p = value_pred(8, lambda v: v < 66)
    assert not is_k_inductive_relative(ts, p, [], 1)
    assert is_k_inductive_relative(ts, p, [], 2)


def test_stronger_is_a_preorder():
    a = example_trace()
    b = InductiveTrace.from_frames(gen_counter(), [value_pred(8, lambda v: v < 65)])
    assert is_stronger(a, a)
    assert is_stronger(b, a) and not is_stronger(a, b)
