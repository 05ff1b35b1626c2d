"""Backward blocking over an inductive trace, inductive generalization and a
plain PDR engine built from them."""

from __future__ import annotations

import heapq
import itertools
import time
from dataclasses import dataclass, field

from .aiger import AigBuilder, TransitionSystem
from .cnf import Clause, normalize_clause
from .result import CheckResult, Verdict, Witness
from .sat import QueryCounter, Solver
from .trace import FrameSolver, InductiveTrace, closed_level, pdr_push

__all__ = ["Obligation", "BlockResult", "pdr_block", "ind_gen", "pdr_engine", "init_consistent", "chain_witness"]


@dataclass
class Obligation:
    state: tuple[int, ...]  # full minterm over latches (model literals)
    level: int
    succ: "Obligation | None" = None
    inputs: tuple[bool, ...] = ()  # inputs driving this state to ``succ`` (or into Bad)


@dataclass
class BlockResult:
    ok: bool
    min_level: int | None = None
    learned: list[tuple[int, Clause]] = field(default_factory=list)
    chain: list[Obligation] = field(default_factory=list)  # failure: first state first

    def __bool__(self) -> bool:
        return self.ok


def init_consistent(cube, init) -> bool:
    """Does ``cube`` intersect the Init cube?"""
    neg = {-m for c in init for m in c}
    return not any(m in neg for m in cube)


def ind_gen(
    fs: FrameSolver,
    cube: tuple[int, ...],
    level: int,
    core: list[int] | None = None,
    enabled: bool = True,
    keep_out: int | None = None,
) -> Clause:
    """Shrink ``not cube`` while it stays init-consistent and inductive
    relative to ``F_{level-1}``.

    With ``keep_out`` (a frame-0 literal of the solver) the shrunk cube must
    also stay disjoint from it, so the learned clause is implied by that
    predicate.
    """
    if not enabled:
        return normalize_clause(-m for m in cube)
    init = fs.trace.init

    def confined(c) -> bool:
        return keep_out is None or not fs.solve(fs.state_lits(c, 0) + [keep_out])

    cur = list(cube)
    if core is not None:
        kept = [m for m in cube if m in set(core)]
        if not init_consistent(kept, init) or not init:
            cur = kept
        else:
            # restore a literal that contradicts Init
            neg = {-m for c in init for m in c}
            cur = kept + [next(m for m in cube if m in neg)]
        if not confined(cur):
            # add back the cube literals that keep it outside the predicate
            if fs.solve(fs.state_lits(cube, 0) + [keep_out]):
                cur = list(cube)
            else:
                lit_of = dict(zip(fs.state_lits(cube, 0), cube))
                need = {lit_of[x] for x in fs.solver.core if x in lit_of}
                cur = [m for m in cube if m in need or m in cur]
    for m in list(cur):
        if m not in cur or len(cur) == 1:
            continue
        trial = [x for x in cur if x != m]
        if init_consistent(trial, init) or not confined(trial):
            continue
        act = fs.add_temp_clause([-x for x in fs.state_lits(trial, 0)])
        nxt = fs.state_lits(trial, 1)
        unsat = not fs.solve(fs.frame_assumptions(level - 1) + [act] + nxt)
        if unsat:
            used = set(fs.solver.core)
            reduced = [x for x, v in zip(trial, nxt) if v in used]
            if init_consistent(reduced, init):
                neg = {-q for c in init for q in c}
                reduced.append(next(x for x in trial if x in neg))
            # not-reduced implies not-trial, so the query stays UNSAT for it
            if len(reduced) < len(trial) and confined(reduced):
                trial = reduced
            cur = trial
        fs.release(act)
    return normalize_clause(-x for x in cur)


def pdr_block(
    trace: InductiveTrace,
    fs: FrameSolver | None = None,
    level: int | None = None,
    target: tuple[AigBuilder, int] | None = None,
    gen: bool = True,
    confine: bool = False,
) -> BlockResult:
    """Strengthen ``F_1..F_level`` until ``F_level`` implies the target.

    ``target`` is ``(builder, root)`` over latch-index leaves; ``None`` means
    "not Bad".  On failure the obligation chain (from an initial state to a
    target-violating state) is returned and the trace keeps whatever was
    learned so far.  With ``confine`` the clauses learned for obligations at
    ``level`` itself are generalized only within the target's complement, so
    they are implied by the target.
    """
    if fs is None:
        fs = FrameSolver(trace)
    L = trace.size if level is None else level
    if not 1 <= L <= trace.size:
        raise ValueError(f"blocking level {L} outside 1..{trace.size}")
    if target is None:
        viol = fs.bad0
    else:
        viol = fs.target_literal(*target)
        viol = (not viol) if isinstance(viol, bool) else -viol
    if viol is False:
        return BlockResult(True)
    res = BlockResult(True)
    tick = itertools.count()
    while True:
        assumps = fs.frame_assumptions(L) + ([] if viol is True else [viol])
        if not fs.solve(assumps):
            return res
        top = Obligation(fs.model_state(0), L, None, fs.model_inputs(0))
        heap = [(L, next(tick), top)]
        while heap:
            d, _, ob = heapq.heappop(heap)
            if d == 0 or init_consistent(ob.state, trace.init):
                res.ok = False
                chain = []
                node: Obligation | None = ob
                while node is not None:
                    chain.append(node)
                    node = node.succ
                res.chain = chain
                return res
            nxt = fs.state_lits(ob.state, 1)
            if fs.solve(fs.frame_assumptions(d - 1) + nxt):
                pred = Obligation(fs.model_state(0), d - 1, ob, fs.model_inputs(0))
                heapq.heappush(heap, (d - 1, next(tick), pred))
                heapq.heappush(heap, (d, next(tick), ob))
                continue
            lit_of = dict(zip(nxt, ob.state))
            core = [lit_of[x] for x in fs.solver.core if x in lit_of]
            keep_out = None
            if confine and d == L and target is not None and viol is not True:
                keep_out = -viol
            clause = ind_gen(fs, ob.state, d, core, gen, keep_out)
            trace.add_clause(clause, d)
            fs.sync()
            res.learned.append((d, clause))
            res.min_level = d if res.min_level is None else min(res.min_level, d)


def chain_witness(ts: TransitionSystem, chain: list[Obligation]) -> Witness:
    """Stimulus for a failed blocking run against "not Bad"."""
    first = chain[0].state
    init = None
    if any(latch.init is None for latch in ts.latches):
        init = tuple(m > 0 for m in first)
    return Witness([ob.inputs for ob in chain], init)


def _init_bad_check(ts: TransitionSystem, counter: QueryCounter) -> Witness | None:
    """Witness of length 0 when some initial state is bad."""
    from .cnf import VarMap, encode_bad, encode_init

    vm = VarMap()
    s = Solver(counter=counter)
    for c in encode_init(ts, 0, vm).clauses + encode_bad(ts, 0, vm).clauses:
        s.add_clause(c)
    if not s.solve():
        return None
    inputs = tuple(s.value(vm.var("I", j, 0)) for j in range(ts.num_inputs))
    init = None
    if any(latch.init is None for latch in ts.latches):
        init = tuple(s.value(vm.latch(j, 0)) for j in range(ts.num_latches))
    return Witness([inputs], init)


def pdr_engine(
    ts: TransitionSystem,
    max_frames: int = 100,
    gen: bool = True,
    seed: int = 0,
    conflict_budget: int | None = None,
    time_limit: float | None = None,
) -> CheckResult:
    t0 = time.perf_counter()
    counter = QueryCounter()
    w = _init_bad_check(ts, counter)
    if w is not None:
        return CheckResult(Verdict.UNSAFE, "pdr", witness=w, depth=0, queries=counter.queries,
                           seconds=time.perf_counter() - t0)
    trace = InductiveTrace(ts, 1)
    fs = FrameSolver(trace, counter, seed, conflict_budget)
    rows = []
    while True:
        r = pdr_block(trace, fs, gen=gen)
        if not r:
            wit = chain_witness(ts, r.chain)
            return CheckResult(Verdict.UNSAFE, "pdr", witness=wit, depth=wit.length,
                               queries=counter.queries, seconds=time.perf_counter() - t0, rows=rows)
        pdr_push(trace, fs)
        closed = closed_level(trace, fs)
        rows.append({"frames": trace.size, "sel": "", "queries": counter.queries,
                     "clauses": trace.num_clauses(), "time": time.perf_counter() - t0})
        if closed is not None:
            return CheckResult(Verdict.SAFE, "pdr", invariant=trace.frame(closed), depth=trace.size,
                               queries=counter.queries, seconds=time.perf_counter() - t0, rows=rows)
        if trace.size >= max_frames or (time_limit and time.perf_counter() - t0 > time_limit):
            return CheckResult(Verdict.UNKNOWN, "pdr", depth=trace.size, queries=counter.queries,
                               seconds=time.perf_counter() - t0, rows=rows)
        trace.new_level()
