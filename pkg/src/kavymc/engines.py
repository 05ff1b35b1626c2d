"""Bounded model checking and k-induction over one incremental unrolling each."""

from __future__ import annotations

import time

from .aiger import TransitionSystem
from .cnf import VarMap, bad_literal, encode_bad_cone, encode_init, encode_tr
from .result import CheckResult, Verdict, Witness
from .sat import QueryCounter, Solver

__all__ = ["Unrolling", "bmc", "kind"]


class Unrolling:
    """Frames ``0..depth`` of the system in a single solver, grown on demand."""

    def __init__(self, ts: TransitionSystem, init: bool, counter: QueryCounter | None = None,
                 seed: int = 0, conflict_budget: int | None = None) -> None:
        self.ts = ts
        self.vm = VarMap()
        self.solver = Solver(seed=seed, conflict_budget=conflict_budget, counter=counter)
        self.depth = 0
        self._bad: dict[int, object] = {}
        if init:
            self._add(encode_init(ts, 0, self.vm).clauses)
        for j in range(ts.num_latches):
            self.vm.latch(j, 0)

    def _add(self, clauses) -> None:
        for c in clauses:
            self.solver.add_clause(c)

    def grow(self) -> None:
        self._add(encode_tr(self.ts, self.depth, self.vm).clauses)
        self.depth += 1

    def bad(self, t: int):
        """Literal for Bad at frame ``t`` (or a constant bool)."""
        if t not in self._bad:
            defs, lit = encode_bad_cone(self.ts, t, self.vm)
            self._add(defs.clauses)
            self._bad[t] = lit
        return self._bad[t]

    def solve_bad(self, t: int) -> bool:
        b = self.bad(t)
        if b is False:
            return False
        return self.solver.solve([] if b is True else [b])

    def assert_good(self, t: int) -> None:
        b = self.bad(t)
        if b is True:
            self.solver.add_clause([])
        elif b is not False:
            self.solver.add_clause([-b])

    def state(self, t: int) -> tuple[bool, ...]:
        return tuple(self.solver.value(self.vm.latch(j, t)) for j in range(self.ts.num_latches))

    def witness(self, last: int) -> Witness:
        ts = self.ts
        inputs = [tuple(self.solver.value(self.vm.var("I", j, t)) for j in range(ts.num_inputs))
                  for t in range(last + 1)]
        init = self.state(0) if any(latch.init is None for latch in ts.latches) else None
        return Witness(inputs, init)

    def distinct(self, a: int, b: int) -> None:
        """Permanently require the states at frames ``a`` and ``b`` to differ."""
        n = self.ts.num_latches
        if n == 0:
            self.solver.add_clause([])
            return
        diffs = []
        for j in range(n):
            x, y = self.vm.latch(j, a), self.vm.latch(j, b)
            d = self.vm.fresh(("diff", a, b, j))
            self.solver.add_clause([-d, x, y])
            self.solver.add_clause([-d, -x, -y])
            diffs.append(d)
        self.solver.add_clause(diffs)


def bmc(
    ts: TransitionSystem,
    max_depth: int = 20,
    seed: int = 0,
    conflict_budget: int | None = None,
    time_limit: float | None = None,
) -> CheckResult:
    """UNSAFE at the least depth ``N <= max_depth`` with a reachable bad state."""
    t0 = time.perf_counter()
    counter = QueryCounter()
    u = Unrolling(ts, True, counter, seed, conflict_budget)
    rows = []
    for n in range(max_depth + 1):
        while u.depth < n:
            u.grow()
        if u.solve_bad(n):
            w = u.witness(n)
            return CheckResult(Verdict.UNSAFE, "bmc", witness=w, depth=n, queries=counter.queries,
                               seconds=time.perf_counter() - t0, rows=rows)
        rows.append({"frames": n, "sel": "", "queries": counter.queries, "clauses": 0,
                     "time": round(time.perf_counter() - t0, 6)})
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            break
    return CheckResult(Verdict.UNKNOWN, "bmc", depth=max_depth, queries=counter.queries,
                       seconds=time.perf_counter() - t0, rows=rows)


def kind(
    ts: TransitionSystem,
    max_k: int = 30,
    simple_path: bool = True,
    seed: int = 0,
    conflict_budget: int | None = None,
    time_limit: float | None = None,
) -> CheckResult:
    """k-induction.  SAFE at the least ``k`` whose base and step both hold.

    The step unrolling starts anywhere, assumes the property on frames
    ``0..k-1`` and asks for Bad at ``k``.  Simple-path constraints are added
    lazily: only a pair of frames found equal in a step model gets its
    distinctness clause, after which the step query is repeated.
    """
    t0 = time.perf_counter()
    counter = QueryCounter()
    base = Unrolling(ts, True, counter, seed, conflict_budget)
    step = Unrolling(ts, False, counter, seed, conflict_budget)
    rows = []
    for k in range(1, max_k + 1):
        # base: no counterexample of length k-1
        while base.depth < k - 1:
            base.grow()
        if base.solve_bad(k - 1):
            w = base.witness(k - 1)
            return CheckResult(Verdict.UNSAFE, "kind", witness=w, depth=k - 1, queries=counter.queries,
                               seconds=time.perf_counter() - t0, rows=rows)
        base.assert_good(k - 1)
        # step: k good states followed by a bad one
        step.assert_good(k - 1)
        step.grow()
        while True:
            if not step.solve_bad(k):
                rows.append({"frames": k, "sel": "", "queries": counter.queries, "clauses": 0,
                             "time": round(time.perf_counter() - t0, 6)})
                return CheckResult(Verdict.SAFE, "kind", depth=k, queries=counter.queries,
                                   seconds=time.perf_counter() - t0, rows=rows, extra={"k": k})
            if not simple_path:
                break
            seen: dict[tuple[bool, ...], int] = {}
            pair = None
            for t in range(k + 1):
                s = step.state(t)
                if s in seen:
                    pair = (seen[s], t)
                    break
                seen[s] = t
            if pair is None:
                break
            step.distinct(*pair)
        rows.append({"frames": k, "sel": "", "queries": counter.queries, "clauses": 0,
                     "time": round(time.perf_counter() - t0, 6)})
        if time_limit is not None and time.perf_counter() - t0 > time_limit:
            return CheckResult(Verdict.UNKNOWN, "kind", depth=k, queries=counter.queries,
                               seconds=time.perf_counter() - t0, rows=rows)
    return CheckResult(Verdict.UNKNOWN, "kind", depth=max_k, queries=counter.queries,
                       seconds=time.perf_counter() - t0, rows=rows)
