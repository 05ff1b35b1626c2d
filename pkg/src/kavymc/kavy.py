"""Trace extension guided by strong (k-)induction, its SEL searches and the
main checking loop, plus the 1-inductive ``vanilla`` variant."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from .aiger import AigBuilder, TransitionSystem
from .cnf import VarMap, characteristic_formula
from .itp import DEFAULT_SYSTEM, refute_and_interpolate, validate_seq_interpolant
from .pdr import _init_bad_check, pdr_block
from .result import CheckResult, Verdict, Witness
from .sat import QueryCounter, Solver
from .trace import (
    FrameSolver,
    InductiveTrace,
    Sel,
    closed_level,
    frame_aig,
    is_sel,
    max_extension_level,
    pdr_push,
)

__all__ = [
    "KavyInternalError",
    "SelSearch",
    "max_sel_topdown",
    "max_sel_bottomup",
    "max_sel_exhaustive",
    "kavy_extend",
    "kavy_engine",
    "vanilla_engine",
    "ItpLog",
]


class KavyInternalError(AssertionError):
    """A blocking call inside trace extension failed although the SEL
    guarantees it cannot."""


@dataclass
class SelSearch:
    sel: Sel
    suffix_queries: int = 0  # queries of the first phase
    depth_queries: int = 0  # queries spent on the induction depth
    first: Sel | None = None  # bottom-up: the regular extension level found first

    @property
    def queries(self) -> int:
        return self.suffix_queries + self.depth_queries


def max_sel_topdown(trace: InductiveTrace, counter: QueryCounter | None = None) -> SelSearch:
    """Smallest suffix at maximal induction depth, then the least depth."""
    res = SelSearch(Sel(0, 1))
    i = trace.size
    while i > 0:
        res.suffix_queries += 1
        if is_sel(trace, i, i + 1, counter):
            break
        i -= 1
    k = 1
    while k < i + 1:
        res.depth_queries += 1
        if is_sel(trace, i, k, counter):
            break
        k += 1
    res.sel = Sel(i, k)
    return res


def max_sel_bottomup(
    trace: InductiveTrace,
    counter: QueryCounter | None = None,
    max_queries: int | None = None,
) -> SelSearch:
    """Largest regular extension level first, then grow it with deeper induction.

    ``max_queries`` aborts the growing phase early, returning the best SEL
    found so far.
    """
    N = trace.size
    res = SelSearch(Sel(0, 1))
    j = N
    while j > 0:
        res.suffix_queries += 1
        if is_sel(trace, j, 1, counter):
            break
        j -= 1
    best = Sel(j, 1)
    res.first = best
    j, ell = j + 1, 2
    while ell <= j + 1 and j <= N:
        if max_queries is not None and res.queries >= max_queries:
            break
        res.depth_queries += 1
        if not is_sel(trace, j, ell, counter):
            ell += 1
        else:
            best = Sel(j, ell)
            j += 1
    res.sel = best
    return res


def max_sel_exhaustive(trace: InductiveTrace) -> Sel | None:
    """Reference search over every pair; ``None`` when nothing is an SEL."""
    best = None
    for i in range(trace.size + 1):
        for k in range(1, i + 2):
            if is_sel(trace, i, k):
                cand = Sel(i, k)
                if best is None or (cand.i, -cand.k) > (best.i, -best.k):
                    best = cand
    return best


@dataclass
class ItpLog:
    """Collects validation outcomes of every interpolant computed."""

    checked: int = 0
    failures: list[str] = field(default_factory=list)


def state_bad(ts: TransitionSystem, b: AigBuilder) -> int | None:
    """Bad as a formula over latch-index leaves, or ``None`` if it reads inputs."""
    kind = ts.var_kind
    memo = {0: b.FALSE}
    for gi in ts.bad_cone:
        g = ts.ands[gi]
        for lit in (g.rhs0, g.rhs1):
            v = lit >> 1
            if v and kind[v][0] == "input":
                return None
    if (ts.bad >> 1) and kind[ts.bad >> 1][0] == "input":
        return None

    def get(lit: int) -> int:
        v = lit >> 1
        if v not in memo:
            memo[v] = b.leaf(kind[v][1] + 1)
        return memo[v] ^ (lit & 1)

    for gi in ts.bad_cone:
        g = ts.ands[gi]
        memo[g.lhs >> 1] = b.and_(get(g.rhs0), get(g.rhs1))
    return get(ts.bad)


def kavy_extend(
    trace: InductiveTrace,
    sel: Sel,
    gen: bool = True,
    counter: QueryCounter | None = None,
    system: str = DEFAULT_SYSTEM,
    itp_log: ItpLog | None = None,
    seed: int = 0,
    conflict_budget: int | None = None,
    property_frontier: bool = True,
) -> tuple[InductiveTrace, FrameSolver]:
    """Extend ``trace`` (size N) to a monotone clausal safe trace of size N+1.

    With ``property_frontier`` the last interpolant ``I_{N+1}`` is replaced by
    the weakest admissible one, "not Bad", whenever Bad reads no inputs
    (the sequence conditions still hold because ``I_{N+1}`` only has to
    follow from ``I_N & A_N`` and exclude Bad).

    Returns the new trace and the frame solver attached to it.
    """
    i, k = sel.i, sel.k
    N = trace.size
    vm = VarMap()
    cnf = characteristic_formula(trace, i, k, vm)
    itp, part, _ = refute_and_interpolate(cnf, system, counter)
    if itp is None:
        raise KavyInternalError(f"{sel} is not a strong extension level")
    if property_frontier:
        bad = state_bad(trace.ts, itp.builder)
        if bad is not None:
            itp.roots[N + 1] = bad ^ 1
    if itp_log is not None:
        ok, msg = validate_seq_interpolant(itp, part)
        itp_log.checked += 1
        if not ok:
            itp_log.failures.append(f"N={N} sel=({i},{k}): {msg}")

    g = trace.copy()
    g.new_level()
    fs = FrameSolver(g, counter, seed, conflict_budget)
    b = AigBuilder()
    itp_memo: dict[int, int] = {}

    def I(j: int) -> int:
        if j not in itp_memo:
            itp_memo[j] = itp.builder.copy_into(b, itp[j], b.leaf)
        return itp_memo[j]

    def target(lo: int, hi: int, j_itp: int) -> tuple[AigBuilder, int]:
        # P = G_lo | (G_hi & I_j), frames snapshotted now
        return b, b.or_(frame_aig(b, g.frame(lo)), b.and_(frame_aig(b, g.frame(hi)), I(j_itp)))

    def block(level: int, tgt, what: str) -> None:
        r = pdr_block(g, fs, level=level, target=tgt, gen=gen, confine=True)
        if not r:
            raise KavyInternalError(f"{what}: blocking at level {level} reached an initial state")

    for j in range(i - k + 1, i):
        block(i + 1, target(j, i + 1, j + 1), f"phase 1, j={j}")
    block(i + 1, target(i, i + 1, i + 1), "phase 2")
    for j in range(i + 1, N + 1):
        block(j + 1, target(j, j + 1, j + 1), f"phase 3, j={j}")
        pdr_push(g, fs)
    return g, fs


def _unsafe_witness(trace: InductiveTrace, counter: QueryCounter) -> Witness | None:
    """Model of the level-0 suffix query with Bad at N+1, as a stimulus."""
    ts = trace.ts
    vm = VarMap()
    s = Solver(counter=counter)
    for c in characteristic_formula(trace, 0, 1, vm).clauses:
        s.add_clause(c)
    if not s.solve():
        return None
    inputs = [tuple(s.value(vm.var("I", j, t)) for j in range(ts.num_inputs)) for t in range(trace.size + 2)]
    init = None
    if any(latch.init is None for latch in ts.latches):
        init = tuple(s.value(vm.latch(j, 0)) for j in range(ts.num_latches))
    return Witness(inputs, init)


def kavy_engine(
    ts: TransitionSystem,
    max_frames: int = 50,
    sel_strategy: str = "topdown",
    gen: bool = True,
    seed: int = 0,
    conflict_budget: int | None = None,
    vanilla: bool = False,
    time_limit: float | None = None,
    system: str = DEFAULT_SYSTEM,
    itp_log: ItpLog | None = None,
    on_trace: Callable[[InductiveTrace], None] | None = None,
    property_frontier: bool = True,
) -> CheckResult:
    """Main loop.  ``on_trace`` sees every extendable trace before its SEL search."""
    name = "vanilla" if vanilla else "kavy"
    t0 = time.perf_counter()
    counter = QueryCounter()
    w = _init_bad_check(ts, counter)
    if w is not None:
        return CheckResult(Verdict.UNSAFE, name, witness=w, depth=0, queries=counter.queries,
                           seconds=time.perf_counter() - t0)
    trace = InductiveTrace(ts, 0)
    rows: list[dict] = []
    sels: list[Sel] = []
    while True:
        wit = _unsafe_witness(trace, counter)
        if wit is not None:
            return CheckResult(Verdict.UNSAFE, name, witness=wit, depth=wit.length, queries=counter.queries,
                               seconds=time.perf_counter() - t0, rows=rows, extra={"sels": sels})
        if on_trace is not None:
            on_trace(trace)
        if vanilla:
            lvl = max_extension_level(trace, counter)
            sel = Sel(lvl if lvl is not None else 0, 1)
        elif sel_strategy == "bottomup":
            sel = max_sel_bottomup(trace, counter).sel
        elif sel_strategy == "topdown":
            sel = max_sel_topdown(trace, counter).sel
        else:
            raise ValueError(f"unknown SEL strategy {sel_strategy!r}")
        sels.append(sel)
        trace, fs = kavy_extend(trace, sel, gen, counter, system, itp_log, seed, conflict_budget, property_frontier)
        pdr_push(trace, fs)
        closed = closed_level(trace, fs)
        rows.append({"frames": trace.size, "sel": f"({sel.i},{sel.k})", "queries": counter.queries,
                     "clauses": trace.num_clauses(), "time": round(time.perf_counter() - t0, 6)})
        if closed is not None:
            return CheckResult(Verdict.SAFE, name, invariant=trace.frame(closed), depth=trace.size,
                               queries=counter.queries, seconds=time.perf_counter() - t0, rows=rows,
                               extra={"sels": sels, "closed_at": closed, "trace": trace})
        if trace.size >= max_frames or (time_limit is not None and time.perf_counter() - t0 > time_limit):
            return CheckResult(Verdict.UNKNOWN, name, depth=trace.size, queries=counter.queries,
                               seconds=time.perf_counter() - t0, rows=rows, extra={"sels": sels})


def vanilla_engine(ts: TransitionSystem, max_frames: int = 50, **kw) -> CheckResult:
    """kAvy with every extension forced to ``(max extension level, 1)``."""
    return kavy_engine(ts, max_frames, vanilla=True, **kw)
