"""Independent checks of safety certificates and counterexample witnesses.

The invariant checker re-encodes the AIG on its own (solver variable
``frame * (max_var + 1) + aig_var``) instead of reusing the engines'
:class:`~kavymc.cnf.VarMap`, so an encoder bug cannot hide an engine bug.
"""

from __future__ import annotations

from typing import Iterable, Sequence

from .aiger import TransitionSystem, simulate
from .result import Witness
from .sat import Solver
from .trace import InductiveTrace, is_closed

__all__ = ["extract_invariant", "check_invariant", "check_witness", "check_k_induction", "NotClosed", "format_invariant"]


class NotClosed(ValueError):
    pass


def extract_invariant(trace: InductiveTrace) -> list[tuple[int, ...]]:
    """``F_i`` at the least closing level ``i``."""
    i = is_closed(trace)
    if i is None:
        raise NotClosed("trace is not closed")
    return trace.frame(i)


class _Encoder:
    def __init__(self, ts: TransitionSystem, frames: int = 2) -> None:
        self.ts = ts
        self.stride = ts.max_var + 1
        self.solver = Solver()
        self.true = frames * self.stride + 1  # beyond the frames used
        self.fresh = self.true
        self.solver.add_clause([self.true])

    def lit(self, aig_lit: int, frame: int) -> int:
        v = aig_lit >> 1
        x = self.true if v == 0 else frame * self.stride + v
        # AIG constant 0 is false: var 0 maps to "true" negated
        if v == 0:
            return x if aig_lit & 1 else -x
        return -x if aig_lit & 1 else x

    def latch_lit(self, mlit: int, frame: int) -> int:
        latch = self.ts.latches[abs(mlit) - 1]
        x = self.lit(latch.lit, frame)
        return x if mlit > 0 else -x

    def gates(self, frame: int) -> None:
        for g in self.ts.ands:
            o = self.lit(g.lhs, frame)
            a, b = self.lit(g.rhs0, frame), self.lit(g.rhs1, frame)
            self.solver.add_clause([-o, a])
            self.solver.add_clause([-o, b])
            self.solver.add_clause([o, -a, -b])

    def transition(self, t: int = 0) -> None:
        self.gates(t)
        for latch in self.ts.latches:
            x1 = self.lit(latch.lit, t + 1)
            f = self.lit(latch.next, t)
            self.solver.add_clause([-x1, f])
            self.solver.add_clause([x1, -f])

    def init(self) -> None:
        for j, latch in enumerate(self.ts.latches):
            if latch.init is not None:
                self.solver.add_clause([self.latch_lit(j + 1 if latch.init else -(j + 1), 0)])

    def distinct(self, a: int, b: int) -> None:
        """States at frames ``a`` and ``b`` differ in some latch."""
        diff = []
        for j in range(self.ts.num_latches):
            self.fresh += 1
            d, x, y = self.fresh, self.latch_lit(j + 1, a), self.latch_lit(j + 1, b)
            self.solver.add_clause([-d, x, y])
            self.solver.add_clause([-d, -x, -y])
            diff.append(d)
        self.solver.add_clause(diff)

    def pred(self, clauses: Iterable[Sequence[int]], frame: int) -> None:
        for c in clauses:
            self.solver.add_clause([self.latch_lit(m, frame) for m in c])


def check_invariant(inv: Sequence[Sequence[int]], ts: TransitionSystem) -> tuple[bool, str]:
    """Init => Inv, Inv & Tr => Inv', Inv => not Bad.  Returns ``(ok, reason)``."""
    inv = [tuple(c) for c in inv]
    e = _Encoder(ts)
    e.init()
    for c in inv:
        if e.solver.solve([-e.latch_lit(m, 0) for m in c]):
            return False, f"initiation fails for clause {c}"

    e = _Encoder(ts)
    e.pred(inv, 0)
    e.transition()
    for c in inv:
        if e.solver.solve([-e.latch_lit(m, 1) for m in c]):
            return False, f"consecution fails for clause {c}"

    e = _Encoder(ts)
    e.pred(inv, 0)
    e.gates(0)
    if e.solver.solve([e.lit(ts.bad, 0)]):
        return False, "invariant admits a bad state"
    return True, "ok"


def check_k_induction(ts: TransitionSystem, k: int, simple_path: bool = True) -> tuple[bool, str]:
    """Certify that the property holds because it is ``k``-inductive.

    Base: no bad state within ``k - 1`` steps of Init.  Step: no path of
    ``k`` good states followed by a bad one, restricted to paths whose states
    are pairwise distinct when ``simple_path`` is set (eager encoding).
    """
    if k < 1:
        return False, "induction depth must be positive"
    e = _Encoder(ts, k)
    e.init()
    for t in range(k - 1):
        e.transition(t)
    e.gates(k - 1)
    e.solver.add_clause([e.lit(ts.bad, t) for t in range(k)])
    if e.solver.solve():
        return False, f"base fails: bad state within {k - 1} steps"

    e = _Encoder(ts, k + 1)
    for t in range(k):
        e.transition(t)
        e.solver.add_clause([-e.lit(ts.bad, t)])
    e.gates(k)
    e.solver.add_clause([e.lit(ts.bad, k)])
    if simple_path:
        for a in range(k + 1):
            for b in range(a + 1, k + 1):
                e.distinct(a, b)
    if e.solver.solve():
        return False, f"step fails at depth {k}"
    return True, "ok"


def check_witness(witness: Witness, ts: TransitionSystem) -> tuple[bool, str]:
    """Replay ``witness`` from the reset state; Bad must hold at the last frame."""
    if not witness.inputs:
        return False, "empty stimulus"
    free = [j for j, latch in enumerate(ts.latches) if latch.init is None]
    if free and witness.init is None:
        init_vals = [False] * ts.num_latches
    elif witness.init is not None:
        if len(witness.init) != ts.num_latches:
            return False, "initial-state arity mismatch"
        init_vals = list(witness.init)
    else:
        init_vals = [False] * ts.num_latches
    state = []
    for j, latch in enumerate(ts.latches):
        state.append(init_vals[j] if latch.init is None else bool(latch.init))
    for t, vec in enumerate(witness.inputs):
        if len(vec) != ts.num_inputs:
            return False, f"frame {t}: expected {ts.num_inputs} input bits, got {len(vec)}"
        nxt, bad = simulate(ts, state, vec)
        if t == len(witness.inputs) - 1:
            return (True, "ok") if bad else (False, f"Bad does not hold at frame {t}")
        state = list(nxt)
    return False, "unreachable"


def format_invariant(inv: Sequence[Sequence[int]], ts: TransitionSystem) -> str:
    """Textual CNF over latch literals (DIMACS body with a header)."""
    lines = [f"c invariant over {ts.num_latches} latches; literal j means latch j-1",
             f"p cnf {ts.num_latches} {len(inv)}"]
    lines += [" ".join(map(str, c)) + " 0" for c in inv]
    return "\n".join(lines) + "\n"
