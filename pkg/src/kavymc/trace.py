"""Inductive traces, their semantic predicates and an incremental frame solver.

A trace stores clauses over model literals with delta encoding: a clause
lives at the highest level where it is known to hold, and the frame ``F_i``
(for ``1 <= i <= N``) is the union of the deltas at levels ``>= i``.  ``F_0``
is always the initial-state cube.  Frames beyond ``N`` are ``True``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .aiger import AigBuilder, TransitionSystem
from .cnf import (
    Clause,
    CnfFormula,
    VarMap,
    characteristic_formula,
    encode_aig,
    encode_bad,
    encode_bad_cone,
    encode_frame,
    encode_tr,
    init_clauses,
    normalize_clause,
)
from .sat import QueryCounter, Solver

__all__ = [
    "InductiveTrace",
    "Sel",
    "FrameSolver",
    "is_trace",
    "is_safe",
    "is_monotone",
    "is_closed",
    "is_stronger",
    "max_extension_level",
    "is_sel",
    "is_k_inductive_relative",
    "pdr_push",
    "closed_level",
    "frame_aig",
]


@dataclass(frozen=True, order=True)
class Sel:
    i: int
    k: int


class InductiveTrace:
    """Delta-encoded monotone clausal trace ``[F_0, ..., F_N]``."""

    def __init__(self, ts: TransitionSystem, size: int = 0) -> None:
        self.ts = ts
        self.init = tuple(init_clauses(ts))
        self._deltas: list[set[Clause]] = [set() for _ in range(size + 1)]
        # append-only (level, clause) log so incremental solvers can catch up
        self.log: list[tuple[int, Clause]] = []

    @property
    def size(self) -> int:
        return len(self._deltas) - 1

    def new_level(self) -> int:
        self._deltas.append(set())
        return self.size

    def delta(self, level: int) -> frozenset[Clause]:
        if level == 0:
            return frozenset(self.init)
        if level > self.size:
            return frozenset()
        return frozenset(self._deltas[level])

    def frame(self, i: int) -> list[Clause]:
        """Clauses of ``F_i`` (Init for 0, ``[]`` meaning True beyond N)."""
        if i == 0:
            return list(self.init)
        out: list[Clause] = []
        for lvl in range(i, self.size + 1):
            out.extend(sorted(self._deltas[lvl]))
        return out

    def level_of(self, clause: Clause) -> int | None:
        for lvl in range(self.size, 0, -1):
            if clause in self._deltas[lvl]:
                return lvl
        return None

    def add_clause(self, clause: Iterable[int], level: int) -> bool:
        """Add ``clause`` to frames ``1..level``.  Returns False when it was
        already subsumed at that level.  Clauses it subsumes at lower or equal
        levels are dropped."""
        if not 1 <= level <= self.size:
            raise IndexError(f"level {level} outside 1..{self.size}")
        c = normalize_clause(clause)
        if c is None:
            return False
        cs = set(c)
        for lvl in range(level, self.size + 1):
            for d in self._deltas[lvl]:
                if len(d) <= len(c) and cs.issuperset(d):
                    return False
        for lvl in range(1, level + 1):
            dead = [d for d in self._deltas[lvl] if len(d) >= len(c) and cs.issubset(d)]
            for d in dead:
                self._deltas[lvl].discard(d)
        self._deltas[level].add(c)
        self.log.append((level, c))
        return True

    def move_clause(self, clause: Clause, src: int, dst: int) -> None:
        self._deltas[src].discard(clause)
        self.add_clause(clause, dst)

    def copy(self) -> "InductiveTrace":
        t = InductiveTrace(self.ts, 0)
        t._deltas = [set(d) for d in self._deltas]
        t.log = list(self.log)
        return t

    def clauses(self) -> Iterator[tuple[int, Clause]]:
        for lvl in range(1, self.size + 1):
            for c in sorted(self._deltas[lvl]):
                yield lvl, c

    def num_clauses(self) -> int:
        return sum(len(d) for d in self._deltas)

    def dump(self) -> str:
        """Stable text form: one section per level, one clause per line."""
        lines = [f"trace N={self.size}", "level 0 (init)"]
        lines += ["  " + " ".join(map(str, c)) for c in self.init]
        for lvl in range(1, self.size + 1):
            lines.append(f"level {lvl}")
            lines += ["  " + " ".join(map(str, c)) for c in sorted(self._deltas[lvl])]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_frames(cls, ts: TransitionSystem, frames: list[list[Clause]]) -> "InductiveTrace":
        """Build from explicit frames ``F_1..F_N`` (monotonicity is imposed by
        keeping each clause at the highest level where it appears)."""
        tr = cls(ts, len(frames))
        for lvl in range(len(frames), 0, -1):
            for c in frames[lvl - 1]:
                c = normalize_clause(c)
                if c is not None and tr.level_of(c) is None:
                    tr.add_clause(c, lvl)
        return tr

    def __repr__(self) -> str:
        sizes = [len(d) for d in self._deltas[1:]]
        return f"InductiveTrace(N={self.size}, deltas={sizes})"


def frame_aig(builder: AigBuilder, clauses: Iterable[Clause]) -> int:
    """AND of ORs over leaves keyed by latch index (1-based)."""
    out = builder.TRUE
    for c in clauses:
        out = builder.and_(out, builder.disj(builder.leaf(abs(m)) ^ (m < 0) for m in c))
    return out


# -- fresh-solver semantic checks ---------------------------------------------


def _solver(cnf: CnfFormula, counter: QueryCounter | None) -> Solver:
    s = Solver(counter=counter)
    for c in cnf.clauses:
        s.add_clause(c)
    return s


def _implies_each(s: Solver, vm: VarMap, clauses: Iterable[Clause], t: int) -> bool:
    """Every clause (at frame ``t``) is implied by the solver's database."""
    for c in clauses:
        if s.solve([-vm.state_lit(m, t) for m in c]):
            return False
    return True


def is_trace(trace: InductiveTrace, counter: QueryCounter | None = None) -> bool:
    """F_0 = Init and every consecution F_i & Tr => F_{i+1}'."""
    ts = trace.ts
    for i in range(trace.size):
        vm = VarMap()
        cnf = encode_frame(trace.frame(i), 0, vm)
        cnf.extend(encode_tr(ts, 0, vm))
        s = _solver(cnf, counter)
        if not _implies_each(s, vm, trace.frame(i + 1), 1):
            return False
    return True


def is_safe(trace: InductiveTrace, counter: QueryCounter | None = None) -> bool:
    for i in range(trace.size + 1):
        vm = VarMap()
        cnf = encode_frame(trace.frame(i), 0, vm)
        cnf.extend(encode_bad(trace.ts, 0, vm))
        if _solver(cnf, counter).solve():
            return False
    return True


def _frame_implies(trace: InductiveTrace, i: int, clauses: Iterable[Clause], counter) -> bool:
    vm = VarMap()
    s = _solver(encode_frame(trace.frame(i), 0, vm), counter)
    return _implies_each(s, vm, clauses, 0)


def is_monotone(trace: InductiveTrace, counter: QueryCounter | None = None) -> bool:
    for i in range(trace.size):
        here = set(trace.frame(i))
        rest = [c for c in trace.frame(i + 1) if c not in here]
        if rest and not _frame_implies(trace, i, rest, counter):
            return False
    return True


def is_closed(trace: InductiveTrace, counter: QueryCounter | None = None) -> int | None:
    """Smallest ``i`` in ``1..N`` with ``F_i => F_{i-1}``, or ``None``."""
    for i in range(1, trace.size + 1):
        here = set(trace.frame(i))
        rest = [c for c in trace.frame(i - 1) if c not in here]
        if not rest or _frame_implies(trace, i, rest, counter):
            return i
    return None


def is_stronger(a: InductiveTrace, b: InductiveTrace, counter: QueryCounter | None = None) -> bool:
    """``a_i => b_i`` for every level of ``b`` (``a`` padded with True)."""
    for i in range(b.size + 1):
        need = [c for c in b.frame(i) if c not in set(a.frame(i))]
        if need and not _frame_implies(a, i, need, counter):
            return False
    return True


def _sel_query(trace: InductiveTrace, i: int, k: int, counter) -> bool:
    """True when the characteristic formula of (i, k) with Bad is UNSAT."""
    vm = VarMap()
    return not _solver(characteristic_formula(trace, i, k, vm), counter).solve()


def is_sel(trace: InductiveTrace, i: int, k: int, counter: QueryCounter | None = None) -> bool:
    return _sel_query(trace, i, k, counter)


def is_extension_level(trace: InductiveTrace, i: int, counter: QueryCounter | None = None) -> bool:
    return _sel_query(trace, i, 1, counter)


def max_extension_level(trace: InductiveTrace, counter: QueryCounter | None = None) -> int | None:
    """Largest ``i`` whose suffix query is UNSAT; ``None`` when even ``i=0`` fails."""
    for i in range(trace.size, -1, -1):
        if _sel_query(trace, i, 1, counter):
            return i
    return None


def is_k_inductive_relative(
    ts: TransitionSystem,
    phi,
    rel: Iterable[Clause],
    k: int,
    counter: QueryCounter | None = None,
    base: bool = True,
) -> bool:
    """``phi`` holds in the first ``k-1`` steps from Init and
    ``Tr[phi & rel]^k => phi(v_k)``.

    ``phi`` is a clause list or an AIG ``(builder, root)`` over latch-index leaves.
    With ``base=False`` only the step implication is checked.
    """
    if not isinstance(phi, tuple) or len(phi) != 2 or not isinstance(phi[0], AigBuilder):
        b = AigBuilder()
        phi = (b, frame_aig(b, phi))
    b, root = phi
    rel = list(rel)

    def phi_at(vm: VarMap, t: int, out: CnfFormula):
        lit, defs = encode_aig(b, root, lambda key: vm.latch(key - 1, t), vm)
        out.extend(defs)
        return lit

    def refuted(cnf: CnfFormula, lit) -> bool:
        # is cnf & not lit unsatisfiable?
        if lit is True:
            return True
        s = _solver(cnf, counter)
        return not s.solve([] if lit is False else [-lit])

    for j in range(k if base else 0):
        vm = VarMap()
        cnf = encode_frame(init_clauses(ts), 0, vm)
        for t in range(j):
            cnf.extend(encode_tr(ts, t, vm))
        if not refuted(cnf, phi_at(vm, j, cnf)):
            return False
    vm = VarMap()
    cnf = CnfFormula(varmap=vm)
    for t in range(k):
        cnf.extend(encode_frame(rel, t, vm))
        lit = phi_at(vm, t, cnf)
        if lit is False:
            return True
        if lit is not True:
            cnf.add([lit])
        cnf.extend(encode_tr(ts, t, vm))
    return refuted(cnf, phi_at(vm, k, cnf))


# -- incremental solver over one copy of Tr ------------------------------------


class FrameSolver:
    """Incremental solver holding ``Tr(v_0, v_1)`` once plus every trace
    clause at frame 0 guarded by a per-level activation literal.

    ``F_i`` is selected by assuming the activation literals of levels ``>= i``
    (level 0 selects the Init units alone).  Call :meth:`sync` after the trace
    gains clauses.
    """

    def __init__(
        self,
        trace: InductiveTrace,
        counter: QueryCounter | None = None,
        seed: int = 0,
        conflict_budget: int | None = None,
    ) -> None:
        self.trace = trace
        self.ts = trace.ts
        self.vm = VarMap()
        self.solver = Solver(seed=seed, conflict_budget=conflict_budget, counter=counter)
        self._acts: dict[int, int] = {}
        self._synced = 0
        for c in encode_tr(self.ts, 0, self.vm).clauses:
            self.solver.add_clause(c)
        defs, self.bad0 = encode_bad_cone(self.ts, 0, self.vm)
        for c in defs.clauses:
            self.solver.add_clause(c)
        for c in trace.init:
            self.solver.add_clause([-self.act(0)] + [self.vm.state_lit(m, 0) for m in c])
        self.sync()

    def act(self, level: int) -> int:
        a = self._acts.get(level)
        if a is None:
            a = self._acts[level] = self.vm.fresh(("act", level))
        return a

    def sync(self) -> None:
        log = self.trace.log
        while self._synced < len(log):
            lvl, c = log[self._synced]
            self._synced += 1
            self.solver.add_clause([-self.act(lvl)] + [self.vm.state_lit(m, 0) for m in c])

    def frame_assumptions(self, i: int) -> list[int]:
        if i == 0:
            return [self.act(0)]
        return [self.act(j) for j in range(i, self.trace.size + 1)]

    def solve(self, assumptions: Iterable[int]) -> bool:
        self.sync()
        return self.solver.solve(list(assumptions))

    def state_lits(self, cube: Iterable[int], t: int) -> list[int]:
        return [self.vm.state_lit(m, t) for m in cube]

    def model_state(self, t: int) -> tuple[int, ...]:
        """Full latch minterm of the last model at frame ``t``."""
        out = []
        for j in range(self.ts.num_latches):
            v = self.vm.latch(j, t)
            out.append(j + 1 if self.solver.value(v) else -(j + 1))
        return tuple(out)

    def model_inputs(self, t: int) -> tuple[bool, ...]:
        return tuple(self.solver.value(self.vm.var("I", j, t)) for j in range(self.ts.num_inputs))

    def target_literal(self, builder: AigBuilder, root: int) -> object:
        """Literal for a state predicate at frame 0 (definitions added permanently)."""
        lit, defs = encode_aig(builder, root, lambda key: self.vm.state_lit(key, 0), self.vm)
        for c in defs.clauses:
            self.solver.add_clause(c)
        return lit

    def add_temp_clause(self, lits: Iterable[int]) -> int:
        """Add a clause guarded by a fresh activation; returns the activation."""
        a = self.vm.fresh("tmp")
        self.solver.add_clause([-a] + list(lits))
        return a

    def release(self, act: int) -> None:
        self.solver.add_clause([-act])


def closed_level(trace: InductiveTrace, fs: FrameSolver) -> int | None:
    """Incremental version of :func:`is_closed` on an engine's frame solver."""
    for i in range(1, trace.size + 1):
        rest = trace.delta(i - 1) if i > 1 else [c for c in trace.init if c not in set(trace.frame(1))]
        if all(not fs.solve(fs.frame_assumptions(i) + [-x for x in fs.state_lits(c, 0)]) for c in rest):
            return i
    return None


def pdr_push(
    trace: InductiveTrace,
    fs: FrameSolver | None = None,
    counter: QueryCounter | None = None,
) -> InductiveTrace:
    """Move each clause ``c`` at level ``i < N`` to ``i+1`` when ``F_i & Tr => c'``."""
    if fs is None:
        fs = FrameSolver(trace, counter)
    for i in range(1, trace.size):
        for c in sorted(trace.delta(i)):
            if c not in trace.delta(i):
                continue
            assumps = fs.frame_assumptions(i) + [-x for x in fs.state_lits(c, 1)]
            if not fs.solve(assumps):
                trace.move_clause(c, i, i + 1)
    return trace
