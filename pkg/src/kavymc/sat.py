"""Incremental CDCL SAT solver with assumptions and resolution-proof logging.

Literals at the API are DIMACS-style non-zero integers.  Internally literal
``x`` is stored as ``2 * |x| + (x < 0)`` so that negation is ``l ^ 1``.

The solver uses two watched literals, VSIDS scoring through a lazy binary
heap, phase saving, Luby restarts and activity-based deletion of learned
clauses.  With ``proof=True`` every input clause becomes a proof leaf
(tagged with its ``group``) and every learned clause records the chain of
resolutions that produced it, so an assumption-free UNSAT answer comes with a
:class:`ResolutionProof` of the empty clause.
"""

from __future__ import annotations

import heapq
import random
from dataclasses import dataclass, field
from typing import Iterable, Sequence

__all__ = [
    "BudgetExceeded",
    "ProofNode",
    "ResolutionProof",
    "QueryCounter",
    "Solver",
    "validate_proof",
    "solve_clauses",
]


class BudgetExceeded(RuntimeError):
    """Raised when a solve call exhausts its conflict budget."""


class QueryCounter:
    """Shared tally of ``solve`` calls; engines hand one to every solver they own."""

    def __init__(self) -> None:
        self.queries = 0

    def __repr__(self) -> str:
        return f"QueryCounter(queries={self.queries})"


@dataclass(frozen=True)
class ProofNode:
    lits: tuple[int, ...]
    antecedents: tuple[int, ...] = ()
    pivots: tuple[int, ...] = ()
    group: object = None

    @property
    def is_input(self) -> bool:
        return not self.antecedents


@dataclass
class ResolutionProof:
    """Resolution DAG.  Derived nodes are linear chains of binary resolutions:
    ``antecedents[0]`` is resolved in turn with ``antecedents[1:]`` on ``pivots``."""

    nodes: dict[int, ProofNode] = field(default_factory=dict)
    root: int | None = None

    def inputs(self) -> dict[int, ProofNode]:
        return {cid: n for cid, n in self.nodes.items() if n.is_input}

    def reachable(self) -> list[int]:
        """Node ids in the cone of the root, in increasing (topological) order."""
        if self.root is None:
            return []
        seen = {self.root}
        stack = [self.root]
        while stack:
            for a in self.nodes[stack.pop()].antecedents:
                if a not in seen:
                    seen.add(a)
                    stack.append(a)
        return sorted(seen)

    def dump(self) -> str:
        """Line-oriented trace: ``id lits 0 antecedents 0`` (inputs list no antecedents)."""
        out = []
        for cid in self.reachable():
            n = self.nodes[cid]
            out.append(
                " ".join(map(str, [cid, *n.lits, 0, *n.antecedents, 0]))
            )
        return "\n".join(out) + "\n"


def _resolve(left: set[int], right: Iterable[int], pivot: int) -> set[int] | None:
    right = set(right)
    if pivot in left and -pivot in right:
        pass
    elif -pivot in left and pivot in right:
        pass
    else:
        return None
    return (left - {pivot, -pivot}) | (right - {pivot, -pivot})


def validate_proof(
    proof: ResolutionProof, clauses: Iterable[tuple[Sequence[int], object]] | None = None
) -> tuple[bool, str]:
    """Check every resolution step of ``proof`` and that the root is empty.

    ``clauses`` optionally lists the partitioned input ``(lits, group)`` pairs;
    each proof leaf must then be one of them.  Returns ``(ok, diagnostic)``.
    """
    if proof.root is None or proof.root not in proof.nodes:
        return False, "proof has no root"
    allowed = None
    if clauses is not None:
        allowed = {(frozenset(c), g) for c, g in clauses}
    for cid in proof.reachable():
        node = proof.nodes[cid]
        if node.is_input:
            if allowed is not None and (frozenset(node.lits), node.group) not in allowed:
                return False, f"node {cid}: leaf is not an input clause of its group"
            continue
        if len(node.pivots) != len(node.antecedents) - 1:
            return False, f"node {cid}: pivot count does not match antecedents"
        for a in node.antecedents:
            if a not in proof.nodes or a >= cid:
                return False, f"node {cid}: bad antecedent id {a}"
        cur = set(proof.nodes[node.antecedents[0]].lits)
        for step, (a, piv) in enumerate(zip(node.antecedents[1:], node.pivots), start=1):
            res = _resolve(cur, proof.nodes[a].lits, piv)
            if res is None:
                return False, f"node {cid}: step {step} does not clash on pivot {piv}"
            cur = res
        if cur != set(node.lits):
            return False, f"node {cid}: chain yields {sorted(cur)}, recorded {sorted(node.lits)}"
    if proof.nodes[proof.root].lits:
        return False, "root is not the empty clause"
    return True, "ok"


class _Clause:
    __slots__ = ("lits", "cid", "learnt", "act", "deleted")

    def __init__(self, lits: list[int], cid: int, learnt: bool) -> None:
        self.lits = lits
        self.cid = cid
        self.learnt = learnt
        self.act = 0.0
        self.deleted = False


def _luby(y: float, x: int) -> float:
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x = x % size
    return y**seq


class Solver:
    """Incremental CDCL solver.

    >>> s = Solver()
    >>> s.add_clause([1, 2]); s.solve([-1])
    True
    >>> s.value(2)
    True
    """

    restart_base = 64
    var_decay = 0.95
    clause_decay = 0.999

    def __init__(
        self,
        proof: bool = False,
        seed: int = 0,
        conflict_budget: int | None = None,
        counter: QueryCounter | None = None,
    ) -> None:
        self.proof_enabled = proof
        self.conflict_budget = conflict_budget
        self.counter = counter
        self._rng = random.Random(seed)
        self._seeded = seed != 0

        self.nvars = 0
        self._lval: list[int] = [0, 0]  # per internal literal: 1 true, -1 false, 0 free
        self._level: list[int] = [0]
        self._reason: list[_Clause | None] = [None]
        self._activity: list[float] = [0.0]
        self._polarity: list[int] = [1]  # 1 -> prefer negative literal
        self._seen: list[bool] = [False]
        self._watches: list[list[_Clause]] = [[], []]
        self._heap: list[tuple[float, int]] = []

        self._trail: list[int] = []
        self._trail_lim: list[int] = []
        self._qhead = 0
        self._clauses: list[_Clause] = []
        self._learnts: list[_Clause] = []
        self._var_inc = 1.0
        self._cla_inc = 1.0
        self._max_learnts = 2000.0
        self._next_cid = 1
        self._ok = True

        self.nodes: dict[int, ProofNode] = {}
        self._root: int | None = None
        self.model: list[bool] = []
        self.core: list[int] = []
        self.conflicts = 0
        self.solves = 0

    # -- variables -----------------------------------------------------

    def new_var(self) -> int:
        self._ensure(self.nvars + 1)
        return self.nvars

    def _ensure(self, n: int) -> None:
        while self.nvars < n:
            self.nvars += 1
            v = self.nvars
            self._lval += [0, 0]
            self._level.append(0)
            self._reason.append(None)
            self._activity.append(self._rng.random() * 1e-5 if self._seeded else 0.0)
            self._polarity.append(1)
            self._seen.append(False)
            self._watches += [[], []]
            heapq.heappush(self._heap, (-self._activity[v], v))

    # -- clause database -------------------------------------------------

    def add_clause(self, lits: Iterable[int], group: object = None) -> int | None:
        """Add an input clause; returns its proof id (``None`` for tautologies)."""
        ext = list(dict.fromkeys(lits))
        if any(-x in ext for x in ext):
            return None
        if ext:
            self._ensure(max(abs(x) for x in ext))
        self._cancel_until(0)
        cid = self._next_cid
        self._next_cid += 1
        if self.proof_enabled:
            self.nodes[cid] = ProofNode(tuple(ext), group=group)
        if not self._ok:
            return cid
        lits_i = [2 * x if x > 0 else -2 * x + 1 for x in ext]
        c = _Clause(lits_i, cid, False)
        lval = self._lval
        if not lits_i:
            self._derive_empty(c)
            return cid
        # move non-false literals to the front
        lits_i.sort(key=lambda l: lval[l] == -1)
        if lval[lits_i[0]] == -1:
            self._derive_empty(c)
            return cid
        if len(lits_i) == 1 or lval[lits_i[1]] == -1:
            if lval[lits_i[0]] == 0:
                self._enqueue(lits_i[0], c)
            if len(lits_i) == 1:
                self._clauses.append(c)
                return cid
        self._clauses.append(c)
        self._watches[lits_i[0]].append(c)
        self._watches[lits_i[1]].append(c)
        return cid

    def add_clauses(self, clauses: Iterable[Iterable[int]], group: object = None) -> None:
        for c in clauses:
            self.add_clause(c, group)

    @property
    def ok(self) -> bool:
        return self._ok

    @property
    def proof(self) -> ResolutionProof | None:
        if not self.proof_enabled or self._root is None:
            return None
        return ResolutionProof(self.nodes, self._root)

    # -- assignment ------------------------------------------------------

    def _enqueue(self, lit: int, reason: _Clause | None) -> None:
        lval = self._lval
        lval[lit] = 1
        lval[lit ^ 1] = -1
        v = lit >> 1
        self._level[v] = len(self._trail_lim)
        self._reason[v] = reason
        self._trail.append(lit)

    def _cancel_until(self, level: int) -> None:
        if len(self._trail_lim) <= level:
            return
        lim = self._trail_lim[level]
        trail, lval, pol, act, heap = self._trail, self._lval, self._polarity, self._activity, self._heap
        reason = self._reason
        for i in range(len(trail) - 1, lim - 1, -1):
            lit = trail[i]
            v = lit >> 1
            lval[lit] = 0
            lval[lit ^ 1] = 0
            reason[v] = None
            pol[v] = lit & 1
            heapq.heappush(heap, (-act[v], v))
        del trail[lim:]
        del self._trail_lim[level:]
        self._qhead = lim

    def _propagate(self) -> _Clause | None:
        lval = self._lval
        watches = self._watches
        trail = self._trail
        level = self._level
        reason = self._reason
        dl = len(self._trail_lim)
        qhead = self._qhead
        while qhead < len(trail):
            false_lit = trail[qhead] ^ 1
            qhead += 1
            ws = watches[false_lit]
            i = j = 0
            n = len(ws)
            while i < n:
                c = ws[i]
                i += 1
                if c.deleted:
                    continue
                lits = c.lits
                if lits[0] == false_lit:
                    lits[0] = lits[1]
                    lits[1] = false_lit
                first = lits[0]
                if lval[first] == 1:
                    ws[j] = c
                    j += 1
                    continue
                for k in range(2, len(lits)):
                    lk = lits[k]
                    if lval[lk] != -1:
                        lits[1] = lk
                        lits[k] = false_lit
                        watches[lk].append(c)
                        break
                else:
                    ws[j] = c
                    j += 1
                    if lval[first] == -1:
                        while i < n:
                            ws[j] = ws[i]
                            j += 1
                            i += 1
                        del ws[j:]
                        self._qhead = len(trail)
                        return c
                    lval[first] = 1
                    lval[first ^ 1] = -1
                    v = first >> 1
                    level[v] = dl
                    reason[v] = c
                    trail.append(first)
            del ws[j:]
        self._qhead = qhead
        return None

    # -- conflict analysis -------------------------------------------------

    def _bump_var(self, v: int) -> None:
        act = self._activity
        act[v] += self._var_inc
        if act[v] > 1e100:
            for u in range(1, self.nvars + 1):
                act[u] *= 1e-100
            self._var_inc *= 1e-100
            self._heap = [(-act[u], u) for u in range(1, self.nvars + 1) if self._lval[2 * u] == 0]
            heapq.heapify(self._heap)
        elif self._lval[2 * v] == 0:
            heapq.heappush(self._heap, (-act[v], v))

    def _bump_clause(self, c: _Clause) -> None:
        c.act += self._cla_inc
        if c.act > 1e20:
            for d in self._learnts:
                d.act *= 1e-20
            self._cla_inc *= 1e-20

    def _analyze(self, confl: _Clause) -> tuple[list[int], int, list[int], list[int]]:
        seen = self._seen
        level = self._level
        reason = self._reason
        trail = self._trail
        dl = len(self._trail_lim)
        proof = self.proof_enabled
        learnt: list[int] = [0]
        ante = [confl.cid]
        pivots: list[int] = []
        zero: list[int] = []
        path = 0
        p = -1
        idx = len(trail) - 1
        c = confl
        while True:
            if c.learnt:
                self._bump_clause(c)
            for q in c.lits:
                if q == p:
                    continue
                v = q >> 1
                if seen[v]:
                    continue
                lv = level[v]
                if lv > 0:
                    seen[v] = True
                    self._bump_var(v)
                    if lv >= dl:
                        path += 1
                    else:
                        learnt.append(q)
                elif proof:
                    seen[v] = True
                    zero.append(v)
            while not seen[trail[idx] >> 1]:
                idx -= 1
            p = trail[idx]
            idx -= 1
            v = p >> 1
            seen[v] = False
            path -= 1
            if path == 0:
                break
            c = reason[v]
            ante.append(c.cid)
            pivots.append(v)
        learnt[0] = p ^ 1
        for q in learnt[1:]:
            seen[q >> 1] = False
        if proof and zero:
            self._resolve_level0(zero, ante, pivots)
        # backjump level: highest level among the other literals, placed at index 1
        if len(learnt) == 1:
            blevel = 0
        else:
            best = 1
            for k in range(2, len(learnt)):
                if level[learnt[k] >> 1] > level[learnt[best] >> 1]:
                    best = k
            learnt[1], learnt[best] = learnt[best], learnt[1]
            blevel = level[learnt[1] >> 1]
        return learnt, blevel, ante, pivots

    def _resolve_level0(self, zero: list[int], ante: list[int], pivots: list[int]) -> None:
        """Resolve away level-0 literals (marked in ``seen``) with their reasons,
        walking the level-0 trail backwards."""
        seen = self._seen
        reason = self._reason
        trail = self._trail
        end = self._trail_lim[0] if self._trail_lim else len(trail)
        for i in range(end - 1, -1, -1):
            v = trail[i] >> 1
            if not seen[v]:
                continue
            seen[v] = False
            r = reason[v]
            ante.append(r.cid)
            pivots.append(v)
            for q in r.lits:
                u = q >> 1
                if u != v and not seen[u]:
                    seen[u] = True
        for v in zero:
            seen[v] = False

    def _derive_empty(self, confl: _Clause) -> None:
        """Record the empty clause from a conflict with every literal false at level 0."""
        self._ok = False
        if not self.proof_enabled:
            return
        ante = [confl.cid]
        pivots: list[int] = []
        zero = []
        for q in confl.lits:
            v = q >> 1
            if not self._seen[v]:
                self._seen[v] = True
                zero.append(v)
        self._resolve_level0(zero, ante, pivots)
        cid = self._next_cid
        self._next_cid += 1
        self.nodes[cid] = ProofNode((), tuple(ante), tuple(pivots))
        self._root = cid

    def _analyze_final(self, a: int) -> list[int]:
        """Assumptions (internal literals) that together force assumption ``a`` false."""
        core = [a]
        if not self._trail_lim:
            return core
        seen = self._seen
        seen[a >> 1] = True
        trail = self._trail
        for i in range(len(trail) - 1, self._trail_lim[0] - 1, -1):
            x = trail[i]
            v = x >> 1
            if seen[v]:
                r = self._reason[v]
                if r is None:
                    if v != a >> 1:
                        core.append(x)
                else:
                    for q in r.lits[1:]:
                        if self._level[q >> 1] > 0:
                            seen[q >> 1] = True
                seen[v] = False
        seen[a >> 1] = False
        return core

    def _reduce_db(self) -> None:
        locked = set()
        for lit in self._trail:
            r = self._reason[lit >> 1]
            if r is not None:
                locked.add(id(r))
        self._learnts.sort(key=lambda c: c.act)
        keep: list[_Clause] = []
        half = len(self._learnts) // 2
        for k, c in enumerate(self._learnts):
            if k < half and len(c.lits) > 2 and id(c) not in locked:
                c.deleted = True
            else:
                keep.append(c)
        self._learnts = keep

    # -- search ----------------------------------------------------------

    def _pick_branch(self) -> int:
        heap = self._heap
        lval = self._lval
        act = self._activity
        while heap:
            a, v = heapq.heappop(heap)
            if lval[2 * v] == 0 and -a == act[v]:
                return 2 * v + self._polarity[v]
        # stale entries may hide free variables
        for v in range(1, self.nvars + 1):
            if lval[2 * v] == 0:
                return 2 * v + self._polarity[v]
        return -1

    def solve(self, assumptions: Sequence[int] = ()) -> bool:
        """Decide satisfiability under ``assumptions``.

        SAT: :attr:`model` holds a total assignment (``model[v]`` for var ``v``).
        UNSAT: :attr:`core` lists the responsible assumptions (empty when the
        clause database alone is unsatisfiable).  Raises :class:`BudgetExceeded`
        when the conflict budget runs out.
        """
        self.solves += 1
        if self.counter is not None:
            self.counter.queries += 1
        self.core = []
        self.model = []
        if not self._ok:
            return False
        assumps = []
        for x in assumptions:
            self._ensure(abs(x))
            assumps.append(2 * x if x > 0 else -2 * x + 1)
        self._cancel_until(0)
        confl = self._propagate()
        if confl is not None:
            self._derive_empty(confl)
            return False

        budget = self.conflict_budget
        start_conflicts = self.conflicts
        restarts = 0
        restart_limit = _luby(2, restarts) * self.restart_base
        local_conflicts = 0
        self._max_learnts = max(self._max_learnts, len(self._clauses) / 3)
        while True:
            confl = self._propagate()
            if confl is not None:
                self.conflicts += 1
                local_conflicts += 1
                if not self._trail_lim:
                    self._derive_empty(confl)
                    return False
                learnt, blevel, ante, pivots = self._analyze(confl)
                self._cancel_until(blevel)
                cid = self._next_cid
                self._next_cid += 1
                if self.proof_enabled:
                    self.nodes[cid] = ProofNode(
                        tuple((l >> 1) * (-1 if l & 1 else 1) for l in learnt),
                        tuple(ante),
                        tuple(pivots),
                    )
                c = _Clause(learnt, cid, True)
                if len(learnt) > 1:
                    self._watches[learnt[0]].append(c)
                    self._watches[learnt[1]].append(c)
                    self._learnts.append(c)
                    self._bump_clause(c)
                self._enqueue(learnt[0], c)
                self._var_inc /= self.var_decay
                self._cla_inc /= self.clause_decay
                if budget is not None and self.conflicts - start_conflicts >= budget:
                    self._cancel_until(0)
                    raise BudgetExceeded(f"conflict budget {budget} exhausted")
                continue

            if local_conflicts >= restart_limit:
                restarts += 1
                restart_limit = _luby(2, restarts) * self.restart_base
                local_conflicts = 0
                self._cancel_until(0)
                continue
            if len(self._learnts) - len(self._trail) >= self._max_learnts:
                self._reduce_db()
                self._max_learnts *= 1.1

            nxt = -1
            while len(self._trail_lim) < len(assumps):
                a = assumps[len(self._trail_lim)]
                val = self._lval[a]
                if val == 1:
                    self._trail_lim.append(len(self._trail))
                elif val == -1:
                    core = self._analyze_final(a)
                    self.core = sorted(
                        {(l >> 1) * (-1 if l & 1 else 1) for l in core},
                        key=lambda x: (abs(x), x),
                    )
                    self._cancel_until(0)
                    return False
                else:
                    nxt = a
                    break
            if nxt == -1:
                nxt = self._pick_branch()
                if nxt == -1:
                    lval = self._lval
                    self.model = [False] + [lval[2 * v] == 1 for v in range(1, self.nvars + 1)]
                    return True
            self._trail_lim.append(len(self._trail))
            self._enqueue(nxt, None)

    def value(self, lit: int) -> bool:
        """Truth value of ``lit`` in the last model."""
        v = abs(lit)
        val = self.model[v] if v < len(self.model) else False
        return val if lit > 0 else not val


def solve_clauses(clauses: Iterable[Iterable[int]], assumptions: Sequence[int] = (), **kw) -> bool:
    """One-shot satisfiability check on a fresh solver."""
    s = Solver(**kw)
    for c in clauses:
        s.add_clause(c)
    return s.solve(assumptions)
