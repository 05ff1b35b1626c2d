"""CNF encodings of unrollings and characteristic formulas.

Solver variables are allocated by a :class:`VarMap` keyed by
``(kind, index, frame)`` where ``kind`` is ``"L"`` (latch), ``"I"`` (input)
or ``"G"`` (and gate).  Encoding is deterministic: encoding the same piece
twice against one map yields identical clauses.

State formulas over latches use *model literals*: ``+(j+1)`` / ``-(j+1)``
for latch ``j``.  A frame formula is a collection of clauses over model
literals; :func:`encode_frame` shifts it to a given time frame.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .aiger import AigBuilder, TransitionSystem

Clause = tuple[int, ...]
FramePred = Sequence[Sequence[int]]

__all__ = [
    "Clause",
    "VarMap",
    "CnfFormula",
    "normalize_clause",
    "encode_tr",
    "encode_bad",
    "encode_init",
    "encode_frame",
    "encode_aig",
    "unroll",
    "characteristic_formula",
    "clausify",
    "cnf_of_predicate",
    "to_dimacs",
    "InvalidSel",
]


class InvalidSel(ValueError):
    """SEL pair outside 1 <= k <= i+1 <= N+1."""


def normalize_clause(lits: Iterable[int]) -> Clause | None:
    """Sorted duplicate-free clause, or ``None`` when tautological."""
    s = set(lits)
    if any(-x in s for x in s):
        return None
    return tuple(sorted(s, key=lambda x: (abs(x), x)))


class VarMap:
    """Injective map from ``(kind, index, frame)`` to solver variables."""

    def __init__(self) -> None:
        self._fwd: dict[tuple, int] = {}
        self._rev: list[tuple | None] = [None]

    @property
    def nvars(self) -> int:
        return len(self._rev) - 1

    def var(self, kind: str, index: int, frame: int) -> int:
        key = (kind, index, frame)
        v = self._fwd.get(key)
        if v is None:
            v = len(self._rev)
            self._fwd[key] = v
            self._rev.append(key)
        return v

    def fresh(self, tag: object = None) -> int:
        v = len(self._rev)
        self._rev.append(("X", tag, None))
        return v

    def key(self, var: int) -> tuple | None:
        return self._rev[abs(var)] if 0 < abs(var) < len(self._rev) else None

    def latch(self, j: int, t: int) -> int:
        return self.var("L", j, t)

    def state_lit(self, mlit: int, t: int) -> int:
        """Solver literal of model literal ``mlit`` at frame ``t``."""
        v = self.var("L", abs(mlit) - 1, t)
        return v if mlit > 0 else -v

    def model_lit(self, lit: int) -> tuple[int, int] | None:
        """Inverse of :meth:`state_lit`: ``(model literal, frame)`` or ``None``."""
        key = self.key(lit)
        if key is None or key[0] != "L":
            return None
        m = key[1] + 1
        return (m if lit > 0 else -m, key[2])


@dataclass
class CnfFormula:
    clauses: list[Clause] = field(default_factory=list)
    groups: list[object] = field(default_factory=list)
    varmap: VarMap | None = None
    assumptions: list[int] = field(default_factory=list)

    def add(self, lits: Iterable, group: object = None) -> None:
        """Add a clause whose entries may include the constants ``True``/``False``."""
        out = []
        for x in lits:
            if x is True:
                return
            if x is False:
                continue
            out.append(x)
        c = normalize_clause(out)
        if c is not None:
            self.clauses.append(c)
            self.groups.append(group)

    def extend(self, other: "CnfFormula", group: object = None) -> None:
        for c, g in zip(other.clauses, other.groups):
            self.clauses.append(c)
            self.groups.append(group if group is not None else g)

    def __iter__(self):
        return iter(self.clauses)

    def __len__(self) -> int:
        return len(self.clauses)

    def tagged(self) -> list[tuple[Clause, object]]:
        return list(zip(self.clauses, self.groups))


def _neg(x):
    if x is True:
        return False
    if x is False:
        return True
    return -x


def _aig_lit(ts: TransitionSystem, lit: int, t: int, vm: VarMap):
    """Solver literal (or constant) for AIG literal ``lit`` at frame ``t``."""
    var = lit >> 1
    if var == 0:
        return bool(lit & 1)
    kind, pos = ts.var_kind[var]
    v = vm.var({"input": "I", "latch": "L", "and": "G"}[kind], pos, t)
    return -v if lit & 1 else v


def _define_gates(ts: TransitionSystem, cone: Iterable[int], t: int, vm: VarMap, out: CnfFormula, group) -> None:
    for gi in cone:
        g = ts.ands[gi]
        o = vm.var("G", gi, t)
        a = _aig_lit(ts, g.rhs0, t, vm)
        b = _aig_lit(ts, g.rhs1, t, vm)
        out.add([-o, a], group)
        out.add([-o, b], group)
        out.add([o, _neg(a), _neg(b)], group)


def encode_tr(ts: TransitionSystem, t: int, vm: VarMap, group: object = None) -> CnfFormula:
    """Tr(v_t, v_{t+1}): gate definitions at frame ``t`` and next-state equalities."""
    if t < 0:
        raise ValueError("frame index must be non-negative")
    out = CnfFormula(varmap=vm)
    _define_gates(ts, ts.next_cone, t, vm, out, group)
    for j, latch in enumerate(ts.latches):
        nxt = vm.latch(j, t + 1)
        f = _aig_lit(ts, latch.next, t, vm)
        out.add([-nxt, f], group)
        out.add([nxt, _neg(f)], group)
    return out


def bad_literal(ts: TransitionSystem, t: int, vm: VarMap):
    return _aig_lit(ts, ts.bad, t, vm)


def encode_bad(ts: TransitionSystem, t: int, vm: VarMap, group: object = None, negate: bool = False) -> CnfFormula:
    """Bad(v_t) (or its negation): cone definitions plus one unit clause."""
    out = CnfFormula(varmap=vm)
    _define_gates(ts, ts.bad_cone, t, vm, out, group)
    b = bad_literal(ts, t, vm)
    out.add([_neg(b) if negate else b], group)
    return out


def encode_bad_cone(ts: TransitionSystem, t: int, vm: VarMap, group: object = None) -> tuple[CnfFormula, object]:
    """Definitions of the bad cone at ``t`` and the (unasserted) bad literal."""
    out = CnfFormula(varmap=vm)
    _define_gates(ts, ts.bad_cone, t, vm, out, group)
    return out, bad_literal(ts, t, vm)


def init_clauses(ts: TransitionSystem) -> list[Clause]:
    """Init as unit clauses over model literals (unconstrained latches omitted)."""
    out = []
    for j, latch in enumerate(ts.latches):
        if latch.init == 0:
            out.append((-(j + 1),))
        elif latch.init == 1:
            out.append((j + 1,))
    return out


def encode_init(ts: TransitionSystem, t: int, vm: VarMap, group: object = None) -> CnfFormula:
    return encode_frame(init_clauses(ts), t, vm, group)


def encode_frame(pred: FramePred, t: int, vm: VarMap, group: object = None) -> CnfFormula:
    """Clauses over model literals, placed at frame ``t``."""
    out = CnfFormula(varmap=vm)
    for c in pred:
        out.add([vm.state_lit(m, t) for m in c], group)
    return out


def encode_aig(
    builder: AigBuilder,
    root: int,
    leaf: Callable[[object], object],
    vm: VarMap,
    group: object = None,
) -> tuple[object, CnfFormula]:
    """Tseitin encoding of ``root``.  ``leaf(key)`` returns the solver literal of a leaf.

    Returns ``(literal, clauses)``; the literal may be a constant.
    """
    out = CnfFormula(varmap=vm)
    memo: dict[int, object] = {0: False}
    for v in builder.topo([root]):
        node = builder.nodes[v]
        if node is None:
            memo[v] = leaf(builder.keys[v])
            continue
        a = memo[node[0] >> 1]
        a = _neg(a) if node[0] & 1 else a
        b = memo[node[1] >> 1]
        b = _neg(b) if node[1] & 1 else b
        if a is False or b is False:
            memo[v] = False
        elif a is True:
            memo[v] = b
        elif b is True:
            memo[v] = a
        else:
            o = vm.fresh("tseitin")
            out.add([-o, a], group)
            out.add([-o, b], group)
            out.add([o, -a, -b], group)
            memo[v] = o
    r = memo[root >> 1]
    return (_neg(r) if root & 1 else r), out


def unroll(
    ts: TransitionSystem,
    frames: Callable[[int], FramePred] | Sequence[FramePred],
    M: int,
    N: int,
    vm: VarMap,
    group_of: Callable[[int], object] | None = None,
) -> CnfFormula:
    """Tr[phi]_M^N: for each t in [M, N-1], phi_t at frame t and Tr(t, t+1).

    ``frames`` is indexed by absolute frame number.
    """
    if M > N or M < 0:
        raise IndexError(f"bad unrolling range [{M}, {N}]")
    get = frames if callable(frames) else (lambda t: frames[t])
    out = CnfFormula(varmap=vm)
    for t in range(M, N):
        try:
            pred = get(t)
        except IndexError:
            raise IndexError(f"no frame formula for index {t}") from None
        g = group_of(t) if group_of else None
        out.extend(encode_frame(pred, t, vm, g))
        out.extend(encode_tr(ts, t, vm, g))
    return out


def characteristic_formula(trace, i: int, k: int, vm: VarMap, with_bad: bool = True) -> CnfFormula:
    """Tr[F^(i,k)] (and Bad at N+1 when ``with_bad``), grouped by frame.

    Frames ``i+1-k .. N`` carry ``F_i`` up to frame ``i`` and ``F_t`` after it.
    Clauses of frame ``t`` (its predicate and Tr(t, t+1)) are tagged ``t``;
    the bad-state clauses are tagged ``N+1``.
    """
    N = trace.size
    if not (1 <= k <= i + 1 <= N + 1):
        raise InvalidSel(f"(i={i}, k={k}) violates 1 <= k <= i+1 <= N+1 with N={N}")
    ts = trace.ts

    def phi(t: int):
        return trace.frame(i) if t <= i else trace.frame(t)

    out = unroll(ts, phi, i + 1 - k, N + 1, vm, group_of=lambda t: t)
    if with_bad:
        out.extend(encode_bad(ts, N + 1, vm, group=N + 1))
    return out


def clausify(builder: AigBuilder, root: int, keys: Sequence | None = None) -> list[tuple]:
    """CNF over leaf keys equivalent to ``root``, by recursive Shannon expansion.

    Literals in the result are ``key`` / ``-key``, so keys must be positive ints.
    Exponential in the support size; meant for small predicates.
    """
    if keys is None:
        keys = sorted(builder.support(root))
    keys = list(keys)
    out: list[tuple] = []

    def rec(f: AigBuilder, r: int, idx: int, path: list[int]) -> None:
        if r == AigBuilder.TRUE:
            return
        if r == AigBuilder.FALSE:
            out.append(tuple(-x for x in path))
            return
        key = keys[idx]
        for val in (True, False):
            g = AigBuilder()
            rr = f.copy_into(
                g, r, lambda k2, key=key, val=val: (1 if val else 0) if k2 == key else g.leaf(k2)
            )
            rec(g, rr, idx + 1, path + [key if val else -key])

    rec(builder, root, 0, [])
    return [c for c in (normalize_clause(c) for c in out) if c is not None]


def cnf_of_predicate(n_latches: int, pred: Callable[[tuple[bool, ...]], bool]) -> list[Clause]:
    """CNF over model literals for a state predicate given as a Python function.

    ``pred`` receives latch values ``(l_0, ..., l_{n-1})``.  The predicate is
    tabulated into a decision diagram (most significant latch on top),
    clausified by Shannon expansion and each clause is then shrunk while it
    stays implied.  Exponential in ``n_latches``.
    """
    n = n_latches
    table = [bool(pred(tuple(bool(m >> j & 1) for j in range(n)))) for m in range(1 << n)]
    b = AigBuilder()
    leaves = [b.leaf(j + 1) for j in range(n)]

    def build(lo_m: int, depth: int) -> int:
        # latch n-1-depth is decided at this depth
        if depth == n:
            return b.TRUE if table[lo_m] else b.FALSE
        j = n - 1 - depth
        hi = build(lo_m | (1 << j), depth + 1)
        lo = build(lo_m, depth + 1)
        return hi if hi == lo else b.mux(leaves[j], hi, lo)

    root = build(0, 0)
    clauses = clausify(b, root, list(range(n, 0, -1)))
    models = [m for m in range(1 << n) if table[m]]

    def implied(c) -> bool:
        return all(any((m >> (abs(x) - 1) & 1) == (x > 0) for x in c) for m in models)

    out: list[Clause] = []
    for c in clauses:
        cur = list(c)
        for x in list(cur):
            trial = [y for y in cur if y != x]
            if implied(trial):
                cur = trial
        out.append(normalize_clause(cur))
    uniq = sorted(set(out), key=lambda c: (len(c), c))
    return [c for c in uniq if not any(set(d) < set(c) for d in uniq)]


def to_dimacs(cnf: CnfFormula, vm: VarMap | None = None) -> str:
    """DIMACS text with a comment header mapping solver vars to (kind, index, frame)."""
    vm = vm or cnf.varmap
    nv = max((abs(x) for c in cnf.clauses for x in c), default=0)
    lines = []
    if vm is not None:
        for v in range(1, vm.nvars + 1):
            key = vm.key(v)
            if key and key[0] != "X":
                lines.append(f"c {v} {key[0]} {key[1]} {key[2]}")
        nv = max(nv, vm.nvars)
    lines.append(f"p cnf {nv} {len(cnf.clauses)}")
    lines += [" ".join(map(str, c)) + " 0" for c in cnf.clauses]
    return "\n".join(lines) + "\n"
