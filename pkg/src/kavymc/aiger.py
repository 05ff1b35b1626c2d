"""AIGER ingestion and the symbolic transition system built from it.

A :class:`TransitionSystem` keeps the and-inverter graph as read from the
file.  State variables are the latches, addressed by their position in
``ts.latches``; a *model literal* ``+(i + 1)`` / ``-(i + 1)`` stands for
latch ``i`` being true / false.  Cubes and clauses over state variables are
tuples of model literals (see :mod:`kavymc.cnf`).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Sequence

__all__ = [
    "AigerError",
    "Latch",
    "AndGate",
    "TransitionSystem",
    "AigBuilder",
    "parse_aiger",
    "read_aiger",
    "to_aag",
    "initial_cube",
    "simulate",
]


class AigerError(ValueError):
    """Malformed or unsupported AIGER input."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


@dataclass(frozen=True)
class Latch:
    lit: int
    next: int
    init: int | None = 0  # 0, 1, or None when unconstrained


@dataclass(frozen=True)
class AndGate:
    lhs: int
    rhs0: int
    rhs1: int


@dataclass(frozen=True)
class TransitionSystem:
    max_var: int
    inputs: tuple[int, ...]
    latches: tuple[Latch, ...]
    ands: tuple[AndGate, ...]
    bad: int
    outputs: tuple[int, ...] = ()
    bads: tuple[int, ...] = ()
    symbols: tuple[str, ...] = field(default=(), compare=False)
    comments: tuple[str, ...] = field(default=(), compare=False)

    @property
    def num_inputs(self) -> int:
        return len(self.inputs)

    @property
    def num_latches(self) -> int:
        return len(self.latches)

    @cached_property
    def var_kind(self) -> dict[int, tuple[str, int]]:
        """AIG variable -> ('input' | 'latch' | 'and', position)."""
        kind: dict[int, tuple[str, int]] = {}
        for i, lit in enumerate(self.inputs):
            kind[lit >> 1] = ("input", i)
        for i, latch in enumerate(self.latches):
            kind[latch.lit >> 1] = ("latch", i)
        for i, gate in enumerate(self.ands):
            kind[gate.lhs >> 1] = ("and", i)
        return kind

    def cone(self, roots: Iterable[int]) -> tuple[int, ...]:
        """Indices of and-gates in the cone of ``roots``, topologically ordered."""
        kind = self.var_kind
        needed: set[int] = set()
        stack = [r >> 1 for r in roots]
        while stack:
            v = stack.pop()
            k = kind.get(v)
            if k is None or k[0] != "and" or k[1] in needed:
                continue
            needed.add(k[1])
            gate = self.ands[k[1]]
            stack.append(gate.rhs0 >> 1)
            stack.append(gate.rhs1 >> 1)
        return tuple(sorted(needed))

    @cached_property
    def next_cone(self) -> tuple[int, ...]:
        return self.cone(latch.next for latch in self.latches)

    @cached_property
    def bad_cone(self) -> tuple[int, ...]:
        return self.cone([self.bad])

    def latch_index(self, name_or_var: int) -> int:
        kind = self.var_kind.get(name_or_var)
        if kind is None or kind[0] != "latch":
            raise KeyError(name_or_var)
        return kind[1]


# ---------------------------------------------------------------------------
# Structural AIG builder


class AigBuilder:
    """Structurally hashed and-inverter graph with constant propagation.

    Literals follow AIGER conventions (``2 * var + negated``; 0 is false and
    1 is true).  Leaves are created with :meth:`leaf` and carry an arbitrary
    hashable key, which lets the same builder serve circuit generators
    (keys are input/latch names) and interpolants (keys are variables).
    """

    FALSE = 0
    TRUE = 1

    def __init__(self) -> None:
        self.nodes: list[tuple[int, int] | None] = [None]  # var 0 is the constant
        self.keys: dict[int, object] = {}
        self._leaf_of: dict[object, int] = {}
        self._strash: dict[tuple[int, int], int] = {}

    def leaf(self, key: object) -> int:
        var = self._leaf_of.get(key)
        if var is None:
            var = len(self.nodes)
            self.nodes.append(None)
            self.keys[var] = key
            self._leaf_of[key] = var
        return 2 * var

    def and_(self, a: int, b: int) -> int:
        if a == 0 or b == 0 or a == b ^ 1:
            return 0
        if a == 1:
            return b
        if b == 1 or a == b:
            return a
        if a > b:
            a, b = b, a
        var = self._strash.get((a, b))
        if var is None:
            var = len(self.nodes)
            self.nodes.append((a, b))
            self._strash[(a, b)] = var
        return 2 * var

    def or_(self, a: int, b: int) -> int:
        return self.and_(a ^ 1, b ^ 1) ^ 1

    def xor(self, a: int, b: int) -> int:
        return self.or_(self.and_(a, b ^ 1), self.and_(a ^ 1, b))

    def xnor(self, a: int, b: int) -> int:
        return self.xor(a, b) ^ 1

    def mux(self, sel: int, then: int, other: int) -> int:
        return self.or_(self.and_(sel, then), self.and_(sel ^ 1, other))

    def conj(self, lits: Iterable[int]) -> int:
        out = 1
        for lit in lits:
            out = self.and_(out, lit)
        return out

    def disj(self, lits: Iterable[int]) -> int:
        out = 0
        for lit in lits:
            out = self.or_(out, lit)
        return out

    def support(self, root: int) -> set[object]:
        """Leaf keys reachable from ``root``."""
        seen: set[int] = set()
        keys: set[object] = set()
        stack = [root >> 1]
        while stack:
            v = stack.pop()
            if v == 0 or v in seen:
                continue
            seen.add(v)
            node = self.nodes[v]
            if node is None:
                keys.add(self.keys[v])
            else:
                stack.append(node[0] >> 1)
                stack.append(node[1] >> 1)
        return keys

    def topo(self, roots: Iterable[int]) -> list[int]:
        """Variables in the cone of ``roots`` in increasing (topological) order."""
        seen: set[int] = set()
        stack = [r >> 1 for r in roots]
        while stack:
            v = stack.pop()
            if v == 0 or v in seen:
                continue
            seen.add(v)
            node = self.nodes[v]
            if node is not None:
                stack.append(node[0] >> 1)
                stack.append(node[1] >> 1)
        return sorted(seen)

    def evaluate(self, root: int, env) -> bool:
        """Evaluate ``root`` with leaf values looked up as ``env[key]``."""
        values = {0: False}
        for v in self.topo([root]):
            node = self.nodes[v]
            if node is None:
                values[v] = bool(env[self.keys[v]])
            else:
                a, b = node
                values[v] = (values[a >> 1] ^ bool(a & 1)) and (values[b >> 1] ^ bool(b & 1))
        return values[root >> 1] ^ bool(root & 1)

    def copy_into(self, other: "AigBuilder", root: int, leaf_map) -> int:
        """Rebuild ``root`` inside ``other``, mapping each leaf key through ``leaf_map``."""
        memo = {0: 0}
        for v in self.topo([root]):
            node = self.nodes[v]
            if node is None:
                memo[v] = leaf_map(self.keys[v])
            else:
                a, b = node
                memo[v] = other.and_(memo[a >> 1] ^ (a & 1), memo[b >> 1] ^ (b & 1))
        return memo[root >> 1] ^ (root & 1)

    def to_system(
        self,
        inputs: Sequence[object],
        latches: Sequence[tuple[object, int, int | None]],
        bad: int,
    ) -> TransitionSystem:
        """Renumber into a well-formed :class:`TransitionSystem`.

        ``inputs`` and ``latches`` name leaf keys; each latch entry is
        ``(key, next_literal, init)``.
        """
        order = [self._leaf_of[k] for k in inputs] + [self._leaf_of[k] for k, _, _ in latches]
        remap = {0: 0}
        for i, v in enumerate(order, start=1):
            remap[v] = i
        next_free = len(order) + 1
        roots = [nxt for _, nxt, _ in latches] + [bad]
        ands = []
        for v in self.topo(roots):
            if self.nodes[v] is None:
                if v not in remap:
                    raise ValueError(f"leaf {self.keys[v]!r} is neither input nor latch")
                continue
            remap[v] = next_free
            a, b = self.nodes[v]
            ands.append(AndGate(2 * next_free, 2 * remap[a >> 1] | (a & 1), 2 * remap[b >> 1] | (b & 1)))
            next_free += 1

        def lit(x: int) -> int:
            return 2 * remap[x >> 1] | (x & 1)

        in_lits = tuple(2 * remap[v] for v in order[: len(inputs)])
        latch_objs = tuple(
            Latch(2 * remap[self._leaf_of[k]], lit(nxt), init) for k, nxt, init in latches
        )
        return TransitionSystem(
            max_var=next_free - 1,
            inputs=in_lits,
            latches=latch_objs,
            ands=tuple(ands),
            bad=lit(bad),
            bads=(lit(bad),),
        )


# ---------------------------------------------------------------------------
# Parsing


def _ints(line: str, count: int, lineno: int) -> list[int]:
    parts = line.split()
    if len(parts) != count:
        raise AigerError(f"expected {count} integers, got {line!r}", lineno)
    try:
        return [int(p) for p in parts]
    except ValueError:
        raise AigerError(f"expected integers, got {line!r}", lineno) from None


def _decode_delta(data: bytes, pos: int) -> tuple[int, int]:
    x, shift = 0, 0
    while True:
        if pos >= len(data):
            raise AigerError("truncated binary and-gate section")
        byte = data[pos]
        pos += 1
        x |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return x, pos
        shift += 7


def parse_aiger(data: bytes | str, property_index: int | None = None) -> TransitionSystem:
    """Parse an ASCII (``aag``) or binary (``aig``) AIGER file.

    The property is the single bad-state literal (``B`` section) or, for
    legacy files, the single output.  Files with several properties need
    ``property_index``.
    """
    if isinstance(data, str):
        data = data.encode()
    if data.startswith(b"aag"):
        binary = False
    elif data.startswith(b"aig"):
        binary = True
    else:
        raise AigerError("unknown format: expected 'aag' or 'aig' magic", 1)

    header_end = data.find(b"\n")
    header = (data if header_end < 0 else data[:header_end]).decode("ascii", "replace")
    fields = header.split()
    if len(fields) < 6 or len(fields) > 10:
        raise AigerError(f"malformed header {header!r}", 1)
    try:
        nums = [int(x) for x in fields[1:]]
    except ValueError:
        raise AigerError(f"malformed header {header!r}", 1) from None
    nums += [0] * (9 - len(nums))
    M, I, L, O, A, B, C, J, F = nums
    if C or J or F:
        raise AigerError("invariant constraints and liveness properties are not supported", 1)
    if M < I + L + A:
        raise AigerError("maximum variable index smaller than I + L + A", 1)

    rest = b"" if header_end < 0 else data[header_end + 1 :]
    lineno = 1
    lines: list[str] = []
    pos = 0

    def next_line() -> str:
        nonlocal pos, lineno
        if pos >= len(rest):
            raise AigerError("unexpected end of file", lineno + 1)
        end = rest.find(b"\n", pos)
        if end < 0:
            end = len(rest)
        line = rest[pos:end].decode("ascii", "replace").strip()
        pos = end + 1
        lineno += 1
        return line

    inputs: list[int] = []
    latch_specs: list[tuple[int, int, int | None, int]] = []
    if binary:
        inputs = [2 * (i + 1) for i in range(I)]
    else:
        for _ in range(I):
            (lit,) = _ints(next_line(), 1, lineno + 1)
            inputs.append(lit)
    for k in range(L):
        line = next_line()
        parts = line.split()
        if binary:
            parts = [str(2 * (I + k + 1))] + parts
        if len(parts) not in (2, 3):
            raise AigerError(f"malformed latch {line!r}", lineno)
        cur, nxt = int(parts[0]), int(parts[1])
        init: int | None = 0
        if len(parts) == 3:
            raw = int(parts[2])
            if raw in (0, 1):
                init = raw
            elif raw == cur:
                init = None
            else:
                raise AigerError(f"invalid latch reset value {raw}", lineno)
        latch_specs.append((cur, nxt, init, lineno))
    outputs = [_ints(next_line(), 1, lineno + 1)[0] for _ in range(O)]
    bads = [_ints(next_line(), 1, lineno + 1)[0] for _ in range(B)]

    ands: list[AndGate] = []
    if binary:
        for k in range(A):
            lhs = 2 * (I + L + k + 1)
            d0, pos = _decode_delta(rest, pos)
            d1, pos = _decode_delta(rest, pos)
            rhs0 = lhs - d0
            rhs1 = rhs0 - d1
            ands.append(AndGate(lhs, rhs0, rhs1))
    else:
        for _ in range(A):
            lhs, r0, r1 = _ints(next_line(), 3, lineno + 1)
            ands.append(AndGate(lhs, r0, r1))
    and_lines = list(range(lineno - A + 1, lineno + 1)) if not binary else [lineno] * A

    symbols: list[str] = []
    comments: list[str] = []
    in_comment = False
    for raw in rest[pos:].decode("ascii", "replace").splitlines():
        if in_comment:
            comments.append(raw)
        elif raw == "c":
            in_comment = True
        elif raw.strip():
            symbols.append(raw.strip())

    # well-formedness
    defined: dict[int, str] = {}

    def define(lit: int, what: str, line: int) -> None:
        if lit & 1 or lit < 2:
            raise AigerError(f"{what} literal {lit} must be positive and even", line)
        if (lit >> 1) > M:
            raise AigerError(f"{what} literal {lit} exceeds maximum variable index {M}", line)
        if lit >> 1 in defined:
            raise AigerError(f"variable {lit >> 1} defined twice", line)
        defined[lit >> 1] = what

    for k, lit in enumerate(inputs):
        define(lit, "input", 2 + k)
    for cur, _, _, line in latch_specs:
        define(cur, "latch", line)

    def check_ref(lit: int, line: int) -> None:
        if (lit >> 1) > M:
            raise AigerError(f"literal {lit} exceeds maximum variable index {M}", line)

    for gate, line in zip(ands, and_lines):
        for r in (gate.rhs0, gate.rhs1):
            check_ref(r, line)
            if r >> 1 and r >> 1 not in defined:
                raise AigerError(
                    f"and-gate {gate.lhs} uses undefined or later-defined literal {r}", line
                )
        define(gate.lhs, "and", line)
    for _, nxt, _, line in latch_specs:
        check_ref(nxt, line)
        if nxt >> 1 and nxt >> 1 not in defined:
            raise AigerError(f"latch next-state literal {nxt} is undefined", line)
    for lit in outputs + bads:
        check_ref(lit, lineno)
        if lit >> 1 and lit >> 1 not in defined:
            raise AigerError(f"property literal {lit} is undefined", lineno)

    props = bads if bads else outputs
    if not props:
        raise AigerError("no property: expected one bad-state literal or output", 1)
    if property_index is None:
        if len(props) > 1:
            raise AigerError(f"{len(props)} properties found; select one with property_index", 1)
        property_index = 0
    if not 0 <= property_index < len(props):
        raise AigerError(f"property index {property_index} out of range", 1)

    return TransitionSystem(
        max_var=M,
        inputs=tuple(inputs),
        latches=tuple(Latch(c, n, i) for c, n, i, _ in latch_specs),
        ands=tuple(ands),
        bad=props[property_index],
        outputs=tuple(outputs),
        bads=tuple(bads),
        symbols=tuple(symbols),
        comments=tuple(comments),
    )


def read_aiger(path, property_index: int | None = None) -> TransitionSystem:
    with open(path, "rb") as fh:
        return parse_aiger(fh.read(), property_index)


def to_aag(ts: TransitionSystem) -> str:
    """Serialize as ASCII AIGER (1.9 header when bad-state literals are present)."""
    header = [ts.max_var, ts.num_inputs, ts.num_latches, len(ts.outputs), len(ts.ands)]
    outputs, bads = ts.outputs, ts.bads
    if not outputs and not bads:
        bads = (ts.bad,)
    if bads:
        header.append(len(bads))
    out = ["aag " + " ".join(map(str, header))]
    out += [str(lit) for lit in ts.inputs]
    for latch in ts.latches:
        if latch.init == 0:
            out.append(f"{latch.lit} {latch.next}")
        else:
            init = latch.lit if latch.init is None else latch.init
            out.append(f"{latch.lit} {latch.next} {init}")
    out += [str(lit) for lit in outputs]
    out += [str(lit) for lit in bads]
    out += [f"{g.lhs} {g.rhs0} {g.rhs1}" for g in ts.ands]
    out += list(ts.symbols)
    if ts.comments:
        out.append("c")
        out += list(ts.comments)
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# Semantics


def initial_cube(ts: TransitionSystem) -> tuple[int, ...]:
    """Model literals fixing every constrained latch to its reset value."""
    cube = []
    for i, latch in enumerate(ts.latches):
        if latch.init is not None:
            cube.append(i + 1 if latch.init else -(i + 1))
    return tuple(cube)


def simulate(
    ts: TransitionSystem, state: Sequence[bool], inputs: Sequence[bool]
) -> tuple[tuple[bool, ...], bool]:
    """One step of explicit simulation: returns ``(next_state, bad)``."""
    if len(state) != ts.num_latches or len(inputs) != ts.num_inputs:
        raise ValueError("state/input arity mismatch")
    val = {0: False}
    for lit, b in zip(ts.inputs, inputs):
        val[lit >> 1] = bool(b)
    for latch, b in zip(ts.latches, state):
        val[latch.lit >> 1] = bool(b)

    def get(lit: int) -> bool:
        return val[lit >> 1] ^ bool(lit & 1)

    for gate in ts.ands:
        val[gate.lhs >> 1] = get(gate.rhs0) and get(gate.rhs1)
    nxt = tuple(get(latch.next) for latch in ts.latches)
    return nxt, get(ts.bad)
