"""Explicit-state reachability oracle and benchmark generators.

The oracle enumerates states as integers (bit ``j`` = latch ``j``) and
evaluates the AIG on whole frontiers at once with numpy.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .aiger import AigBuilder, AndGate, Latch, TransitionSystem
from .cnf import normalize_clause
from .trace import InductiveTrace

__all__ = [
    "OracleBoundExceeded",
    "BfsResult",
    "bfs_reachable",
    "eval_states",
    "gen_counter",
    "gen_shift",
    "gen_toggle",
    "gen_stuck",
    "gen_passthrough",
    "gen_random_aig",
    "random_extendable_trace",
    "bad_state_mask",
    "image",
    "counter_value",
    "state_int",
]


class OracleBoundExceeded(ValueError):
    """The system has too many latches or inputs for explicit enumeration."""


@dataclass
class BfsResult:
    reachable: np.ndarray  # sorted state integers
    safe: bool
    cex_length: int | None  # transitions from Init to the first bad state
    depth: int  # number of BFS layers explored
    bad_states: np.ndarray  # states with some input making Bad true

    def __contains__(self, state: int) -> bool:
        i = np.searchsorted(self.reachable, state)
        return bool(i < len(self.reachable) and self.reachable[i] == state)


def state_int(state) -> int:
    return sum(1 << j for j, b in enumerate(state) if b)


def eval_states(ts: TransitionSystem, states: np.ndarray, inputs: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Next-state integers and bad flags for paired ``states``/``inputs`` arrays."""
    n = len(states)
    val: dict[int, np.ndarray] = {0: np.zeros(n, dtype=bool)}
    for j, lit in enumerate(ts.inputs):
        val[lit >> 1] = ((inputs >> j) & 1).astype(bool)
    for j, latch in enumerate(ts.latches):
        val[latch.lit >> 1] = ((states >> j) & 1).astype(bool)

    def get(lit: int) -> np.ndarray:
        v = val[lit >> 1]
        return ~v if lit & 1 else v

    for g in ts.ands:
        val[g.lhs >> 1] = get(g.rhs0) & get(g.rhs1)
    nxt = np.zeros(n, dtype=np.int64)
    for j, latch in enumerate(ts.latches):
        nxt |= get(latch.next).astype(np.int64) << j
    return nxt, get(ts.bad)


def initial_states(ts: TransitionSystem) -> np.ndarray:
    fixed = 0
    free = []
    for j, latch in enumerate(ts.latches):
        if latch.init is None:
            free.append(j)
        elif latch.init:
            fixed |= 1 << j
    out = np.full(1 << len(free), fixed, dtype=np.int64)
    for b, j in enumerate(free):
        out |= ((np.arange(1 << len(free)) >> b) & 1).astype(np.int64) << j
    return np.unique(out)


def bfs_reachable(ts: TransitionSystem, latch_bound: int = 20, input_cap: int = 8) -> BfsResult:
    """Exact reachable states, safety verdict and shortest counterexample length."""
    if ts.num_latches > latch_bound:
        raise OracleBoundExceeded(f"{ts.num_latches} latches exceed the bound {latch_bound}")
    if ts.num_inputs > input_cap:
        raise OracleBoundExceeded(f"{ts.num_inputs} inputs exceed the cap {input_cap}")
    ni = 1 << ts.num_inputs
    seen = np.zeros(1 << ts.num_latches, dtype=bool)
    frontier = initial_states(ts)
    seen[frontier] = True
    cex = None
    bad_states = []
    depth = 0
    all_inputs = np.arange(ni, dtype=np.int64)
    while len(frontier):
        st = np.repeat(frontier, ni)
        inp = np.tile(all_inputs, len(frontier))
        nxt, bad = eval_states(ts, st, inp)
        if bad.any():
            bad_states.append(np.unique(st[bad]))
            if cex is None:
                cex = depth
        nxt = np.unique(nxt)
        fresh = nxt[~seen[nxt]]
        seen[fresh] = True
        frontier = fresh
        if len(frontier):
            depth += 1
    bads = np.unique(np.concatenate(bad_states)) if bad_states else np.zeros(0, dtype=np.int64)
    return BfsResult(np.flatnonzero(seen), cex is None, cex, depth, bads)


# -- generators -----------------------------------------------------------------


def _bits(value: int, width: int) -> list[bool]:
    return [bool(value >> j & 1) for j in range(width)]


def _eq_const(b: AigBuilder, bits: list[int], value: int) -> int:
    return b.conj(x if v else x ^ 1 for x, v in zip(bits, _bits(value, len(bits))))


def _ge_const(b: AigBuilder, bits: list[int], value: int) -> int:
    """Unsigned ``bits >= value`` (LSB first)."""
    if value <= 0:
        return b.TRUE
    if value >= 1 << len(bits):
        return b.FALSE
    # scan from LSB: ge_j means bits[0..j] >= value[0..j]
    ge = b.TRUE
    for x, v in zip(bits, _bits(value, len(bits))):
        ge = b.and_(x, ge) if v else b.or_(x, ge)
    return ge


def gen_counter(width: int = 8, reset_at: int = 64, bad_value: int = 66, compare: str = "ge") -> TransitionSystem:
    """Counter from 0 that wraps to 0 after ``reset_at``.

    ``compare="ge"`` makes ``c >= bad_value`` bad (property ``c < bad_value``);
    ``compare="eq"`` makes ``c == bad_value`` bad.
    """
    if not 0 <= reset_at < 1 << width:
        raise ValueError("reset_at must fit in the counter width")
    if compare not in ("ge", "eq"):
        raise ValueError("compare must be 'ge' or 'eq'")
    b = AigBuilder()
    c = [b.leaf(f"c{j}") for j in range(width)]
    at_reset = _eq_const(b, c, reset_at)
    carry = b.TRUE
    nxt = []
    for x in c:
        s = b.xor(x, carry)
        carry = b.and_(x, carry)
        nxt.append(b.and_(at_reset ^ 1, s))
    bad = _ge_const(b, c, bad_value) if compare == "ge" else _eq_const(b, c, bad_value)
    return b.to_system([], [(f"c{j}", nxt[j], 0) for j in range(width)], bad)


def counter_value(state) -> int:
    return state_int(state)


def gen_toggle() -> TransitionSystem:
    """One latch, ``x' = not x``, init 0, bad when ``x``."""
    b = AigBuilder()
    x = b.leaf("x")
    return b.to_system([], [("x", x ^ 1, 0)], x)


def gen_stuck() -> TransitionSystem:
    """One latch stuck at its reset value 0, bad when it is 1."""
    b = AigBuilder()
    x = b.leaf("x")
    return b.to_system([], [("x", x, 0)], x)


def gen_passthrough() -> TransitionSystem:
    """No latches, bad equals the single input."""
    b = AigBuilder()
    i = b.leaf("i")
    return b.to_system(["i"], [], i)


def gen_shift(width: int) -> TransitionSystem:
    """Bit-serial check that ``x + x`` equals ``x << 1``.

    Each enabled step consumes one bit ``x_j`` (LSB first).  Latch ``c`` is
    the ripple carry of ``x + x``, so bit ``j`` of the sum is ``c``; latch
    ``p`` holds ``x_{j-1}``, bit ``j`` of the shift.  ``m`` records any past
    disagreement.  A thermometer ``t`` with unconstrained reset counts
    processed positions, and Bad asks for a disagreement once all ``width``
    positions are in.  Steps with ``en = 0`` leave the state unchanged.  The
    property holds and is k-inductive (over distinct-state paths) for exactly
    ``k = width``, while ``(c = p) & !m`` is a 1-inductive strengthening.
    """
    if width < 1:
        raise ValueError("width must be >= 1")
    b = AigBuilder()
    x = b.leaf("x")
    en = b.leaf("en")
    c, p, m = b.leaf("c"), b.leaf("p"), b.leaf("m")
    t = [b.leaf(f"t{j}") for j in range(1, width)]
    sum_bit = c  # x_j ^ x_j ^ carry
    carry_out = b.or_(b.and_(x, x), b.or_(b.and_(x, c), b.and_(x, c)))
    diff = b.xor(sum_bit, p)
    latches = [
        ("c", b.mux(en, carry_out, c), 0),
        ("p", b.mux(en, x, p), 0),
        ("m", b.mux(en, b.or_(m, diff), m), 0),
    ]
    for j in range(width - 1):
        shifted_in = b.TRUE if j == 0 else t[j - 1]
        latches.append((f"t{j + 1}", b.mux(en, shifted_in, t[j]), None))
    bad = b.or_(m, diff)
    if width > 1:
        bad = b.and_(t[-1], bad)
    return b.to_system(["x", "en"], latches, bad)


def gen_random_aig(
    seed: int,
    latches: int = 4,
    gates: int = 12,
    inputs: int = 2,
    unconstrained_p: float = 0.1,
    bad_terms: int = 1,
) -> TransitionSystem:
    """Deterministic random transition system.

    Bad is the conjunction of ``bad_terms`` random literals (extra AND gates
    are appended for it), which makes larger values favour safe instances.
    """
    rng = random.Random(seed)
    nv = inputs + latches
    in_lits = tuple(2 * (j + 1) for j in range(inputs))
    latch_lits = [2 * (inputs + j + 1) for j in range(latches)]
    ands = []
    for g in range(gates):
        lhs = 2 * (nv + g + 1)
        avail = nv + g
        if avail == 0:
            a = b_ = 1
        else:
            a = 2 * rng.randint(1, avail) + rng.randint(0, 1)
            b_ = 2 * rng.randint(1, avail) + rng.randint(0, 1)
        ands.append(AndGate(lhs, a, b_))
    top = nv + gates

    def any_lit(prefer_gates: bool) -> int:
        if top == 0:
            return rng.randint(0, 1)
        lo = nv + 1 if prefer_gates and gates else 1
        return 2 * rng.randint(lo, top) + rng.randint(0, 1)

    latch_objs = []
    for lit in latch_lits:
        r = rng.random()
        init = None if r < unconstrained_p else (1 if r < unconstrained_p + 0.15 else 0)
        latch_objs.append(Latch(lit, any_lit(rng.random() < 0.7), init))
    bad = any_lit(True)
    for _ in range(bad_terms - 1):
        other = any_lit(True)
        top += 1
        ands.append(AndGate(2 * top, bad, other))
        bad = 2 * top
    return TransitionSystem(
        max_var=top,
        inputs=in_lits,
        latches=tuple(latch_objs),
        ands=tuple(ands),
        bad=bad,
        bads=(bad,),
    )


def _clauses_excluding(states: np.ndarray, n: int, rng: random.Random) -> list[tuple[int, ...]]:
    """Clauses over model literals whose conjunction contains ``states``;
    each blocks a random cube of states outside the set."""
    inside = np.zeros(1 << n, dtype=bool)
    inside[states] = True
    outside = np.flatnonzero(~inside)
    clauses = []
    rng_order = list(outside)
    rng.shuffle(rng_order)
    covered = np.zeros(1 << n, dtype=bool)
    all_states = np.arange(1 << n)
    for s in rng_order:
        if covered[s]:
            continue
        # grow a cube around s by dropping literals while it stays outside
        cube = list(range(n))
        rng.shuffle(cube)
        keep = set(cube)
        for j in cube:
            trial = keep - {j}
            mask = np.ones(1 << n, dtype=bool)
            for q in trial:
                mask &= ((all_states >> q) & 1) == (s >> q & 1)
            if not (mask & inside).any():
                keep = trial
        mask = np.ones(1 << n, dtype=bool)
        for q in keep:
            mask &= ((all_states >> q) & 1) == (s >> q & 1)
        covered |= mask
        c = normalize_clause(-(q + 1) if s >> q & 1 else q + 1 for q in keep)
        if c is not None:
            clauses.append(c)
    return clauses


def bad_state_mask(ts: TransitionSystem) -> np.ndarray:
    """Boolean mask over all states: some input makes Bad true."""
    n, ni = ts.num_latches, 1 << ts.num_inputs
    states = np.arange(1 << n, dtype=np.int64)
    _, bad = eval_states(ts, np.repeat(states, ni), np.tile(np.arange(ni, dtype=np.int64), len(states)))
    return bad.reshape(len(states), ni).any(axis=1)


def image(ts: TransitionSystem, states: np.ndarray) -> np.ndarray:
    ni = 1 << ts.num_inputs
    nxt, _ = eval_states(ts, np.repeat(states, ni), np.tile(np.arange(ni, dtype=np.int64), len(states)))
    return np.unique(nxt)


def random_extendable_trace(
    ts: TransitionSystem, rng: random.Random, size: int | None = None, pad: float = 0.15
) -> InductiveTrace | None:
    """Random monotone clausal safe trace that admits an extension at level 0.

    Frames are explicit sets ``S_0 = Init <= S_1 <= ...`` with
    ``Img(S_i) <= S_{i+1}``, padded with random non-bad states and then
    clausified.  Returns ``None`` when some bad state is reachable within
    ``size + 1`` steps (then no such trace exists).
    """
    n = ts.num_latches
    if n == 0:
        return None
    if size is None:
        size = rng.randint(1, 4)
    res = bfs_reachable(ts)
    if res.cex_length is not None and res.cex_length <= size + 1:
        return None
    bad = bad_state_mask(ts)
    good = np.flatnonzero(~bad)
    for attempt in range(4):
        p = pad if attempt < 3 else 0.0
        cur = initial_states(ts)
        frames = []
        for _ in range(size):
            nxt = np.union1d(cur, image(ts, cur))
            extra = good[np.array([rng.random() < p for _ in good], dtype=bool)] if p else good[:0]
            nxt = np.union1d(nxt, extra)
            if bad[nxt].any():
                break
            frames.append(nxt)
            cur = nxt
        else:
            # extension at level 0 needs Img of the exact N-step paths to avoid
            # Bad; that holds by the reachability check above
            return InductiveTrace.from_frames(ts, [_clauses_excluding(f, n, rng) for f in frames])
    return None
