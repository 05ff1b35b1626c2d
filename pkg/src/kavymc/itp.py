"""Sequence interpolants from a single resolution refutation.

A partition is an ordered list of clause groups ``A_first .. A_last`` (group
tags are frame numbers).  For every cut between consecutive groups one
interpolant is computed over the variables shared by the two sides, all
from the same proof.  Two labelings are available:

* ``"mcmillan"``: A-leaf -> disjunction of its shared literals, B-leaf -> True,
  A-local pivot -> OR, otherwise AND (stronger interpolants);
* ``"dual"``: A-leaf -> False, B-leaf -> conjunction of its negated shared
  literals, B-local pivot -> AND, otherwise OR (weaker interpolants).

Interpolants are and-inverter graphs whose leaves are latch indices
(``j + 1`` for latch ``j``) at the frame just after the cut.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

from .aiger import AigBuilder
from .cnf import Clause, CnfFormula, VarMap, encode_aig
from .sat import ResolutionProof, Solver, validate_proof

__all__ = [
    "ItpPartition",
    "SeqInterpolant",
    "seq_interpolant",
    "refute_and_interpolate",
    "validate_seq_interpolant",
    "UntaggedClause",
    "DEFAULT_SYSTEM",
]

DEFAULT_SYSTEM = "dual"


class UntaggedClause(ValueError):
    pass


@dataclass
class ItpPartition:
    """Clause groups in order; ``tags[g]`` names group ``g`` (its frame)."""

    tags: list[int]
    groups: dict[int, list[Clause]]
    varmap: VarMap
    span: dict[int, tuple[int, int]] = field(init=False)  # var -> (first, last) group position

    def __post_init__(self) -> None:
        pos = {t: g for g, t in enumerate(self.tags)}
        span: dict[int, tuple[int, int]] = {}
        for t in self.tags:
            g = pos[t]
            for c in self.groups.get(t, []):
                for x in c:
                    v = abs(x)
                    lo, hi = span.get(v, (g, g))
                    span[v] = (min(lo, g), max(hi, g))
        self.span = span
        self._pos = pos

    @classmethod
    def from_cnf(cls, cnf: CnfFormula) -> "ItpPartition":
        groups: dict[int, list[Clause]] = {}
        for c, g in cnf.tagged():
            if g is None:
                raise UntaggedClause(f"clause {c} has no partition tag")
            groups.setdefault(g, []).append(c)
        return cls(sorted(groups), groups, cnf.varmap)

    def position(self, tag: int) -> int:
        return self._pos[tag]

    def shared(self, cut: int) -> set[int]:
        """Variables shared across the cut after group position ``cut``."""
        return {v for v, (lo, hi) in self.span.items() if lo <= cut < hi}

    def tagged_clauses(self) -> list[tuple[Clause, int]]:
        return [(c, t) for t in self.tags for c in self.groups.get(t, [])]


@dataclass
class SeqInterpolant:
    """``roots[j]`` is ``I_j``, a formula over latch values at frame ``j``."""

    builder: AigBuilder
    roots: dict[int, int]
    system: str = DEFAULT_SYSTEM

    def indices(self) -> list[int]:
        return sorted(self.roots)

    def __getitem__(self, j: int) -> int:
        return self.roots[j]

    def dump(self) -> str:
        """Text form: one line per gate, then one root line per interpolant."""
        b = self.builder
        lines = []
        for v in b.topo(self.roots.values()):
            node = b.nodes[v]
            if node is None:
                lines.append(f"{2 * v} leaf latch{b.keys[v] - 1}")
            else:
                lines.append(f"{2 * v} and {node[0]} {node[1]}")
        for j in self.indices():
            lines.append(f"I{j} = {self.roots[j]}")
        return "\n".join(lines) + "\n"


def seq_interpolant(
    proof: ResolutionProof,
    part: ItpPartition,
    system: str = DEFAULT_SYSTEM,
) -> SeqInterpolant:
    """One interpolant per cut of ``part``, labelled from ``proof``."""
    if system not in ("mcmillan", "dual"):
        raise ValueError(f"unknown interpolation system {system!r}")
    vm = part.varmap
    ncuts = len(part.tags) - 1
    b = AigBuilder()
    span = part.span
    dual = system == "dual"

    def leaf_lit(x: int) -> int:
        m = vm.model_lit(x)
        if m is None:
            raise ValueError(f"shared variable {abs(x)} is not a latch variable")
        return b.leaf(abs(m[0])) ^ (m[0] < 0)

    memo: dict[int, list[int]] = {}
    for cid in proof.reachable():
        node = proof.nodes[cid]
        if node.is_input:
            if node.group is None:
                raise UntaggedClause(f"proof leaf {cid} has no partition tag")
            g = part.position(node.group)
            vals = []
            for cut in range(ncuts):
                in_a = g <= cut
                shared = [x for x in node.lits if span[abs(x)][0] <= cut < span[abs(x)][1]]
                if dual:
                    vals.append(b.FALSE if in_a else b.conj(leaf_lit(x) ^ 1 for x in shared))
                else:
                    vals.append(b.disj(leaf_lit(x) for x in shared) if in_a else b.TRUE)
            memo[cid] = vals
            continue
        vals = list(memo[node.antecedents[0]])
        for a, piv in zip(node.antecedents[1:], node.pivots):
            other = memo[a]
            lo, hi = span[piv]
            for cut in range(ncuts):
                if dual:
                    local = lo > cut  # only in B
                    vals[cut] = b.and_(vals[cut], other[cut]) if local else b.or_(vals[cut], other[cut])
                else:
                    local = hi <= cut  # only in A
                    vals[cut] = b.or_(vals[cut], other[cut]) if local else b.and_(vals[cut], other[cut])
        memo[cid] = vals
    root_vals = memo[proof.root]
    roots = {part.tags[cut] + 1: root_vals[cut] for cut in range(ncuts)}
    return SeqInterpolant(b, roots, system)


def refute_and_interpolate(
    cnf: CnfFormula,
    system: str = DEFAULT_SYSTEM,
    counter=None,
    check_proof: bool = False,
) -> tuple[SeqInterpolant | None, ItpPartition, object]:
    """Solve ``cnf`` with proof logging on a fresh solver.

    Returns ``(interpolant or None when SAT, partition, solver)``.
    """
    part = ItpPartition.from_cnf(cnf)
    s = Solver(proof=True, counter=counter)
    for c, t in part.tagged_clauses():
        s.add_clause(c, group=t)
    if s.solve():
        return None, part, s
    proof = s.proof
    if check_proof:
        ok, msg = validate_proof(proof, part.tagged_clauses())
        if not ok:
            raise AssertionError(f"invalid refutation: {msg}")
    return seq_interpolant(proof, part, system), part, s


def _encode_itp(itp: SeqInterpolant, j: int, vm: VarMap, s: Solver) -> object:
    lit, defs = encode_aig(itp.builder, itp.roots[j], lambda key: vm.latch(key - 1, j), vm)
    for c in defs.clauses:
        s.add_clause(c)
    return lit


def validate_seq_interpolant(itp: SeqInterpolant, part: ItpPartition) -> tuple[bool, str]:
    """Check conditions (a)-(c) with fresh SAT calls and (d) syntactically."""
    vm = part.varmap
    tags = part.tags
    if sorted(itp.roots) != [t + 1 for t in tags[:-1]]:
        return False, f"interpolant indices {sorted(itp.roots)} do not match the cuts"
    # (d): each I_{t+1} mentions only variables shared across its cut
    for cut, t in enumerate(tags[:-1]):
        shared = part.shared(cut)
        for key in itp.builder.support(itp.roots[t + 1]):
            v = vm.latch(key - 1, t + 1)
            if v not in shared:
                return False, f"I{t + 1} mentions latch{key - 1}, not shared across its cut"
    # (a)-(c): I_t & A_t => I_{t+1}, with I_first = True and I_{last+1} = False
    for g, t in enumerate(tags):
        s = Solver()
        for c in part.groups.get(t, []):
            s.add_clause(c)
        assumps = []
        if g > 0:
            lit = _encode_itp(itp, t, vm, s)
            if lit is False:
                continue
            if lit is not True:
                assumps.append(lit)
        if g < len(tags) - 1:
            nxt = _encode_itp(itp, t + 1, vm, s)
            if nxt is True:
                continue
            if nxt is not False:
                assumps.append(-nxt)
        if s.solve(assumps):
            label = "(a)" if g == 0 else "(c)" if g == len(tags) - 1 else "(b)"
            return False, f"condition {label} fails at group {t}"
    return True, "ok"
