import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kavymc.sat import BudgetExceeded, QueryCounter, ResolutionProof, Solver, validate_proof


def brute_sat(n, clauses, assumptions=()):
    for bits in itertools.product([False, True], repeat=n):
        val = lambda x: bits[abs(x) - 1] == (x > 0)
        if all(val(a) for a in assumptions) and all(any(val(x) for x in c) for c in clauses):
            return True
    return False


def random_cnf(rng, n, m, width=3):
    return [[rng.choice([-1, 1]) * v for v in rng.sample(range(1, n + 1), width)] for _ in range(m)]


def pigeonhole(holes):
    var = lambda p, h: p * holes + h + 1
    cls = [[var(p, h) for h in range(holes)] for p in range(holes + 1)]
    for h in range(holes):
        for p, q in itertools.combinations(range(holes + 1), 2):
            cls.append([-var(p, h), -var(q, h)])
    return cls


def test_contradicting_units_resolve_once():
    s = Solver(proof=True)
    s.add_clause([1], group=0)
    s.add_clause([-1], group=1)
    assert not s.solve()
    ok, _ = validate_proof(s.proof, [([1], 0), ([-1], 1)])
    assert ok
    derived = [n for n in s.proof.nodes.values() if not n.is_input]
    assert len(derived) == 1 and derived[0].pivots == (1,)


def test_assumption_forces_other_literal():
    s = Solver()
    s.add_clause([1, 2])
    assert s.solve([-1])
    assert s.value(2) and not s.value(1)


def test_random_3cnf_matches_enumeration():
    rng = random.Random(7)
    seen = set()
    for _ in range(200):
        cls = random_cnf(rng, 8, 34)
        s = Solver()
        s.add_clauses(cls)
        got = s.solve()
        assert got == brute_sat(8, cls)
        seen.add(got)
        if got:
            assert all(any(s.value(x) for x in c) for c in cls)
    assert seen == {True, False}


def test_proofs_of_unsat_instances_validate():
    rng = random.Random(11)
    found = 0
    while found < 100:
        cls = random_cnf(rng, 8, 50)
        tagged = [(c, j % 3) for j, c in enumerate(cls)]
        s = Solver(proof=True)
        for c, g in tagged:
            s.add_clause(c, group=g)
        if s.solve():
            continue
        found += 1
        ok, msg = validate_proof(s.proof, tagged)
        assert ok, msg


def test_corrupted_antecedent_is_caught():
    s = Solver(proof=True)
    s.add_clauses(pigeonhole(3))
    assert not s.solve()
    proof = s.proof
    assert validate_proof(proof)[0]
    cid = next(c for c in proof.reachable() if len(proof.nodes[c].antecedents) > 1)
    node = proof.nodes[cid]
    other = next(c for c in proof.reachable() if c not in node.antecedents and c < cid)
    bad = ResolutionProof(dict(proof.nodes), proof.root)
    bad.nodes[cid] = type(node)(node.lits, (other,) + node.antecedents[1:], node.pivots, node.group)
    ok, msg = validate_proof(bad)
    assert not ok and f"node {cid}" in msg


def test_leaf_must_be_an_input_clause():
    s = Solver(proof=True)
    s.add_clause([1], group=0)
    s.add_clause([-1], group=0)
    assert not s.solve()
    assert not validate_proof(s.proof, [([1], 0), ([-1], 1)])[0]


def test_pigeonhole_unsat_with_valid_proof():
    s = Solver(proof=True)
    s.add_clauses(pigeonhole(5))
    assert not s.solve()
    assert validate_proof(s.proof)[0]


def test_conflict_budget_raises():
    s = Solver(conflict_budget=3)
    s.add_clauses(pigeonhole(6))
    with pytest.raises(BudgetExceeded):
        s.solve()


def test_query_counter():
    c = QueryCounter()
    s = Solver(counter=c)
    s.add_clause([1, 2])
    s.solve()
    s.solve([-1])
    assert c.queries == 2


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_core_is_unsat_as_units(seed):
    rng = random.Random(seed)
    cls = random_cnf(rng, 7, 20)
    assumps = [rng.choice([-1, 1]) * v for v in rng.sample(range(1, 8), 4)]
    s = Solver()
    s.add_clauses(cls)
    if s.solve(assumps):
        assert all(s.value(a) for a in assumps)
        return
    core = s.core
    assert set(core) <= set(assumps)
    assert not brute_sat(7, cls, core)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_incremental_matches_fresh(seed):
    rng = random.Random(seed)
    s = Solver()
    added = []
    unsat_before = set()
    for _ in range(6):
        chunk = random_cnf(rng, 6, 5)
        s.add_clauses(chunk)
        added += chunk
        a = (rng.choice([-1, 1]) * rng.randint(1, 6),)
        got = s.solve(a)
        assert got == brute_sat(6, added, a)
        if a in unsat_before:
            assert not got
        if not got:
            unsat_before.add(a)


def test_deterministic_under_seed():
    rng = random.Random(3)
    cls = random_cnf(rng, 20, 80)

    def run():
        s = Solver(seed=5)
        s.add_clauses(cls)
        r = s.solve()
        return r, [s.value(v) for v in range(1, 21)] if r else None

    assert run() == run()
