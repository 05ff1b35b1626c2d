import random

import pytest
from conftest import example_trace
from hypothesis import example, given, settings
from hypothesis import strategies as st

from kavymc.bench import gen_random_aig, gen_toggle, random_extendable_trace
from kavymc.cnf import CnfFormula, VarMap, characteristic_formula, encode_aig, encode_bad, encode_frame, encode_init, encode_tr
from kavymc.itp import (
    ItpPartition,
    SeqInterpolant,
    UntaggedClause,
    refute_and_interpolate,
    seq_interpolant,
    validate_seq_interpolant,
)
from kavymc.kavy import max_sel_exhaustive
from kavymc.sat import Solver
from kavymc.trace import frame_aig, is_k_inductive_relative

SYSTEMS = ["mcmillan", "dual"]


def two_groups(*groups):
    """CnfFormula whose group ``g`` holds the given clauses over latch vars at frame 1."""
    vm = VarMap()
    cnf = CnfFormula(varmap=vm)
    for g, clauses in enumerate(groups):
        for c in clauses:
            cnf.add([vm.latch(abs(x) - 1, 1) * (1 if x > 0 else -1) for x in c], g)
    return cnf


@pytest.mark.parametrize("system", SYSTEMS)
def test_single_variable(system):
    itp, part, _ = refute_and_interpolate(two_groups([[1]], [[-1]]), system)
    assert validate_seq_interpolant(itp, part)[0]
    b = itp.builder
    # I_1 is equivalent to x
    assert b.evaluate(itp[1], {1: True}) and not b.evaluate(itp[1], {1: False})


@pytest.mark.parametrize("system", SYSTEMS)
def test_three_group_chain(system):
    # x@1 | x@1 -> y@2 | not y@2
    vm = VarMap()
    cnf = CnfFormula(varmap=vm)
    x, y = vm.latch(0, 1), vm.latch(1, 2)
    cnf.add([x], 0)
    cnf.add([-x, y], 1)
    cnf.add([-y], 2)
    itp, part, _ = refute_and_interpolate(cnf, system)
    assert validate_seq_interpolant(itp, part)[0]


def test_untagged_clause_rejected():
    vm = VarMap()
    cnf = CnfFormula(varmap=vm)
    cnf.add([vm.latch(0, 1)], 0)
    cnf.add([-vm.latch(0, 1)])
    with pytest.raises(UntaggedClause):
        refute_and_interpolate(cnf)


def test_foreign_variable_breaks_condition_d():
    itp, part, _ = refute_and_interpolate(two_groups([[1]], [[-1]]))
    b = itp.builder
    itp.roots[1] = b.and_(itp.roots[1], b.leaf(2))
    ok, msg = validate_seq_interpolant(itp, part)
    assert not ok and "not shared" in msg


def toggle_bmc_partition():
    """Init & Tr(0) | Tr(1) | Bad(2) for the toggle latch (Bad unreachable at 2)."""
    ts = gen_toggle()
    vm = VarMap()
    cnf = CnfFormula(varmap=vm)
    cnf.extend(encode_init(ts, 0, vm), 0)
    cnf.extend(encode_tr(ts, 0, vm), 0)
    cnf.extend(encode_tr(ts, 1, vm), 1)
    cnf.extend(encode_bad(ts, 2, vm), 2)
    return cnf


def test_all_true_sequence_fails_last_condition():
    cnf = toggle_bmc_partition()
    itp, part, _ = refute_and_interpolate(cnf)
    assert validate_seq_interpolant(itp, part)[0]
    trivial = SeqInterpolant(itp.builder, {j: itp.builder.TRUE for j in itp.roots})
    ok, msg = validate_seq_interpolant(trivial, part)
    assert not ok and "(c)" in msg


def test_wrong_indices_rejected():
    itp, part, _ = refute_and_interpolate(toggle_bmc_partition())
    del itp.roots[max(itp.roots)]
    assert not validate_seq_interpolant(itp, part)[0]


def test_satisfiable_gives_no_interpolant():
    itp, _, s = refute_and_interpolate(two_groups([[1]], [[1, 2]]))
    assert itp is None and s.model is not None


def _implies(b, lhs_roots, rel, rhs_root, ts):
    """F(v0) & lhs(v0) & Tr => rhs(v1), by one SAT call."""
    vm = VarMap()
    cnf = encode_frame(rel, 0, vm)
    cnf.extend(encode_tr(ts, 0, vm))
    assumps = []
    for r in lhs_roots:
        lit, defs = encode_aig(b, r, lambda key: vm.latch(key - 1, 0), vm)
        cnf.extend(defs)
        if lit is False:
            return True
        if lit is not True:
            assumps.append(lit)
    lit, defs = encode_aig(b, rhs_root, lambda key: vm.latch(key - 1, 1), vm)
    cnf.extend(defs)
    if lit is True:
        return True
    if lit is not False:
        assumps.append(-lit)
    s = Solver()
    s.add_clauses(cnf.clauses)
    return not s.solve(assumps)


@pytest.mark.parametrize("system", SYSTEMS)
def test_counter_example_trace(system):
    tr = example_trace()
    i, k = 1, 2
    cnf = characteristic_formula(tr, i, k, VarMap())
    itp, part, _ = refute_and_interpolate(cnf, system)
    assert validate_seq_interpolant(itp, part)[0]
    assert itp.indices() == [1, 2]
    b = itp.builder
    # the first k implications read F_i & I_j & Tr => I_{j+1}'
    prev = []
    for j in range(i - k + 1, i + 1):
        assert _implies(b, prev, tr.frame(i), itp[j + 1], tr.ts)
        prev = [itp[j + 1]]
    # F_{i+1} & I_1 & I_2 is 2-inductive relative to F_1 (F_2 is True here)
    conj = b.and_(itp[1], itp[2])
    assert is_k_inductive_relative(tr.ts, (b, conj), tr.frame(1), 2)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from(SYSTEMS))
@example(209, "mcmillan")
def test_random_characteristic_formulas(seed, system):
    ts = gen_random_aig(seed, 4, 16, 1, bad_terms=2)
    tr = random_extendable_trace(ts, random.Random(seed))
    if tr is None:
        return
    sel = max_sel_exhaustive(tr)
    cnf = characteristic_formula(tr, sel.i, sel.k, VarMap())
    itp, part, s = refute_and_interpolate(cnf, system, check_proof=True)
    ok, msg = validate_seq_interpolant(itp, part)
    assert ok, msg
    b = itp.builder
    lo = sel.i - sel.k + 2
    conj = b.conj(itp[m] for m in range(lo, sel.i + 2))
    conj = b.and_(conj, frame_aig(b, tr.frame(sel.i + 1)))
    # only the step is guaranteed: an initial state without a predecessor
    # in F_i may fall outside the first interpolant (seed 209)
    assert is_k_inductive_relative(ts, (b, conj), tr.frame(sel.i), sel.k, base=False)


def test_partition_shared_variables_are_cut_states():
    cnf = toggle_bmc_partition()
    part = ItpPartition.from_cnf(cnf)
    vm = part.varmap
    assert part.shared(0) == {vm.latch(0, 1)}
    assert part.shared(1) == {vm.latch(0, 2)}


def test_dump_lists_roots():
    itp, _, _ = refute_and_interpolate(toggle_bmc_partition())
    text = itp.dump()
    assert "I1 =" in text and "I2 =" in text


def test_interpolant_from_given_proof():
    cnf = toggle_bmc_partition()
    part = ItpPartition.from_cnf(cnf)
    s = Solver(proof=True)
    for c, t in part.tagged_clauses():
        s.add_clause(c, group=t)
    assert not s.solve()
    for system in SYSTEMS:
        assert validate_seq_interpolant(seq_interpolant(s.proof, part, system), part)[0]


def test_interpolant_conjunction_can_miss_an_initial_state():
    ts = gen_random_aig(209, 4, 16, 1, bad_terms=2)
    tr = random_extendable_trace(ts, random.Random(209))
    sel = max_sel_exhaustive(tr)
    itp, _, _ = refute_and_interpolate(characteristic_formula(tr, sel.i, sel.k, VarMap()), "mcmillan")
    b = itp.builder
    conj = b.and_(b.conj(itp[m] for m in range(sel.i - sel.k + 2, sel.i + 2)), frame_aig(b, tr.frame(sel.i + 1)))
    assert is_k_inductive_relative(ts, (b, conj), tr.frame(sel.i), sel.k, base=False)
    assert not is_k_inductive_relative(ts, (b, conj), tr.frame(sel.i), sel.k)
