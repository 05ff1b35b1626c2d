import itertools

import numpy as np

from kavymc.bench import bad_state_mask, counter_value, gen_counter, image
from kavymc.cnf import cnf_of_predicate
from kavymc.sat import Solver
from kavymc.trace import InductiveTrace


def value_pred(width, test):
    """CNF over counter latches for ``test(value)``."""
    return cnf_of_predicate(width, lambda bits: test(counter_value(bits)))


def example_trace():
    """The two-frame counter trace ``[c = 0, c < 66]``."""
    return InductiveTrace.from_frames(gen_counter(), [value_pred(8, lambda v: v < 66)])


def project_models(clauses, vars_, limit=5000):
    """All assignments to ``vars_`` that extend to a model of ``clauses``."""
    s = Solver()
    s.add_clauses(clauses)
    out = set()
    while s.solve():
        vals = tuple(s.value(v) for v in vars_)
        out.add(vals)
        s.add_clause([-v if b else v for v, b in zip(vars_, vals)])
        assert len(out) <= limit
    return out


def states(n):
    return itertools.product([False, True], repeat=n)


def clause_states(clauses, n):
    """Explicit state set (sorted ints) of a clause list over ``n`` latches."""
    allst = np.arange(1 << n, dtype=np.int64)
    keep = np.ones(len(allst), dtype=bool)
    for c in clauses:
        sat = np.zeros(len(allst), dtype=bool)
        for m in c:
            bit = (allst >> (abs(m) - 1)) & 1
            sat |= bit == (1 if m > 0 else 0)
        keep &= sat
    return allst[keep]


def frame_states(trace, i):
    """Explicit state set of ``F_i``."""
    return clause_states(trace.frame(i), trace.ts.num_latches)


def explicit_path_to_bad(ts, sets):
    """Is there a path through ``sets[0], sets[1], ...`` whose next state is bad?"""
    cur = sets[0]
    for nxt_set in sets[1:]:
        cur = np.intersect1d(image(ts, cur), nxt_set)
    if len(cur) == 0:
        return False
    return bool(bad_state_mask(ts)[image(ts, cur)].any())


def explicit_sel_violated(trace, i, k):
    """Explicit-state truth of the characteristic formula of ``(i, k)`` with Bad."""
    N = trace.size
    sets = [frame_states(trace, i)] * k + [frame_states(trace, t) for t in range(i + 1, N + 1)]
    return explicit_path_to_bad(trace.ts, sets)


CRITERIA = {}


def record_criterion(n, ok, detail):
    CRITERIA[n] = (ok, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(CRITERIA):
        ok, detail = CRITERIA[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
