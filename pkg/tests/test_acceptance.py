"""Acceptance suite: nine end-to-end criteria, one test each.

Each criterion records a PASS/FAIL line that is printed at the end of the
pytest run (or run this file directly with ``python tests/test_acceptance.py``).
Criteria 6 and 8 audit the interpolants and traces produced while checking
the others, so the underlying runs are cached and shared.
"""

import functools
import random
import time

from conftest import clause_states, record_criterion

from kavymc.bench import bfs_reachable, gen_counter, gen_random_aig, gen_shift, random_extendable_trace
from kavymc.certify import check_invariant, check_k_induction, check_witness
from kavymc.cli import run_engine
from kavymc.engines import kind
from kavymc.kavy import ItpLog, kavy_engine, kavy_extend, max_sel_bottomup, max_sel_exhaustive, max_sel_topdown, vanilla_engine
from kavymc.sat import QueryCounter
from kavymc.trace import (
    Sel,
    is_k_inductive_relative,
    is_monotone,
    is_safe,
    is_stronger,
    is_trace,
    max_extension_level,
)

ITP_LOG = ItpLog()


class SelLevelProbe:
    """Checks max-SEL level >= max extension level on every trace it sees."""

    def __init__(self):
        self.checked = 0
        self.violations = []

    def __call__(self, trace):
        lvl = max_extension_level(trace)
        if lvl is None:
            return
        sel = max_sel_exhaustive(trace)
        self.checked += 1
        if sel is None or sel.i < lvl:
            self.violations.append(f"N={trace.size}: sel {sel} below extension level {lvl}")


SEL_LEVELS = SelLevelProbe()


def random_system(seed):
    rng = random.Random(seed)
    return gen_random_aig(seed, latches=rng.randint(1, 8), gates=rng.randint(0, 40),
                          inputs=rng.randint(0, 3), bad_terms=rng.randint(1, 4))


def random_traces(count, first_seed=0):
    """``count`` random extendable traces (systems with 1..6 latches)."""
    out, seed = [], first_seed
    while len(out) < count:
        rng = random.Random(seed)
        ts = gen_random_aig(seed, rng.randint(1, 6), rng.randint(0, 24), rng.randint(0, 2),
                            bad_terms=rng.randint(1, 4))
        tr = random_extendable_trace(ts, rng)
        if tr is not None:
            out.append(tr)
        seed += 1
    return out


@functools.cache
def criterion_1():
    ts = gen_counter()
    t0 = time.perf_counter()
    r = kavy_engine(ts, itp_log=ITP_LOG)
    dt = time.perf_counter() - t0
    sels = r.extra.get("sels", [])
    inv_ok = r.safe and check_invariant(r.invariant, ts)[0]
    states = clause_states(r.invariant, ts.num_latches) if r.safe else None
    semantic = states is not None and states.max() < 66 and 65 not in states
    ok = (r.safe and len(r.rows) <= 3 and len(sels) > 1 and sels[1] == Sel(1, 2)
          and inv_ok and semantic and dt < 1.0)
    detail = (f"verdict={r.verdict.name} iterations={len(r.rows)} sels={[(s.i, s.k) for s in sels]} "
              f"certified={inv_ok} excludes-65-and-above={semantic} time={dt:.2f}s")
    return ok, detail


@functools.cache
def criterion_2():
    t0 = time.perf_counter()
    ks = {"counter": kind(gen_counter()).extra.get("k")}
    for w in range(1, 11):
        ks[w] = kind(gen_shift(w), simple_path=True).extra.get("k")
    dt = time.perf_counter() - t0
    ok = ks["counter"] == 2 and all(ks[w] == w for w in range(1, 11)) and dt < 30
    return ok, f"counter k={ks['counter']} shift k={[ks[w] for w in range(1, 11)]} time={dt:.1f}s"


@functools.cache
def criterion_3():
    t0 = time.perf_counter()
    kq, kf, iq = {}, {}, {}
    for w in range(2, 13):
        ts = gen_shift(w)
        r = kavy_engine(ts, itp_log=ITP_LOG)
        assert r.safe
        kq[w], kf[w] = r.queries, r.depth
        iq[w] = kind(ts).queries
    dt = time.perf_counter() - t0
    kavy_growth = kq[12] / kq[2]
    kind_growth = iq[12] / iq[2]
    ok = kavy_growth < 3 and kind_growth > 10 and max(kf.values()) <= 3 and dt < 300
    detail = (f"kavy queries {kq[2]}->{kq[12]} ({kavy_growth:.2f}x, need <3x), max frames {max(kf.values())}; "
              f"kind queries {iq[2]}->{iq[12]} ({kind_growth:.2f}x, need >10x); time={dt:.1f}s")
    return ok, detail


@functools.cache
def criterion_4():
    t0 = time.perf_counter()
    problems = []
    tally = {"SAFE": 0, "UNSAFE": 0}
    for seed in range(500):
        ts = random_system(seed)
        oracle = bfs_reachable(ts)
        ref = "SAFE" if oracle.safe else "UNSAFE"
        tally[ref] += 1
        for eng in ("kavy", "vanilla", "pdr", "kind", "bmc"):
            kw = {"itp_log": ITP_LOG, "on_trace": SEL_LEVELS} if eng in ("kavy", "vanilla") else {}
            bound = 300 if eng in ("kind", "bmc") else 60
            if eng == "bmc" and oracle.safe:
                # every depth up to the reachable diameter must be UNSAT
                bound = oracle.depth + 2
            r = run_engine(eng, ts, max_frames=bound, **kw)
            if eng == "bmc" and oracle.safe:
                if r.verdict.name != "UNKNOWN":
                    problems.append(f"seed {seed} bmc: {r.verdict.name} on a safe system")
                continue
            if r.verdict.name != ref:
                problems.append(f"seed {seed} {eng}: {r.verdict.name}, oracle {ref}")
                continue
            if r.safe:
                cert = check_k_induction(ts, r.extra["k"]) if eng == "kind" else check_invariant(r.invariant, ts)
                if not cert[0]:
                    problems.append(f"seed {seed} {eng}: certificate {cert[1]}")
            else:
                wit = check_witness(r.witness, ts)
                if not wit[0]:
                    problems.append(f"seed {seed} {eng}: witness {wit[1]}")
                if eng == "bmc" and r.depth != oracle.cex_length:
                    problems.append(f"seed {seed} bmc: depth {r.depth}, oracle {oracle.cex_length}")
    dt = time.perf_counter() - t0
    ok = not problems and dt < 600
    detail = f"{tally['SAFE']} safe / {tally['UNSAFE']} unsafe, {len(problems)} problems {problems[:3]} time={dt:.1f}s"
    return ok, detail


@functools.cache
def criterion_5():
    problems = []
    for n, tr in enumerate(random_traces(100)):
        SEL_LEVELS(tr)
        sel = max_sel_topdown(tr).sel
        g, _ = kavy_extend(tr, sel, gen=False, itp_log=ITP_LOG)
        nl = tr.ts.num_latches
        clausal = all(isinstance(c, tuple) and c and all(isinstance(m, int) and 0 < abs(m) <= nl for m in c)
                      for i in range(g.size + 1) for c in g.frame(i))
        checks = {
            "size": g.size == tr.size + 1,
            "trace": is_trace(g),
            "monotone": is_monotone(g),
            "clausal": clausal,
            "safe": is_safe(g),
            "stronger": is_stronger(g, tr),
            "relative k-induction": is_k_inductive_relative(tr.ts, g.frame(sel.i + 1), tr.frame(sel.i), sel.k),
        }
        bad = [k for k, v in checks.items() if not v]
        if bad:
            problems.append(f"trace {n} sel ({sel.i},{sel.k}): {bad}")
    return not problems, f"100 traces, {len(problems)} problems {problems[:3]}"


@functools.cache
def criterion_6():
    for c in (criterion_1, criterion_3, criterion_4, criterion_5, criterion_9):
        c()
    ok = ITP_LOG.checked > 0 and not ITP_LOG.failures
    return ok, f"{ITP_LOG.checked} sequence interpolants validated, {len(ITP_LOG.failures)} failures {ITP_LOG.failures[:3]}"


@functools.cache
def criterion_7():
    problems = []
    for n, tr in enumerate(random_traces(500, first_seed=100_000)):
        SEL_LEVELS(tr)
        N = tr.size
        ref = max_sel_exhaustive(tr)
        c_td, c_bu = QueryCounter(), QueryCounter()
        td = max_sel_topdown(tr, c_td)
        bu = max_sel_bottomup(tr, c_bu)
        if not (td.sel == bu.sel == ref):
            problems.append(f"trace {n}: topdown {td.sel} bottomup {bu.sel} exhaustive {ref}")
        if td.suffix_queries > N + 1 or c_td.queries != td.queries:
            problems.append(f"trace {n}: topdown suffix queries {td.suffix_queries} > {N + 1}")
        if c_bu.queries > 3 * N:
            problems.append(f"trace {n}: bottomup queries {c_bu.queries} > {3 * N}")
    return not problems, f"500 traces, {len(problems)} problems {problems[:3]}"


@functools.cache
def criterion_8():
    for c in (criterion_4, criterion_5, criterion_7):
        c()
    ok = SEL_LEVELS.checked > 0 and not SEL_LEVELS.violations
    return ok, f"{SEL_LEVELS.checked} extendable traces, {len(SEL_LEVELS.violations)} violations {SEL_LEVELS.violations[:3]}"


@functools.cache
def criterion_9():
    rows = []
    for fam, gen, params in (("shift", gen_shift, range(1, 13)),
                             ("counter", lambda w: gen_counter(w, 1 << (w - 2), (1 << (w - 2)) + 2), range(3, 10))):
        for p in params:
            ts = gen(p)
            a = kavy_engine(ts, itp_log=ITP_LOG)
            v = vanilla_engine(ts, itp_log=ITP_LOG)
            assert a.safe and v.safe
            rows.append((fam, p, a.depth, v.depth))
    never_worse = all(a <= v for _, _, a, v in rows)
    strict = [f"{f}{p}:{a}<{v}" for f, p, a, v in rows if a < v]
    return never_worse and bool(strict), f"kavy <= vanilla on {sum(a <= v for *_, a, v in rows)}/{len(rows)}, strict on {strict}"


def _run(n, fn):
    ok, detail = fn()
    record_criterion(n, ok, detail)
    assert ok, detail


def test_criterion_1_counter_golden_run():
    _run(1, criterion_1)


def test_criterion_2_induction_depth():
    _run(2, criterion_2)


def test_criterion_3_shift_scaling():
    _run(3, criterion_3)


def test_criterion_4_differential_soundness():
    _run(4, criterion_4)


def test_criterion_5_extension_without_generalization():
    _run(5, criterion_5)


def test_criterion_6_interpolant_contract():
    _run(6, criterion_6)


def test_criterion_7_sel_search():
    _run(7, criterion_7)


def test_criterion_8_sel_dominates_extension_level():
    _run(8, criterion_8)


def test_criterion_9_vanilla_ablation():
    _run(9, criterion_9)


if __name__ == "__main__":
    for n in range(1, 10):
        ok, detail = globals()[f"criterion_{n}"]()
        print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
