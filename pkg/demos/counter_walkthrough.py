"""Walk through one kAvy run on the 8-bit counter.

The counter starts at 0, counts up, wraps from 64 back to 0, and must stay
below 66.  The property is not inductive (65 would step to 66) but it is
2-inductive, which kAvy discovers after two extensions.
"""

from kavymc.bench import bfs_reachable, gen_counter
from kavymc.certify import check_invariant
from kavymc.engines import kind
from kavymc.kavy import ItpLog, kavy_engine, vanilla_engine


def value_set(clauses, width=8):
    """Counter values allowed by a clause list."""
    def holds(v):
        return all(any((v >> (abs(m) - 1) & 1) == (m > 0) for m in c) for c in clauses)
    return [v for v in range(1 << width) if holds(v)]


def summarize(values):
    if values == list(range(values[0], values[-1] + 1)):
        return f"{{{values[0]}..{values[-1]}}}"
    return f"{len(values)} values, max {max(values)}"


ts = gen_counter()
oracle = bfs_reachable(ts)
print(f"reachable values: {summarize(oracle.reachable.tolist())}  (safe={oracle.safe})")

print("\nk-induction:", f"k = {kind(ts).extra['k']}")

traces = []
log = ItpLog()
res = kavy_engine(ts, itp_log=log, on_trace=lambda tr: traces.append(tr.copy()))
print("\nkAvy iterations")
for tr, sel, row in zip(traces, res.extra["sels"], res.rows):
    frames = ", ".join(summarize(value_set(tr.frame(i))) for i in range(tr.size + 1))
    print(f"  N={tr.size}: frames [{frames}] -> SEL ({sel.i},{sel.k}), {row['queries']} SAT queries so far")

final = res.extra["trace"]
print("final trace:", [summarize(value_set(final.frame(i))) for i in range(final.size + 1)])
print(f"closed at level {res.extra['closed_at']}, invariant {summarize(value_set(res.invariant))}")
print("invariant certified:", check_invariant(res.invariant, ts)[0])
print(f"interpolants validated: {log.checked}, failures: {len(log.failures)}")

v = vanilla_engine(ts)
print(f"\nvanilla (k fixed to 1) needs {v.depth} frames, kAvy needed {res.depth}")
