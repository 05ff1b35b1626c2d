"""Scaling on the bit-serial shift family.

The circuit checks ``x + x == x << 1`` one bit per step; the property is
k-inductive exactly at k = width.  kAvy finds a small invariant after two
frames at every width, while k-induction has to unroll deeper and deeper.
"""

import sys

from kavymc.bench import gen_shift
from kavymc.engines import kind
from kavymc.kavy import kavy_engine, vanilla_engine
from kavymc.pdr import pdr_engine

top = int(sys.argv[1]) if len(sys.argv) > 1 else 12
print(f"{'width':>5} | {'kavy frames':>11} {'queries':>8} | {'vanilla frames':>14} | {'pdr frames':>10} | {'kind k':>6} {'queries':>8}")
for w in range(1, top + 1):
    ts = gen_shift(w)
    a, v, p, k = kavy_engine(ts), vanilla_engine(ts), pdr_engine(ts), kind(ts)
    assert a.safe and v.safe and p.safe and k.safe
    print(f"{w:>5} | {a.depth:>11} {a.queries:>8} | {v.depth:>14} | {p.depth:>10} | {k.extra['k']:>6} {k.queries:>8}")
