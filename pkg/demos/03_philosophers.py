"""Dining philosophers, with and without a left-handed diner.

All-right-handed tables deadlock.  Flipping one philosopher breaks the
cycle in the lock graph, and the polynomial process-deadlock check proves
nobody can starve in a blocked state.  Timings show the exclusive engine
staying fast where the explorer grows with the table.
"""
import time

import networkx as nx

from lockshare.exclusive2 import build_lock_graph, process_deadlock_ptime
from lockshare.generators import philosophers
from lockshare.objectives import compile_builtin
from lockshare.oracle import explore_verify

for left in ((), (1,)):
    lss = philosophers(5, left_handed=left)
    g = build_lock_graph(lss)
    label = "one left-handed" if left else "all right-handed"
    print(f"{label}: lock graph acyclic = {nx.is_directed_acyclic_graph(nx.DiGraph(g))}")
    for p in lss.names:
        v = process_deadlock_ptime(lss, p)
        why = f" via {v.condition}" if v.verdict else ""
        print(f"  {p} can block forever: {v.verdict}{why}")

print("\n  n   exclusive2 (s)   explorer (s)   states")
for n in (3, 5, 7, 9):
    lss = philosophers(n)
    t0 = time.perf_counter()
    fast = process_deadlock_ptime(lss, "p1").verdict
    t1 = time.perf_counter()
    slow = explore_verify(lss, compile_builtin(lss, "process-deadlock", "p1"))
    t2 = time.perf_counter()
    assert fast == slow.verdict
    print(f"{n:3d}   {t1 - t0:14.4f}   {t2 - t1:12.4f}   {slow.stats['product_states']}")
