"""Polynomial process-deadlock check for sound exclusive two-lock systems.

The lock graph G has an edge ``t1 -(p)-> t2`` when ``p`` can reach a state
holding exactly ``t1`` whose outgoing transitions all acquire ``t2``.
Process ``p`` can be blocked forever iff it can reach a dead state, or one
of the locks it may request leads in G to a cycle or to a lock some
process can keep forever.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import networkx as nx

from .core import (LockSharingSystem, PreconditionError, Process, check_2lss, check_exclusive,
                   require_sound)


@dataclass(frozen=True)
class ForeverPair:
    process: str
    lock: str
    kind: str      # "infinite-keeper" or "dead-holder"


@dataclass
class DeadlockVerdict:
    verdict: bool
    condition: str | None = None      # Cx1 .. Cx4
    lock: str | None = None           # the requested lock the path starts from
    path: tuple = ()                  # ((t, p, t'), ...) edges followed in G
    detail: object = None             # dead state, cycle edges or forever pair

    def __bool__(self):
        return self.verdict


def owns_table(proc: Process) -> dict:
    """Held locks per reachable state of a sound process."""
    held = {proc.initial: frozenset()}
    for s in proc.reachable_states():
        for tr in proc.outgoing(s):
            h = held[s]
            if tr.op.kind == "get":
                h = h | {tr.op.lock}
            elif tr.op.kind == "rel":
                h = h - {tr.op.lock}
            held.setdefault(tr.target, h)
    return held


def prepare_exclusive2(lss: LockSharingSystem):
    require_sound(lss)
    ok, where = check_exclusive(lss)
    if not ok:
        raise PreconditionError("system is not exclusive", classifier="exclusive", evidence=where)
    ok, sizes = check_2lss(lss)
    if not ok:
        raise PreconditionError("not a two-lock system", classifier="2lss", evidence=sizes)


def build_lock_graph(lss: LockSharingSystem, check: bool = True) -> nx.MultiDiGraph:
    """G as a multigraph whose edge keys are process names."""
    if check:
        prepare_exclusive2(lss)
    g = nx.MultiDiGraph()
    g.add_nodes_from(lss.locks)
    for proc in lss.processes:
        owns = owns_table(proc)
        for s, held in owns.items():
            if len(held) != 1:
                continue
            out = proc.outgoing(s)
            needs = {tr.op.lock if tr.op.kind == "get" else None for tr in out}
            if len(needs) == 1 and None not in needs:
                (t1,), (t2,) = held, needs
                if not g.has_edge(t1, t2, key=proc.name):
                    g.add_edge(t1, t2, key=proc.name, state=s)
    return g


def forever_pairs(lss: LockSharingSystem) -> set:
    """Pairs ``(q, t)`` where ``q`` can keep ``t`` forever or die holding it."""
    out = set()
    for proc in lss.processes:
        owns = owns_table(proc)
        for t in sorted(proc.real_locks):
            holding = [s for s, h in owns.items() if t in h]
            if any(not proc.outgoing(s) for s in holding):
                out.add(ForeverPair(proc.name, t, "dead-holder"))
            sub = nx.DiGraph()
            sub.add_nodes_from(holding)
            keep = set(holding)
            for s in holding:
                for tr in proc.outgoing(s):
                    if tr.target in keep:
                        sub.add_edge(s, tr.target)
            if any(len(c) > 1 or sub.has_edge(next(iter(c)), next(iter(c)))
                   for c in nx.strongly_connected_components(sub)):
                out.add(ForeverPair(proc.name, t, "infinite-keeper"))
    return out


def _cycle_locks(g: nx.MultiDiGraph) -> dict:
    """Locks lying on a cycle of G that can really block, each with one such cycle.

    A two-lock process only labels edges between its own two locks, so a
    simple cycle through three or more locks always uses distinct
    processes; a 2-cycle needs two different labels.  A self-loop (a state
    waiting for a lock it already holds) blocks on its own.  Each edge is
    tested with one reachability query, keeping this polynomial.
    """
    simple = nx.DiGraph()
    simple.add_edges_from((u, v) for u, v in g.edges())
    found = {}

    def label(u, v, avoid=None):
        return next((p for p in sorted(g[u][v]) if p != avoid), None)

    for u, v in sorted(simple.edges()):
        if u in found and v in found:
            continue
        if u == v:
            found.setdefault(u, ((u, label(u, u), u),))
            continue
        if simple.has_edge(v, u):
            p = label(u, v)
            q = label(v, u, avoid=p)
            if q is None:
                q0 = label(v, u)
                p = label(u, v, avoid=q0)
                q = q0 if p is not None else None
            if q is not None:
                edges = ((u, p, v), (v, q, u))
                found.setdefault(u, edges)
                found.setdefault(v, edges)
                continue
        h = simple.copy()
        h.remove_edge(u, v)
        if h.has_edge(v, u):
            h.remove_edge(v, u)
        if nx.has_path(h, v, u):
            nodes = [u] + nx.shortest_path(h, v, u)
            edges = tuple((a, label(a, b), b) for a, b in zip(nodes, nodes[1:]))
            for t in nodes:
                found.setdefault(t, edges)
    return found


def _path(g, src, dst):
    nodes = nx.shortest_path(g, src, dst)
    return tuple((u, sorted(g[u][v])[0], v) for u, v in zip(nodes, nodes[1:]))


def process_deadlock_ptime(lss: LockSharingSystem, p: str, check: bool = True) -> DeadlockVerdict:
    """Can ``p`` end up blocked forever along some process-fair run?"""
    if check:
        prepare_exclusive2(lss)
    proc = lss.process(p)
    reach = proc.reachable_states()
    for s in reach:
        if not proc.outgoing(s):
            return DeadlockVerdict(True, "Cx1", detail=s)
    g = build_lock_graph(lss, check=False)
    requested = sorted({tr.op.lock for s in reach for tr in proc.outgoing(s) if tr.op.kind == "get"})
    on_cycle = _cycle_locks(g)
    pairs = sorted((fp for fp in forever_pairs(lss) if fp.process != p),
                   key=lambda fp: (fp.kind != "infinite-keeper", fp.process, fp.lock))
    for t in requested:
        reach_g = nx.descendants(g, t) | {t}
        for u in sorted(reach_g):
            if u in on_cycle:
                return DeadlockVerdict(True, "Cx2", t, _path(g, t, u), on_cycle[u])
    for fp in pairs:
        hit = _path_avoiding_keeper(g, requested, fp)
        if hit is not None:
            tag = "Cx3" if fp.kind == "infinite-keeper" else "Cx4"
            return DeadlockVerdict(True, tag, hit[0], hit[1], fp)
    return DeadlockVerdict(False)


def _path_avoiding_keeper(g, sources, fp: ForeverPair):
    """A simple path from a requested lock to ``fp.lock`` whose last edge is not
    labelled by the keeper itself (it cannot wait for the lock it keeps)."""
    if fp.lock in sources:
        return fp.lock, ()
    h = g.subgraph([x for x in g.nodes if x != fp.lock])
    srcs = [t for t in sources if t != fp.lock]
    for u, _, lab in sorted(g.in_edges(fp.lock, keys=True)):
        if lab == fp.process:
            continue
        for t in srcs:
            if nx.has_path(h, t, u):
                return t, _path(h, t, u) + ((u, lab, fp.lock),)
    return None
