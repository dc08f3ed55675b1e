"""Brute-force ground truth.

Explores the product of global configurations and objective automaton
states and looks for a process-fair lasso whose recurring states satisfy
the objective formula.  Exponential, meant for small systems.
"""
from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field

import networkx as nx

from .core import (PAD, BudgetExceeded, Lasso, LockSharingSystem, ModelError, check_lasso,
                   check_local_lasso, enabled_actions, execute, local_step)
from .ela import eval_formula, to_dnf
from .objectives import RegularObjective, lasso_valuation

DEFAULT_STATES = 2_000_000
DEFAULT_TRANSITIONS = 10_000_000


def default_budget() -> tuple:
    env = os.environ.get("LSS_BUDGET")
    if env:
        n = int(env)
        return n, 5 * n
    return DEFAULT_STATES, DEFAULT_TRANSITIONS


@dataclass
class OracleResult:
    verdict: bool
    lasso: Lasso | None = None
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict


def _explore(lss, autos, max_states, max_trans):
    """Reachable product graph.  Node = (cfg, bstates)."""
    procs = lss.processes
    init = (lss.initial_config(), tuple(autos[p.name].initial for p in procs))
    ids = {init: 0}
    nodes = [init]
    parent = [None]
    succ = []
    disabled = []
    n_trans = 0
    k = 0
    while k < len(nodes):
        cfg, bs = nodes[k]
        held_all = frozenset().union(*(lc.held for lc in cfg)) if cfg else frozenset()
        out = []
        dis = 0
        for i, proc in enumerate(procs):
            acts = enabled_actions(lss, cfg, i, held_all - cfg[i].held)
            if not acts:
                dis |= 1 << i
            for a in acts:
                lc = local_step(proc, cfg[i], a)
                ncfg = cfg[:i] + (lc,) + cfg[i + 1:]
                nb = bs[:i] + (autos[proc.name].step(bs[i], a),) + bs[i + 1:]
                node = (ncfg, nb)
                j = ids.get(node)
                if j is None:
                    j = len(nodes)
                    if j >= max_states:
                        raise BudgetExceeded(f"oracle exceeded {max_states} product states")
                    ids[node] = j
                    nodes.append(node)
                    parent.append((k, i, a))
                out.append((i, a, j))
                n_trans += 1
                if n_trans > max_trans:
                    raise BudgetExceeded(f"oracle exceeded {max_trans} transitions")
        succ.append(out)
        disabled.append(dis)
        k += 1
    return nodes, succ, parent, disabled


def _path_to(parent, names, j):
    path = []
    while parent[j] is not None:
        k, i, a = parent[j]
        path.append((names[i], a))
        j = k
    return path[::-1]


def _walk(succ, allowed, src, goal):
    """Shortest path inside ``allowed`` from ``src`` to a node/edge satisfying ``goal``.

    ``goal(k, i, a, j)`` tests an edge; returns list of (i, a, j).
    """
    parent = {src: None}
    queue = deque([src])
    while queue:
        k = queue.popleft()
        for i, a, j in succ[k]:
            if j not in allowed:
                continue
            if goal(k, i, a, j):
                path = [(i, a, j)]
                x = k
                while parent[x] is not None:
                    y, e = parent[x]
                    path.append(e)
                    x = y
                return path[::-1]
            if j not in parent:
                parent[j] = (k, (i, a, j))
                queue.append(j)
    return None


def explore_verify(lss: LockSharingSystem, obj: RegularObjective, budget=None) -> OracleResult:
    """Search for a process-fair lasso satisfying ``obj``.

    Acting sets are enumerated explicitly: processes outside the acting set
    must be disabled on the whole cycle and are valued by their pad cycle.
    """
    max_states, max_trans = budget if budget is not None else default_budget()
    procs = lss.processes
    names = [p.name for p in procs]
    n = len(procs)
    autos = {p: obj.automata[p] for p in names}
    nodes, succ, parent, disabled = _explore(lss, autos, max_states, max_trans)
    stats = {"product_states": len(nodes), "transitions": sum(map(len, succ))}
    pad_cache = {}

    def padcyc(i, b):
        key = (i, b)
        if key not in pad_cache:
            pad_cache[key] = autos[names[i]].pad_cycle(b)
        return pad_cache[key]

    full = (1 << n) - 1
    for d in to_dnf(obj.formula):
        P = [set() for _ in range(n)]
        N = [set() for _ in range(n)]
        for p, s in d.pos:
            P[names.index(p)].add(s)
        for p, s in d.neg:
            N[names.index(p)].add(s)
        for A in sorted(range(1 << n), key=lambda m: (bin(m).count("1"), m)):
            passive = full & ~A
            allowed = set()
            for k, (cfg, bs) in enumerate(nodes):
                if disabled[k] & passive != passive:
                    continue
                ok = True
                for i in range(n):
                    if A >> i & 1:
                        if bs[i] in N[i]:
                            ok = False
                            break
                    else:
                        cyc = padcyc(i, bs[i])
                        if not P[i] <= cyc or N[i] & cyc:
                            ok = False
                            break
                if ok:
                    allowed.add(k)
            if not allowed:
                continue
            if A == 0:
                k = min(allowed)
                return OracleResult(True, Lasso(_path_to(parent, names, k), ()), stats)
            g = nx.DiGraph()
            g.add_nodes_from(allowed)
            for k in allowed:
                for i, a, j in succ[k]:
                    if j in allowed:
                        g.add_edge(k, j)
            acting = [i for i in range(n) if A >> i & 1]
            for comp in sorted(nx.strongly_connected_components(g), key=min):
                if len(comp) == 1 and not g.has_edge(min(comp), min(comp)):
                    continue
                movers = set()
                for k in comp:
                    for i, a, j in succ[k]:
                        if j in comp:
                            movers.add(i)
                if not all(i in movers for i in acting):
                    continue
                seen = [set() for _ in range(n)]
                for k in comp:
                    for i in acting:
                        seen[i].add(nodes[k][1][i])
                if not all(P[i] <= seen[i] for i in acting):
                    continue
                lasso = _witness(nodes, succ, parent, names, comp, acting, P, n)
                return OracleResult(True, lasso, stats)
    return OracleResult(False, None, stats)


def _witness(nodes, succ, parent, names, comp, acting, P, n):
    head = min(comp)
    stem = _path_to(parent, names, head)
    loop = []
    cur = head
    goals = [("edge", i) for i in acting]
    goals += [("state", i, s) for i in acting for s in sorted(P[i], key=str)]
    for g in goals:
        if g[0] == "state" and nodes[cur][1][g[1]] == g[2]:
            continue
        if g[0] == "edge":
            test = lambda k, i, a, j, g=g: i == g[1]
        else:
            test = lambda k, i, a, j, g=g: nodes[j][1][g[1]] == g[2]
        seg = _walk(succ, comp, cur, test)
        loop.extend(seg)
        cur = seg[-1][2]
    if cur != head:
        loop.extend(_walk(succ, comp, cur, lambda k, i, a, j: j == head))
    moves = [(names[i], a) for i, a, _ in loop]
    moves += [(names[i], PAD) for i in range(n) if i not in acting]
    return Lasso(tuple(stem), tuple(moves))


# --- checks on concrete lassos ---------------------------------------------------

def is_process_fair(lss: LockSharingSystem, lasso: Lasso) -> bool:
    head = check_lasso(lss, lasso)
    loop = [m for m in lasso.loop if m[1] != PAD]
    cfgs = execute(lss, loop, start=head)
    actors = {p for p, _ in loop}
    for i, proc in enumerate(lss.processes):
        if proc.name in actors:
            continue
        if any(enabled_actions(lss, c, i) for c in cfgs):
            return False
    return True


def lasso_satisfies(lss: LockSharingSystem, lasso: Lasso, obj: RegularObjective) -> bool:
    check_lasso(lss, lasso)
    return eval_formula(obj.formula, lasso_valuation(lss, obj, lasso))


def can_schedule(lss: LockSharingSystem, lassos, budget=None) -> bool:
    """Can the given local lassos be interleaved into one process-fair global run?

    ``lassos`` maps each process name to ``(stem, loop)`` action sequences.
    """
    max_states = (budget if budget is not None else default_budget())[0]
    procs = lss.processes
    n = len(procs)
    seqs, stems, cfgs = [], [], []
    for proc in procs:
        stem, loop = lassos.get(proc.name, ((), ()))
        stem, loop = list(stem), list(loop)
        lc = check_local_lasso(proc, stem, loop)
        seqs.append(stem + loop)
        stems.append(len(stem))
        cfgs.append(lc)
    infinite = [len(seqs[i]) > stems[i] for i in range(n)]

    def nxt(i, pos):
        pos += 1
        if infinite[i] and pos == len(seqs[i]):
            pos = stems[i]
        return pos

    def config(pos):
        return tuple(cfgs[i][pos[i]] for i in range(n))

    init = tuple(0 for _ in range(n))
    ids = {init: 0}
    order = [init]
    succ = []
    k = 0
    while k < len(order):
        pos = order[k]
        cfg = config(pos)
        held = [c.held for c in cfg]
        out = []
        for i in range(n):
            if not infinite[i] and pos[i] == stems[i]:
                continue
            a = seqs[i][pos[i]]
            op = procs[i].op(a)
            if op.kind == "get" and any(op.lock in held[j] for j in range(n) if j != i):
                continue
            np_ = pos[:i] + (nxt(i, pos[i]),) + pos[i + 1:]
            j = ids.get(np_)
            if j is None:
                j = len(order)
                if j >= max_states:
                    raise BudgetExceeded(f"schedule search exceeded {max_states} states")
                ids[np_] = j
                order.append(np_)
            out.append((i, j))
        succ.append(out)
        k += 1

    allowed = set()
    for k, pos in enumerate(order):
        if any(not infinite[i] and pos[i] != stems[i] for i in range(n)):
            continue
        cfg = config(pos)
        if all(infinite[i] or not enabled_actions(lss, cfg, i) for i in range(n)):
            allowed.add(k)
    if not any(infinite):
        return bool(allowed)
    g = nx.DiGraph()
    g.add_nodes_from(allowed)
    for k in allowed:
        for i, j in succ[k]:
            if j in allowed:
                g.add_edge(k, j)
    need = {i for i in range(n) if infinite[i]}
    for comp in nx.strongly_connected_components(g):
        movers = {i for k in comp for i, j in succ[k] if j in comp}
        if need <= movers:
            return True
    return False


def circular_deadlock_at(lss: LockSharingSystem, cfg) -> list | None:
    """Processes forming a circular deadlock in ``cfg``, or ``None``.

    ``p -> q`` when ``p`` holds a lock and every outgoing transition of its
    state acquires one same lock, currently held by ``q``.
    """
    owner = {t: i for i, lc in enumerate(cfg) for t in lc.held}
    g = nx.DiGraph()
    for i, proc in enumerate(lss.processes):
        if not cfg[i].held:
            continue
        out = proc.outgoing(cfg[i].state)
        needs = {tr.op.lock if tr.op.kind == "get" else None for tr in out}
        if len(needs) == 1 and None not in needs:
            (u,) = needs
            if u in owner:
                g.add_edge(i, owner[u])
    try:
        cyc = nx.find_cycle(g)
    except nx.NetworkXNoCycle:
        return None
    return [lss.processes[i].name for i, _ in cyc]


def find_circular_deadlock(lss: LockSharingSystem, budget=None):
    """Breadth-first search for a reachable circular deadlock.

    Returns ``(run, processes)`` or ``None``.
    """
    max_states = (budget if budget is not None else default_budget())[0]
    init = lss.initial_config()
    parent = {init: None}
    queue = deque([init])
    while queue:
        cfg = queue.popleft()
        cyc = circular_deadlock_at(lss, cfg)
        if cyc is not None:
            run = []
            c = cfg
            while parent[c] is not None:
                c, move = parent[c]
                run.append(move)
            return run[::-1], cyc
        for i, proc in enumerate(lss.processes):
            for a in enabled_actions(lss, cfg, i):
                lc = local_step(proc, cfg[i], a)
                nxt = cfg[:i] + (lc,) + cfg[i + 1:]
                if nxt not in parent:
                    if len(parent) >= max_states:
                        raise BudgetExceeded(f"search exceeded {max_states} configurations")
                    parent[nxt] = (cfg, (proc.name, a))
                    queue.append(nxt)
    return None
