"""Stair decompositions and the NP verifier for nested (stack-disciplined) systems.

A local run of a nested process splits into neutral segments separated by
*stairs*: acquisitions of locks that are never released afterwards.  A stair
pattern keeps the ordered stair locks and a set of locks that may be used
forever; together with one total order on locks it decides whether local
runs can be interleaved into a process-fair global run.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from .core import (PAD, BudgetExceeded, LockSharingSystem, LssError, ModelError,
                   PreconditionError, Process, check_local_lasso, check_nested, require_sound)
from .ela import FALSE, Atom, EmersonLeiAutomaton, find_accepting_lasso, product, to_dnf
from .objectives import RegularObjective
from .patterns2 import VerifyResult, lasso_letters, literal_ela, padded_process_ela

NEUTRAL = "~"
INF = "inf"


class NotNested(LssError):
    def __init__(self, process, index, action):
        super().__init__(f"{process}: action {action!r} at position {index} releases a lock "
                         "that is not the latest acquired")
        self.process = process
        self.index = index
        self.action = action


class OrderError(LssError):
    """A stair pattern disagrees with the lock order it is used with."""


# --- decomposition ---------------------------------------------------------------

@dataclass(frozen=True)
class StairPattern:
    owns_seq: tuple
    inf_set: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "owns_seq", tuple(self.owns_seq))
        object.__setattr__(self, "inf_set", frozenset(self.inf_set))
        if len(set(self.owns_seq)) != len(self.owns_seq):
            raise ModelError(f"repeated lock in stair sequence {self.owns_seq}")

    @property
    def owns(self) -> frozenset:
        return frozenset(self.owns_seq)

    def __str__(self):
        inf = ",".join(sorted(self.inf_set))
        return f"({'<'.join(self.owns_seq)}; inf {{{inf}}})"


@dataclass
class StairDecomposition:
    segments: tuple        # w_0 .. w_k
    stairs: tuple          # a_1 .. a_k
    stair_locks: tuple     # t_1 .. t_k
    tail: tuple = ()       # neutral segments of one period (empty for finite runs)
    pattern: StairPattern | None = None
    constraints: nx.DiGraph = field(default_factory=nx.DiGraph)
    acquired: frozenset = frozenset()     # locks acquired at least once

    @property
    def finite(self) -> bool:
        return not self.tail

    def stem(self) -> tuple:
        out = list(self.segments[0])
        for a, w in zip(self.stairs, self.segments[1:]):
            out.append(a)
            out.extend(w)
        return tuple(out)

    def loop(self) -> tuple:
        return tuple(a for seg in self.tail for a in seg)


def _simulate_stack(proc: Process, actions, stack=(), offset=0):
    """Acquisition stacks along ``actions``; raises NotNested on a non-top release."""
    stack = list(stack)
    out = [tuple(stack)]
    for k, a in enumerate(actions):
        op = proc.op(a)
        if op.kind == "get":
            stack.append(op.lock)
        elif op.kind == "rel":
            if not stack or stack[-1] != op.lock:
                raise NotNested(proc.name, offset + k, a)
            stack.pop()
        out.append(tuple(stack))
    return out


def _neutral_split(proc: Process, actions, base):
    """Greedy split into segments returning the stack to height ``base``."""
    segs, cur, depth = [], [], base
    for a in actions:
        op = proc.op(a)
        cur.append(a)
        if op.kind == "get":
            depth += 1
        elif op.kind == "rel":
            depth -= 1
        if depth == base:
            segs.append(tuple(cur))
            cur = []
    if cur:
        raise ModelError(f"{proc.name}: segment {cur} is not neutral")
    return segs


def stair_decompose(proc: Process, stem, loop=()) -> StairDecomposition:
    """Decompose the local run ``stem`` (finite) or lasso ``stem·loop^ω``.

    The result carries the minimal pattern (stairs in acquisition order, the
    locks acquired in the loop) and the constraints any compatible order
    must satisfy, as a DAG ``t -> t'`` meaning ``t < t'``.
    """
    stem, loop = tuple(stem), tuple(loop)
    check_local_lasso(proc, stem, loop)
    stacks = _simulate_stack(proc, stem)
    if loop:
        lstacks = _simulate_stack(proc, loop, stacks[-1], offset=len(stem))
        if lstacks[-1] != stacks[-1]:
            _simulate_stack(proc, loop + loop, stacks[-1], offset=len(stem))
            raise ModelError(f"{proc.name}: loop does not return to its lock stack")
    loop_ops = [proc.op(a) for a in loop]
    loop_locks = {op.lock for op in loop_ops if op.kind != "nop"}
    inf_locks = frozenset(op.lock for op in loop_ops if op.kind == "get")

    # a stem get is a stair iff its lock is never released later
    stair_pos = []
    for k, a in enumerate(stem):
        op = proc.op(a)
        if op.kind != "get":
            continue
        later = [proc.op(b) for b in stem[k + 1:]]
        released = any(o.kind == "rel" and o.lock == op.lock for o in later) or op.lock in loop_locks
        if not released:
            stair_pos.append(k)
    stairs = tuple(stem[k] for k in stair_pos)
    locks = tuple(proc.op(a).lock for a in stairs)
    bounds = [-1] + stair_pos + [len(stem)]
    segments = [stem[bounds[j] + 1:bounds[j + 1]] for j in range(len(bounds) - 1)]

    tail = ()
    if loop:
        # first point of the loop where only the stairs are held
        k = len(locks)
        b = next(i for i, st in enumerate(lstacks) if len(st) == k)
        segments[-1] = segments[-1] + loop[:b]
        tail = tuple(_neutral_split(proc, loop[b:] + loop[:b], k))
    for j, seg in enumerate(segments):
        _neutral_split(proc, seg, 0)   # raises if a segment is not neutral

    g = nx.DiGraph()
    acquired = frozenset(proc.op(a).lock for a in stem + loop if proc.op(a).kind == "get")
    g.add_nodes_from(acquired)
    for j, k in enumerate(stair_pos):
        t = locks[j]
        for b in stem[k + 1:] + loop:
            op = proc.op(b)
            if op.kind != "nop" and op.lock != t:
                g.add_edge(t, op.lock)
    for t in acquired - inf_locks:
        for u in inf_locks:
            g.add_edge(t, u)
    return StairDecomposition(tuple(segments), stairs, locks, tail,
                              StairPattern(locks, inf_locks), g, acquired)


def matches_stair_pattern(proc: Process, dec: StairDecomposition, pattern: StairPattern,
                          order) -> bool:
    """Does the decomposed run match ``pattern`` under the total order ``order``?

    Besides the stair conditions, ``inf_set`` must sit above every other lock
    of the process (the form in which the pattern automaton checks it).
    """
    rank = _rank(order, proc)
    if pattern.owns != frozenset(dec.stair_locks):
        return False
    if any(rank[a] > rank[b] for a, b in zip(pattern.owns_seq, pattern.owns_seq[1:])):
        return False
    if not dec.pattern.inf_set <= pattern.inf_set:
        return False
    for u, v in dec.constraints.edges():
        if u in dec.stair_locks and rank[u] > rank[v]:
            return False
    return not _inf_violation(proc, pattern, rank)


def _rank(order, proc: Process | None = None) -> dict:
    rank = {t: i for i, t in enumerate(order)}
    if proc is not None:
        missing = proc.referenced_locks() - set(rank)
        if missing:
            raise OrderError(f"order misses locks {sorted(missing)} of {proc.name}")
    return rank


def _inf_violation(proc: Process, pattern: StairPattern, rank) -> bool:
    tp = proc.referenced_locks()
    inf = pattern.inf_set & tp
    return any(rank[t] < rank[u] for t in inf for u in tp - inf)


# --- pattern automaton --------------------------------------------------------------

def _st(i, x):
    return f"{i}:{x}"


def build_stair_pattern_ela(proc: Process, pattern: StairPattern, order,
                            keep_epsilon: bool = False) -> EmersonLeiAutomaton:
    """Automaton over ``Σ_p ∪ {PAD}`` accepting the padded nested runs matching ``pattern``.

    States are ``{0..k, inf} x (T_p ∪ {~})``; at most ``(|T_p|+2)^2`` of them.
    """
    rank = _rank(order, proc)
    seq = pattern.owns_seq
    if any(t not in rank for t in seq):
        raise OrderError(f"order misses stair locks of {pattern}")
    if any(rank[a] > rank[b] for a, b in zip(seq, seq[1:])):
        raise OrderError(f"stair sequence {seq} disagrees with the order")
    alphabet = proc.alphabet | {PAD}
    if _inf_violation(proc, pattern, rank):
        return EmersonLeiAutomaton([_st(0, NEUTRAL)], alphabet, [], _st(0, NEUTRAL), FALSE)
    tp = sorted(proc.referenced_locks() | set(seq), key=rank.__getitem__)
    inf = pattern.inf_set
    k = len(seq)
    levels = list(range(k + 1)) + [INF]
    states = [_st(i, x) for i in levels for x in [NEUTRAL] + tp]

    def above(i, t):
        # t_i <= t, with no constraint before the first stair
        return i == 0 or rank[seq[i - 1]] <= rank[t]

    trans = []
    for a in sorted(proc.alphabet):
        op = proc.op(a)
        if op.kind == "nop":
            trans += [(s, a, s) for s in states]
            continue
        t = op.lock
        for i in range(k + 1):
            if op.kind == "get":
                if i < k and t == seq[i]:
                    trans.append((_st(i, NEUTRAL), a, _st(i + 1, NEUTRAL)))
                if above(i, t):
                    trans.append((_st(i, NEUTRAL), a, _st(i, t)))
            for x in tp:
                if op.kind == "rel" and t == x:
                    trans.append((_st(i, x), a, _st(i, NEUTRAL)))
                elif above(i, t) and (i == 0 or t != seq[i - 1]):
                    trans.append((_st(i, x), a, _st(i, x)))
        if t in inf:
            if op.kind == "get":
                trans.append((_st(INF, NEUTRAL), a, _st(INF, t)))
            for x in tp:
                if op.kind == "rel" and t == x:
                    trans.append((_st(INF, x), a, _st(INF, NEUTRAL)))
                else:
                    trans.append((_st(INF, x), a, _st(INF, x)))
    trans.append((_st(k, NEUTRAL), PAD, _st(INF, NEUTRAL)))
    trans.append((_st(INF, NEUTRAL), PAD, _st(INF, NEUTRAL)))
    ela = EmersonLeiAutomaton(states, alphabet, trans, _st(0, NEUTRAL), Atom(_st(INF, NEUTRAL)),
                              epsilon=[(_st(k, NEUTRAL), _st(INF, NEUTRAL))])
    return ela if keep_epsilon else ela.without_epsilon()


def stair_size_bound(proc: Process) -> int:
    return (len(proc.referenced_locks()) + 2) ** 2


# --- compatibility ------------------------------------------------------------------

def _chain_graph(patterns) -> nx.DiGraph:
    g = nx.DiGraph()
    for pat in patterns.values():
        g.add_nodes_from(pat.owns_seq)
        g.add_edges_from(zip(pat.owns_seq, pat.owns_seq[1:]))
        for t in pat.owns_seq:
            for u in pat.inf_set:
                if u != t:
                    g.add_edge(t, u)
    return g


def check_stair_compatible(patterns, order=None, finite_ok=None) -> tuple:
    """Compatibility of per-process stair patterns.

    ``order`` is a total order (sequence of locks) or ``None`` to ask whether
    any order works.  ``finite_ok`` maps processes with a finite run to
    whether their end state only acquires owned locks.  Returns
    ``(ok, reason)`` with reason in ``owns-overlap``, ``order``,
    ``blocked-end``, ``owns-inf-overlap``.
    """
    seen = set()
    for p, pat in patterns.items():
        if pat.owns & seen:
            return False, "owns-overlap"
        seen |= pat.owns
    if order is None:
        if not nx.is_directed_acyclic_graph(_chain_graph(patterns)):
            return False, "order"
    else:
        rank = _rank(order)
        for u, v in _chain_graph(patterns).edges():
            if u not in rank or v not in rank or rank[u] > rank[v]:
                return False, "order"
    for p, ok in (finite_ok or {}).items():
        if not ok:
            return False, "blocked-end"
    infs = frozenset().union(*(pat.inf_set for pat in patterns.values())) if patterns else frozenset()
    if seen & infs:
        return False, "owns-inf-overlap"
    return True, None


def nested_lassos_compatible(lss: LockSharingSystem, lassos) -> tuple:
    """Pattern-level verdict for concrete local lassos ``{p: (stem, loop)}``.

    Each run keeps its minimal pattern (the smallest admissible inf set);
    a common order exists iff the union of the constraint DAGs is acyclic.
    """
    decs, pats, finite_ok = {}, {}, {}
    for proc in lss.processes:
        stem, loop = lassos.get(proc.name, ((), ()))
        decs[proc.name] = dec = stair_decompose(proc, stem, loop)
        pats[proc.name] = dec.pattern
    owned = frozenset().union(*(pat.owns for pat in pats.values()))
    for proc in lss.processes:
        dec = decs[proc.name]
        if dec.finite:
            end = check_local_lasso(proc, dec.stem(), ())[-1].state
            finite_ok[proc.name] = all(tr.op.kind == "get" and tr.op.lock in owned
                                       for tr in proc.outgoing(end))
    ok, why = check_stair_compatible(pats, None, finite_ok)
    if not ok:
        return ok, why
    g = nx.DiGraph()
    for dec in decs.values():
        g.add_nodes_from(dec.constraints.nodes())
        g.add_edges_from(dec.constraints.edges())
    if not nx.is_directed_acyclic_graph(g):
        return False, "order"
    return True, None


def order_from_constraints(graphs, locks) -> tuple:
    g = nx.DiGraph()
    g.add_nodes_from(locks)
    for h in graphs:
        g.add_edges_from(h.edges())
    return tuple(nx.lexicographical_topological_sort(g, key=str))


# --- verifier -------------------------------------------------------------------

@dataclass
class NestedCertificate:
    patterns: dict      # process -> StairPattern
    order: tuple        # total order on all locks
    lassos: dict        # process -> (stem, loop)


def prepare_nested(lss: LockSharingSystem):
    require_sound(lss)
    ok, witness = check_nested(lss)
    if not ok:
        raise PreconditionError("system is not nested", classifier="nested", evidence=witness)


def verify_nested(lss: LockSharingSystem, obj: RegularObjective,
                  max_nodes: int = 1_000_000) -> VerifyResult:
    """Search for stair patterns, a lock order and local runs meeting ``obj``.

    The owned locks ``O`` can always be placed first in the order, and the
    inf set of a process can then be taken as ``T_p \\ O``; only the
    per-process order on ``O ∩ T_p`` is guessed, and the guesses are
    accumulated in a DAG that must stay acyclic.
    """
    prepare_nested(lss)
    names = lss.names
    tps = {p.name: tuple(sorted(p.referenced_locks())) for p in lss.processes}
    stats = {"disjuncts": 0, "search_nodes": 0, "product_checks": 0}
    cache, proc_elas = {}, {}
    nodes = [0]

    def tick():
        nodes[0] += 1
        if nodes[0] > max_nodes:
            raise BudgetExceeded(f"nested search exceeded {max_nodes} nodes")

    def feasible(p, S, X, ordx, pos, neg):
        key = (p, S, X, ordx, pos, neg)
        if key not in cache:
            stats["product_checks"] += 1
            proc = lss.process(p)
            if (p, X) not in proc_elas:
                proc_elas[(p, X)] = padded_process_ela(proc, X)
            order = ordx + tuple(t for t in tps[p] if t not in X)
            pat = StairPattern(tuple(t for t in ordx if t in S), frozenset(tps[p]) - X)
            prod = product([proc_elas[(p, X)], literal_ela(obj, p, pos, neg),
                            build_stair_pattern_ela(proc, pat, order)])
            cache[key] = (pat, find_accepting_lasso(prod))
        return cache[key]

    def orders_for(S, O, dag, chosen, lits, k):
        """Backtrack over processes ``names[k:]`` picking orders of ``O ∩ T_p``."""
        if k == len(names):
            return dict(chosen)
        q = names[k]
        X = frozenset(O) & frozenset(tps[q])
        pos, neg = lits[q]
        for perm in itertools.permutations(sorted(X)):
            tick()
            edges = list(zip(perm, perm[1:]))
            if any(dag.has_edge(v, u) for u, v in edges):
                continue
            new = [e for e in edges if not dag.has_edge(*e)]
            dag.add_edges_from(new)
            if nx.is_directed_acyclic_graph(dag):
                pat, las = feasible(q, S[q], X, perm, pos, neg)
                if las is not None:
                    chosen[q] = (pat, las)
                    res = orders_for(S, O, dag, chosen, lits, k + 1)
                    if res is not None:
                        return res
                    del chosen[q]
            dag.remove_edges_from(new)
        return None

    def owns_for(k, S, used, lits):
        if k == len(names):
            O = frozenset(used)
            dag = nx.DiGraph()
            dag.add_nodes_from(O)
            res = orders_for(S, O, dag, {}, lits, 0)
            if res is None:
                return None
            return res, dag
        p = names[k]
        free = [t for t in tps[p] if t not in used]
        for r in range(len(free) + 1):
            for c in itertools.combinations(free, r):
                tick()
                S[p] = frozenset(c)
                res = owns_for(k + 1, S, used | S[p], lits)
                if res is not None:
                    return res
        S.pop(p, None)
        return None

    try:
        for d in to_dnf(obj.formula):
            stats["disjuncts"] += 1
            lits = {p: (frozenset(s for q, s in d.pos if q == p),
                        frozenset(s for q, s in d.neg if q == p)) for p in names}
            found = owns_for(0, {}, frozenset(), lits)
            if found is None:
                continue
            chosen, dag = found
            owned = frozenset(dag.nodes())
            rest = [t for t in lss.locks if t not in owned]
            order = tuple(nx.lexicographical_topological_sort(dag, key=str)) + tuple(rest)
            cert = NestedCertificate({p: pat for p, (pat, _) in chosen.items()}, order,
                                     {p: lasso_letters(las) for p, (_, las) in chosen.items()})
            return VerifyResult(True, cert, stats)
    finally:
        stats["search_nodes"] = nodes[0]
    return VerifyResult(False, None, stats)


def replay_nested_certificate(lss: LockSharingSystem, cert: NestedCertificate) -> bool:
    """Check that each certificate lasso matches its pattern and the family is compatible."""
    owned = frozenset().union(*(pat.owns for pat in cert.patterns.values()))
    finite_ok = {}
    for proc in lss.processes:
        stem, loop = cert.lassos[proc.name]
        dec = stair_decompose(proc, stem, loop)
        if not matches_stair_pattern(proc, dec, cert.patterns[proc.name], cert.order):
            return False
        if dec.finite:
            end = check_local_lasso(proc, stem, ())[-1].state
            finite_ok[proc.name] = all(tr.op.kind == "get" and tr.op.lock in owned
                                       for tr in proc.outgoing(end))
    return check_stair_compatible(cert.patterns, cert.order, finite_ok)[0]


# --- circular deadlocks ----------------------------------------------------------------

@dataclass
class CircularDeadlock:
    verdict: bool
    cycle: tuple = ()        # (process, state, held lock, needed lock) per step
    runs: dict = field(default_factory=dict)    # process -> local run reaching its state
    order: tuple = ()
    schedule: tuple = ()     # global run reaching the deadlock, as (process, action)

    def __bool__(self):
        return self.verdict


def _owns_map(proc: Process) -> dict:
    """Held set per reachable state (the system is sound)."""
    held = {proc.initial: frozenset()}
    todo = [proc.initial]
    while todo:
        s = todo.pop()
        for tr in proc.outgoing(s):
            h = held[s]
            if tr.op.kind == "get":
                h = h | {tr.op.lock}
            elif tr.op.kind == "rel":
                h = h - {tr.op.lock}
            if tr.target not in held:
                held[tr.target] = h
                todo.append(tr.target)
    return held


def _minimal_runs(proc: Process, targets, budget):
    """For each target state, runs reaching it whose order constraints are subset-minimal.

    Nodes are (state, stack, after-sets): the after-set of a stack entry
    collects the locks used since that entry was acquired.
    """
    start = (proc.initial, (), ())
    parent = {start: None}
    todo = [start]
    found = {s: [] for s in targets}
    while todo:
        node = todo.pop()
        s, stack, after = node
        if s in found:
            edges = frozenset((t, u) for t, us in zip(stack, after) for u in us)
            found[s].append((edges, node))
        for tr in proc.outgoing(s):
            op = tr.op
            if op.kind == "get":
                if op.lock in stack:
                    continue
                nst = stack + (op.lock,)
                naf = tuple(a | {op.lock} for a in after) + (frozenset(),)
            elif op.kind == "rel":
                if not stack or stack[-1] != op.lock:
                    continue
                nst = stack[:-1]
                naf = tuple(a | {op.lock} for a in after[:-1])
            else:
                nst, naf = stack, after
            nxt = (tr.target, nst, naf)
            if nxt not in parent:
                parent[nxt] = (node, tr.action)
                if len(parent) > budget:
                    raise BudgetExceeded(f"{proc.name}: run exploration exceeded {budget} nodes")
                todo.append(nxt)

    def run_to(node):
        acts = []
        while parent[node] is not None:
            node, a = parent[node]
            acts.append(a)
        return tuple(acts[::-1])

    out = {}
    for s, cands in found.items():
        cands.sort(key=lambda c: len(c[0]))
        keep = []
        for edges, node in cands:
            if not any(e <= edges for e, _ in keep):
                keep.append((edges, node))
        out[s] = [(edges, run_to(node)) for edges, node in keep]
    return out


def circular_candidates(lss: LockSharingSystem) -> dict:
    """Lock edges ``t -> u`` labelled by ``(process, state)``: the state holds ``t``
    and every outgoing transition acquires ``u``."""
    edges = {}
    for proc in lss.processes:
        owns = _owns_map(proc)
        for s in proc.reachable_states():
            out = proc.outgoing(s)
            needs = {tr.op.lock if tr.op.kind == "get" else None for tr in out}
            if len(needs) != 1 or None in needs:
                continue
            (u,) = needs
            for t in owns[s]:
                edges.setdefault((t, u), []).append((proc.name, s, owns[s]))
    return edges


def detect_circular_deadlock(lss: LockSharingSystem, budget: int = 200_000,
                             max_cycles: int = 100_000) -> CircularDeadlock:
    """Decide whether a circular deadlock is reachable.

    Every process on the cycle must reach its state with a finite run; the
    runs must own disjoint locks and admit one common lock order.  Processes
    off the cycle stay in their initial state.
    """
    prepare_nested(lss)
    cands = circular_candidates(lss)
    g = nx.DiGraph()
    g.add_edges_from(cands)
    targets = {}
    for labels in cands.values():
        for p, s, _ in labels:
            targets.setdefault(p, set()).add(s)
    runs = {p: _minimal_runs(lss.process(p), ss, budget) for p, ss in targets.items()}

    def extend(cycle, j, picked, used_p, used_t, dag):
        if j == len(cycle):
            return list(picked), dag
        t, u = cycle[j], cycle[(j + 1) % len(cycle)]
        for p, s, held in cands[(t, u)]:
            if p in used_p or held & used_t:
                continue
            for edges, run in runs[p][s]:
                new = [e for e in edges if not dag.has_edge(*e)]
                dag.add_edges_from(new)
                if nx.is_directed_acyclic_graph(dag):
                    picked.append((p, s, t, u, run))
                    res = extend(cycle, j + 1, picked, used_p | {p}, used_t | held, dag)
                    if res is not None:
                        return res
                    picked.pop()
                dag.remove_edges_from(new)
        return None

    for n, cycle in enumerate(nx.simple_cycles(g)):
        if n >= max_cycles:
            raise BudgetExceeded(f"more than {max_cycles} lock cycles")
        res = extend(cycle, 0, [], frozenset(), frozenset(), nx.DiGraph())
        if res is None:
            continue
        picked, dag = res
        dag.add_nodes_from(lss.locks)
        order = tuple(nx.lexicographical_topological_sort(dag, key=str))
        run_map = {p: run for p, _, _, _, run in picked}
        sched = schedule_finite_runs(lss, run_map, order)
        return CircularDeadlock(True, tuple((p, s, t, u) for p, s, t, u, _ in picked),
                                run_map, order, sched)
    return CircularDeadlock(False)


def schedule_finite_runs(lss: LockSharingSystem, runs, order) -> tuple:
    """Interleave finite nested local runs with disjoint stairs along ``order``.

    Every process first runs its leading neutral segment; then the stairs
    are taken in increasing order, each followed by its neutral segment.
    """
    rank = _rank(order)
    decs = {p: stair_decompose(lss.process(p), run) for p, run in runs.items()}
    out = []
    for p, dec in decs.items():
        out += [(p, a) for a in dec.segments[0]]
    steps = [(rank[t], p, j) for p, dec in decs.items() for j, t in enumerate(dec.stair_locks)]
    for _, p, j in sorted(steps):
        dec = decs[p]
        out.append((p, dec.stairs[j]))
        out += [(p, a) for a in dec.segments[j + 1]]
    return tuple(out)
