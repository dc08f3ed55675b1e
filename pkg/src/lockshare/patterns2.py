"""Run patterns for two-lock systems and the NP verifier built on them.

A pattern summarises a local run of a process with locks ``{t1, t2}``:
finitary patterns record the locks held at the end, infinitary patterns
the family of lock sets held infinitely often; both carry a weak/strong
flag telling whether the run settled on a single lock by releasing the
other one.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import networkx as nx

from .core import (PAD, BudgetExceeded, LockSharingSystem, PreconditionError, Process,
                   check_2lss, check_local_lasso, lock_pair, pad_two_locks, require_sound)
from .ela import (TRUE, Atom, EmersonLeiAutomaton, conj, disj, find_accepting_lasso, negate,
                  product, to_dnf)
from .objectives import RegularObjective


@dataclass(frozen=True)
class Pattern2:
    kind: str                      # "fin" or "inf"
    owned: frozenset = frozenset()  # finitary only
    inf_sets: frozenset = frozenset()  # infinitary only
    strong: bool = False
    blocks: frozenset | None = field(default=None, compare=False)

    @property
    def finitary(self) -> bool:
        return self.kind == "fin"

    def owns(self) -> frozenset:
        if self.finitary:
            return self.owned
        return frozenset.intersection(*self.inf_sets) if self.inf_sets else frozenset()

    def lock_union(self) -> frozenset:
        return frozenset().union(*self.inf_sets) if self.inf_sets else frozenset()

    @property
    def switching(self) -> bool:
        return (not self.finitary and frozenset() not in self.inf_sets
                and not self.owns())

    def strong_lock(self):
        """The single lock a strong pattern settles on, else ``None``."""
        if not self.strong:
            return None
        (t,) = self.owned if self.finitary else next(iter(self.inf_sets))
        return t

    def __str__(self):
        mark = "s" if self.strong else "w"
        if self.finitary:
            return "{" + ",".join(sorted(self.owned)) + "}" + mark
        sets = sorted("{" + ",".join(sorted(j)) + "}" for j in self.inf_sets)
        return "{" + ",".join(sets) + "}" + mark


def finitary(owned, strong=False) -> Pattern2:
    owned = frozenset(owned)
    if strong and len(owned) != 1:
        raise ValueError("a strong finitary pattern owns exactly one lock")
    return Pattern2("fin", owned=owned, strong=strong)


def infinitary(inf_sets, strong=False) -> Pattern2:
    inf_sets = frozenset(frozenset(j) for j in inf_sets)
    if not inf_sets:
        raise ValueError("an infinitary pattern needs at least one lock set")
    if strong and (len(inf_sets) != 1 or len(next(iter(inf_sets))) != 1):
        raise ValueError("a strong infinitary pattern has the form {{t}}")
    return Pattern2("inf", inf_sets=inf_sets, strong=strong)


def all_patterns(pair) -> list:
    """The 23 patterns over a lock pair, finitary ones first, switching ones last."""
    t1, t2 = pair
    subsets = [frozenset(), frozenset([t1]), frozenset([t2]), frozenset([t1, t2])]
    out = [finitary(()), finitary([t1]), finitary([t2]), finitary([t1, t2]),
           finitary([t1], True), finitary([t2], True)]
    fams = []
    for r in range(1, 5):
        fams.extend(itertools.combinations(subsets, r))
    infs = [infinitary(f) for f in fams]
    infs += [infinitary([[t1]], True), infinitary([[t2]], True)]
    infs.sort(key=lambda p: p.switching)
    return out + infs


# --- extraction -----------------------------------------------------------------

def pattern_of_local_lasso(proc: Process, stem, loop=()) -> Pattern2:
    """Pattern of the local run ``stem . loop^omega`` (finite when ``loop`` is empty)."""
    stem, loop = list(stem), list(loop)
    cfgs = check_local_lasso(proc, stem, loop)
    head = cfgs[len(stem)]
    last_stem_op = None
    for a in stem:
        op = proc.op(a)
        if op.kind != "nop":
            last_stem_op = op
    if not loop:
        held = head.held
        strong = (len(held) == 1 and last_stem_op is not None and last_stem_op.kind == "rel"
                  and last_stem_op.lock not in held)
        return Pattern2("fin", owned=held, strong=strong, blocks=proc.blocks(head.state))
    inf_sets = frozenset(c.held for c in cfgs[len(stem):])
    quiet = all(proc.op(a).kind == "nop" for a in loop)
    strong = (quiet and len(head.held) == 1 and last_stem_op is not None
              and last_stem_op.kind == "rel")
    return Pattern2("inf", inf_sets=inf_sets, strong=strong)


def end_state_has_non_get(proc: Process, stem) -> bool:
    s = check_local_lasso(proc, list(stem))[-1].state
    return not proc.only_gets(s)


# --- recognisers -------------------------------------------------------------------

_BASE = ("0", "1w", "1s", "2w", "2s", "12")
PATTERN_STATES = _BASE + tuple(f"#pad:{s}" for s in _BASE)


def _state_of(pair, owned, strong=False):
    t1, t2 = pair
    owned = frozenset(owned)
    if not owned:
        return "0"
    if owned == {t1, t2}:
        return "12"
    idx = "1" if owned == {t1} else "2"
    return idx + ("s" if strong else "w")


def build_pattern_ela(proc: Process, pattern: Pattern2) -> EmersonLeiAutomaton:
    """Twelve-state recogniser of padded local runs with the given pattern."""
    pair = lock_pair(proc)
    t1, t2 = pair
    moves = {
        "0": {("get", t1): "1w", ("get", t2): "2w"},
        "1w": {("rel", t1): "0", ("get", t2): "12"},
        "2w": {("rel", t2): "0", ("get", t1): "12"},
        "1s": {("rel", t1): "0", ("get", t2): "12"},
        "2s": {("rel", t2): "0", ("get", t1): "12"},
        "12": {("rel", t2): "1s", ("rel", t1): "2s"},
    }
    trans = []
    for s in _BASE:
        for a in sorted(proc.alphabet):
            op = proc.op(a)
            if op.kind == "nop":
                trans.append((s, a, s))
            elif (op.kind, op.lock) in moves[s]:
                trans.append((s, a, moves[s][(op.kind, op.lock)]))
        trans.append((s, PAD, f"#pad:{s}"))
        trans.append((f"#pad:{s}", PAD, f"#pad:{s}"))
    if pattern.finitary:
        acc = Atom("#pad:" + _state_of(pair, pattern.owned, pattern.strong))
    elif len(pattern.inf_sets) == 1 and len(next(iter(pattern.inf_sets))) == 1:
        target = _state_of(pair, next(iter(pattern.inf_sets)), pattern.strong)
        acc = conj(Atom(target), *(negate(Atom(s)) for s in PATTERN_STATES if s != target))
    else:
        if pattern.strong:
            raise ValueError("malformed strong pattern")
        parts = []
        for j in (frozenset(), frozenset([t1]), frozenset([t2]), frozenset([t1, t2])):
            if len(j) == 1:
                phi = Atom(_state_of(pair, j)) | Atom(_state_of(pair, j, True))
            else:
                phi = Atom(_state_of(pair, j))
            parts.append(phi if j in pattern.inf_sets else negate(phi))
        acc = conj(*parts)
    return EmersonLeiAutomaton(PATTERN_STATES, proc.alphabet | {PAD}, trans, "0", acc)


def padded_process_ela(proc: Process, owned) -> EmersonLeiAutomaton:
    """The process as an automaton over ``Σ_p ∪ {PAD}``.

    States whose outgoing transitions all acquire locks of ``owned`` (dead
    states included) may stop: a pad letter moves to a copy that only
    reads pad letters.
    """
    owned = frozenset(owned)
    states = list(proc.states)
    trans = [(tr.source, tr.action, tr.target) for tr in proc.transitions]
    for s in proc.states:
        if all(tr.op.kind == "get" and tr.op.lock in owned for tr in proc.outgoing(s)):
            ps = f"#pad:{s}"
            states.append(ps)
            trans += [(s, PAD, ps), (ps, PAD, ps)]
    return EmersonLeiAutomaton(states, proc.alphabet | {PAD}, trans, proc.initial, TRUE)


def literal_ela(obj: RegularObjective, p, pos, neg) -> EmersonLeiAutomaton:
    acc = conj(*(Atom(s) for s in sorted(pos, key=str)),
               *(negate(Atom(s)) for s in sorted(neg, key=str)))
    return obj.automata[p].as_ela(acc)


def lasso_letters(lasso) -> tuple:
    """Local (stem, loop) actions from an accepting lasso of a padded product."""
    if all(a == PAD for a in lasso.loop):
        return tuple(a for a in lasso.stem if a != PAD), ()
    return tuple(lasso.stem), tuple(lasso.loop)


# --- compatibility ---------------------------------------------------------------------

@dataclass(frozen=True)
class PatternEntry:
    pattern: Pattern2
    locks: tuple                   # the two locks of the process
    non_get_out: bool = False      # finitary only: end state has a non-acquiring transition


def _strong_edges(entries):
    edges = []
    for p, e in entries.items():
        t = e.pattern.strong_lock()
        if t is not None:
            other = [x for x in e.locks if x != t]
            edges.append((t, other[0], p))
    return edges


def strong_order_graph(entries) -> nx.DiGraph:
    g = nx.DiGraph()
    for t1, t2, _ in _strong_edges(entries):
        g.add_edge(t1, t2)
    return g


def g_inf(entries) -> nx.MultiGraph:
    g = nx.MultiGraph()
    for p, e in entries.items():
        if e.pattern.switching:
            g.add_edge(e.locks[0], e.locks[1], key=p)
    return g


def _cond_vi(entries) -> bool:
    g = g_inf(entries)
    # any cycle (parallel edges included) is a violation
    if g.number_of_edges():
        if any(g.number_of_edges(u, v) > 1 for u, v in g.edges()):
            return False
        if not nx.is_forest(nx.Graph(g)):
            return False
    for p, e in entries.items():
        if e.pattern.finitary:
            continue
        for j in e.pattern.inf_sets:
            if len(j) != 2:
                continue
            t, u = sorted(j)
            h = nx.Graph()
            h.add_nodes_from([t, u])
            h.add_edges_from((a, b) for a, b, k in g.edges(keys=True) if k != p)
            if nx.has_path(h, t, u):
                return False
    return True


def check_patterns_compatible(entries) -> tuple:
    """Decide whether local runs with these patterns interleave into a fair run.

    ``entries`` maps process names to :class:`PatternEntry`.  Returns
    ``(True, None)`` or ``(False, condition)`` with condition in
    ``"i"``..``"vi"``.
    """
    for e in entries.values():
        if e.pattern.finitary and e.non_get_out:
            return False, "i"
    seen = set()
    for e in entries.values():
        o = e.pattern.owns()
        if o & seen:
            return False, "ii"
        seen |= o
    for e in entries.values():
        if e.pattern.finitary and not (e.pattern.blocks or frozenset()) <= seen:
            return False, "iii"
    for p, e in entries.items():
        for q, f in entries.items():
            if p != q and not f.pattern.finitary and e.pattern.owns() & f.pattern.lock_union():
                return False, "iv"
    if not nx.is_directed_acyclic_graph(strong_order_graph(entries)):
        return False, "v"
    if not _cond_vi(entries):
        return False, "vi"
    return True, None


def order_witness(entries, locks) -> tuple:
    g = strong_order_graph(entries)
    g.add_nodes_from(locks)
    return tuple(nx.lexicographical_topological_sort(g, key=str))


# --- verifier -----------------------------------------------------------------------

@dataclass
class PatternCertificate:
    patterns: dict          # process -> Pattern2
    lassos: dict            # process -> (stem, loop) local actions
    order: tuple            # total order on locks
    locks: dict = field(default_factory=dict)  # process -> lock pair


@dataclass
class VerifyResult:
    verdict: bool
    certificate: object = None
    stats: dict = field(default_factory=dict)

    def __bool__(self):
        return self.verdict


def prepare_2lss(lss: LockSharingSystem) -> LockSharingSystem:
    require_sound(lss)
    ok, sizes = check_2lss(lss)
    if not ok:
        raise PreconditionError("not a two-lock system", classifier="2lss", evidence=sizes)
    return pad_two_locks(lss)


def _signature(pat: Pattern2, pair, profile):
    edge = pat.strong_lock()
    return (pat.finitary, pat.owns(), edge,
            frozenset() if pat.finitary else pat.lock_union(),
            frozenset(j for j in pat.inf_sets if len(j) == 2),
            pat.switching, profile)


def _dominates(a, b, full_profile_a) -> bool:
    fa, oa, ea, ua, pa, sa, pra = a
    fb, ob, eb, ub, pb, sb, prb = b
    if oa != ob or not (ea is None or ea == eb):
        return False
    if not (ua <= ub and pa <= pb and sa <= sb):
        return False
    if fa:
        if fb:
            return pra >= prb
        return full_profile_a
    return True


class _Search:
    """Backtracking over per-process patterns for one DNF disjunct."""

    def __init__(self, names, pairs, domains, feas, max_nodes):
        self.names = names
        self.pairs = pairs
        self.domains = domains      # p -> list of patterns
        self.feas = feas            # (p, pattern) -> set of feasible X (finitary)
        self.max_nodes = max_nodes
        self.nodes = 0

    def run(self):
        order = sorted(self.names, key=lambda p: (len(self.domains[p]), self.names.index(p)))
        return self._go(order, 0, {}, dict(self.domains))

    def _consistent(self, p, pat, chosen):
        o = pat.owns()
        for q, qp in chosen.items():
            if o & qp.owns():
                return False
            if not qp.finitary and o & qp.lock_union():
                return False
            if not pat.finitary and qp.owns() & pat.lock_union():
                return False
        return True

    def _global_ok(self, chosen):
        entries = {q: PatternEntry(pt, self.pairs[q]) for q, pt in chosen.items()}
        if not nx.is_directed_acyclic_graph(strong_order_graph(entries)):
            return False
        return _cond_vi(entries)

    def _go(self, order, k, chosen, doms):
        self.nodes += 1
        if self.nodes > self.max_nodes:
            raise BudgetExceeded(f"pattern search exceeded {self.max_nodes} nodes")
        owned = frozenset().union(*(pt.owns() for pt in chosen.values())) if chosen else frozenset()
        upper = owned.union(*(pt.owns() for q in order[k:] for pt in doms[q]))
        for q, pt in chosen.items():
            if pt.finitary and frozenset(upper & set(self.pairs[q])) not in self.feas[(q, pt)]:
                return None
        if k == len(order):
            for q, pt in chosen.items():
                if pt.finitary and frozenset(owned & set(self.pairs[q])) not in self.feas[(q, pt)]:
                    return None
            return dict(chosen)
        p = order[k]
        for pat in doms[p]:
            chosen[p] = pat
            if self._global_ok(chosen):
                nd = dict(doms)
                dead = False
                for q in order[k + 1:]:
                    nd[q] = [x for x in doms[q] if self._consistent(q, x, {p: pat})]
                    if not nd[q]:
                        dead = True
                        break
                if not dead:
                    res = self._go(order, k + 1, chosen, nd)
                    if res is not None:
                        return res
            del chosen[p]
        return None


def verify_2lss(lss: LockSharingSystem, obj: RegularObjective, max_nodes: int = 2_000_000) -> VerifyResult:
    """Pattern-based decision procedure for sound two-lock systems."""
    sys2 = prepare_2lss(lss)
    names = sys2.names
    pairs = {p.name: lock_pair(p) for p in sys2.processes}
    subsets = {p: [frozenset(c) for r in range(3) for c in itertools.combinations(pairs[p], r)]
               for p in names}
    cache = {}
    proc_elas = {}

    def nonempty(p, pat, pos, neg, X):
        key = (p, pat, pos, neg, X)
        if key not in cache:
            proc = sys2.process(p)
            if (p, X) not in proc_elas:
                proc_elas[(p, X)] = padded_process_ela(proc, X)
            prod = product([proc_elas[(p, X)], literal_ela(obj, p, pos, neg),
                            build_pattern_ela(proc, pat)])
            cache[key] = find_accepting_lasso(prod)
        return cache[key]

    stats = {"disjuncts": 0, "search_nodes": 0}
    for d in to_dnf(obj.formula):
        stats["disjuncts"] += 1
        lits = {p: (frozenset(s for q, s in d.pos if q == p), frozenset(s for q, s in d.neg if q == p))
                for p in names}
        domains, feas, witness = {}, {}, {}
        for p in names:
            pos, neg = lits[p]
            sigs = []
            full = [x for x in subsets[p]]
            for pat in all_patterns(pairs[p]):
                if pat.finitary:
                    good = frozenset(x for x in full if x >= pat.owned
                                     and nonempty(p, pat, pos, neg, x) is not None)
                    if not good:
                        continue
                    feas[(p, pat)] = good
                    profile = good
                    fullp = good >= frozenset(x for x in full if x >= pat.owned)
                else:
                    if nonempty(p, pat, pos, neg, frozenset()) is None:
                        continue
                    profile = None
                    fullp = True
                sigs.append((pat, _signature(pat, pairs[p], profile), fullp))
            kept = []
            for i, (pat, sig, fullp) in enumerate(sigs):
                dominated = False
                for j, (pat2, sig2, full2) in enumerate(sigs):
                    if i == j:
                        continue
                    if _dominates(sig2, sig, full2) and (not _dominates(sig, sig2, fullp) or j < i):
                        dominated = True
                        break
                if not dominated:
                    kept.append(pat)
            domains[p] = kept
        if any(not domains[p] for p in names):
            continue
        search = _Search(names, pairs, domains, feas, max_nodes)
        try:
            chosen = search.run()
        finally:
            stats["search_nodes"] += search.nodes
        if chosen is None:
            continue
        owned = frozenset().union(*(pt.owns() for pt in chosen.values()))
        lassos = {}
        for p, pat in chosen.items():
            pos, neg = lits[p]
            X = frozenset(owned & set(pairs[p])) if pat.finitary else frozenset()
            lassos[p] = lasso_letters(nonempty(p, pat, pos, neg, X))
        entries = {p: PatternEntry(pt, pairs[p]) for p, pt in chosen.items()}
        cert = PatternCertificate(chosen, lassos, order_witness(entries, sys2.locks), pairs)
        return VerifyResult(True, cert, stats)
    return VerifyResult(False, None, stats)


def replay_certificate(lss: LockSharingSystem, cert: PatternCertificate) -> bool:
    """Re-extract patterns from the certificate lassos and re-check compatibility."""
    sys2 = pad_two_locks(lss)
    entries = {}
    for p, (stem, loop) in cert.lassos.items():
        proc = sys2.process(p)
        pat = pattern_of_local_lasso(proc, stem, loop)
        if pat != cert.patterns[p]:
            return False
        entries[p] = PatternEntry(pat, lock_pair(proc),
                                  end_state_has_non_get(proc, stem) if not loop else False)
    return check_patterns_compatible(entries)[0]


def entries_from_lassos(lss: LockSharingSystem, lassos) -> dict:
    """Pattern entries extracted from concrete local lassos ``{p: (stem, loop)}``."""
    sys2 = pad_two_locks(lss)
    out = {}
    for proc in sys2.processes:
        stem, loop = lassos.get(proc.name, ((), ()))
        pat = pattern_of_local_lasso(proc, stem, loop)
        out[proc.name] = PatternEntry(pat, lock_pair(proc),
                                      end_state_has_non_get(proc, stem) if not loop else False)
    return out
