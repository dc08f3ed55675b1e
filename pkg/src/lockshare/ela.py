"""Emerson-Lei automata.

Acceptance is a boolean formula over atoms ``inf(v)``.  An atom ``v`` holds
on a run when some state carrying label ``v`` recurs forever.  Plain
automata label each state with itself; products label a tuple state with
``(i, v)`` for each label ``v`` of component ``i``.
"""
from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Mapping

import networkx as nx

from .core import BudgetExceeded, LssError


class DnfBlowup(LssError):
    pass


class MissingAtom(LssError, KeyError):
    pass


# --- formulas --------------------------------------------------------------

class Formula:
    def __and__(self, other):
        return conj(self, other)

    def __or__(self, other):
        return disj(self, other)

    def __invert__(self):
        return negate(self)


@dataclass(frozen=True)
class Const(Formula):
    value: bool

    def __str__(self):
        return "true" if self.value else "false"


TRUE = Const(True)
FALSE = Const(False)


@dataclass(frozen=True)
class Atom(Formula):
    var: object

    def __str__(self):
        return f"inf({self.var})"


@dataclass(frozen=True)
class Not(Formula):
    arg: Formula

    def __str__(self):
        return f"!{self.arg}"


@dataclass(frozen=True)
class And(Formula):
    args: tuple

    def __str__(self):
        return "(" + " & ".join(map(str, self.args)) + ")"


@dataclass(frozen=True)
class Or(Formula):
    args: tuple

    def __str__(self):
        return "(" + " | ".join(map(str, self.args)) + ")"


def negate(f: Formula) -> Formula:
    if isinstance(f, Const):
        return Const(not f.value)
    if isinstance(f, Not):
        return f.arg
    return Not(f)


def conj(*fs: Formula) -> Formula:
    args = []
    for f in fs:
        if f == TRUE:
            continue
        if f == FALSE:
            return FALSE
        args.extend(f.args if isinstance(f, And) else (f,))
    if not args:
        return TRUE
    return args[0] if len(args) == 1 else And(tuple(args))


def disj(*fs: Formula) -> Formula:
    args = []
    for f in fs:
        if f == FALSE:
            continue
        if f == TRUE:
            return TRUE
        args.extend(f.args if isinstance(f, Or) else (f,))
    if not args:
        return FALSE
    return args[0] if len(args) == 1 else Or(tuple(args))


def atoms(f: Formula) -> set:
    if isinstance(f, Atom):
        return {f.var}
    if isinstance(f, Not):
        return atoms(f.arg)
    if isinstance(f, (And, Or)):
        out = set()
        for a in f.args:
            out |= atoms(a)
        return out
    return set()


def eval_formula(f: Formula, valuation) -> bool:
    """Evaluate ``f``.  ``valuation`` is a mapping var -> bool or a set of true vars."""
    if isinstance(f, Const):
        return f.value
    if isinstance(f, Atom):
        if isinstance(valuation, Mapping):
            if f.var not in valuation:
                raise MissingAtom(f.var)
            return bool(valuation[f.var])
        return f.var in valuation
    if isinstance(f, Not):
        return not eval_formula(f.arg, valuation)
    if isinstance(f, And):
        return all(eval_formula(a, valuation) for a in f.args)
    if isinstance(f, Or):
        return any(eval_formula(a, valuation) for a in f.args)
    raise TypeError(f"not a formula: {f!r}")


def rename(f: Formula, fn) -> Formula:
    """Replace every atom ``inf(v)`` by the formula ``fn(v)``."""
    if isinstance(f, Atom):
        return fn(f.var)
    if isinstance(f, Not):
        return negate(rename(f.arg, fn))
    if isinstance(f, And):
        return conj(*(rename(a, fn) for a in f.args))
    if isinstance(f, Or):
        return disj(*(rename(a, fn) for a in f.args))
    return f


@dataclass(frozen=True)
class Disjunct:
    pos: frozenset
    neg: frozenset


def _nnf(f: Formula, positive=True):
    if isinstance(f, Const):
        return Const(f.value == positive)
    if isinstance(f, Atom):
        return f if positive else Not(f)
    if isinstance(f, Not):
        return _nnf(f.arg, not positive)
    parts = tuple(_nnf(a, positive) for a in f.args)
    if isinstance(f, And):
        return conj(*parts) if positive else disj(*parts)
    return disj(*parts) if positive else conj(*parts)


def _minimise(ds):
    ds = sorted(set(ds), key=lambda d: (len(d.pos) + len(d.neg), sorted(map(repr, d.pos)), sorted(map(repr, d.neg))))
    kept = []
    for d in ds:
        if not any(k.pos <= d.pos and k.neg <= d.neg for k in kept):
            kept.append(d)
    return kept


def to_dnf(f: Formula, max_disjuncts: int = 4096) -> list:
    """Disjunctive normal form as a list of :class:`Disjunct` (pos/neg atom sets)."""

    def go(g):
        if isinstance(g, Const):
            return [Disjunct(frozenset(), frozenset())] if g.value else []
        if isinstance(g, Atom):
            return [Disjunct(frozenset([g.var]), frozenset())]
        if isinstance(g, Not):
            return [Disjunct(frozenset(), frozenset([g.arg.var]))]
        if isinstance(g, Or):
            out = []
            for a in g.args:
                out.extend(go(a))
                if len(out) > max_disjuncts:
                    raise DnfBlowup(f"more than {max_disjuncts} disjuncts")
            return _minimise(out)
        acc = [Disjunct(frozenset(), frozenset())]
        for a in g.args:
            nxt = []
            for d1 in acc:
                for d2 in go(a):
                    pos, neg = d1.pos | d2.pos, d1.neg | d2.neg
                    if pos & neg:
                        continue
                    nxt.append(Disjunct(pos, neg))
                    if len(nxt) > max_disjuncts:
                        raise DnfBlowup(f"more than {max_disjuncts} disjuncts")
            acc = _minimise(nxt)
            if not acc:
                return []
        return acc

    return go(_nnf(f))


# --- automata --------------------------------------------------------------

class EmersonLeiAutomaton:
    """Nondeterministic automaton with an Emerson-Lei acceptance formula."""

    def __init__(self, states: Iterable, alphabet: Iterable, transitions: Iterable,
                 initial, acceptance: Formula, epsilon: Iterable = (), labels: Mapping | None = None):
        self.states = tuple(states)
        self.alphabet = frozenset(alphabet)
        self.initial = initial
        self.acceptance = acceptance
        known = set(self.states)
        if initial not in known:
            raise ValueError(f"initial state {initial!r} undeclared")
        self.succ = {s: {} for s in self.states}
        for s, a, t in transitions:
            if s not in known or t not in known:
                raise ValueError(f"transition {s!r} -{a}-> {t!r} uses an undeclared state")
            if a not in self.alphabet:
                raise ValueError(f"letter {a!r} not in alphabet")
            lst = self.succ[s].setdefault(a, [])
            if t not in lst:
                lst.append(t)
        self.epsilon = {}
        for s, t in epsilon:
            if s not in known or t not in known:
                raise ValueError("epsilon edge uses an undeclared state")
            self.epsilon.setdefault(s, []).append(t)
        self._labels = dict(labels) if labels is not None else None

    def labels(self, state) -> frozenset:
        if self._labels is None:
            return frozenset([state])
        return self._labels[state]

    @property
    def transitions(self):
        for s, row in self.succ.items():
            for a, ts in row.items():
                for t in ts:
                    yield s, a, t

    def successors(self, state, letter) -> list:
        return self.succ[state].get(letter, [])

    def __len__(self):
        return len(self.states)

    def acceptance_over_states(self) -> Formula:
        """Acceptance with every label atom expanded to the states carrying it."""
        carriers = {}
        for s in self.states:
            for v in self.labels(s):
                carriers.setdefault(v, []).append(s)
        return rename(self.acceptance, lambda v: disj(*(Atom(s) for s in carriers.get(v, ()))))

    def without_epsilon(self) -> "EmersonLeiAutomaton":
        """Equivalent automaton without epsilon edges (closure on targets and initial)."""
        if not self.epsilon:
            return self

        def closure(s):
            seen, todo = {s}, [s]
            while todo:
                x = todo.pop()
                for y in self.epsilon.get(x, ()):
                    if y not in seen:
                        seen.add(y)
                        todo.append(y)
            return seen

        clos = {s: closure(s) for s in self.states}
        trans = set()
        for s in self.states:
            for x in clos[s]:
                for a, ts in self.succ[x].items():
                    for t in ts:
                        for y in clos[t]:
                            trans.add((s, a, y))
        order = {s: i for i, s in enumerate(self.states)}
        trans = sorted(trans, key=lambda e: (order[e[0]], repr(e[1]), order[e[2]]))
        return EmersonLeiAutomaton(self.states, self.alphabet, trans, self.initial,
                                   self.acceptance, labels=self._labels)

    def reachable(self) -> list:
        seen, order, queue = {self.initial}, [self.initial], deque([self.initial])
        while queue:
            s = queue.popleft()
            for ts in self.succ[s].values():
                for t in ts:
                    if t not in seen:
                        seen.add(t)
                        order.append(t)
                        queue.append(t)
        return order

    def recurring_labels(self, states: Iterable) -> set:
        out = set()
        for s in states:
            out |= self.labels(s)
        return out


def from_dfa(states, alphabet, delta: Mapping, initial, acceptance: Formula = TRUE) -> EmersonLeiAutomaton:
    """Wrap a (partial) deterministic automaton ``delta[(s, a)] = t``."""
    trans = [(s, a, t) for (s, a), t in delta.items()]
    return EmersonLeiAutomaton(states, alphabet, trans, initial, acceptance)


def product(automata: list, max_states: int = 1_000_000) -> EmersonLeiAutomaton:
    """Synchronous product over a common alphabet, reachable part only."""
    if not automata:
        raise ValueError("empty product")
    autos = [a.without_epsilon() for a in automata]
    alphabet = autos[0].alphabet
    for a in autos[1:]:
        if a.alphabet != alphabet:
            raise ValueError("alphabet mismatch in product")
    init = tuple(a.initial for a in autos)
    states, trans = [init], []
    seen = {init}
    queue = deque([init])
    letters = sorted(alphabet, key=repr)
    while queue:
        cur = queue.popleft()
        for x in letters:
            choices = []
            for a, s in zip(autos, cur):
                ts = a.succ[s].get(x)
                if not ts:
                    break
                choices.append(ts)
            else:
                for nxt in itertools.product(*choices):
                    trans.append((cur, x, nxt))
                    if nxt not in seen:
                        seen.add(nxt)
                        states.append(nxt)
                        if len(states) > max_states:
                            raise BudgetExceeded(f"product exceeded {max_states} states")
                        queue.append(nxt)
    labels = {s: frozenset((i, v) for i, (a, c) in enumerate(zip(autos, s)) for v in a.labels(c))
              for s in states}
    acc = conj(*(rename(a.acceptance, lambda v, i=i: Atom((i, v))) for i, a in enumerate(autos)))
    return EmersonLeiAutomaton(states, alphabet, trans, init, acc, labels=labels)


# --- emptiness -------------------------------------------------------------

@dataclass(frozen=True)
class AcceptingLasso:
    stem: tuple          # letters
    loop: tuple          # letters, nonempty
    stem_states: tuple   # states before each stem letter, plus the loop head
    loop_states: tuple   # states before each loop letter (starts at the loop head)

    @property
    def recurring(self) -> frozenset:
        return frozenset(self.loop_states)


def _bfs_path(adj, src, goal_fn, allowed):
    """Shortest path (list of (state, letter, next)) from src to a state satisfying goal_fn."""
    if goal_fn(src):
        return []
    parent = {src: None}
    queue = deque([src])
    while queue:
        s = queue.popleft()
        for a, t in adj(s):
            if t in parent or t not in allowed:
                continue
            parent[t] = (s, a)
            if goal_fn(t):
                path = []
                x = t
                while parent[x] is not None:
                    p, b = parent[x]
                    path.append((p, b, x))
                    x = p
                return path[::-1]
            queue.append(t)
    return None


def _edges(ela):
    def adj(s):
        for a, ts in ela.succ[s].items():
            for t in ts:
                yield a, t
    return adj


def find_accepting_lasso(ela: EmersonLeiAutomaton, max_disjuncts: int = 4096) -> AcceptingLasso | None:
    """Return an accepting lasso, or ``None`` when the language is empty."""
    ela = ela.without_epsilon()
    reach = ela.reachable()
    reach_set = set(reach)
    adj = _edges(ela)
    for d in to_dnf(ela.acceptance, max_disjuncts):
        keep = [s for s in reach if not (ela.labels(s) & d.neg)]
        g = nx.DiGraph()
        g.add_nodes_from(keep)
        keep_set = set(keep)
        for s in keep:
            for a, t in adj(s):
                if t in keep_set:
                    g.add_edge(s, t)
        for comp in nx.strongly_connected_components(g):
            if len(comp) == 1:
                (only,) = comp
                if not g.has_edge(only, only):
                    continue
            have = ela.recurring_labels(comp)
            if not d.pos <= have:
                continue
            return _build_lasso(ela, adj, comp, d.pos, reach_set)
    return None


def _build_lasso(ela, adj, comp, pos, reach_set):
    order = {s: i for i, s in enumerate(ela.states)}
    head = min(comp, key=order.__getitem__)
    stem = _bfs_path(adj, ela.initial, lambda s: s == head, reach_set)
    loop = []
    cur = head
    for v in sorted(pos, key=repr):
        if v in ela.labels(cur):
            continue
        seg = _bfs_path(adj, cur, lambda s, v=v: v in ela.labels(s), comp)
        loop.extend(seg)
        cur = seg[-1][2]
    # close the cycle; force at least one edge
    if cur == head and not loop:
        for a, t in adj(head):
            if t in comp:
                loop.append((head, a, t))
                cur = t
                break
    if cur != head:
        loop.extend(_bfs_path(adj, cur, lambda s: s == head, comp))
    return AcceptingLasso(
        stem=tuple(a for _, a, _ in stem),
        loop=tuple(a for _, a, _ in loop),
        stem_states=tuple([e[0] for e in stem] + [head]),
        loop_states=tuple(e[0] for e in loop),
    )


def replay_lasso(ela: EmersonLeiAutomaton, lasso: AcceptingLasso) -> bool:
    """Check that the state sequences are runs and the recurring labels satisfy acceptance."""
    ela = ela.without_epsilon()
    seq = list(lasso.stem_states)
    if seq[0] != ela.initial:
        return False
    for (s, t), a in zip(zip(seq, seq[1:]), lasso.stem):
        if t not in ela.successors(s, a):
            return False
    loop = list(lasso.loop_states) + [lasso.loop_states[0]]
    if loop[0] != seq[-1] or not lasso.loop:
        return False
    for (s, t), a in zip(zip(loop, loop[1:]), lasso.loop):
        if t not in ela.successors(s, a):
            return False
    return eval_formula(ela.acceptance, ela.recurring_labels(lasso.loop_states))


def is_empty(ela: EmersonLeiAutomaton) -> bool:
    return find_accepting_lasso(ela) is None
