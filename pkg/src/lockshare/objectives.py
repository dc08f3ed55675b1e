"""Regular objectives.

One deterministic automaton per process reads the padded local run
(``Σ_p`` plus the pad letter); a global formula over atoms ``inf(p, s)``
says which automaton states must or must not recur.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Mapping

from .core import PAD, LockSharingSystem, Lasso, ModelError, LssError, Process
from .ela import (FALSE, TRUE, And, Atom, Const, EmersonLeiAutomaton, Formula, Not, Or,
                  atoms, conj, disj, eval_formula, negate, rename)

SINK = "_sink"


@dataclass(frozen=True)
class ObjectiveAutomaton:
    """Total DFA over ``alphabet`` (which contains the pad letter)."""

    states: tuple
    initial: str
    alphabet: frozenset
    delta: Mapping = field(hash=False)

    @classmethod
    def build(cls, states, initial, alphabet, transitions) -> "ObjectiveAutomaton":
        """Create from ``(src, letter, dst)`` triples, sink-completing missing moves."""
        states = list(states)
        alphabet = frozenset(alphabet) | {PAD}
        if initial not in states:
            raise ModelError(f"objective initial state {initial!r} undeclared")
        delta = {}
        for s, a, t in transitions:
            if s not in states or t not in states:
                raise ModelError(f"objective transition {s!r} -{a}-> {t!r} uses an undeclared state")
            if a not in alphabet:
                raise ModelError(f"objective letter {a!r} is not an action of the process")
            if (s, a) in delta and delta[(s, a)] != t:
                raise ModelError(f"objective automaton is not deterministic at {(s, a)}")
            delta[(s, a)] = t
        missing = [(s, a) for s in states for a in alphabet if (s, a) not in delta]
        if missing:
            if SINK not in states:
                states.append(SINK)
            for s, a in missing:
                delta[(s, a)] = SINK
            for a in alphabet:
                delta[(SINK, a)] = SINK
        return cls(tuple(states), initial, alphabet, delta)

    def step(self, state, letter):
        return self.delta[(state, letter)]

    def run(self, word, start=None) -> list:
        s = self.initial if start is None else start
        out = [s]
        for a in word:
            s = self.delta[(s, a)]
            out.append(s)
        return out

    def pad_cycle(self, state) -> frozenset:
        """States recurring when only pad letters are read from ``state``."""
        seen = []
        while state not in seen:
            seen.append(state)
            state = self.delta[(state, PAD)]
        return frozenset(seen[seen.index(state):])

    def as_ela(self, acceptance: Formula = TRUE) -> EmersonLeiAutomaton:
        trans = [(s, a, t) for (s, a), t in self.delta.items()]
        return EmersonLeiAutomaton(self.states, self.alphabet, trans, self.initial, acceptance)


def universal(alphabet) -> ObjectiveAutomaton:
    alphabet = frozenset(alphabet) | {PAD}
    return ObjectiveAutomaton(("any",), "any", alphabet, {("any", a): "any" for a in alphabet})


@dataclass(frozen=True)
class RegularObjective:
    automata: Mapping = field(hash=False)   # process name -> ObjectiveAutomaton
    formula: Formula = TRUE

    def __post_init__(self):
        for var in atoms(self.formula):
            if not (isinstance(var, tuple) and len(var) == 2):
                raise ModelError(f"objective atom {var!r} is not a (process, state) pair")
            p, s = var
            if p not in self.automata:
                raise ModelError(f"objective mentions unknown process {p!r}")
            if s not in self.automata[p].states:
                raise ModelError(f"objective mentions unknown state {s!r} of {p}")

    def automaton(self, p) -> ObjectiveAutomaton:
        return self.automata[p]

    def atoms_of(self, p) -> set:
        return {v for v in atoms(self.formula) if v[0] == p}


def _alphabet(proc: Process):
    return proc.alphabet | {PAD}


def trivial(lss: LockSharingSystem) -> RegularObjective:
    return RegularObjective({p.name: universal(p.alphabet) for p in lss.processes}, TRUE)


def _deadlock_automaton(proc: Process) -> ObjectiveAutomaton:
    trans = [("live", a, "live") for a in proc.alphabet]
    trans += [("live", PAD, "done"), ("done", PAD, "done")]
    return ObjectiveAutomaton.build(("live", "done"), "live", proc.alphabet, trans)


def _reach_automaton(proc: Process) -> ObjectiveAutomaton:
    """Copy of the process plus one padded copy per state."""
    padded = {s: f"#pad:{s}" for s in proc.states}
    states = list(proc.states) + list(padded.values())
    trans = [(tr.source, tr.action, tr.target) for tr in proc.transitions]
    for s, ps in padded.items():
        trans += [(s, PAD, ps), (ps, PAD, ps)]
    return ObjectiveAutomaton.build(states, proc.initial, proc.alphabet, trans)


def compile_builtin(lss: LockSharingSystem, kind: str, *args) -> RegularObjective:
    """Built-in objectives.

    ``process-deadlock`` p: the local run of ``p`` is finite.
    ``global-deadlock``: every local run is finite.
    ``acts-forever`` p: the local run of ``p`` is infinite.
    ``local-reach-forever`` p, states: ``p`` visits one of ``states``
    infinitely often or stops in one of them.
    ``padded-in`` p, states: the local run of ``p`` is finite and ends in ``states``.
    """
    autos = {p.name: universal(p.alphabet) for p in lss.processes}
    if kind in ("process-deadlock", "acts-forever"):
        (p,) = args
        proc = lss.process(p)
        autos[p] = _deadlock_automaton(proc)
        f = Atom((p, "done"))
        return RegularObjective(autos, f if kind == "process-deadlock" else negate(f))
    if kind == "global-deadlock":
        for proc in lss.processes:
            autos[proc.name] = _deadlock_automaton(proc)
        return RegularObjective(autos, conj(*(Atom((q, "done")) for q in lss.names)))
    if kind in ("local-reach-forever", "padded-in"):
        p, targets = args
        proc = lss.process(p)
        targets = [targets] if isinstance(targets, str) else list(targets)
        for s in targets:
            if s not in proc.states:
                raise ModelError(f"process {p} has no state {s!r}")
        autos[p] = _reach_automaton(proc)
        if kind == "padded-in":
            f = disj(*(Atom((p, f"#pad:{s}")) for s in targets))
        else:
            f = disj(*(Atom((p, s)) | Atom((p, f"#pad:{s}")) for s in targets))
        return RegularObjective(autos, f)
    raise ModelError(f"unknown objective kind {kind!r}")


def complement(obj: RegularObjective) -> RegularObjective:
    return RegularObjective(obj.automata, negate(obj.formula))


def _product_dfa(a: ObjectiveAutomaton, b: ObjectiveAutomaton):
    if a.alphabet != b.alphabet:
        raise ModelError("objective automata over different alphabets")
    letters = sorted(a.alphabet)
    start = (a.initial, b.initial)
    order, seen, trans = [start], {start}, []
    i = 0
    while i < len(order):
        s1, s2 = order[i]
        i += 1
        for x in letters:
            nxt = (a.delta[(s1, x)], b.delta[(s2, x)])
            trans.append(((s1, s2), x, nxt))
            if nxt not in seen:
                seen.add(nxt)
                order.append(nxt)
    names = {pair: f"{pair[0]}.{pair[1]}" for pair in order}
    if len(set(names.values())) < len(names):
        names = {pair: f"q{k}" for k, pair in enumerate(order)}
    dfa = ObjectiveAutomaton(tuple(names[s] for s in order), names[start], a.alphabet,
                             {(names[s], x): names[t] for s, x, t in trans})
    return dfa, names


def conjoin(o1: RegularObjective, o2: RegularObjective) -> RegularObjective:
    if set(o1.automata) != set(o2.automata):
        raise ModelError("objectives over different process sets")
    autos, map1, map2 = {}, {}, {}
    for p in o1.automata:
        a, b = o1.automata[p], o2.automata[p]
        if len(b.states) == 1:
            autos[p] = a
            map1[p] = {s: [s] for s in a.states}
            map2[p] = {b.states[0]: list(a.states)}
            continue
        if len(a.states) == 1:
            autos[p] = b
            map1[p] = {a.states[0]: list(b.states)}
            map2[p] = {s: [s] for s in b.states}
            continue
        dfa, names = _product_dfa(a, b)
        autos[p] = dfa
        m1, m2 = {}, {}
        for (s1, s2), n in names.items():
            m1.setdefault(s1, []).append(n)
            m2.setdefault(s2, []).append(n)
        map1[p], map2[p] = m1, m2

    def remap(m):
        return lambda v: disj(*(Atom((v[0], n)) for n in m[v[0]].get(v[1], ())))

    return RegularObjective(autos, conj(rename(o1.formula, remap(map1)),
                                        rename(o2.formula, remap(map2))))


def conjoin_all(objs) -> RegularObjective:
    objs = list(objs)
    out = objs[0]
    for o in objs[1:]:
        out = conjoin(out, o)
    return out


# --- evaluation on lassos ---------------------------------------------------

def local_inf_states(dfa: ObjectiveAutomaton, stem, loop) -> frozenset:
    """States of ``dfa`` recurring on ``stem . loop^omega`` (``loop`` empty: pad forever)."""
    s = dfa.run(stem)[-1]
    if not loop:
        return dfa.pad_cycle(s)
    heads = []
    while s not in heads:
        heads.append(s)
        s = dfa.run(loop, s)[-1]
    out = set()
    for h in heads[heads.index(s):]:
        out.update(dfa.run(loop, h)[:-1])
    return frozenset(out)


def lasso_valuation(lss: LockSharingSystem, obj: RegularObjective, lasso: Lasso) -> set:
    """The set of true atoms ``(p, s)`` on a global lasso."""
    true = set()
    for p in lss.names:
        stem = [a for q, a in lasso.stem if q == p and a != PAD]
        loop = [a for q, a in lasso.loop if q == p and a != PAD]
        for s in local_inf_states(obj.automata[p], stem, loop):
            true.add((p, s))
    return true


def satisfied_by(obj: RegularObjective, true_atoms) -> bool:
    return eval_formula(obj.formula, set(true_atoms))


# --- text form of formulas ---------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(inf)\s*\(\s*([^,()\s]+)\s*,\s*([^,()\s]+)\s*\)|(true|false)\b|([!&|()]))")


class FormulaSyntaxError(LssError):
    pass


def parse_formula(text: str) -> Formula:
    """Parse ``inf(P,S)``, ``!``, ``&``, ``|``, parentheses, ``true``, ``false``."""
    toks, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaSyntaxError(f"unexpected input at column {pos}: {text[pos:pos + 10]!r}")
        if m.group(1):
            toks.append(("atom", (m.group(2), m.group(3))))
        elif m.group(4):
            toks.append(("const", m.group(4) == "true"))
        else:
            toks.append((m.group(5), None))
        pos = m.end()
    k = 0

    def peek():
        return toks[k][0] if k < len(toks) else None

    def take(kind):
        nonlocal k
        if peek() != kind:
            raise FormulaSyntaxError(f"expected {kind!r} at token {k}")
        k += 1
        return toks[k - 1][1]

    def orexpr():
        parts = [andexpr()]
        while peek() == "|":
            take("|")
            parts.append(andexpr())
        return disj(*parts) if len(parts) > 1 else parts[0]

    def andexpr():
        parts = [unary()]
        while peek() == "&":
            take("&")
            parts.append(unary())
        return conj(*parts) if len(parts) > 1 else parts[0]

    def unary():
        kind = peek()
        if kind == "!":
            take("!")
            return negate(unary())
        if kind == "(":
            take("(")
            f = orexpr()
            take(")")
            return f
        if kind == "atom":
            return Atom(take("atom"))
        if kind == "const":
            return Const(take("const"))
        raise FormulaSyntaxError(f"unexpected token at {k}")

    f = orexpr()
    if k != len(toks):
        raise FormulaSyntaxError(f"trailing input at token {k}")
    return f


def format_formula(f: Formula) -> str:
    if isinstance(f, Const):
        return "true" if f.value else "false"
    if isinstance(f, Atom):
        return f"inf({f.var[0]},{f.var[1]})"
    if isinstance(f, Not):
        return "!" + format_formula(f.arg)
    if isinstance(f, And):
        return "(" + " & ".join(format_formula(a) for a in f.args) + ")"
    if isinstance(f, Or):
        return "(" + " | ".join(format_formula(a) for a in f.args) + ")"
    raise TypeError(f)
