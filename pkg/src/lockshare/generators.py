"""System families, random systems and hardness-reduction gadgets."""
from __future__ import annotations

import itertools
import random

from .core import NOP, LockSharingSystem, ModelError, Process, Transition, get, rel
from .objectives import (Atom, RegularObjective, compile_builtin, complement, conjoin, conjoin_all,
                         negate)


def _proc(name, states, initial, edges):
    """``edges`` are (src, action, dst, op); actions get the ``name.`` prefix."""
    trs = [Transition(s, f"{name}.{a}", t, op) for s, a, t, op in edges]
    return Process(name, tuple(states), initial, tuple(trs))


def swapper_process(name="p", t1="t1", t2="t2") -> Process:
    """Takes t1 then t2, then keeps swapping which one it holds (states 3 to 6 form a cycle)."""
    return _proc(name, ("1", "2", "3", "4", "5", "6"), "1", [
        ("1", "g1", "2", get(t1)),
        ("2", "g2", "3", get(t2)),
        ("3", "r1", "4", rel(t1)),
        ("4", "g1b", "5", get(t1)),
        ("5", "r2", "6", rel(t2)),
        ("6", "g2b", "3", get(t2)),
    ])


def swapper() -> LockSharingSystem:
    return LockSharingSystem(("t1", "t2"), (swapper_process("p"),))


def two_swappers() -> LockSharingSystem:
    return LockSharingSystem(("t1", "t2"), (swapper_process("p"), swapper_process("q")))


def philosophers(n: int, left_handed=()) -> LockSharingSystem:
    """Philosopher ``i`` (1-based) takes fork ``f_i`` then ``f_{i+1}``; left-handed ones swap."""
    if n < 2:
        raise ModelError("philosophers need n >= 2")
    left_handed = set(left_handed)
    forks = tuple(f"f{i}" for i in range(1, n + 1))
    procs = []
    for i in range(1, n + 1):
        a, b = forks[i - 1], forks[i % n]
        if i in left_handed:
            a, b = b, a
        procs.append(_proc(f"p{i}", ("think", "one", "eat", "back"), "think", [
            ("think", "take1", "one", get(a)),
            ("one", "take2", "eat", get(b)),
            ("eat", "put2", "back", rel(b)),
            ("back", "put1", "think", rel(a)),
        ]))
    return LockSharingSystem(forks, tuple(procs))


# --- random systems ----------------------------------------------------------

def random_process(rng: random.Random, name, locks, n_states=4, density=0.5,
                   exclusive=False, nested=False, max_out=2) -> Process:
    """Sound by construction: every state is created with a fixed held set (or stack)."""
    label = {"s0": ()}
    states = ["s0"]
    edges = []
    k = 0
    todo = ["s0"]
    while todo:
        s = todo.pop(0)
        held = label[s]
        n_out = sum(rng.random() < density for _ in range(max_out))
        if n_out == 0 and s == "s0":
            n_out = 1
        choices = []
        free = [t for t in locks if t not in held]
        if free:
            choices += [("get", t) for t in free]
        if held:
            choices += [("rel", held[-1])] if nested else [("rel", t) for t in held]
        choices.append(("nop", None))
        ops = [rng.choice(choices) for _ in range(n_out)]
        if exclusive and any(o[0] == "get" for o in ops):
            t = next(o[1] for o in ops if o[0] == "get")
            ops = [("get", t)] * len(ops)
        for kind, t in ops:
            if kind == "get":
                nh = held + (t,)
                op = get(t)
            elif kind == "rel":
                nh = tuple(x for x in held if x != t)
                op = rel(t)
            else:
                nh, op = held, NOP
            if not nested:
                nh = tuple(sorted(nh))
            same = [x for x in states if label[x] == nh]
            if len(states) < n_states and (not same or rng.random() < 0.5):
                tgt = f"s{len(states)}"
                states.append(tgt)
                label[tgt] = nh
                todo.append(tgt)
            elif same:
                tgt = rng.choice(same)
            else:
                continue
            edges.append((s, f"a{k}", tgt, op))
            k += 1
    return _proc(name, states, "s0", edges)


def random_system(seed, processes=2, states=4, density=0.5, flags=(), n_locks=None,
                  locks_per_process=2) -> LockSharingSystem:
    """Seeded random sound system.  ``flags`` may contain exclusive, nested, two-lock."""
    rng = random.Random(seed)
    flags = set(flags)
    if "two-lock" in flags:
        locks_per_process = min(locks_per_process, 2)
    if n_locks is None:
        n_locks = max(2, min(processes + 1, 4))
    all_locks = tuple(f"t{i}" for i in range(1, n_locks + 1))
    procs = []
    for i in range(processes):
        mine = sorted(rng.sample(all_locks, min(locks_per_process, n_locks)))
        procs.append(random_process(rng, f"p{i + 1}", mine, states, density,
                                    exclusive="exclusive" in flags, nested="nested" in flags))
    return LockSharingSystem(all_locks, tuple(procs))


# --- 3SAT gadget ---------------------------------------------------------------

def _lit_lock(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"nx{-lit}"


def gen_3sat_2lss(cnf, exclusive=False):
    """Reduction from 3SAT.  ``cnf`` is a list of 3-tuples of nonzero ints (DIMACS style).

    Returns ``(lss, objective, p)``: the formula is satisfiable iff some
    process-fair run satisfies the objective, whose core is that ``p`` blocks.
    """
    cnf = [tuple(c) for c in cnf]
    if not cnf:
        raise ModelError("empty CNF")
    for c in cnf:
        if len(c) != 3 or any(not isinstance(x, int) or x == 0 for x in c):
            raise ModelError(f"malformed clause {c!r}")
    n = max(abs(x) for c in cnf for x in c)
    locks = ["t", "t'"] + [f"C{i}" for i in range(1, len(cnf) + 1)]
    for k in range(1, n + 1):
        locks += [f"x{k}", f"nx{k}"]
    procs = [_proc("p", ("1", "2"), "1", [("1", "get", "2", get("t")), ("2", "loop", "2", NOP)])]
    if exclusive:
        procs.append(_proc("p'", ("1", "2", "3", "4"), "1", [
            ("1", "get_t", "2", get("t")), ("2", "rel_t", "1", rel("t")),
            ("2", "go", "4", NOP), ("4", "get_t'", "3", get("t'")),
            ("3", "rel_t'", "2", rel("t'"))]))
    else:
        procs.append(_proc("p'", ("1", "2", "3"), "1", [
            ("1", "get_t", "2", get("t")), ("2", "rel_t", "1", rel("t")),
            ("2", "get_t'", "3", get("t'")), ("3", "rel_t'", "2", rel("t'"))]))
    for i, clause in enumerate(cnf, 1):
        c = f"C{i}"
        procs.append(_proc(f"pC{i}", ("1", "2", "3"), "1", [
            ("1", "get", "2", get(c)), ("2", "get_t'", "3", get("t'"))]))
        for j, lit in enumerate(clause, 1):
            lk = _lit_lock(lit)
            if exclusive:
                procs.append(_proc(f"pl{i}.{j}", ("1", "2", "3", "4"), "1", [
                    ("1", "get", "2", get(c)), ("2", "rel", "1", rel(c)),
                    ("2", "go", "4", NOP), ("4", "get_l", "3", get(lk)),
                    ("3", "rel_l", "2", rel(lk))]))
            else:
                procs.append(_proc(f"pl{i}.{j}", ("1", "2", "3"), "1", [
                    ("1", "get", "2", get(c)), ("2", "rel", "1", rel(c)),
                    ("2", "get_l", "3", get(lk)), ("3", "rel_l", "2", rel(lk))]))
    for k in range(1, n + 1):
        if exclusive:
            # choosing between two locks is not exclusive: choose with a nop first
            procs.append(_proc(f"px{k}", ("1", "cpos", "cneg", "pos", "neg"), "1", [
                ("1", "pick_pos", "cpos", NOP), ("1", "pick_neg", "cneg", NOP),
                ("cpos", "get_pos", "pos", get(f"x{k}")), ("cneg", "get_neg", "neg", get(f"nx{k}"))]))
        else:
            procs.append(_proc(f"px{k}", ("1", "pos", "neg"), "1", [
                ("1", "get_pos", "pos", get(f"x{k}")), ("1", "get_neg", "neg", get(f"nx{k}"))]))
    lss = LockSharingSystem(tuple(locks), tuple(procs))
    obj = compile_builtin(lss, "process-deadlock", "p")
    if exclusive:
        parts = [obj, compile_builtin(lss, "acts-forever", "p'")]
        for proc in lss.processes:
            if proc.name.startswith("pl"):
                stuck = compile_builtin(lss, "padded-in", proc.name, "4")
                parts.append(RegularObjective(stuck.automata, negate(stuck.formula)))
        obj = conjoin_all(parts)
    return lss, obj, "p"


def brute_force_sat(cnf) -> bool:
    n = max(abs(x) for c in cnf for x in c)
    for bits in itertools.product((False, True), repeat=n):
        if all(any(bits[abs(x) - 1] == (x > 0) for x in c) for c in cnf):
            return True
    return False


def random_cnf(rng: random.Random, n_vars, n_clauses) -> list:
    return [tuple(rng.choice((1, -1)) * rng.randint(1, n_vars) for _ in range(3))
            for _ in range(n_clauses)]


def planted_cnf(rng: random.Random, n_vars, n_clauses, satisfiable: bool) -> list:
    """Random 3-CNF whose satisfiability is fixed by construction.

    Satisfiable: every clause contains a literal true under a hidden
    assignment.  Unsatisfiable: an unsatisfiable core over one or two
    variables (two or four clauses) padded with random clauses.
    """
    if satisfiable:
        hidden = {v: rng.random() < 0.5 for v in range(1, n_vars + 1)}
        out = []
        for _ in range(n_clauses):
            c = [rng.choice((1, -1)) * rng.randint(1, n_vars) for _ in range(3)]
            v = rng.randint(1, n_vars)
            c[rng.randrange(3)] = v if hidden[v] else -v
            out.append(tuple(c))
        return out
    a, b = rng.sample(range(1, n_vars + 1), 2) if n_vars > 1 else (1, 1)
    sa, sb = rng.choice((1, -1)), rng.choice((1, -1))
    if n_vars > 1 and n_clauses >= 4 and rng.random() < 0.6:
        core = [(sa * a, sa * a, sb * b), (sa * a, sa * a, -sb * b),
                (-sa * a, -sa * a, sb * b), (-sa * a, -sa * a, -sb * b)]
    else:
        core = [(sa * a,) * 3, (-sa * a,) * 3]
    core += random_cnf(rng, n_vars, max(0, n_clauses - len(core)))
    rng.shuffle(core)
    return core


# --- Independent-Set gadget ---------------------------------------------------

def gen_indset_nested(vertices, edges, k: int):
    """Processes ``p_1..p_k``; ``p_i`` picks a vertex, then grabs its edge locks and ``l_i``, ``l_{i+1}``.

    A circular deadlock exists iff the graph has an independent set of size ``k``.
    Requires ``k >= 2``: with one process ``l_1`` and ``l_2`` coincide and
    the gadget would re-acquire a held lock, which is not sound.
    An isolated vertex gets a lock ``u{v}`` of its own so that two processes
    cannot both pick it; other vertices already clash on their edge locks.
    """
    vertices = list(vertices)
    edges = [tuple(e) for e in edges]
    vset = set(vertices)
    seen = set()
    for e in edges:
        if len(e) != 2 or e[0] == e[1] or not set(e) <= vset:
            raise ModelError(f"malformed edge {e!r}")
        key = frozenset(e)
        if key in seen:
            raise ModelError(f"duplicate edge {e!r}")
        seen.add(key)
    if not 2 <= k <= len(vertices):
        raise ModelError("need 2 <= k <= |V|")
    elocks = [f"e{j}" for j in range(1, len(edges) + 1)]
    llocks = [f"l{i}" for i in range(1, k + 1)]
    touched = {v for e in edges for v in e}
    ulocks = {v: f"u{v}" for v in vertices if v not in touched}
    procs = []
    for i in range(1, k + 1):
        mine = (llocks[i - 1], llocks[i % k])
        states, trans = ["init", "end"], [("end", "idle", "end", NOP)]
        for v in vertices:
            own = [ulocks[v]] if v in ulocks else [elocks[j] for j, e in enumerate(edges) if v in e]
            seq = own + list(mine)
            chain = [f"{v}.{m}" for m in range(2 * len(seq) + 1)]
            states += chain
            trans.append(("init", f"pick{v}", chain[0], NOP))
            for m, lk in enumerate(seq):
                trans.append((chain[m], f"{v}.g{m}", chain[m + 1], get(lk)))
            for m, lk in enumerate(reversed(seq)):
                a = len(seq) + m
                trans.append((chain[a], f"{v}.r{m}", chain[a + 1], rel(lk)))
            trans.append((chain[-1], f"{v}.done", "end", NOP))
        procs.append(_proc(f"p{i}", states, "init", trans))
    return LockSharingSystem(tuple(elocks + list(ulocks.values()) + llocks), tuple(procs)), k


def brute_force_indset(vertices, edges, k) -> bool:
    es = [set(e) for e in edges]
    for sub in itertools.combinations(vertices, k):
        s = set(sub)
        if not any(e <= s for e in es):
            return True
    return False


def random_local_lasso(rng: random.Random, proc: Process, max_stem=6, max_loop=6, p_finite=0.3):
    """Random local lasso ``(stem, loop)`` of a sound process (``loop`` empty: finite run)."""
    states = [proc.initial]
    actions = []
    want_finite = rng.random() < p_finite
    stop_at = rng.randint(0, max_stem) if want_finite else None
    while True:
        if want_finite and len(actions) >= stop_at:
            return tuple(actions), ()
        out = proc.outgoing(states[-1])
        if not out:
            return tuple(actions), ()
        tr = rng.choice(out)
        actions.append(tr.action)
        if not want_finite and tr.target in states:
            j = states.index(tr.target)
            if len(actions) - j <= max_loop and j <= max_stem:
                return tuple(actions[:j]), tuple(actions[j:])
        states.append(tr.target)
        if len(actions) >= max_stem + max_loop:
            return tuple(actions[:max_stem]), ()


# --- random objectives ------------------------------------------------------------

def random_objective(rng: random.Random, lss: LockSharingSystem) -> RegularObjective:
    """A built-in objective, possibly complemented or conjoined, for differential tests."""
    names = lss.names
    p = rng.choice(names)
    k = rng.randrange(6)
    if k == 0:
        return compile_builtin(lss, "process-deadlock", p)
    if k == 1:
        return compile_builtin(lss, "global-deadlock")
    if k == 2:
        return compile_builtin(lss, "acts-forever", p)
    target = [rng.choice(lss.process(p).states)]
    if k == 3:
        return compile_builtin(lss, "local-reach-forever", p, target)
    if k == 4:
        return conjoin(compile_builtin(lss, "process-deadlock", p),
                       compile_builtin(lss, "acts-forever", rng.choice(names)))
    return complement(compile_builtin(lss, "local-reach-forever", p, target))
