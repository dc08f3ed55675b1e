"""Lock-sharing systems: data model, semantics and structural classifiers.

A system is a set of locks plus one deterministic transition system per
process.  Every action carries a fixed lock operation (get, rel or nop).
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Sequence


class LssError(Exception):
    """Base class for errors raised by this package."""


class ModelError(LssError):
    """A system or objective violates a structural invariant."""


class NotEnabled(LssError):
    def __init__(self, process, action, reason):
        super().__init__(f"{process}:{action} not enabled ({reason})")
        self.process = process
        self.action = action
        self.reason = reason


class BudgetExceeded(LssError):
    """An exploration ran past its configured state budget."""


StateBudgetExceeded = BudgetExceeded


class PreconditionError(LssError):
    """An engine was applied to a system outside its class."""

    def __init__(self, message, classifier=None, evidence=None):
        super().__init__(message)
        self.classifier = classifier
        self.evidence = evidence


@dataclass(frozen=True)
class LockOp:
    kind: str
    lock: str | None = None

    def __post_init__(self):
        if self.kind not in ("get", "rel", "nop"):
            raise ModelError(f"unknown lock operation {self.kind!r}")
        if (self.kind == "nop") != (self.lock is None):
            raise ModelError(f"malformed lock operation {self.kind} {self.lock}")

    def __str__(self):
        return "nop" if self.kind == "nop" else f"{self.kind} {self.lock}"


NOP = LockOp("nop")


def get(lock: str) -> LockOp:
    return LockOp("get", lock)


def rel(lock: str) -> LockOp:
    return LockOp("rel", lock)


@dataclass(frozen=True)
class Transition:
    source: str
    action: str
    target: str
    op: LockOp


@dataclass(frozen=True)
class Process:
    """One finite-state process.

    ``phantom_locks`` are declared but never used; they only exist so that
    processes touching fewer than two locks fit the two-lock machinery.
    """

    name: str
    states: tuple
    initial: str
    transitions: tuple
    phantom_locks: tuple = ()
    _delta: dict = field(init=False, repr=False, compare=False, hash=False)
    _out: dict = field(init=False, repr=False, compare=False, hash=False)
    _ops: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", tuple(self.transitions))
        object.__setattr__(self, "phantom_locks", tuple(self.phantom_locks))
        if len(set(self.states)) != len(self.states):
            raise ModelError(f"process {self.name}: duplicate states")
        if self.initial not in self.states:
            raise ModelError(f"process {self.name}: initial state {self.initial!r} undeclared")
        delta, out, ops = {}, {s: [] for s in self.states}, {}
        for tr in self.transitions:
            for s in (tr.source, tr.target):
                if s not in out:
                    raise ModelError(f"process {self.name}: state {s!r} undeclared")
            key = (tr.source, tr.action)
            if key in delta:
                raise ModelError(f"process {self.name}: two transitions for {key}")
            if ops.setdefault(tr.action, tr.op) != tr.op:
                raise ModelError(f"process {self.name}: action {tr.action!r} has two operations")
            delta[key] = tr
            out[tr.source].append(tr)
        object.__setattr__(self, "_delta", delta)
        object.__setattr__(self, "_out", {s: tuple(v) for s, v in out.items()})
        object.__setattr__(self, "_ops", ops)

    @property
    def alphabet(self) -> frozenset:
        return frozenset(self._ops)

    @property
    def locks(self) -> frozenset:
        """T_p: locks this process may acquire, plus phantom locks."""
        got = {op.lock for op in self._ops.values() if op.kind == "get"}
        return frozenset(got) | frozenset(self.phantom_locks)

    @property
    def real_locks(self) -> frozenset:
        return frozenset(op.lock for op in self._ops.values() if op.kind == "get")

    def op(self, action) -> LockOp:
        return self._ops[action]

    def transition(self, state, action) -> Transition | None:
        return self._delta.get((state, action))

    def outgoing(self, state) -> tuple:
        return self._out[state]

    def referenced_locks(self) -> frozenset:
        return frozenset(op.lock for op in self._ops.values() if op.lock is not None)

    def reachable_states(self) -> list:
        seen, order, queue = {self.initial}, [self.initial], deque([self.initial])
        while queue:
            s = queue.popleft()
            for tr in self._out[s]:
                if tr.target not in seen:
                    seen.add(tr.target)
                    order.append(tr.target)
                    queue.append(tr.target)
        return order

    def blocks(self, state) -> frozenset:
        """Locks acquirable by some outgoing transition of ``state``."""
        return frozenset(tr.op.lock for tr in self._out[state] if tr.op.kind == "get")

    def only_gets(self, state) -> bool:
        """True when every outgoing transition acquires a lock (vacuous if none)."""
        return all(tr.op.kind == "get" for tr in self._out[state])


@dataclass(frozen=True)
class LockSharingSystem:
    locks: tuple
    processes: tuple
    _index: dict = field(init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "locks", tuple(self.locks))
        object.__setattr__(self, "processes", tuple(self.processes))
        if len(set(self.locks)) != len(self.locks):
            raise ModelError("duplicate lock identifiers")
        names = [p.name for p in self.processes]
        if len(set(names)) != len(names):
            raise ModelError("duplicate process names")
        declared = set(self.locks)
        seen_actions = {}
        for p in self.processes:
            missing = (p.referenced_locks() | set(p.phantom_locks)) - declared
            if missing:
                raise ModelError(f"process {p.name}: undeclared locks {sorted(missing)}")
            for a in p.alphabet:
                if a in seen_actions:
                    raise ModelError(f"action {a!r} shared by {seen_actions[a]} and {p.name}")
                seen_actions[a] = p.name
        object.__setattr__(self, "_index", {p.name: i for i, p in enumerate(self.processes)})

    @property
    def names(self) -> list:
        return [p.name for p in self.processes]

    def process(self, name) -> Process:
        try:
            return self.processes[self._index[name]]
        except KeyError:
            raise ModelError(f"unknown process {name!r}") from None

    def index(self, name) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise ModelError(f"unknown process {name!r}") from None

    def initial_config(self) -> "GlobalConfig":
        return tuple(LocalConfig(p.initial, frozenset()) for p in self.processes)


class LocalConfig(NamedTuple):
    state: str
    held: frozenset


# A global configuration is a tuple of LocalConfig, one per process in order.
GlobalConfig = tuple


# --- semantics -------------------------------------------------------------

def local_step(proc: Process, cfg: LocalConfig, action, taken=frozenset()) -> LocalConfig:
    """One local move; ``taken`` holds locks owned by other processes."""
    tr = proc.transition(cfg.state, action)
    if tr is None:
        raise NotEnabled(proc.name, action, "no-transition")
    op = tr.op
    if op.kind == "get":
        if op.lock in cfg.held:
            raise NotEnabled(proc.name, action, "lock-already-held")
        if op.lock in taken:
            raise NotEnabled(proc.name, action, "lock-held-by-other")
        return LocalConfig(tr.target, cfg.held | {op.lock})
    if op.kind == "rel":
        if op.lock not in cfg.held:
            raise NotEnabled(proc.name, action, "lock-not-held")
        return LocalConfig(tr.target, cfg.held - {op.lock})
    return LocalConfig(tr.target, cfg.held)


def _taken_by_others(cfg: GlobalConfig, i: int) -> frozenset:
    out = set()
    for j, lc in enumerate(cfg):
        if j != i:
            out |= lc.held
    return frozenset(out)


def step(lss: LockSharingSystem, cfg: GlobalConfig, process, action) -> GlobalConfig:
    i = lss.index(process)
    new = local_step(lss.processes[i], cfg[i], action, _taken_by_others(cfg, i))
    return cfg[:i] + (new,) + cfg[i + 1:]


def enabled_actions(lss: LockSharingSystem, cfg: GlobalConfig, i: int, taken=None) -> list:
    """Actions of process number ``i`` executable in ``cfg``."""
    proc = lss.processes[i]
    lc = cfg[i]
    if taken is None:
        taken = _taken_by_others(cfg, i)
    out = []
    for tr in proc.outgoing(lc.state):
        op = tr.op
        if op.kind == "get":
            if op.lock in lc.held or op.lock in taken:
                continue
        elif op.kind == "rel" and op.lock not in lc.held:
            continue
        out.append(tr.action)
    return out


def enabled_moves(lss: LockSharingSystem, cfg: GlobalConfig) -> list:
    held_all = frozenset().union(*(lc.held for lc in cfg)) if cfg else frozenset()
    moves = []
    for i, proc in enumerate(lss.processes):
        taken = held_all - cfg[i].held
        for a in enabled_actions(lss, cfg, i, taken):
            moves.append((proc.name, a))
    return moves


def execute(lss: LockSharingSystem, run: Sequence, start: GlobalConfig | None = None) -> list:
    """Replay ``run`` (pairs ``(process, action)``) and return every configuration.

    Raises :class:`NotEnabled` with an ``index`` attribute at the first bad move.
    """
    cfg = lss.initial_config() if start is None else start
    trace = [cfg]
    for k, (p, a) in enumerate(run):
        try:
            cfg = step(lss, cfg, p, a)
        except NotEnabled as exc:
            exc.index = k
            raise
        trace.append(cfg)
    return trace


def project(run: Iterable, process) -> list:
    return [a for p, a in run if p == process]


@dataclass(frozen=True)
class Lasso:
    """Ultimately periodic run ``stem . loop^omega``; an empty loop means a finite run."""

    stem: tuple
    loop: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "stem", tuple(tuple(m) for m in self.stem))
        object.__setattr__(self, "loop", tuple(tuple(m) for m in self.loop))

    @property
    def finite(self) -> bool:
        return not self.loop


def check_lasso(lss: LockSharingSystem, lasso: Lasso) -> GlobalConfig:
    """Validate a global lasso and return the configuration at the loop head."""
    moves = [m for m in lasso.stem if m[1] != PAD]
    head = execute(lss, moves)[-1]
    loop = [m for m in lasso.loop if m[1] != PAD]
    if loop:
        back = execute(lss, loop, start=head)[-1]
        if back != head:
            raise ModelError("loop does not return to its starting configuration")
    return head


PAD = "#pad"


# --- local runs ------------------------------------------------------------

def run_local(proc: Process, actions: Sequence, start: LocalConfig | None = None) -> list:
    """Configurations visited by a local run executed in isolation."""
    cfg = LocalConfig(proc.initial, frozenset()) if start is None else start
    out = [cfg]
    for a in actions:
        cfg = local_step(proc, cfg, a)
        out.append(cfg)
    return out


def check_local_lasso(proc: Process, stem: Sequence, loop: Sequence = ()) -> list:
    """Validate a local lasso; returns the configurations along stem then loop."""
    cfgs = run_local(proc, stem)
    if loop:
        more = run_local(proc, loop, cfgs[-1])
        if more[-1] != cfgs[-1]:
            raise ModelError(f"local loop of {proc.name} does not close")
        cfgs = cfgs + more[1:]
    return cfgs


# --- classifiers -----------------------------------------------------------

@dataclass(frozen=True)
class Violation:
    process: str
    state: str
    action: str
    reason: str


@dataclass(frozen=True)
class SoundnessReport:
    sound: bool
    owns: dict
    violation: Violation | None = None

    def __bool__(self):
        return self.sound


def process_owns(proc: Process) -> dict | Violation:
    """DFS computing owns(s) on reachable states, or the first inconsistency."""
    owns = {proc.initial: frozenset()}
    stack = [proc.initial]
    while stack:
        s = stack.pop()
        held = owns[s]
        for tr in proc.outgoing(s):
            op = tr.op
            if op.kind == "get":
                if op.lock in held:
                    return Violation(proc.name, s, tr.action, "get-held")
                nxt = held | {op.lock}
            elif op.kind == "rel":
                if op.lock not in held:
                    return Violation(proc.name, s, tr.action, "rel-not-held")
                nxt = held - {op.lock}
            else:
                nxt = held
            if tr.target in owns:
                if owns[tr.target] != nxt:
                    return Violation(proc.name, s, tr.action, "conflicting-owns")
            else:
                owns[tr.target] = nxt
                stack.append(tr.target)
    return owns


def check_sound(lss: LockSharingSystem) -> SoundnessReport:
    all_owns = {}
    for proc in lss.processes:
        res = process_owns(proc)
        if isinstance(res, Violation):
            return SoundnessReport(False, all_owns, res)
        all_owns[proc.name] = res
    return SoundnessReport(True, all_owns)


def require_sound(lss: LockSharingSystem) -> dict:
    rep = check_sound(lss)
    if not rep.sound:
        v = rep.violation
        raise PreconditionError(
            f"system is not sound: {v.process} at {v.state} on {v.action} ({v.reason})",
            classifier="sound", evidence=v)
    return rep.owns


def check_exclusive(lss: LockSharingSystem):
    """Return ``(True, None)`` or ``(False, (process, state))``."""
    for proc in lss.processes:
        for s in proc.states:
            gets = {tr.op.lock for tr in proc.outgoing(s) if tr.op.kind == "get"}
            if not gets:
                continue
            if len(gets) > 1 or any(tr.op.kind != "get" for tr in proc.outgoing(s)):
                return False, (proc.name, s)
    return True, None


def check_2lss(lss: LockSharingSystem):
    """Return ``(ok, sizes)`` with ``sizes[p] = |T_p|`` before padding.

    Processes with at most two locks are accepted; they get phantom locks
    from :func:`pad_two_locks`.
    """
    sizes = {p.name: len(p.real_locks) for p in lss.processes}
    return all(n <= 2 for n in sizes.values()), sizes


def pad_two_locks(lss: LockSharingSystem) -> LockSharingSystem:
    """Add fresh unused locks so every process declares exactly two."""
    ok, sizes = check_2lss(lss)
    if not ok:
        bad = sorted(p for p, n in sizes.items() if n > 2)
        raise PreconditionError(f"processes with more than two locks: {bad}",
                                classifier="2lss", evidence=sizes)
    locks = list(lss.locks)
    procs = []
    for p in lss.processes:
        have = len(p.real_locks)
        extra = tuple(f"~{p.name}.{k}" for k in range(2 - have))
        locks.extend(extra)
        procs.append(Process(p.name, p.states, p.initial, p.transitions, extra))
    return LockSharingSystem(tuple(locks), tuple(procs))


def lock_pair(proc: Process) -> tuple:
    """The two locks of a padded two-lock process, in a fixed order."""
    ls = proc.locks
    if len(ls) != 2:
        raise PreconditionError(f"process {proc.name} does not use exactly two locks",
                                classifier="2lss")
    return tuple(sorted(ls))


def check_nested(lss: LockSharingSystem, budget: int = 200_000):
    """Return ``(True, None)`` or ``(False, (process, shortest violating run))``.

    Explores (state, acquisition stack) pairs per process.
    """
    for proc in lss.processes:
        start = (proc.initial, ())
        parent = {start: None}
        queue = deque([start])
        while queue:
            node = queue.popleft()
            s, stack = node
            for tr in proc.outgoing(s):
                op = tr.op
                if op.kind == "get":
                    if op.lock in stack:
                        continue
                    nxt = (tr.target, stack + (op.lock,))
                elif op.kind == "rel":
                    if op.lock not in stack:
                        continue
                    if stack[-1] != op.lock:
                        run = [tr.action]
                        back = node
                        while parent[back] is not None:
                            back, a = parent[back]
                            run.append(a)
                        return False, (proc.name, run[::-1])
                    nxt = (tr.target, stack[:-1])
                else:
                    nxt = (tr.target, stack)
                if nxt not in parent:
                    parent[nxt] = (node, tr.action)
                    if len(parent) > budget:
                        raise BudgetExceeded(f"nestedness check of {proc.name} exceeded {budget} states")
                    queue.append(nxt)
    return True, None


def classify(lss: LockSharingSystem) -> dict:
    sound = check_sound(lss)
    excl, excl_witness = check_exclusive(lss)
    two, sizes = check_2lss(lss)
    try:
        nested, nested_witness = check_nested(lss)
    except BudgetExceeded:
        nested, nested_witness = None, None
    return {
        "sound": sound.sound,
        "soundness_violation": sound.violation,
        "exclusive": excl,
        "exclusive_violation": excl_witness,
        "two_lock": two,
        "lock_counts": sizes,
        "nested": nested,
        "nesting_violation": nested_witness,
    }
