"""Verification of lock-sharing systems: finite-state processes sharing locks.

Submodules: ``core`` (model, semantics, classifiers), ``ela`` (Emerson-Lei
automata), ``objectives`` (regular objectives), ``patterns2`` (two-lock
systems), ``nested`` (stack-disciplined systems), ``exclusive2`` (the
polynomial deadlock check), ``oracle`` (brute force), ``generators``,
``formats``, ``dot`` and ``cli``.
"""
from .core import (PAD, BudgetExceeded, LockSharingSystem, LssError, ModelError, NotEnabled,
                   PreconditionError, Process, StateBudgetExceeded, Transition, check_2lss,
                   check_exclusive, check_nested, check_sound, classify, get, rel, NOP)
from .exclusive2 import build_lock_graph, forever_pairs, process_deadlock_ptime
from .nested import (StairPattern, build_stair_pattern_ela, check_stair_compatible,
                     detect_circular_deadlock, stair_decompose, verify_nested)
from .objectives import RegularObjective, compile_builtin, parse_formula
from .oracle import can_schedule, explore_verify
from .patterns2 import build_pattern_ela, check_patterns_compatible, verify_2lss

__version__ = "0.1.0"
