import pytest

from lockshare.core import BudgetExceeded, Lasso, LockSharingSystem, execute
from lockshare.ela import TRUE
from lockshare.generators import swapper_process, philosophers, two_swappers
from lockshare.objectives import RegularObjective, complement, compile_builtin
from lockshare.oracle import (can_schedule, circular_deadlock_at, explore_verify, find_circular_deadlock,
                              is_process_fair, lasso_satisfies)

SWITCH = (("g1", "g2"), ("r1", "g1b", "r2", "g2b"))


def _q(p, seq):
    return tuple(f"{p}.{a}" for a in seq)


def test_two_copy_global_deadlock():
    lss = two_swappers()
    obj = compile_builtin(lss, "global-deadlock")
    r = explore_verify(lss, obj)
    assert r.verdict and r.lasso.finite
    assert is_process_fair(lss, r.lasso) and lasso_satisfies(lss, r.lasso, obj)


def test_left_handed_no_deadlock():
    lss = philosophers(3, left_handed=[3])
    assert not explore_verify(lss, compile_builtin(lss, "global-deadlock")).verdict


def test_empty_system():
    lss = LockSharingSystem((), ())
    r = explore_verify(lss, RegularObjective({}, TRUE))
    assert r.verdict and r.lasso == Lasso(())


def test_switching_pair_cannot_be_scheduled():
    lss = two_swappers()
    lassos = {p: (_q(p, SWITCH[0]), _q(p, SWITCH[1])) for p in ("p", "q")}
    assert not can_schedule(lss, lassos)


def test_independent_finite_runs():
    from lockshare.core import get, Process, Transition
    a = Process("a", ("0", "1"), "0", (Transition("0", "a.x", "1", get("t1")),))
    b = Process("b", ("0", "1"), "0", (Transition("0", "b.x", "1", get("t2")),))
    lss = LockSharingSystem(("t1", "t2"), (a, b))
    assert can_schedule(lss, {"a": (("a.x",), ()), "b": (("b.x",), ())})


def test_round_robin_philosophers():
    lss = philosophers(3)
    lassos = {p: ((), _q(p, ("take1", "take2", "put2", "put1"))) for p in lss.names}
    assert can_schedule(lss, lassos)


def test_unfair_loop():
    lss = philosophers(2)
    loop = [("p1", "p1.take1"), ("p1", "p1.take2"), ("p1", "p1.put2"), ("p1", "p1.put1")]
    assert not is_process_fair(lss, Lasso((), loop))


def test_obj_and_complement_disagree_on_fair_lassos():
    lss = philosophers(3)
    for kind, args in (("global-deadlock", ()), ("process-deadlock", ("p1",)), ("acts-forever", ("p2",))):
        obj = compile_builtin(lss, kind, *args)
        for o in (obj, complement(obj)):
            r = explore_verify(lss, o)
            if r.verdict:
                assert is_process_fair(lss, r.lasso)
                assert lasso_satisfies(lss, r.lasso, obj) != lasso_satisfies(lss, r.lasso, complement(obj))


def test_budget():
    lss = philosophers(4)
    with pytest.raises(BudgetExceeded):
        explore_verify(lss, complement(compile_builtin(lss, "global-deadlock")), budget=(5, 25))


def test_circular_deadlock_oracle():
    lss = philosophers(3)
    run, procs = find_circular_deadlock(lss)
    assert sorted(procs) == ["p1", "p2", "p3"]
    assert circular_deadlock_at(lss, execute(lss, run)[-1]) is not None
    assert find_circular_deadlock(philosophers(3, left_handed=[3])) is None


def test_swapper_alone_never_deadlocks_globally():
    lss = LockSharingSystem(("t1", "t2"), (swapper_process(),))
    assert not explore_verify(lss, compile_builtin(lss, "global-deadlock")).verdict
