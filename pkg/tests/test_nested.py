import itertools

import pytest

from lockshare.core import (LockSharingSystem, PreconditionError, Process, Transition, execute, get,
                            rel)
from lockshare.ela import find_accepting_lasso, replay_lasso
from lockshare.generators import swapper, gen_indset_nested, philosophers
from lockshare.nested import (OrderError, StairPattern, build_stair_pattern_ela, check_stair_compatible,
                              detect_circular_deadlock, matches_stair_pattern, replay_nested_certificate,
                              stair_decompose, stair_size_bound, verify_nested)
from lockshare.objectives import compile_builtin
from lockshare.oracle import circular_deadlock_at


def _line(name="p"):
    # get t1, get t2, rel t2, then stuck
    return Process(name, ("0", "1", "2", "3"), "0", (
        Transition("0", f"{name}.g1", "1", get("t1")), Transition("1", f"{name}.g2", "2", get("t2")),
        Transition("2", f"{name}.r2", "3", rel("t2"))))


def test_decompose_finite():
    p = _line()
    d = stair_decompose(p, ("p.g1", "p.g2", "p.r2"))
    assert d.stairs == ("p.g1",) and d.segments == ((), ("p.g2", "p.r2"))
    assert d.pattern == StairPattern(("t1",), ())
    assert set(d.constraints.edges()) == {("t1", "t2")}
    d = stair_decompose(p, ("p.g1", "p.g2"))
    assert d.pattern.owns_seq == ("t1", "t2") and ("t1", "t2") in d.constraints.edges()


def test_decompose_philosopher_loop():
    proc = philosophers(2).process("p1")
    loop = ("p1.take1", "p1.take2", "p1.put2", "p1.put1")
    d = stair_decompose(proc, (), loop)
    assert d.stairs == () and d.pattern.inf_set == {"f1", "f2"}
    assert d.constraints.number_of_edges() == 0
    assert d.loop() == loop


def test_size_bound_and_acceptance():
    lss = philosophers(2)
    proc = lss.process("p1")
    pat = StairPattern((), {"f1", "f2"})
    for order in itertools.permutations(lss.locks):
        ela = build_stair_pattern_ela(proc, pat, order)
        assert len(ela.states) <= stair_size_bound(proc) == 16
    ela = build_stair_pattern_ela(proc, pat, ("f1", "f2"))
    w = find_accepting_lasso(ela)
    assert w is not None and replay_lasso(ela, w)


def test_order_inconsistency():
    proc = philosophers(2).process("p1")
    with pytest.raises(OrderError):
        build_stair_pattern_ela(proc, StairPattern(("f2", "f1")), ("f1", "f2"))


def test_epsilon_kept_on_request():
    proc = philosophers(2).process("p1")
    ela = build_stair_pattern_ela(proc, StairPattern(("f1",)), ("f1", "f2"), keep_epsilon=True)
    assert ela.epsilon


def test_matching():
    p = _line()
    d = stair_decompose(p, ("p.g1", "p.g2", "p.r2"))
    assert matches_stair_pattern(p, d, StairPattern(("t1",)), ("t1", "t2"))
    assert not matches_stair_pattern(p, d, StairPattern(("t1",)), ("t2", "t1"))


def test_compatibility_examples():
    pats = {f"p{i}": StairPattern((), {f"f{i}", f"f{i % 3 + 1}"}) for i in (1, 2, 3)}
    assert check_stair_compatible(pats) == (True, None)
    assert check_stair_compatible({"p": StairPattern(("f1", "f2")), "q": StairPattern((), {"f1"})}) \
        == (False, "owns-inf-overlap")
    ok, _ = check_stair_compatible({"p": StairPattern(("f1", "f2")), "q": StairPattern(("f2", "f1"))})
    assert not ok
    ok, why = check_stair_compatible({"p": StairPattern(("f1", "f2")), "q": StairPattern(("f3", "f1"))})
    assert (ok, why) == (False, "owns-overlap")
    ok, why = check_stair_compatible({"p": StairPattern(("f1",), {"f2"}), "q": StairPattern(("f2",), {"f1"})})
    assert not ok


def test_verify_philosophers():
    lss = philosophers(3)
    r = verify_nested(lss, compile_builtin(lss, "global-deadlock"))
    assert r.verdict and replay_nested_certificate(lss, r.certificate)
    assert {p.owns_seq for p in r.certificate.patterns.values()} == {("f1",), ("f2",), ("f3",)}
    left = philosophers(3, left_handed=[3])
    assert not verify_nested(left, compile_builtin(left, "global-deadlock")).verdict


def test_verify_single_process_stuck():
    p = Process("p", ("0", "1", "2"), "0", (
        Transition("0", "p.g1", "1", get("t1")), Transition("1", "p.g2", "2", get("t2"))))
    lss = LockSharingSystem(("t1", "t2"), (p,))
    assert verify_nested(lss, compile_builtin(lss, "process-deadlock", "p")).verdict


def test_not_nested_rejected():
    lss = swapper()
    with pytest.raises(PreconditionError) as e:
        verify_nested(lss, compile_builtin(lss, "global-deadlock"))
    assert e.value.classifier == "nested"


def test_circular_examples():
    path, _ = gen_indset_nested([1, 2, 3], [(1, 2), (2, 3)], 2)
    tri, _ = gen_indset_nested([1, 2, 3], [(1, 2), (2, 3), (1, 3)], 2)
    assert detect_circular_deadlock(path).verdict
    assert not detect_circular_deadlock(tri).verdict
    r = detect_circular_deadlock(philosophers(3))
    assert r.verdict and len(r.cycle) == 3
    cfg = execute(philosophers(3), r.schedule)[-1]
    assert circular_deadlock_at(philosophers(3), cfg) is not None
    assert not detect_circular_deadlock(philosophers(3, left_handed=[3])).verdict
