import pytest

from lockshare.core import LockSharingSystem, PreconditionError, Process, Transition, get, rel
from lockshare.ela import find_accepting_lasso, is_empty, product
from lockshare.generators import swapper_process, philosophers, two_swappers
from lockshare.objectives import RegularObjective, compile_builtin, parse_formula
from lockshare.oracle import explore_verify
from lockshare.patterns2 import (Pattern2, PatternEntry, all_patterns, build_pattern_ela,
                                 check_patterns_compatible, finitary, infinitary, padded_process_ela,
                                 pattern_of_local_lasso, replay_certificate, verify_2lss)

PAIR = ("t1", "t2")
SWITCHING = infinitary([{"t1"}, {"t2"}, {"t1", "t2"}])


def test_23_patterns():
    pats = all_patterns(PAIR)
    assert len(pats) == len(set(pats)) == 23
    assert sum(p.finitary for p in pats) == 6
    assert pats[-1].switching


def test_strong_shapes():
    with pytest.raises(ValueError):
        finitary({"t1", "t2"}, strong=True)
    with pytest.raises(ValueError):
        infinitary([{"t1", "t2"}], strong=True)
    assert infinitary([{"t1"}], strong=True).strong_lock() == "t1"


def test_extraction():
    p = swapper_process()
    four = pattern_of_local_lasso(p, ("p.g1", "p.g2", "p.r1"))
    assert four == finitary({"t2"}, strong=True) and four.blocks == {"t1"}
    assert pattern_of_local_lasso(p, ("p.g1", "p.g2"), ("p.r1", "p.g1b", "p.r2", "p.g2b")) == SWITCHING
    assert pattern_of_local_lasso(p, ()) == finitary(set())


def test_pattern_automata_have_12_states():
    p = swapper_process()
    assert {len(build_pattern_ela(p, pat).states) for pat in all_patterns(PAIR)} == {12}


def test_empty_pattern_accepts_padding():
    p = swapper_process()
    ela = build_pattern_ela(p, finitary(set()))
    w = find_accepting_lasso(ela)
    assert w is not None and set(w.loop) == {"#pad"}


def test_switching_product_nonempty_and_state6():
    p = swapper_process()
    assert not is_empty(product([padded_process_ela(p, frozenset()), build_pattern_ela(p, SWITCHING)]))
    prod = product([padded_process_ela(p, {"t2"}), build_pattern_ela(p, finitary({"t1"}, strong=True))])
    w = find_accepting_lasso(prod)
    assert w.loop_states[0][0] == "#pad:6"


def test_compatibility_examples():
    e = {"p": PatternEntry(SWITCHING, PAIR), "q": PatternEntry(SWITCHING, PAIR)}
    assert check_patterns_compatible(e) == (False, "vi")
    blocked = Pattern2("fin", frozenset(), blocks=frozenset({"t1"}))
    e = {"p": PatternEntry(SWITCHING, PAIR), "q": PatternEntry(blocked, PAIR)}
    assert check_patterns_compatible(e) == (False, "iii")
    idle = Pattern2("fin", frozenset(), blocks=frozenset())
    e = {"p": PatternEntry(idle, PAIR), "q": PatternEntry(idle, PAIR)}
    assert check_patterns_compatible(e) == (True, None)


def test_compatibility_conditions():
    own = finitary({"t1"})
    e = {"p": PatternEntry(own, PAIR), "q": PatternEntry(own, PAIR)}
    assert check_patterns_compatible(e) == (False, "ii")
    e = {"p": PatternEntry(own, PAIR, non_get_out=True)}
    assert check_patterns_compatible(e) == (False, "i")
    e = {"p": PatternEntry(own, PAIR), "q": PatternEntry(infinitary([{"t1"}, {"t2"}]), PAIR)}
    assert check_patterns_compatible(e) == (False, "iv")
    s1 = finitary({"t1"}, strong=True)
    s2 = finitary({"t2"}, strong=True)
    e = {"p": PatternEntry(s1, PAIR), "q": PatternEntry(s2, PAIR)}
    assert check_patterns_compatible(e) == (False, "v")


def test_two_copy_example():
    lss = two_swappers()
    r = verify_2lss(lss, compile_builtin(lss, "global-deadlock"))
    assert r.verdict and replay_certificate(lss, r.certificate)
    acts = compile_builtin(lss, "acts-forever", "p")
    assert not verify_2lss(lss, acts).verdict


def test_some_process_acts_forever():
    lss = two_swappers()
    gd = compile_builtin(lss, "global-deadlock")
    some = RegularObjective(gd.automata, parse_formula("!inf(p,done) | !inf(q,done)"))
    assert not verify_2lss(lss, some).verdict
    assert not explore_verify(lss, some).verdict


def test_philosophers_deadlock():
    lss = philosophers(3)
    assert verify_2lss(lss, compile_builtin(lss, "global-deadlock")).verdict


def test_precondition():
    p = Process("p", ("0", "1", "2", "3"), "0", (
        Transition("0", "p.a", "1", get("a")), Transition("1", "p.b", "2", get("b")),
        Transition("2", "p.c", "3", get("c"))))
    lss = LockSharingSystem(("a", "b", "c"), (p,))
    with pytest.raises(PreconditionError) as e:
        verify_2lss(lss, compile_builtin(lss, "global-deadlock"))
    assert e.value.classifier == "2lss"
    bad = Process("p", ("0", "1"), "0", (Transition("0", "p.r", "1", rel("a")),))
    lss = LockSharingSystem(("a",), (bad,))
    with pytest.raises(PreconditionError) as e:
        verify_2lss(lss, compile_builtin(lss, "global-deadlock"))
    assert e.value.classifier == "sound"
