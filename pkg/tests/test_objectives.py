import random

import pytest

from lockshare.core import PAD, Lasso, ModelError
from lockshare.ela import Atom, eval_formula
from lockshare.generators import philosophers, random_objective, random_system, two_swappers
from lockshare.objectives import (FormulaSyntaxError, ObjectiveAutomaton, RegularObjective, complement,
                                  compile_builtin, conjoin, format_formula, lasso_valuation,
                                  parse_formula, satisfied_by, trivial, universal)
from lockshare.oracle import explore_verify, lasso_satisfies
from lockshare.patterns2 import verify_2lss

P1_LOOP = [("p1", "p1.take1"), ("p1", "p1.take2"), ("p1", "p1.put2"), ("p1", "p1.put1")]


def test_sink_completion():
    a = ObjectiveAutomaton.build(["s"], "s", {"x", "y"}, [("s", "x", "s")])
    assert a.step("s", "y") == "_sink" and a.step("_sink", PAD) == "_sink"
    assert set(a.delta) == {(s, l) for s in a.states for l in a.alphabet}


def test_build_rejects_bad_input():
    with pytest.raises(ModelError):
        ObjectiveAutomaton.build(["s"], "s", {"x"}, [("s", "x", "t")])
    with pytest.raises(ModelError):
        ObjectiveAutomaton.build(["s", "t"], "s", {"x"}, [("s", "x", "s"), ("s", "x", "t")])


def test_atoms_checked():
    lss = two_swappers()
    autos = {p.name: universal(p.alphabet) for p in lss.processes}
    with pytest.raises(ModelError):
        RegularObjective(autos, Atom(("p", "nowhere")))
    with pytest.raises(ModelError):
        RegularObjective(autos, Atom(("r", "any")))


def test_process_deadlock_false_when_acting():
    lss = philosophers(2)
    obj = compile_builtin(lss, "process-deadlock", "p1")
    assert not lasso_satisfies(lss, Lasso((), P1_LOOP), obj)


def test_global_deadlock_on_finite_run():
    lss = philosophers(2)
    run = [("p1", "p1.take1"), ("p2", "p2.take1")]
    assert lasso_satisfies(lss, Lasso(run), compile_builtin(lss, "global-deadlock"))


def test_complement_involution():
    obj = compile_builtin(two_swappers(), "process-deadlock", "p")
    assert complement(complement(obj)) == obj


def test_complement_of_global_deadlock_on_round_robin():
    lss = philosophers(3)
    loop = [(f"p{i}", f"p{i}.{a}") for i in (1, 2, 3) for a in ("take1", "take2", "put2", "put1")]
    assert lasso_satisfies(lss, Lasso((), loop), complement(compile_builtin(lss, "global-deadlock")))


def test_exactly_one_of_obj_and_complement():
    for seed in range(40):
        rng = random.Random(seed)
        lss = random_system(seed, processes=2, flags={"two-lock"})
        obj = random_objective(rng, lss)
        for o in (obj, complement(obj)):
            r = explore_verify(lss, o)
            if r.verdict:
                assert lasso_satisfies(lss, r.lasso, o) != lasso_satisfies(lss, r.lasso, complement(o))


def test_conjoin_with_trivial():
    lss = philosophers(2)
    obj = compile_builtin(lss, "process-deadlock", "p1")
    both = conjoin(obj, trivial(lss))
    for lasso in (Lasso((), P1_LOOP), Lasso([("p1", "p1.take1"), ("p2", "p2.take1")])):
        assert lasso_satisfies(lss, lasso, both) == lasso_satisfies(lss, lasso, obj)


def test_conjoin_contradiction():
    lss = two_swappers()
    obj = compile_builtin(lss, "process-deadlock", "p")
    assert not verify_2lss(lss, conjoin(obj, complement(obj))).verdict
    assert not explore_verify(lss, conjoin(obj, complement(obj))).verdict


def test_conjoin_two_deadlocks():
    lss = two_swappers()
    both = conjoin(compile_builtin(lss, "process-deadlock", "p"), compile_builtin(lss, "process-deadlock", "q"))
    assert verify_2lss(lss, both).verdict
    assert verify_2lss(lss, compile_builtin(lss, "process-deadlock", "p")).verdict


def test_padded_in_and_reach():
    lss = philosophers(2)
    finite = Lasso([("p1", "p1.take1"), ("p2", "p2.take1")])
    assert lasso_satisfies(lss, finite, compile_builtin(lss, "padded-in", "p1", "one"))
    assert not lasso_satisfies(lss, finite, compile_builtin(lss, "padded-in", "p1", "think"))
    assert lasso_satisfies(lss, Lasso((), P1_LOOP), compile_builtin(lss, "local-reach-forever", "p1", ["eat"]))
    with pytest.raises(ModelError):
        compile_builtin(lss, "padded-in", "p1", "nowhere")
    with pytest.raises(ModelError):
        compile_builtin(lss, "no-such-kind")


def test_valuation():
    lss = philosophers(2)
    obj = compile_builtin(lss, "global-deadlock")
    val = lasso_valuation(lss, obj, Lasso((), P1_LOOP))
    assert ("p2", "done") in val and ("p1", "done") not in val
    assert satisfied_by(complement(obj), val)


@pytest.mark.parametrize("text", [
    "inf(p,done)", "!inf(p,done) & inf(q,s)", "(inf(p,a) | inf(p,b)) & !(inf(q,c))", "true", "false",
])
def test_formula_round_trip(text):
    f = parse_formula(text)
    assert parse_formula(format_formula(f)) == f


@pytest.mark.parametrize("text", ["inf(p)", "inf(p,s) &", "(inf(p,s)", "foo", ""])
def test_formula_errors(text):
    with pytest.raises(FormulaSyntaxError):
        parse_formula(text)


def test_formula_precedence():
    f = parse_formula("inf(a,x) | inf(b,y) & !inf(c,z)")
    assert eval_formula(f, {("a", "x")})
    assert not eval_formula(f, {("b", "y"), ("c", "z")})
