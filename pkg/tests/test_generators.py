import random

import pytest

from lockshare.core import ModelError, check_2lss, check_exclusive, check_nested, check_sound, classify
from lockshare.exclusive2 import build_lock_graph
from lockshare.generators import (brute_force_indset, brute_force_sat, gen_3sat_2lss, gen_indset_nested,
                                  philosophers, planted_cnf, random_local_lasso, random_system)
from lockshare.core import check_local_lasso
from lockshare.patterns2 import verify_2lss
from lockshare.oracle import explore_verify
import networkx as nx


def test_philosophers_classification():
    for left in ((), (3,)):
        c = classify(philosophers(3, left_handed=left))
        assert c["sound"] and c["exclusive"] and c["two_lock"] and c["nested"]
    assert nx.is_directed_acyclic_graph(nx.DiGraph(build_lock_graph(philosophers(3, left_handed=[3]))))
    assert not nx.is_directed_acyclic_graph(nx.DiGraph(build_lock_graph(philosophers(3))))
    with pytest.raises(ModelError):
        philosophers(1)


@pytest.mark.parametrize("seed", range(25))
def test_random_flags(seed):
    lss = random_system(seed, processes=3, flags={"exclusive", "two-lock"})
    assert check_sound(lss).sound and check_exclusive(lss)[0] and check_2lss(lss)[0]
    lss = random_system(seed, processes=3, flags={"nested"}, n_locks=4, locks_per_process=3)
    assert check_sound(lss).sound and check_nested(lss)[0]
    assert random_system(seed, processes=3) == random_system(seed, processes=3)


def test_random_lassos_are_runs():
    rng = random.Random(3)
    for seed in range(30):
        lss = random_system(seed, processes=2)
        for p in lss.processes:
            stem, loop = random_local_lasso(rng, p)
            check_local_lasso(p, stem, loop)


def test_3sat_examples():
    for cnf, sat in (([(1, 1, 1)], True), ([(1, 1, 1), (-1, -1, -1)], False)):
        for exclusive in (False, True):
            lss, obj, p = gen_3sat_2lss(cnf, exclusive=exclusive)
            assert check_sound(lss).sound and check_2lss(lss)[0]
            assert verify_2lss(lss, obj).verdict == sat
            assert explore_verify(lss, obj).verdict == sat
            if exclusive:
                assert check_exclusive(lss)[0]
    with pytest.raises(ModelError):
        gen_3sat_2lss([(1, 2)])


def test_planted_cnf():
    rng = random.Random(0)
    for i in range(200):
        sat = i % 2 == 0
        assert brute_force_sat(planted_cnf(rng, rng.randint(2, 5), rng.randint(4, 6), sat)) == sat


def test_indset_examples():
    path, k = gen_indset_nested([1, 2, 3], [(1, 2), (2, 3)], 2)
    assert k == 2 and brute_force_indset([1, 2, 3], [(1, 2), (2, 3)], 2)
    assert not brute_force_indset([1, 2, 3], [(1, 2), (2, 3), (1, 3)], 2)
    c = classify(path)
    assert c["sound"] and c["nested"] and c["exclusive"]


def test_indset_lock_budget_on_degree_3():
    g = nx.petersen_graph()      # 3-regular
    lss, _ = gen_indset_nested(list(g.nodes), list(g.edges), 3)
    for proc in lss.processes:
        # every branch (one per chosen vertex) touches at most 5 locks
        branches = [tr for tr in proc.outgoing(proc.initial)]
        for tr in branches:
            seen, todo, locks = {tr.target}, [tr.target], {tr.op.lock} - {None}
            while todo:
                s = todo.pop()
                for t in proc.outgoing(s):
                    if t.op.kind != "nop":
                        locks.add(t.op.lock)
                    if t.target not in seen and t.target != proc.initial:
                        seen.add(t.target)
                        todo.append(t.target)
            assert len(locks) <= 5


def test_indset_rejects_k1():
    with pytest.raises(ModelError):
        gen_indset_nested([1, 2], [], 1)
