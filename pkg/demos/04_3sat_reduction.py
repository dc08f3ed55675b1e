"""Formulas in, deadlock questions out.

Each 3-CNF formula becomes a two-lock system and an objective that holds
exactly when the formula is satisfiable.  We run a handful of random
formulas through the pattern engine and compare with brute force.
"""
import random

from lockshare.core import check_exclusive
from lockshare.generators import brute_force_sat, gen_3sat_2lss, planted_cnf
from lockshare.patterns2 import verify_2lss

rng = random.Random(7)
print("vars clauses  exclusive  sat?  engine  brute")
for i in range(8):
    cnf = planted_cnf(rng, rng.randint(2, 4), rng.randint(3, 6), satisfiable=i % 2 == 0)
    excl = i % 4 < 2
    lss, obj, _ = gen_3sat_2lss(cnf, exclusive=excl)
    assert check_exclusive(lss)[0] == excl
    n_vars = len({abs(l) for c in cnf for l in c})
    got = verify_2lss(lss, obj).verdict
    want = brute_force_sat(cnf)
    print(f"{n_vars:4d} {len(cnf):7d}  {excl!s:9}  {want!s:5} {got!s:6}  {'ok' if got == want else 'MISMATCH'}")

lss, _, _ = gen_3sat_2lss([(1, -2, 3), (-1, 2, 2)])
print(f"\nsystem for (x1|!x2|x3)&(!x1|x2|x2): {len(lss.processes)} processes, {len(lss.locks)} locks")
