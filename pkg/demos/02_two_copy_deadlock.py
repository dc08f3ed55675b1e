"""Two copies of the same process sharing t1 and t2.

Both processes take t1 before t2, so the textbook cross-over deadlock is
impossible.  Yet a global deadlock still exists: once one process has moved
to holding t2 alone while the other sits on t1, each waits for the other.
The pattern engine finds it and the explicit-state explorer agrees.
"""
from lockshare.core import execute
from lockshare.generators import two_swappers
from lockshare.objectives import compile_builtin
from lockshare.oracle import explore_verify
from lockshare.patterns2 import replay_certificate, verify_2lss

lss = two_swappers()
obj = compile_builtin(lss, "global-deadlock")

res = verify_2lss(lss, obj)
print("global deadlock reachable:", res.verdict)
cert = res.certificate
print("lock order used:", " < ".join(cert.order))
for p, pat in cert.patterns.items():
    stem, loop = cert.lassos[p]
    print(f"  {p}: pattern {pat}, local run {' '.join(stem)}")
print("certificate replays:", replay_certificate(lss, cert))

oracle = explore_verify(lss, obj)
print("\nexplorer agrees:", oracle.verdict == res.verdict,
      f"({oracle.stats['product_states']} global states)")
run = list(oracle.lasso.stem)
final = execute(lss, run)[-1]
print("interleaving:", ", ".join(a for _, a in run))
for name, local in zip(lss.names, final):
    print(f"  {name} stuck in state {local.state} holding {sorted(local.held)}")
