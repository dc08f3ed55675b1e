"""A single two-lock process and the patterns its local runs can follow.

The process grabs t1 then t2, and afterwards keeps swapping which lock it
holds.  We list every pattern over {t1, t2}, keep the ones some run of the
process realises, and show one run for each.
"""
from lockshare.ela import find_accepting_lasso, is_empty, product
from lockshare.generators import swapper_process
from lockshare.patterns2 import all_patterns, build_pattern_ela, padded_process_ela

proc = swapper_process()
print(f"process {proc.name}: {len(proc.states)} states, {len(proc.transitions)} transitions")

pats = all_patterns(("t1", "t2"))
print(f"{len(pats)} patterns over (t1, t2)\n")

for pat in pats:
    # in isolation, pretend another process may hold either lock, so the run
    # may stop in any state whose only moves are acquisitions
    ela = product([padded_process_ela(proc, {"t1", "t2"}), build_pattern_ela(proc, pat)])
    if is_empty(ela):
        continue
    w = find_accepting_lasso(ela)
    stem = " ".join(a.split(".")[-1] for a in w.stem) or "-"
    loop = " ".join(a.split(".")[-1] for a in w.loop)
    print(f"  {pat!s:40}  stem: {stem:24} loop: {loop}")
