import re

from lockshare.core import LockSharingSystem
from lockshare.dot import export_dot
from lockshare.exclusive2 import build_lock_graph
from lockshare.generators import swapper_process, philosophers, two_swappers
from lockshare.nested import StairPattern, build_stair_pattern_ela
from lockshare.objectives import compile_builtin
from lockshare.patterns2 import build_pattern_ela, entries_from_lassos, g_inf, infinitary

EDGE = re.compile(r'^\s*"[^"]*" -> "[^"]*"')
NODE = re.compile(r'^\s*"[^"]*"( \[.*\])?;$')


def _well_formed(text):
    lines = text.strip().splitlines()
    assert lines[0].startswith("digraph ") and lines[0].endswith("{") and lines[-1] == "}"
    assert text.count("{") == text.count("}")
    return lines


def _count(text):
    lines = _well_formed(text)
    edges = sum(bool(EDGE.match(l)) for l in lines)
    nodes = sum(bool(NODE.match(l)) and not EDGE.match(l) for l in lines)
    return nodes, edges


def test_swapper_process():
    text = export_dot(swapper_process())
    assert _count(text) == (6, 6)
    assert "get t1" in text and "rel t2" in text


def test_lock_graph():
    text = export_dot(build_lock_graph(two_swappers()))
    assert _count(text) == (2, 4)
    assert {m for m in re.findall(r'label="(\w+)"', text)} == {"p", "q"}


def test_empty_system():
    text = export_dot(LockSharingSystem((), ()))
    assert _count(text) == (0, 0)


def test_other_objects():
    lss = philosophers(2)
    obj = compile_builtin(lss, "global-deadlock")
    assert _count(export_dot(obj.automata["p1"]))[0] == 3
    assert _count(export_dot(build_pattern_ela(swapper_process(), infinitary([{"t1"}, {"t2"}]))))[0] == 12
    ela = build_stair_pattern_ela(lss.process("p1"), StairPattern(("f1",)), ("f1", "f2"), keep_epsilon=True)
    assert "style=dashed" in export_dot(ela)
    lassos = {p: (("p.g1", "p.g2") if p == "p" else ("q.g1", "q.g2"),
                  tuple(f"{p}.{a}" for a in ("r1", "g1b", "r2", "g2b"))) for p in ("p", "q")}
    text = export_dot(g_inf(entries_from_lassos(two_swappers(), lassos)))
    assert "dir=none" in text and _count(text) == (2, 2)
    assert _count(export_dot(lss))[0] == 8


def test_quoting():
    text = export_dot(build_lock_graph(two_swappers()), name='odd "name"')
    assert text.startswith('digraph "odd \\"name\\"" {')
