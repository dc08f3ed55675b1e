"""Graphviz DOT text for the objects worth looking at.

Supported: a process, a whole system (one cluster per process), an
objective automaton, an Emerson-Lei automaton (pattern automata included)
and networkx graphs such as the lock graph or G_Inf.
"""
from __future__ import annotations

import networkx as nx

from .core import LockSharingSystem, Process
from .ela import EmersonLeiAutomaton
from .objectives import ObjectiveAutomaton


def _q(x) -> str:
    s = x if isinstance(x, str) else repr(x) if isinstance(x, tuple) else str(x)
    return '"' + s.replace("\\", "\\\\").replace('"', r"\"") + '"'


def _op_label(tr) -> str:
    if tr.op.kind == "nop":
        return tr.action
    return f"{tr.action} / {tr.op.kind} {tr.op.lock}"


def _process_lines(proc: Process, prefix="", indent="  "):
    out = []
    for s in proc.states:
        shape = "doublecircle" if s == proc.initial else "circle"
        out.append(f'{indent}{_q(prefix + s)} [label={_q(s)}, shape={shape}];')
    for tr in proc.transitions:
        out.append(f"{indent}{_q(prefix + tr.source)} -> {_q(prefix + tr.target)} [label={_q(_op_label(tr))}];")
    return out


def _graph_lines(g):
    out = []
    directed = g.is_directed()
    for n in g.nodes:
        out.append(f"  {_q(n)};")
    if g.is_multigraph():
        edges = g.edges(keys=True)
    else:
        edges = ((u, v, None) for u, v in g.edges())
    for u, v, k in edges:
        attrs = [f"label={_q(k)}"] if k is not None else []
        if not directed:
            attrs.append("dir=none")
        extra = f" [{', '.join(attrs)}]" if attrs else ""
        out.append(f"  {_q(u)} -> {_q(v)}{extra};")
    return out


def export_dot(obj, name: str = "G") -> str:
    """DOT text for ``obj``; always a ``digraph``."""
    lines = [f"digraph {_q(name)} {{"]
    if isinstance(obj, Process):
        lines += _process_lines(obj)
    elif isinstance(obj, LockSharingSystem):
        lines.append(f"  // locks: {', '.join(obj.locks)}")
        for proc in obj.processes:
            lines.append(f"  subgraph {_q('cluster_' + proc.name)} {{")
            lines.append(f"    label={_q(proc.name)};")
            lines += _process_lines(proc, prefix=proc.name + ":", indent="    ")
            lines.append("  }")
    elif isinstance(obj, ObjectiveAutomaton):
        for s in obj.states:
            shape = "doublecircle" if s == obj.initial else "circle"
            lines.append(f"  {_q(s)} [shape={shape}];")
        # one edge per state pair, letters joined
        grouped = {}
        for (s, a), t in obj.delta.items():
            grouped.setdefault((s, t), []).append(a)
        for (s, t), letters in sorted(grouped.items(), key=lambda kv: (str(kv[0][0]), str(kv[0][1]))):
            lines.append(f"  {_q(s)} -> {_q(t)} [label={_q(', '.join(sorted(letters)))}];")
    elif isinstance(obj, EmersonLeiAutomaton):
        lines.append(f"  // acceptance: {obj.acceptance}")
        for s in obj.states:
            shape = "doublecircle" if s == obj.initial else "circle"
            labels = ",".join(sorted(map(str, obj.labels(s))))
            lines.append(f"  {_q(s)} [shape={shape}, xlabel={_q(labels)}];")
        for s, a, t in obj.transitions:
            lines.append(f"  {_q(s)} -> {_q(t)} [label={_q(a)}];")
        for s, ts in obj.epsilon.items():
            for t in ts:
                lines.append(f'  {_q(s)} -> {_q(t)} [label="eps", style=dashed];')
    elif isinstance(obj, (nx.Graph, nx.DiGraph)):
        lines += _graph_lines(obj)
    else:
        raise TypeError(f"cannot export {type(obj).__name__} to DOT")
    lines.append("}")
    return "\n".join(lines) + "\n"
