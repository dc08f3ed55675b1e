"""JSON files for systems, objectives and witnesses.

Action names are local to their process in files and become
``"<process>.<action>"`` once loaded, which keeps alphabets disjoint.
Errors carry the JSON path of the offending value.
"""
from __future__ import annotations

import json

import jsonschema

from .core import NOP, PAD, Lasso, LockSharingSystem, LssError, ModelError, Process, Transition, get, rel
from .nested import NestedCertificate, StairPattern
from .objectives import (ObjectiveAutomaton, RegularObjective, compile_builtin, format_formula,
                         parse_formula, universal, FormulaSyntaxError)
from .patterns2 import Pattern2, PatternCertificate


class FormatError(LssError):
    def __init__(self, message, path="$"):
        super().__init__(f"{path}: {message}")
        self.path = path


_NAME = {"type": "string", "minLength": 1}

SYSTEM_SCHEMA = {
    "type": "object",
    "required": ["locks", "processes"],
    "additionalProperties": False,
    "properties": {
        "locks": {"type": "array", "items": _NAME},
        "processes": {"type": "array", "items": {
            "type": "object",
            "required": ["name", "states", "initial", "transitions"],
            "additionalProperties": False,
            "properties": {
                "name": _NAME,
                "states": {"type": "array", "items": _NAME, "minItems": 1},
                "initial": _NAME,
                "transitions": {"type": "array", "items": {
                    "type": "object",
                    "required": ["from", "action", "op", "to"],
                    "additionalProperties": False,
                    "properties": {
                        "from": _NAME, "action": _NAME, "to": _NAME,
                        "op": {"type": "object", "required": ["kind"], "additionalProperties": False,
                               "properties": {"kind": {"enum": ["get", "rel", "nop"]}, "lock": _NAME}},
                    }}},
            }}},
    },
}

OBJECTIVE_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "automata": {"type": "object", "additionalProperties": {
            "type": "object",
            "required": ["states", "initial", "transitions"],
            "additionalProperties": False,
            "properties": {
                "states": {"type": "array", "items": _NAME, "minItems": 1},
                "initial": _NAME,
                "transitions": {"type": "array", "items": {
                    "type": "object", "required": ["from", "letter", "to"], "additionalProperties": False,
                    "properties": {"from": _NAME, "letter": _NAME, "to": _NAME}}},
            }}},
        "formula": {"type": "string"},
        "builtin": _NAME,
        "args": {"type": "array"},
    },
}

_MOVES = {"type": "array", "items": {"type": "array", "minItems": 2, "maxItems": 2, "items": _NAME}}
_ACTS = {"type": "array", "items": _NAME}

WITNESS_SCHEMA = {
    "type": "object",
    "required": ["kind"],
    "properties": {
        "kind": {"enum": ["global-lasso", "pattern-certificate", "circular-deadlock"]},
        "stem": _MOVES,
        "loop": _MOVES,
        "lassos": {"type": "object", "additionalProperties": {
            "type": "object", "required": ["stem", "loop"],
            "properties": {"stem": _ACTS, "loop": _ACTS}}},
    },
}


def _load(text, what):
    if isinstance(text, (dict, list)):
        return text
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise FormatError(f"invalid JSON in {what}: {e.msg} (line {e.lineno}, column {e.colno})") from None


def _validate(doc, schema):
    try:
        jsonschema.validate(doc, schema)
    except jsonschema.ValidationError as e:
        raise FormatError(e.message, e.json_path) from None


def _qualify(p, a):
    return a if a == PAD or a.startswith(p + ".") else f"{p}.{a}"


def _local(p, a):
    return a[len(p) + 1:] if a.startswith(p + ".") else a


# --- systems -----------------------------------------------------------------

def parse_system(text) -> LockSharingSystem:
    doc = _load(text, "system")
    _validate(doc, SYSTEM_SCHEMA)
    locks = doc["locks"]
    if len(set(locks)) != len(locks):
        raise FormatError("duplicate lock", "$.locks")
    lockset = set(locks)
    procs, names = [], set()
    for i, pd in enumerate(doc["processes"]):
        base = f"$.processes[{i}]"
        name = pd["name"]
        if name in names:
            raise FormatError(f"duplicate process {name!r}", base + ".name")
        names.add(name)
        states = pd["states"]
        if len(set(states)) != len(states):
            raise FormatError("duplicate state", base + ".states")
        if pd["initial"] not in states:
            raise FormatError(f"undeclared state {pd['initial']!r}", base + ".initial")
        trs, seen = [], {}
        for j, td in enumerate(pd["transitions"]):
            tp = f"{base}.transitions[{j}]"
            for key in ("from", "to"):
                if td[key] not in states:
                    raise FormatError(f"undeclared state {td[key]!r}", f"{tp}.{key}")
            op = td["op"]
            if op["kind"] == "nop":
                if "lock" in op:
                    raise FormatError("nop takes no lock", tp + ".op.lock")
                lop = NOP
            else:
                if "lock" not in op:
                    raise FormatError(f"{op['kind']} needs a lock", tp + ".op")
                if op["lock"] not in lockset:
                    raise FormatError(f"undeclared lock {op['lock']!r}", tp + ".op.lock")
                lop = get(op["lock"]) if op["kind"] == "get" else rel(op["lock"])
            a = td["action"]
            if a == PAD:
                raise FormatError(f"{PAD!r} is reserved", tp + ".action")
            if (td["from"], a) in seen:
                raise FormatError(f"second transition for action {a!r} from {td['from']!r}", tp)
            seen[(td["from"], a)] = j
            trs.append(Transition(td["from"], _qualify(name, a), td["to"], lop))
        try:
            procs.append(Process(name, tuple(states), pd["initial"], tuple(trs)))
        except ModelError as e:
            raise FormatError(str(e), base) from None
    try:
        return LockSharingSystem(tuple(locks), tuple(procs))
    except ModelError as e:
        raise FormatError(str(e)) from None


def system_to_dict(lss: LockSharingSystem) -> dict:
    procs = []
    for p in lss.processes:
        trs = []
        for tr in p.transitions:
            op = {"kind": tr.op.kind}
            if tr.op.kind != "nop":
                op["lock"] = tr.op.lock
            trs.append({"from": tr.source, "action": _local(p.name, tr.action), "op": op, "to": tr.target})
        procs.append({"name": p.name, "states": list(p.states), "initial": p.initial, "transitions": trs})
    return {"locks": list(lss.locks), "processes": procs}


def serialize_system(lss: LockSharingSystem) -> str:
    return json.dumps(system_to_dict(lss), indent=2)


# --- objectives ----------------------------------------------------------------

def parse_objective(text, lss: LockSharingSystem) -> RegularObjective:
    """Objective file for ``lss``.  ``{"builtin": kind, "args": [...]}`` is also accepted."""
    doc = _load(text, "objective")
    _validate(doc, OBJECTIVE_SCHEMA)
    if "builtin" in doc:
        if "automata" in doc or "formula" in doc:
            raise FormatError("builtin objectives take no automata or formula", "$.builtin")
        try:
            return compile_builtin(lss, doc["builtin"], *doc.get("args", []))
        except (ModelError, TypeError) as e:
            raise FormatError(str(e), "$.builtin") from None
    if "formula" not in doc:
        raise FormatError("missing formula", "$")
    autos = {}
    given = doc.get("automata", {})
    for p in given:
        if p not in lss.names:
            raise FormatError(f"unknown process {p!r}", f"$.automata.{p}")
    for proc in lss.processes:
        p = proc.name
        if p not in given:
            autos[p] = universal(proc.alphabet)
            continue
        ad = given[p]
        base = f"$.automata.{p}"
        trans = []
        for j, td in enumerate(ad["transitions"]):
            a = _qualify(p, td["letter"])
            if a not in proc.alphabet and a != PAD:
                raise FormatError(f"letter {td['letter']!r} is not an action of {p}",
                                  f"{base}.transitions[{j}].letter")
            trans.append((td["from"], a, td["to"]))
        try:
            autos[p] = ObjectiveAutomaton.build(ad["states"], ad["initial"], proc.alphabet, trans)
        except ModelError as e:
            raise FormatError(str(e), base) from None
    try:
        formula = parse_formula(doc["formula"])
        return RegularObjective(autos, formula)
    except (FormulaSyntaxError, ModelError) as e:
        raise FormatError(str(e), "$.formula") from None


def objective_to_dict(obj: RegularObjective) -> dict:
    autos = {}
    for p, a in obj.automata.items():
        trans = [{"from": s, "letter": _local(p, x), "to": t}
                 for (s, x), t in sorted(a.delta.items(), key=lambda kv: (str(kv[0][0]), kv[0][1]))]
        autos[p] = {"states": list(a.states), "initial": a.initial, "transitions": trans}
    return {"automata": autos, "formula": format_formula(obj.formula)}


def serialize_objective(obj: RegularObjective) -> str:
    return json.dumps(objective_to_dict(obj), indent=2)


# --- witnesses -----------------------------------------------------------------

def lasso_to_dict(lasso: Lasso) -> dict:
    return {"kind": "global-lasso",
            "stem": [[p, _local(p, a)] for p, a in lasso.stem],
            "loop": [[p, _local(p, a)] for p, a in lasso.loop]}


def _pattern2_to_dict(pat: Pattern2) -> dict:
    if pat.finitary:
        return {"kind": "fin", "owned": sorted(pat.owned), "strong": pat.strong}
    return {"kind": "inf", "inf_sets": sorted(sorted(j) for j in pat.inf_sets), "strong": pat.strong}


def certificate_to_dict(cert) -> dict:
    doc = {"kind": "pattern-certificate", "order": list(cert.order),
           "lassos": {p: {"stem": [_local(p, a) for a in stem], "loop": [_local(p, a) for a in loop]}
                      for p, (stem, loop) in cert.lassos.items()}}
    if isinstance(cert, NestedCertificate):
        doc["engine"] = "nested"
        doc["patterns"] = {p: {"owns_seq": list(pt.owns_seq), "inf_set": sorted(pt.inf_set)}
                           for p, pt in cert.patterns.items()}
    elif isinstance(cert, PatternCertificate):
        doc["engine"] = "patterns2"
        doc["patterns"] = {p: _pattern2_to_dict(pt) for p, pt in cert.patterns.items()}
        doc["lock_pairs"] = {p: list(v) for p, v in cert.locks.items()}
    else:
        raise TypeError(f"not a certificate: {cert!r}")
    return doc


def serialize_witness(w) -> str:
    if isinstance(w, Lasso):
        doc = lasso_to_dict(w)
    elif isinstance(w, dict):
        doc = w
    else:
        doc = certificate_to_dict(w)
    return json.dumps(doc, indent=2)


def parse_witness(text, lss: LockSharingSystem):
    """A :class:`Lasso`, a :class:`NestedCertificate` or a :class:`PatternCertificate`."""
    doc = _load(text, "witness")
    _validate(doc, WITNESS_SCHEMA)
    names = set(lss.names)
    if doc["kind"] == "global-lasso":
        parts = []
        for key in ("stem", "loop"):
            moves = []
            for j, (p, a) in enumerate(doc.get(key, [])):
                if p not in names:
                    raise FormatError(f"unknown process {p!r}", f"$.{key}[{j}][0]")
                moves.append((p, _qualify(p, a)))
            parts.append(tuple(moves))
        return Lasso(parts[0], parts[1])
    if doc["kind"] != "pattern-certificate":
        raise FormatError("only lassos and pattern certificates can be read back", "$.kind")
    lassos = {}
    for p, ld in doc.get("lassos", {}).items():
        if p not in names:
            raise FormatError(f"unknown process {p!r}", f"$.lassos.{p}")
        lassos[p] = (tuple(_qualify(p, a) for a in ld["stem"]), tuple(_qualify(p, a) for a in ld["loop"]))
    pats = doc.get("patterns", {})
    if doc.get("engine") == "nested":
        patterns = {p: StairPattern(tuple(v["owns_seq"]), frozenset(v["inf_set"])) for p, v in pats.items()}
        return NestedCertificate(patterns, tuple(doc["order"]), lassos)
    patterns = {}
    for p, v in pats.items():
        if v["kind"] == "fin":
            patterns[p] = Pattern2("fin", frozenset(v["owned"]), frozenset(), v["strong"])
        else:
            patterns[p] = Pattern2("inf", frozenset(), frozenset(frozenset(j) for j in v["inf_sets"]),
                                   v["strong"])
    pairs = {p: tuple(v) for p, v in doc.get("lock_pairs", {}).items()}
    return PatternCertificate(patterns, lassos, tuple(doc["order"]), pairs)
