import json
from importlib.resources import files

import pytest

from lockshare.core import Lasso, classify
from lockshare.formats import (FormatError, parse_objective, parse_system, parse_witness, serialize_objective,
                               serialize_system, serialize_witness)
from lockshare.generators import philosophers, two_swappers
from lockshare.nested import replay_nested_certificate, verify_nested
from lockshare.objectives import compile_builtin
from lockshare.oracle import explore_verify
from lockshare.patterns2 import replay_certificate, verify_2lss

DATA = files("lockshare").joinpath("data")
SYSTEMS = sorted(p.name for p in DATA.joinpath("systems").iterdir())


def _system(name):
    return DATA.joinpath("systems", name).read_text()


SWAPPER = {"locks": ["t1", "t2"], "processes": [{"name": "p", "states": ["1", "2", "3", "4", "5", "6"],
        "initial": "1", "transitions": [
            {"from": "1", "action": "g1", "op": {"kind": "get", "lock": "t1"}, "to": "2"},
            {"from": "2", "action": "g2", "op": {"kind": "get", "lock": "t2"}, "to": "3"},
            {"from": "3", "action": "r1", "op": {"kind": "rel", "lock": "t1"}, "to": "4"},
            {"from": "4", "action": "g1b", "op": {"kind": "get", "lock": "t1"}, "to": "5"},
            {"from": "5", "action": "r2", "op": {"kind": "rel", "lock": "t2"}, "to": "6"},
            {"from": "6", "action": "g2b", "op": {"kind": "get", "lock": "t2"}, "to": "3"}]}]}


def test_swapper_parses_and_classifies():
    lss = parse_system(json.dumps(SWAPPER))
    assert lss.process("p").transition("1", "p.g1") is not None
    c = classify(lss)
    assert c["sound"] and c["exclusive"] and c["two_lock"] and c["nested"] is False


@pytest.mark.parametrize("name", SYSTEMS)
def test_round_trip(name):
    text = _system(name)
    lss = parse_system(text)
    assert json.loads(serialize_system(lss)) == json.loads(text)
    assert parse_system(serialize_system(lss)) == lss


def _bad(path, **change):
    doc = json.loads(json.dumps(SWAPPER))
    node = doc
    for k in path[:-1]:
        node = node[k]
    node[path[-1]] = change["value"]
    return json.dumps(doc)


@pytest.mark.parametrize("path,value,where", [
    (("processes", 0, "transitions", 0, "op", "lock"), "zz", "$.processes[0].transitions[0].op.lock"),
    (("processes", 0, "initial"), "9", "$.processes[0].initial"),
    (("processes", 0, "transitions", 1, "to"), "9", "$.processes[0].transitions[1].to"),
    (("processes", 0, "transitions", 0, "op"), {"kind": "get"}, "$.processes[0].transitions[0].op"),
    (("processes", 0, "transitions", 0, "op"), {"kind": "take", "lock": "t1"},
     "$.processes[0].transitions[0].op.kind"),
    (("locks",), ["t1", "t1", "t2"], "$.locks"),
])
def test_errors_carry_json_path(path, value, where):
    with pytest.raises(FormatError) as e:
        parse_system(_bad(path, value=value))
    assert e.value.path == where


def test_invalid_json():
    with pytest.raises(FormatError) as e:
        parse_system('{"locks": [')
    assert "line 1" in str(e.value)


def test_nondeterministic_file():
    doc = json.loads(json.dumps(SWAPPER))
    doc["processes"][0]["transitions"].append(
        {"from": "1", "action": "g1", "op": {"kind": "nop"}, "to": "1"})
    with pytest.raises(FormatError) as e:
        parse_system(json.dumps(doc))
    assert e.value.path == "$.processes[0].transitions[6]"


def test_objective_files():
    lss = two_swappers()
    obj = compile_builtin(lss, "global-deadlock")
    again = parse_objective(serialize_objective(obj), lss)
    assert again.formula == obj.formula
    assert verify_2lss(lss, again).verdict
    text = DATA.joinpath("objectives", "two_swappers_someone_acts.json").read_text()
    assert not verify_2lss(lss, parse_objective(text, lss)).verdict


def test_objective_missing_process_is_universal():
    lss = two_swappers()
    doc = {"automata": {"p": {"states": ["a"], "initial": "a", "transitions": []}}, "formula": "true"}
    obj = parse_objective(json.dumps(doc), lss)
    assert obj.automata["q"].states == ("any",)
    assert obj.automata["p"].step("a", "p.g1") == "_sink"


@pytest.mark.parametrize("doc,where", [
    ({"automata": {"r": {"states": ["a"], "initial": "a", "transitions": []}}, "formula": "true"}, "$.automata.r"),
    ({"automata": {"p": {"states": ["a"], "initial": "a",
                         "transitions": [{"from": "a", "letter": "zz", "to": "a"}]}}, "formula": "true"},
     "$.automata.p.transitions[0].letter"),
    ({"formula": "inf(p,"}, "$.formula"),
    ({"formula": "inf(p,nowhere)"}, "$.formula"),
    ({"builtin": "process-deadlock", "args": ["zz"]}, "$.builtin"),
])
def test_objective_errors(doc, where):
    with pytest.raises(FormatError) as e:
        parse_objective(json.dumps(doc), two_swappers())
    assert e.value.path == where


def test_witness_round_trips():
    lss = two_swappers()
    obj = compile_builtin(lss, "global-deadlock")
    lasso = explore_verify(lss, obj).lasso
    assert parse_witness(serialize_witness(lasso), lss) == lasso
    cert = verify_2lss(lss, obj).certificate
    assert replay_certificate(lss, parse_witness(serialize_witness(cert), lss))
    ph = philosophers(3)
    cert = verify_nested(ph, compile_builtin(ph, "global-deadlock")).certificate
    assert replay_nested_certificate(ph, parse_witness(serialize_witness(cert), ph))


def test_witness_errors():
    with pytest.raises(FormatError) as e:
        parse_witness(json.dumps({"kind": "global-lasso", "stem": [["zz", "a"]]}), two_swappers())
    assert e.value.path == "$.stem[0][0]"
    with pytest.raises(FormatError):
        parse_witness(json.dumps({"kind": "other"}), two_swappers())
