import json
import subprocess
import sys
from importlib.resources import files

import pytest

from lockshare.cli import main
from lockshare.formats import parse_system, parse_witness
from lockshare.patterns2 import PatternCertificate, replay_certificate

DATA = files("lockshare").joinpath("data")


def sysf(name):
    return str(DATA.joinpath("systems", name + ".json"))


def objf(name):
    return str(DATA.joinpath("objectives", name + ".json"))


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_verify_yes_writes_witness(capsys, tmp_path):
    w = tmp_path / "w.json"
    code, out, _ = run(capsys, "verify", sysf("two_swappers"), objf("global_deadlock"),
                       "--engine", "patterns2", "--witness", str(w))
    assert code == 10
    lss = parse_system(open(sysf("two_swappers")).read())
    cert = parse_witness(w.read_text(), lss)
    assert isinstance(cert, PatternCertificate) and replay_certificate(lss, cert)


def test_verify_no(capsys):
    code, out, _ = run(capsys, "verify", sysf("two_swappers"), objf("two_swappers_someone_acts"), "--xcheck", "--json")
    assert code == 0
    rep = json.loads(out)
    assert rep["verdict"] == "no" and rep["xcheck"]["agree"]


def test_deadlock_exclusive2_no(capsys):
    code, out, _ = run(capsys, "deadlock", sysf("philo3_left"), "--process", "p1", "--engine", "exclusive2")
    assert code == 0


def test_deadlock_exclusive2_yes(capsys):
    code, out, _ = run(capsys, "deadlock", sysf("philo3"), "--process", "p1", "--engine", "exclusive2",
                       "--json", "--xcheck")
    assert code == 10 and json.loads(out)["xcheck"]["agree"]


def test_inapplicable_engine(capsys):
    code, _, err = run(capsys, "deadlock", sysf("sat_small"), "--process", "p", "--engine", "exclusive2")
    assert code == 2
    assert "failed classifier: exclusive" in err and "evidence" in err
    code, out, _ = run(capsys, "verify", sysf("philo3"), objf("global_deadlock"), "--engine", "patterns2",
                       "--json")
    assert code == 10
    code, out, _ = run(capsys, "verify", sysf("indset_k3"), objf("global_deadlock"), "--engine", "patterns2",
                       "--json")
    assert code == 2 and json.loads(out)["classifier"] == "2lss"


def test_global_and_circular(capsys):
    assert run(capsys, "deadlock", sysf("philo3"), "--global")[0] == 10
    assert run(capsys, "deadlock", sysf("philo3_left"), "--global")[0] == 0
    assert run(capsys, "deadlock", sysf("indset_p3"), "--circular")[0] == 10


def test_bad_input(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"locks": ["t"], "processes": [{"name": "p", "states": ["0"], "initial": "9", '
                   '"transitions": []}]}')
    code, _, err = run(capsys, "check", str(bad))
    assert code == 1 and "$.processes[0].initial" in err
    assert run(capsys, "check", str(tmp_path / "missing.json"))[0] == 1
    assert run(capsys, "verify", sysf("sat_small"), objf("p1_deadlock"))[0] == 1


def test_check(capsys):
    code, out, _ = run(capsys, "check", sysf("swapper"), "--json")
    rep = json.loads(out)
    assert code == 0 and rep["sound"] and rep["exclusive"] and not rep["nested"]


def test_gen_round_trip(capsys, tmp_path):
    out = tmp_path / "ph.json"
    assert run(capsys, "gen", "philosophers", "-n", "4", "--left-handed", "4", "-o", str(out))[0] == 0
    assert run(capsys, "deadlock", str(out), "--global")[0] == 0
    obj = tmp_path / "o.json"
    sat = tmp_path / "s.json"
    assert run(capsys, "gen", "3sat", "--clauses", "1 1 1; -1 -1 -1", "--exclusive",
               "--objective-out", str(obj), "-o", str(sat))[0] == 0
    assert run(capsys, "verify", str(sat), str(obj), "--xcheck")[0] == 0
    code, text, _ = run(capsys, "gen", "random", "--seed", "4", "--flags", "nested")
    assert code == 0 and parse_system(text)
    code, text, _ = run(capsys, "gen", "indset", "--vertices", "3", "--edges", "0-1,1-2", "-k", "2")
    assert code == 0 and parse_system(text)


@pytest.mark.parametrize("what", ["system", "process", "objective", "lock-graph", "pattern-ela"])
def test_export_dot(capsys, what):
    argv = ["export-dot", sysf("two_swappers"), "--what", what]
    if what in ("process", "pattern-ela"):
        argv += ["--process", "p"]
    if what == "objective":
        argv += ["--objective", objf("two_swappers_someone_acts"), "--process", "p"]
    code, out, _ = run(capsys, *argv)
    assert code == 0 and out.startswith("digraph ")


def test_batch(capsys, tmp_path):
    q = tmp_path / "q.json"
    q.write_text(json.dumps([
        ["deadlock", sysf("philo3"), "--global"],
        ["deadlock", sysf("philo3_left"), "--global"],
        ["check", sysf("swapper")],
    ]))
    code, out, _ = run(capsys, "batch", str(q), "--jobs", "2", "--json")
    assert code == 0
    codes = [r["exit_code"] for r in json.loads(out)["results"]]
    assert codes == [10, 0, 0]


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "lockshare", "deadlock", sysf("philo3"), "--global"],
                       capture_output=True, text=True)
    assert r.returncode == 10, r.stderr
