"""Command line front end.

Exit codes: 0 verdict No, 10 verdict Yes, 1 bad input, 2 budget exceeded or
engine not applicable, 3 engine and oracle disagree under ``--xcheck``.
"""
from __future__ import annotations

import argparse
import contextlib
import io
import json
import sys
import time
from concurrent.futures import ProcessPoolExecutor

from . import __version__
from .core import BudgetExceeded, Lasso, LssError, PreconditionError, classify
from .dot import export_dot
from .exclusive2 import build_lock_graph, process_deadlock_ptime
from .formats import (FormatError, parse_objective, parse_system, parse_witness, serialize_system,
                      serialize_objective, serialize_witness, lasso_to_dict)
from .generators import gen_3sat_2lss, gen_indset_nested, philosophers, random_system
from .nested import detect_circular_deadlock, verify_nested
from .objectives import compile_builtin
from .oracle import default_budget, explore_verify, find_circular_deadlock
from .patterns2 import (PatternCertificate, all_patterns, build_pattern_ela, entries_from_lassos, g_inf,
                        lock_pair, verify_2lss)

EXIT_NO, EXIT_YES, EXIT_INPUT, EXIT_INAPPLICABLE, EXIT_MISMATCH = 0, 10, 1, 2, 3
ENGINES = ("auto", "patterns2", "nested", "exclusive2", "oracle")


class Inapplicable(LssError):
    def __init__(self, message, classifier=None, evidence=None):
        super().__init__(message)
        self.classifier = classifier
        self.evidence = evidence


def _read(path):
    if path == "-":
        return sys.stdin.read()
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def _write(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)


def _budget(args):
    if getattr(args, "budget", None):
        return args.budget, 5 * args.budget
    return default_budget()


def pick_engine(lss, deadlock_of=None) -> str:
    """Strongest applicable engine: exclusive2, then patterns2, then nested, else oracle."""
    info = classify(lss)
    if not info["sound"]:
        return "oracle"
    if info["two_lock"]:
        if deadlock_of is not None and info["exclusive"]:
            return "exclusive2"
        return "patterns2"
    if info["nested"]:
        return "nested"
    return "oracle"


def run_engine(engine, lss, obj, args, deadlock_of=None):
    """Returns ``(verdict, details, witness)``."""
    if engine == "patterns2":
        r = verify_2lss(lss, obj)
        return r.verdict, dict(r.stats), r.certificate
    if engine == "nested":
        r = verify_nested(lss, obj)
        return r.verdict, dict(r.stats), r.certificate
    if engine == "oracle":
        r = explore_verify(lss, obj, budget=_budget(args))
        return r.verdict, dict(r.stats), r.lasso
    if engine == "exclusive2":
        if deadlock_of is None:
            raise Inapplicable("exclusive2 only decides process deadlock", classifier="objective",
                               evidence="objective is not the built-in process-deadlock")
        v = process_deadlock_ptime(lss, deadlock_of)
        details = {"condition": v.condition, "lock": v.lock, "path": [list(e) for e in v.path],
                   "detail": v.detail if not hasattr(v.detail, "process") else
                   {"process": v.detail.process, "lock": v.detail.lock, "kind": v.detail.kind}}
        return v.verdict, details, None
    raise Inapplicable(f"unknown engine {engine!r}")


def _deadlock_target(text):
    try:
        doc = json.loads(text)
    except ValueError:
        return None
    if isinstance(doc, dict) and doc.get("builtin") == "process-deadlock" and len(doc.get("args", [])) == 1:
        return doc["args"][0]
    return None


def _decide(args, lss, obj, deadlock_of=None):
    engine = args.engine
    if engine == "auto":
        engine = pick_engine(lss, deadlock_of)
    t0 = time.perf_counter()
    verdict, details, witness = run_engine(engine, lss, obj, args, deadlock_of)
    report = {"engine": engine, "verdict": "yes" if verdict else "no",
              "seconds": round(time.perf_counter() - t0, 4), "details": details}
    code = EXIT_YES if verdict else EXIT_NO
    if args.xcheck and engine != "oracle":
        o = explore_verify(lss, obj, budget=_budget(args))
        report["xcheck"] = {"oracle": "yes" if o.verdict else "no", "agree": o.verdict == verdict}
        if o.verdict != verdict:
            code = EXIT_MISMATCH
    if witness is not None:
        report["witness"] = json.loads(serialize_witness(witness))
        if args.witness:
            _write(args.witness, serialize_witness(witness))
    return code, report


# --- subcommands ---------------------------------------------------------------

def cmd_check(args):
    lss = parse_system(_read(args.system))
    info = classify(lss)
    report = {"processes": len(lss.processes), "locks": len(lss.locks), **info}
    if not args.json:
        for k in ("sound", "exclusive", "two_lock", "nested"):
            print(f"{k:10} {info[k]}")
        for k in ("soundness_violation", "exclusive_violation", "nesting_violation"):
            if info[k]:
                print(f"{k}: {info[k]}")
    return EXIT_NO, report


def cmd_verify(args):
    lss = parse_system(_read(args.system))
    text = _read(args.objective)
    obj = parse_objective(text, lss)
    return _decide(args, lss, obj, deadlock_of=_deadlock_target(text))


def cmd_deadlock(args):
    lss = parse_system(_read(args.system))
    if args.circular:
        engine = "nested" if args.engine == "auto" else args.engine
        if engine == "nested":
            r = detect_circular_deadlock(lss, budget=_budget(args)[0])
            report = {"engine": engine, "verdict": "yes" if r else "no",
                      "cycle": [list(c) for c in r.cycle], "order": list(r.order)}
            if r:
                report["witness"] = {**lasso_to_dict(Lasso(r.schedule)), "kind": "circular-deadlock",
                                     "cycle": [list(c) for c in r.cycle]}
        elif engine == "oracle":
            found = find_circular_deadlock(lss, budget=_budget(args))
            report = {"engine": engine, "verdict": "yes" if found else "no"}
            if found:
                run, procs = found
                report["witness"] = {**lasso_to_dict(Lasso(run)), "kind": "circular-deadlock",
                                     "cycle": procs}
        else:
            raise Inapplicable(f"engine {engine} does not detect circular deadlocks", classifier="engine")
        if args.witness and "witness" in report:
            _write(args.witness, json.dumps(report["witness"], indent=2))
        return (EXIT_YES if report["verdict"] == "yes" else EXIT_NO), report
    if args.process is not None:
        if args.process not in lss.names:
            raise FormatError(f"unknown process {args.process!r}", "--process")
        obj = compile_builtin(lss, "process-deadlock", args.process)
        return _decide(args, lss, obj, deadlock_of=args.process)
    obj = compile_builtin(lss, "global-deadlock")
    return _decide(args, lss, obj)


def _parse_cnf(text):
    clauses = []
    for part in text.replace("\n", ";").split(";"):
        part = part.strip()
        if not part or part.startswith(("c", "p")):
            continue
        lits = [int(x) for x in part.replace(",", " ").split() if x != "0"]
        if len(lits) != 3 or 0 in lits:
            raise FormatError(f"clause {part!r} must have three nonzero literals", "--cnf")
        clauses.append(tuple(lits))
    return clauses


def cmd_gen(args):
    extra = {}
    if args.kind == "philosophers":
        left = [int(x) for x in args.left_handed.split(",") if x] if args.left_handed else []
        lss = philosophers(args.n, left_handed=left)
    elif args.kind == "random":
        flags = [f for f in (args.flags or "").split(",") if f]
        lss = random_system(args.seed, processes=args.processes, states=args.states,
                            density=args.density, flags=flags)
    elif args.kind == "3sat":
        cnf = _parse_cnf(_read(args.cnf) if args.cnf else args.clauses or "")
        lss, obj, p = gen_3sat_2lss(cnf, exclusive=args.exclusive)
        extra["deadlocking_process"] = p
        if args.objective_out:
            _write(args.objective_out, serialize_objective(obj))
    else:
        vertices = list(range(args.vertices))
        edges = []
        for e in (args.edges or "").split(","):
            if e.strip():
                u, v = (int(x) for x in e.split("-"))
                edges.append((u, v))
        lss, _ = gen_indset_nested(vertices, edges, args.k)
    _write(args.output, serialize_system(lss) + "\n")
    return EXIT_NO, {"generated": args.kind, "processes": len(lss.processes),
                     "locks": len(lss.locks), **extra}


def cmd_export_dot(args):
    lss = parse_system(_read(args.system))
    what = args.what
    if what == "system":
        obj = lss
    elif what == "lock-graph":
        obj = build_lock_graph(lss, check=False)
    elif what in ("process", "objective", "pattern-ela"):
        if args.process is None:
            raise FormatError(f"--process is required for {what}", "--process")
        proc = lss.process(args.process)
        if what == "process":
            obj = proc
        elif what == "objective":
            if not args.objective:
                raise FormatError("--objective is required", "--objective")
            obj = parse_objective(_read(args.objective), lss).automata[args.process]
        else:
            pats = all_patterns(lock_pair(proc))
            if not 0 <= args.pattern < len(pats):
                raise FormatError(f"pattern index must be in 0..{len(pats) - 1}", "--pattern")
            obj = build_pattern_ela(proc, pats[args.pattern])
    else:
        if not args.witness:
            raise FormatError("--witness with a pattern certificate is required", "--witness")
        cert = parse_witness(_read(args.witness), lss)
        if not isinstance(cert, PatternCertificate):
            raise FormatError("G_Inf needs a two-lock pattern certificate", "--witness")
        obj = g_inf(entries_from_lassos(lss, cert.lassos))
    _write(args.output, export_dot(obj))
    return None, None


def _run_one(argv):
    out = io.StringIO()
    with contextlib.redirect_stdout(out):
        code = main(list(argv) + ["--json"])
    try:
        report = json.loads(out.getvalue())
    except ValueError:
        report = out.getvalue()
    return {"argv": list(argv), "exit_code": code, "report": report}


def cmd_batch(args):
    queries = json.loads(_read(args.queries))
    if not isinstance(queries, list) or not all(isinstance(q, list) for q in queries):
        raise FormatError("a batch file is a list of argument lists", "$")
    if any(q and q[0] in ("batch", "gen", "export-dot") for q in queries):
        raise FormatError("batch runs check, verify and deadlock queries only", "$")
    with ProcessPoolExecutor(max_workers=args.jobs) as pool:
        results = list(pool.map(_run_one, queries))
    return EXIT_NO, {"results": results}


# --- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="lockshare", description="Verify lock-sharing systems.")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, engine=True):
        p.add_argument("--json", action="store_true", help="print a JSON report")
        p.add_argument("--budget", type=int, help="oracle state budget (default: LSS_BUDGET or 2e6)")
        if engine:
            p.add_argument("--engine", choices=ENGINES, default="auto")
            p.add_argument("--xcheck", action="store_true", help="cross-check with the oracle")
            p.add_argument("--witness", help="write the witness to this file")

    p = sub.add_parser("check", help="classify a system")
    p.add_argument("system")
    common(p, engine=False)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("verify", help="does some process-fair run satisfy the objective?")
    p.add_argument("system")
    p.add_argument("objective")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("deadlock", help="deadlock queries")
    p.add_argument("system")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--process", help="can this process be blocked forever?")
    g.add_argument("--global", dest="global_", action="store_true", help="can every process block?")
    g.add_argument("--circular", action="store_true", help="is a circular deadlock reachable?")
    common(p)
    p.set_defaults(func=cmd_deadlock)

    p = sub.add_parser("gen", help="generate a system")
    p.add_argument("kind", choices=("philosophers", "random", "3sat", "indset"))
    p.add_argument("-n", type=int, default=3, help="philosophers: number of philosophers")
    p.add_argument("--left-handed", help="philosophers: comma separated 1-based indices")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--processes", type=int, default=2)
    p.add_argument("--states", type=int, default=4)
    p.add_argument("--density", type=float, default=0.5)
    p.add_argument("--flags", help="random: comma separated subset of exclusive,nested,two-lock")
    p.add_argument("--cnf", help="3sat: DIMACS-like file, one clause per line")
    p.add_argument("--clauses", help='3sat: inline clauses, e.g. "1 2 -3; -1 2 3"')
    p.add_argument("--exclusive", action="store_true", help="3sat: exclusive variant")
    p.add_argument("--objective-out", help="3sat: write the matching objective here")
    p.add_argument("--vertices", type=int, default=3, help="indset: vertices 0..N-1")
    p.add_argument("--edges", help='indset: edges such as "0-1,1-2"')
    p.add_argument("-k", type=int, default=2, help="indset: independent set size")
    p.add_argument("-o", "--output", help="output file (default stdout)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("export-dot", help="Graphviz export")
    p.add_argument("system")
    p.add_argument("--what", default="system",
                   choices=("system", "process", "objective", "lock-graph", "g-inf", "pattern-ela"))
    p.add_argument("--process")
    p.add_argument("--objective")
    p.add_argument("--pattern", type=int, default=0, help="index into the 23 two-lock patterns")
    p.add_argument("--witness", help="g-inf: a pattern certificate")
    p.add_argument("-o", "--output")
    p.set_defaults(func=cmd_export_dot, json=False)

    p = sub.add_parser("batch", help="run independent queries in parallel")
    p.add_argument("queries", help="JSON list of argument lists")
    p.add_argument("--jobs", type=int, default=None)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_batch)
    return ap


def _print_report(report):
    if "verdict" in report:
        print(f"verdict: {report['verdict']}  (engine {report.get('engine')})")
        for k, v in report.get("details", {}).items():
            if v not in (None, [], {}):
                print(f"  {k}: {v}")
        if "xcheck" in report:
            print(f"  oracle: {report['xcheck']['oracle']}  agree: {report['xcheck']['agree']}")
    elif "results" in report:
        for r in report["results"]:
            print(f"{r['exit_code']:3}  {' '.join(r['argv'])}")
    elif "generated" in report and report.get("deadlocking_process"):
        print(f"deadlocking process: {report['deadlocking_process']}", file=sys.stderr)


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        code, report = args.func(args)
    except (PreconditionError, Inapplicable) as e:
        code, report = EXIT_INAPPLICABLE, {"error": str(e), "classifier": e.classifier,
                                           "evidence": e.evidence}
    except BudgetExceeded as e:
        code, report = EXIT_INAPPLICABLE, {"error": f"budget exceeded: {e}"}
    except (LssError, OSError, ValueError, KeyError) as e:
        code, report = EXIT_INPUT, {"error": str(e)}
    if report is None:
        return EXIT_NO
    if args.json:
        print(json.dumps(report, indent=2, default=str))
    elif "error" in report:
        print(f"error: {report['error']}", file=sys.stderr)
        if report.get("classifier"):
            print(f"  failed classifier: {report['classifier']}", file=sys.stderr)
            print(f"  evidence: {report['evidence']}", file=sys.stderr)
    else:
        _print_report(report)
    return code


if __name__ == "__main__":
    sys.exit(main())
