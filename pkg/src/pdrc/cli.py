"""Command-line front end.

Exit codes: 0 controlled / certificate valid / engines agree, 1 uncontrollable,
2 invalid input, 3 budget exhausted, 4 internal invariant failure,
5 certificate invalid, 6 oracle mismatch.
"""

import argparse
import os
import re
import sys
import time

from . import benchmarks
from .core import InternalError, InvariantViolation, Limits, PDRC
from .encoding import CapacityError
from .expr import ExprSyntaxError
from .io import (ModelFormatError, certificate_to_json, counterexample_to_json, dump_model,
                 load_certificate, load_model)
from .model import InvalidModel, check
from .oracle import StateLimitExceeded, compare, rw_synthesize
from .randgen import random_systems
from .supervisor import Certificate, ExtractionError, extract_guards, verify

EXIT_CONTROLLED = 0
EXIT_UNCONTROLLABLE = 1
EXIT_INVALID = 2
EXIT_BUDGET = 3
EXIT_INTERNAL = 4
EXIT_CERT_INVALID = 5
EXIT_MISMATCH = 6

_BUILTIN = re.compile(r"^(fig1|edp|cmt)(?:[:(]\s*(\d+)\s*,\s*(\d+)\s*\)?)?$", re.I)


class UsageError(Exception):
    pass


def resolve_model(spec):
    """A model file path, or a builtin: ``fig1``, ``edp:n,k``, ``cmt(n,k)``."""
    if os.path.exists(spec):
        return check(load_model(spec))
    m = _BUILTIN.match(spec.strip())
    if not m:
        raise UsageError(f"no such model file or builtin: {spec}")
    fam = m.group(1).lower()
    params = () if m.group(2) is None else (int(m.group(2)), int(m.group(3)))
    if fam != "fig1" and not params:
        raise UsageError(f"{fam} needs parameters, e.g. {fam}:2,1")
    return check(benchmarks.generate(fam, params))


def _parse_params(text):
    try:
        n, k = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"--params expects n,k, got {text!r}") from None
    return n, k


def _model_from_args(args):
    if getattr(args, "family", None):
        params = _parse_params(args.params) if args.params else ()
        return check(benchmarks.generate(args.family, params))
    if not args.model:
        raise UsageError("--model is required")
    return resolve_model(args.model)


def _limits(args):
    for name in ("max_frames", "max_conflicts", "max_seconds"):
        v = getattr(args, name, None)
        if v is not None and v < 0:
            raise UsageError(f"--{name.replace('_', '-')} must not be negative")
    return Limits(args.max_frames, args.max_conflicts, args.max_seconds)


def _write(path, text):
    with open(path, "w") as f:
        f.write(text)


def _run(sys_, args, run_log=None):
    engine = PDRC(
        sys_, backend=args.backend, inductive_generalization=not args.no_ind_gen,
        debug=args.debug_invariants, limits=_limits(args), run_log=run_log,
    )
    return engine, engine.synthesize()


def _stats_lines(stats):
    d = stats.as_dict()
    d.pop("seconds")
    return [f"{k}: {v}" for k, v in d.items()]


def _oracle_check(sys_, result):
    """Report lines and agreement; instances too large to enumerate are skipped."""
    try:
        cmp_ = compare(sys_, result, rw_synthesize(sys_))
    except StateLimitExceeded as e:
        return [f"oracle skipped: {e}"], True
    return ["oracle " + l for l in cmp_.lines()], cmp_.agree


def cmd_synth(args):
    sys_ = _model_from_args(args)
    paths = [p for p in (args.out, args.certificate, args.report, args.run_log, args.cex, args.dimacs) if p]
    if len(set(map(os.path.abspath, paths))) != len(paths):
        raise UsageError("output paths must be distinct")
    log = open(args.run_log, "w") if args.run_log else None
    try:
        engine, result = _run(sys_, args, log)
    finally:
        if log:
            log.close()
    if args.dimacs:
        _write(args.dimacs, engine.h.dimacs())
    report = [f"model: {sys_.name}", f"verdict: {result.verdict}"] + _stats_lines(result.stats)
    code = EXIT_CONTROLLED
    if result.verdict == "controlled":
        controlled, strengthenings = extract_guards(result.supervisor, result.sym.bitmap, sys_)
        report.append(f"strengthenings: {len(strengthenings)}")
        report += ["  " + g.line() for g in strengthenings]
        report.append("invariant:")
        bm = result.sym.bitmap
        report += ["  " + " || ".join(bm.atom(l) for l in c) for c in result.invariant_clauses()]
        if args.out:
            _write(args.out, dump_model(controlled))
        if args.certificate:
            cert = Certificate.from_bits(bm, result.invariant_clauses(), sys_.name)
            _write(args.certificate, certificate_to_json(cert))
    elif result.verdict == "uncontrollable":
        code = EXIT_UNCONTROLLABLE
        p = result.path
        report.append(f"counterexample length: {len(p)}")
        for i, q in enumerate(p.states):
            step = f"  {sys_.format_state(q)}"
            if i < len(p.events):
                step += f"  --{p.events[i]}-->"
            report.append(step)
        if args.cex:
            _write(args.cex, counterexample_to_json(sys_, p))
    else:
        code = EXIT_BUDGET
        report.append(f"reason: {result.reason}")
        report.append(f"partial supervisor cubes (uncertified): {len(result.supervisor)}")
    if args.oracle_check and code != EXIT_BUDGET:
        lines, agree = _oracle_check(sys_, result)
        report += lines
        if not agree:
            code = EXIT_MISMATCH
    text = "\n".join(report) + "\n"
    if args.report:
        _write(args.report, text)
    print(text, end="")
    print(f"time: {result.stats.seconds:.3f}s")
    return code


def cmd_verify(args):
    if not args.model or not args.certificate:
        raise UsageError("verify needs --model and --certificate")
    sys_ = resolve_model(args.model)
    cert = load_certificate(args.certificate)
    v = verify(sys_, cert, backend=args.backend)
    text = "\n".join(v.lines() + ["certificate valid" if v.ok else "certificate INVALID"]) + "\n"
    if args.report:
        _write(args.report, text)
    print(text, end="")
    return EXIT_CONTROLLED if v.ok else EXIT_CERT_INVALID


def cmd_oracle(args):
    if args.random:
        seed = 0 if args.seed is None else args.seed
        models = random_systems(seed, args.random)
        names = [f"random[{seed}:{i}]" for i in range(len(models))]
    else:
        models = [_model_from_args(args)]
        names = [models[0].name]
    lines, bad, budget = [], 0, 0
    for name, sys_ in zip(names, models):
        _, result = _run(sys_, args)
        if result.verdict == "inconclusive":
            budget += 1
            lines.append(f"{name}: inconclusive ({result.reason})")
            continue
        cmp_ = compare(sys_, result, rw_synthesize(sys_))
        if not cmp_.agree:
            bad += 1
        if not args.random or not cmp_.agree:
            lines += [f"{name}: {l}" for l in cmp_.lines()]
    lines.append(f"instances: {len(models)} mismatches: {bad} inconclusive: {budget}")
    text = "\n".join(lines) + "\n"
    if args.report:
        _write(args.report, text)
    print(text, end="")
    if bad:
        return EXIT_MISMATCH
    return EXIT_BUDGET if budget else EXIT_CONTROLLED


def cmd_bench(args):
    sys_ = _model_from_args(args)
    t0 = time.monotonic()
    _, result = _run(sys_, args)
    wall = time.monotonic() - t0
    print(f"{'model':<14}{'time (s)':>10}  verdict")
    print(f"{sys_.name:<14}{wall:>10.3f}  {result.verdict}")
    code = {"controlled": EXIT_CONTROLLED, "uncontrollable": EXIT_UNCONTROLLABLE}.get(result.verdict, EXIT_BUDGET)
    if args.oracle_check and code != EXIT_BUDGET:
        lines, agree = _oracle_check(sys_, result)
        print("\n".join(lines))
        if not agree:
            code = EXIT_MISMATCH
    return code


def build_parser():
    p = argparse.ArgumentParser(prog="pdrc", description="Safe supervisor synthesis by property-directed reachability.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp):
        sp.add_argument("--model", help="model file, or builtin fig1 / edp:n,k / cmt:n,k")
        sp.add_argument("--family", choices=sorted(benchmarks.FAMILIES), help="benchmark family instead of --model")
        sp.add_argument("--params", help="family parameters n,k")
        sp.add_argument("--report", help="write the report to this file")
        sp.add_argument("--max-frames", type=int)
        sp.add_argument("--max-conflicts", type=int)
        sp.add_argument("--max-seconds", type=float)
        sp.add_argument("--no-ind-gen", action="store_true", help="disable inductive generalisation of blocked clauses")
        sp.add_argument("--debug-invariants", action="store_true", help="audit trace invariants after every phase")
        sp.add_argument("--backend", choices=("auto", "builtin", "pysat"), default=None)

    s = sub.add_parser("synth", help="synthesise a supervisor")
    common(s)
    s.add_argument("--out", help="controlled model output")
    s.add_argument("--certificate", help="certificate output (JSON)")
    s.add_argument("--run-log", help="one JSON record per solver query")
    s.add_argument("--cex", help="counterexample output (JSON)")
    s.add_argument("--dimacs", help="dump the final clause database")
    s.add_argument("--oracle-check", action="store_true")
    s.set_defaults(func=cmd_synth)

    v = sub.add_parser("verify", help="check a certificate against a controlled model")
    v.add_argument("--model", required=True)
    v.add_argument("--certificate", required=True)
    v.add_argument("--report")
    v.add_argument("--backend", choices=("auto", "builtin", "pysat"), default=None)
    v.set_defaults(func=cmd_verify)

    o = sub.add_parser("oracle", help="compare against the explicit-state controller")
    common(o)
    o.add_argument("--random", type=int, metavar="N", help="sweep N random systems instead of one model")
    o.add_argument("--seed", type=int)
    o.set_defaults(func=cmd_oracle)

    b = sub.add_parser("bench", help="time one benchmark instance")
    common(b)
    b.add_argument("--oracle-check", action="store_true")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InvalidModel as e:
        for d in e.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_INVALID
    except (UsageError, ModelFormatError, ExprSyntaxError, CapacityError, StateLimitExceeded, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID
    except (InvariantViolation, InternalError, ExtractionError) as e:
        print(f"internal error: {e}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
