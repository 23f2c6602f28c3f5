"""Command-line entry point: ``irka reduce | gen | diagnose | h2err``."""

import argparse
import json
import sys as _sys
import time

import numpy as np

from .diagnostics import certify
from .driver import IrkaConfig, run_irka
from .errors import IrkaError, ParseError, SizeMismatch
from .interpolation import build_primitive_bases, project_reduced
from .io import (
    build_report,
    dump_report,
    load_system,
    read_shift_file,
    resolve_input,
    write_history_csv,
    write_system,
)
from .lti import LtiSystem, SpectrumSpec, h2_error, h2_norm, synth_random_stable
from .shifts import ShiftSet

EXIT_OK = 0
EXIT_MAXITER = 2
EXIT_CYCLE = 3
EXIT_INPUT = 4
EXIT_INTERNAL = 5

_STATUS_EXIT = {"Converged": EXIT_OK, "MaxIter": EXIT_MAXITER, "Cycle": EXIT_CYCLE, "Failed": EXIT_INTERNAL}

# tolerance for comparing recomputed certificate numbers with the stored ones
RECHECK_RTOL = 1e-8


class InputError(Exception):
    """Bad command-line input; maps to exit code 4."""


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


def _alpha(text):
    if text == "backoff":
        return text
    try:
        a = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError("alpha must be a number in [0, 1] or 'backoff'") from None
    if not 0.0 <= a <= 1.0:
        raise argparse.ArgumentTypeError("alpha must lie in [0, 1]")
    return a


def build_parser():
    p = _Parser(prog="irka", description="H2-optimal SISO model reduction with IRKA.")
    p.add_argument("--json-errors", action="store_true", help="report errors as JSON on stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    red = sub.add_parser("reduce", help="run IRKA on a Matrix Market triple")
    red.add_argument("--a", required=True)
    red.add_argument("--b", required=True)
    red.add_argument("--c", required=True)
    red.add_argument("--r", required=True, type=int)
    red.add_argument("--tol", type=float, default=1e-6)
    red.add_argument("--max-iter", type=int, default=100)
    red.add_argument("--mode", choices=("vanilla", "blended"), default="vanilla")
    red.add_argument("--alpha", type=_alpha, default=1.0)
    red.add_argument(
        "--stop",
        choices=("matching", "hausdorff", "hausdorff_then_matching", "certificate"),
        default="matching",
    )
    red.add_argument("--init", default="logspace", help="logspace, random, or a JSON shift file")
    red.add_argument("--seed", type=int, default=0)
    red.add_argument("--cycle-max-period", type=int, default=4)
    red.add_argument("--verify", action="store_true", help="also run the blended-update identity check")
    red.add_argument("--out", required=True)
    red.add_argument("--csv")

    gen = sub.add_parser("gen", help="write a seeded random stable system")
    gen.add_argument("--n", required=True, type=int)
    gen.add_argument("--seed", required=True, type=int)
    gen.add_argument("--preset", choices=SpectrumSpec.PRESETS, default="cdlike")
    gen.add_argument("--out-prefix", required=True)

    dia = sub.add_parser("diagnose", help="recompute and verify the certificate of a report")
    dia.add_argument("--report", required=True)

    h2 = sub.add_parser("h2err", help="H2 error of the realified model in a report")
    h2.add_argument("--a", required=True)
    h2.add_argument("--b", required=True)
    h2.add_argument("--c", required=True)
    h2.add_argument("--report", required=True)
    return p


def _cmd_reduce(args):
    sys = load_system(args.a, args.b, args.c)
    stop = "hausdorff_then_matching" if args.stop == "hausdorff" else args.stop
    init_mode, init = args.init, None
    if args.init not in ("logspace", "random"):
        init = read_shift_file(args.init, r=args.r)
        init_mode = "logspace"
        if not init.is_working():
            raise InputError("initial shifts must lie in the open right half-plane and be distinct")
    config = IrkaConfig(
        r=args.r,
        tol=args.tol,
        max_iter=args.max_iter,
        update_mode=args.mode,
        alpha=args.alpha,
        stop_rule=stop,
        cycle_max_period=args.cycle_max_period,
        seed=args.seed,
        init=init_mode,
        verify=args.verify,
    )
    try:
        config.validate(sys.n)
    except ValueError as exc:
        raise InputError(str(exc)) from None

    t0 = time.perf_counter()
    result = run_irka(sys, config, init=init)
    elapsed = time.perf_counter() - t0

    inputs = {"a": args.a, "b": args.b, "c": args.c}
    if init is not None:
        inputs["init"] = args.init
    report = build_report(result, config, inputs, sys)
    dump_report(report, args.out)
    with open(args.out + ".timings.json", "w", encoding="utf-8") as fh:
        json.dump({"run_irka_seconds": elapsed, "iterations": len(result.history)}, fh)
    if args.csv:
        write_history_csv(result.history, args.csv)
    print(f"status {result.status}  iterations {len(result.history)}  report {args.out}")
    return _STATUS_EXIT[result.status.kind]


def _cmd_gen(args):
    if args.n < 1:
        raise InputError("--n must be positive")
    sys = synth_random_stable(args.n, args.seed, args.preset)
    paths = write_system(sys, args.out_prefix)
    print(" ".join(paths))
    return EXIT_OK


def _load_report(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            return json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno) from None


def _num(x):
    return float(x) if isinstance(x, str) else x


def _close(a, b):
    a, b = _num(a), _num(b)
    if isinstance(a, bool) or isinstance(b, bool):
        return a == b
    if not (np.isfinite(a) and np.isfinite(b)):
        return (np.isnan(a) and np.isnan(b)) or a == b
    return abs(a - b) <= RECHECK_RTOL * max(abs(a), abs(b), 1e-300)


def _cmd_diagnose(args):
    rep = _load_report(args.report)
    try:
        paths = [resolve_input(rep["inputs"][k], args.report) for k in ("a", "b", "c")]
        shifts_data = rep["final_shifts"]
    except (KeyError, TypeError):
        raise ParseError("report lacks inputs or final shifts") from None
    sys = load_system(*paths)
    shifts = ShiftSet.from_json(shifts_data)
    bases = build_primitive_bases(sys, shifts)
    model = project_reduced(sys, bases)
    cert = certify(sys, bases, model)

    ok = cert.all_hold
    for name, held in cert.checks.items():
        print(f"{'ok  ' if held else 'FAIL'} {name}")
    stored = rep.get("certificate")
    if stored is not None:
        fresh = cert.to_dict()
        for key in ("eps", "eps_bullet", "db_bound", "dA_bound", "kappa_C", "kappa_V", "cos_angle", "q_norm", "valid"):
            same = _close(stored[key], fresh[key])
            ok &= same
            if not same:
                print(f"FAIL stored {key}={stored[key]} recomputed {fresh[key]}")
    print(f"eps {cert.eps:.3e}  eps_bullet {cert.eps_bullet:.3e}  valid {cert.valid}")
    print("certificate verified" if ok else "certificate NOT verified")
    return EXIT_OK if ok else EXIT_INTERNAL


def _cmd_h2err(args):
    sys = load_system(args.a, args.b, args.c)
    rep = _load_report(args.report)
    R = rep.get("realified")
    if R is None:
        raise ParseError("report has no realified model")
    red = LtiSystem(np.array(R["A"], dtype=float), R["b"], R["c"])
    err = h2_error(sys, red)
    ref = h2_norm(sys)
    print(f"h2_error_abs {err!r}")
    print(f"h2_error_rel {err / ref!r}")
    return EXIT_OK


_COMMANDS = {"reduce": _cmd_reduce, "gen": _cmd_gen, "diagnose": _cmd_diagnose, "h2err": _cmd_h2err}


def _report_error(exc, code, as_json):
    if as_json:
        payload = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
        print(json.dumps(payload), file=_sys.stderr)
    else:
        print(f"irka: error: {exc}", file=_sys.stderr)


def main(argv=None):
    argv = list(_sys.argv[1:] if argv is None else argv)
    # accepted anywhere on the command line, not only before the subcommand
    as_json = "--json-errors" in argv
    argv = [a for a in argv if a != "--json-errors"]
    try:
        args = build_parser().parse_args(argv)
        return _COMMANDS[args.command](args)
    except (InputError, ParseError, SizeMismatch, OSError, ValueError) as exc:
        _report_error(exc, EXIT_INPUT, as_json)
        return EXIT_INPUT
    except (IrkaError, ArithmeticError, np.linalg.LinAlgError) as exc:
        _report_error(exc, EXIT_INTERNAL, as_json)
        return EXIT_INTERNAL


if __name__ == "__main__":
    _sys.exit(main())
