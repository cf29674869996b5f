"""Command-line front end: ``hankeldet <subcommand> [flags]``.

Exit codes: 0 success, 1 a verification failed, 2 usage or input error.
"""

import argparse
import json
import math
import sys

from . import __version__
from .asympt import kernel, kernel_c_quad, ldp_rate, moderate_rate
from .errors import ConfigError, DomainError
from .harness import KINDS, default_config, paths_csv, run_experiment, sample_paths
from .hankelproc import ProcessParams, cumulant_bound_check, exact_cumulant

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _unit(text):
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not in [0, 1]")
    return v


def _positive_int(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be a positive integer")
    return v


def _grid(text):
    """'s:t,s:t,...' -> ((s, t), ...)."""
    pts = []
    for item in text.split(","):
        try:
            s, t = item.split(":")
            pts.append((_unit(s), _unit(t)))
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise argparse.ArgumentTypeError(f"bad grid point {item!r}: expected s:t in [0, 1]") from exc
    return tuple(pts)


def build_parser():
    ap = argparse.ArgumentParser(prog="hankeldet", description="Random block Hankel determinant toolkit.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    ap.add_argument("--json", action="store_true", help="one JSON record per line on stdout")
    ap.add_argument("--config", metavar="FILE", help="key=value file; command-line flags override it")
    sub = ap.add_subparsers(dest="command", required=True)

    k = sub.add_parser("kernel", help="limiting covariance kernel c(t1, t2)")
    k.add_argument("--t1", type=_unit, required=True)
    k.add_argument("--t2", type=_unit, required=True)
    k.add_argument("--s1", type=_unit, default=1.0)
    k.add_argument("--s2", type=_unit, default=1.0)

    c = sub.add_parser("cumulants", help="exact cumulants of H_n(s, t) with bound checks")
    c.add_argument("--n", type=_positive_int, required=True)
    c.add_argument("--p", type=_positive_int, required=True)
    c.add_argument("--s", type=_unit, default=1.0)
    c.add_argument("--t", type=_unit, default=1.0)
    c.add_argument("--max-order", type=_positive_int, default=4)

    s = sub.add_parser("sample", help="write per-replication path values as CSV")
    s.add_argument("--n", type=_positive_int, required=True)
    s.add_argument("--p", type=_positive_int, required=True)
    s.add_argument("--grid", type=_grid, default=((1.0, 1.0),), help="comma-separated s:t points")
    s.add_argument("--reps", type=_positive_int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=_positive_int, default=1)
    s.add_argument("--out", help="CSV path (stdout if omitted)")

    v = sub.add_parser("verify", help="run an acceptance experiment; exit 0 iff it passes")
    v.add_argument("--which", choices=KINDS, required=True)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--reps", type=_positive_int, help="override the replication count")
    v.add_argument("--workers", type=_positive_int, default=1)
    v.add_argument("--out", help="write the JSONL report here")

    r = sub.add_parser("rate", help="moderate or large deviation rate function")
    r.add_argument("--kind", choices=("moderate", "ldp"), required=True)
    r.add_argument("--s", type=_unit, required=True)
    r.add_argument("--t", type=_unit, required=True)
    r.add_argument("--x", type=float, required=True)
    return ap


def read_config_file(path):
    """Parse a key=value file; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (x.strip() for x in line.split("=", 1))
            out[key.replace("-", "_")] = val
    return out


def _subparser(ap, name):
    for action in ap._subparsers._group_actions:
        if name in action.choices:
            return action.choices[name]
    raise KeyError(name)


def parse(argv):
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    ap = build_parser()
    if known.config:
        command = next((a for a in argv if a in COMMANDS), None)
        if command is not None:
            _apply_config(_subparser(ap, command), command, known.config)
    return ap.parse_args(argv)


def _apply_config(sp, command, path):
    """Turn the file's values into defaults, converted by each flag's type."""
    values = read_config_file(path)
    known = {a.dest: a for a in sp._actions if a.dest != "help"}
    defaults = {}
    for key, text in values.items():
        if key not in known:
            raise UsageError(f"unknown key {key!r} in {path} for '{command}'")
        act = known[key]
        try:
            defaults[key] = act.type(text) if act.type else text
        except (ValueError, argparse.ArgumentTypeError) as exc:
            raise UsageError(f"bad value for {key!r} in {path}: {exc}") from exc
        if act.choices is not None and defaults[key] not in act.choices:
            raise UsageError(f"{key}={text} not one of {list(act.choices)}")
        act.required = False
    sp.set_defaults(**defaults)


def _emit(args, record, text, file=None):
    if args.json:
        print(json.dumps(record, sort_keys=True), file=file)
    else:
        print(text, file=file)


def _echo(args):
    """Print the effective configuration; to stderr when stdout carries CSV."""
    cfg = {k: v for k, v in vars(args).items() if k != "json"}
    to_err = args.command == "sample" and not args.out
    _emit(args, {"type": "config", **cfg}, "# config: " + json.dumps(cfg, sort_keys=True), sys.stderr if to_err else None)


def cmd_kernel(args):
    kv = kernel(args.s1, args.t1, args.s2, args.t2)
    quad = kernel_c_quad(args.t1, args.t2)
    _emit(
        args,
        {"type": "kernel", "t1": args.t1, "t2": args.t2, "s1": args.s1, "s2": args.s2, "c": kv.c, "c_quad": quad, "limit_cov": kv.limit_cov},
        f"c(t1, t2)        {kv.c:.10g}\nquadrature       {quad:.10g}\nlimit covariance {kv.limit_cov:.10g}",
    )
    return EXIT_OK


def cmd_cumulants(args):
    params = ProcessParams(args.n, args.p)
    if not args.json:
        print(f"{'m':>3} {'kappa_m':>24}  bounds")
    for m in range(1, args.max_order + 1):
        val = exact_cumulant(m, params, args.s, args.t)
        rep = cumulant_bound_check(m, params, args.s, args.t)
        failed = [c.name for c in rep.checks if not c.ok]
        status = "pass" if not failed else "FAIL: " + "; ".join(failed)
        _emit(args, {"type": "cumulant", "m": m, "value": val, "bounds_pass": not failed, "failed": failed}, f"{m:>3} {val:>24.17g}  {status}")
    return EXIT_OK


def cmd_sample(args):
    params = ProcessParams(args.n, args.p, args.grid)
    values, redrawn = sample_paths(params, args.reps, args.seed, args.workers)
    text = paths_csv(values, params.grid)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
        _emit(args, {"type": "sample", "out": args.out, "rows": values.size, "redrawn": redrawn}, f"wrote {values.size} rows to {args.out} ({redrawn} redraws)")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_verify(args):
    over = {"workers": args.workers}
    if args.reps is not None:
        over["reps"] = args.reps
    if args.out:
        over["out"] = args.out
    try:
        config = default_config(args.which, seed=args.seed, **over)
    except ConfigError as exc:
        raise UsageError(str(exc)) from exc
    rep = run_experiment(config)
    if args.json:
        sys.stdout.write(rep.to_jsonl())
    else:
        for line in rep.summary_lines():
            print(line)
        for key, val in rep.diagnostics.items():
            print(f"# {key}: {val}")
        print("PASS" if rep.passed else "FAIL")
    return EXIT_OK if rep.passed else EXIT_FAIL


def cmd_rate(args):
    if args.kind == "moderate":
        val = moderate_rate(args.x, args.s, args.t)
        _emit(args, {"type": "rate", "kind": "moderate", "x": args.x, "value": val}, f"rate {val:.10g}")
        return EXIT_OK
    res = ldp_rate(args.x, args.s, args.t)
    lam = res.argmax_lambda
    lam_text = "none (supremum not attained)" if lam is None else f"{lam:.10g}"
    value = res.value if math.isfinite(res.value) else "inf"
    _emit(args, {"type": "rate", "kind": "ldp", "x": args.x, "value": value, "argmax_lambda": lam}, f"rate {res.value:.10g}\nlambda* {lam_text}")
    return EXIT_OK


COMMANDS = {"kernel": cmd_kernel, "cumulants": cmd_cumulants, "sample": cmd_sample, "verify": cmd_verify, "rate": cmd_rate}


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    try:
        args = parse(argv)
    except (UsageError, OSError) as exc:
        print(f"hankeldet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as exc:  # argparse: --help -> 0, bad flags -> 2
        return exc.code
    _echo(args)
    try:
        return COMMANDS[args.command](args)
    except (DomainError, ConfigError, UsageError, OSError) as exc:
        print(f"hankeldet: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
