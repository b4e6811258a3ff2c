"""Command-line front end.

Exit codes: 0 on success or PASS, 1 when a rename is refused or a
property check fails, 2 on parse and usage errors.
"""
from __future__ import annotations

import argparse
import re
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__
from .core import intern
from .events import canonical, format_behavior
from .harness import (
    CHECKS, HarnessConfig, HarnessError, diff_behaviors, format_diff, parse_extcall,
    run_proptest,
)
from .rename import KEYWORD, RenameError, check_sufficient_precondition, rename_globvar_hard
from .semantics import MODES, RunError, run
from .syntax import ParseError, SourceFile, is_c_keyword, parse, pretty_print

EXIT_OK, EXIT_FAIL, EXIT_PARSE = 0, 1, 2

_NAME_RE = re.compile(r"[A-Za-z_]\w*\Z")


class _Refused(Exception):
    pass


class _BadInput(Exception):
    pass


def _load(path: str):
    try:
        return parse(SourceFile.read(path))
    except ParseError as err:
        raise _BadInput(f"{path}:{err}") from None
    except OSError as err:
        raise _BadInput(f"cannot read {path}: {err.strerror}") from None


def _names(old: str, new: str):
    for n in (old, new):
        if not _NAME_RE.match(n):
            raise _Refused(f"not an identifier: {n!r}")
    if is_c_keyword(new):
        raise _Refused(KEYWORD)
    if old == new:
        raise _Refused("old and new names must differ")
    return intern(old), intern(new)


def _config(args) -> HarnessConfig:
    cfg = HarnessConfig.load(args.config) if getattr(args, "config", None) else HarnessConfig()
    changes = {}
    if getattr(args, "mode", None):
        changes["mode"] = args.mode
    if getattr(args, "budget", None) is not None:
        changes["step_budget"] = args.budget
    if getattr(args, "seed", None) is not None:
        changes["seed"] = args.seed
    if getattr(args, "extcall", None):
        changes["extcalls"] = cfg.extcalls + tuple(parse_extcall(s) for s in args.extcall)
    return replace(cfg, **changes)


def cmd_rename(args) -> int:
    p = _load(args.file)
    x, y = _names(args.old, args.new)
    renamed = rename_globvar_hard(x, y, p)
    text = pretty_print(renamed)
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_check(args) -> int:
    p = _load(args.file)
    x, y = _names(args.old, args.new)
    report = check_sufficient_precondition(x, y, p)
    for name, ok in report.clauses:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    if report.passed:
        print("verdict: rename will succeed")
        return EXIT_OK
    print("verdict: precondition not met (rename may be refused)")
    return EXIT_FAIL


def cmd_run(args) -> int:
    p = _load(args.file)
    cfg = _config(args)
    behaviors = run(p, cfg.model(), cfg.mode, cfg.step_budget)
    for b in canonical(behaviors):
        sys.stdout.write(format_behavior(b))
    return EXIT_OK


def cmd_diff(args) -> int:
    p = _load(args.file)
    x, y = _names(args.old, args.new)
    cfg = _config(args)
    if args.unsafe:
        print("warning: --unsafe skips the external-call compliance check", file=sys.stderr)
    result = diff_behaviors(p, x, y, cfg, unsafe=args.unsafe)
    sys.stdout.write(format_diff(result))
    return EXIT_OK if result.ok else EXIT_FAIL


def cmd_proptest(args) -> int:
    cfg = _config(args)
    checks = tuple(args.checks.split(",")) if args.checks else CHECKS
    report = run_proptest(args.iters, cfg, checks, commut_budget=args.commut_budget)
    sys.stdout.write(report.format(timing=args.timing))
    return EXIT_OK if report.ok else EXIT_FAIL


def _positive(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return value


def _harness_options(sp, seed=False) -> None:
    sp.add_argument("--config", help="key = value harness configuration file")
    sp.add_argument("--mode", choices=MODES)
    sp.add_argument("--budget", type=_positive, help="step budget per run")
    sp.add_argument("--extcall", action="append", metavar="SPEC",
                    help="NAME:pure or NAME:reads_global(G); repeatable")
    if seed:
        sp.add_argument("--seed", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="globrename", description="Rename global variables in a small C subset.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("rename", help="rename a global variable")
    sp.add_argument("file")
    sp.add_argument("old")
    sp.add_argument("new")
    sp.add_argument("-o", "--output", help="write the renamed program here instead of stdout")
    sp.set_defaults(func=cmd_rename)

    sp = sub.add_parser("check", help="evaluate the sufficient precondition clause by clause")
    sp.add_argument("file")
    sp.add_argument("old")
    sp.add_argument("new")
    sp.set_defaults(func=cmd_check)

    sp = sub.add_parser("run", help="list the behaviors of a program")
    sp.add_argument("file")
    _harness_options(sp)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("diff", help="compare behaviors before and after a rename")
    sp.add_argument("file")
    sp.add_argument("old")
    sp.add_argument("new")
    sp.add_argument("--unsafe", action="store_true",
                    help="rename even if an external call touches old or new")
    _harness_options(sp)
    sp.set_defaults(func=cmd_diff)

    sp = sub.add_parser("proptest", help="run the property suites on generated programs")
    sp.add_argument("--iters", type=_positive, default=500)
    sp.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECKS)}")
    sp.add_argument("--commut-budget", type=_positive, default=2000)
    sp.add_argument("--timing", action="store_true", help="append elapsed time to the report")
    _harness_options(sp, seed=True)
    sp.set_defaults(func=cmd_proptest)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except _BadInput as err:
        print(str(err), file=sys.stderr)
        return EXIT_PARSE
    except (_Refused, RenameError) as err:
        print(str(err), file=sys.stderr)
        return EXIT_FAIL
    except RunError as err:
        print(str(err), file=sys.stderr)
        return EXIT_FAIL
    except HarnessError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
