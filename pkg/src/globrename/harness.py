"""Differential and property harness around the renaming engine.

Configuration files are plain ``key = value`` lines; ``#`` starts a
comment and blank lines are ignored.  Recognized keys::

    mode    = deterministic | exhaustive
    budget  = <steps per run, >= 1>
    seed    = <integer>
    extcall = <name>:pure | <name>:reads_global(<global>)   (repeatable)
"""
from __future__ import annotations

import re
import time
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .core import Ident, Program
from .events import Behavior, canonical, format_behavior
from .gen import GenCase, Generator
from .rename import RenameError, check_sufficient_precondition, rename_globvar_hard
from .semantics import (
    DETERMINISTIC, EXHAUSTIVE, MODES, ExtCallModel, check_step_commut, run,
)
from .syntax import parse, pretty_print
from .traces import rename_behavior


class HarnessError(ValueError):
    pass


_EXTCALL_RE = re.compile(r"\s*([A-Za-z_]\w*)\s*:\s*(pure|reads_global\(\s*([A-Za-z_]\w*)\s*\))\s*\Z")


def parse_extcall(spec: str) -> tuple[str, str, Optional[str]]:
    m = _EXTCALL_RE.match(spec)
    if not m:
        raise HarnessError(f"bad extcall spec {spec!r} (want NAME:pure or NAME:reads_global(G))")
    name, behavior, glob = m.groups()
    return name, "pure" if behavior == "pure" else "reads_global", glob


@dataclass(frozen=True)
class HarnessConfig:
    mode: str = DETERMINISTIC
    step_budget: int = 10_000
    extcalls: tuple = ()
    seed: int = 42

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise HarnessError(f"unknown mode {self.mode!r}")
        if self.step_budget < 1:
            raise HarnessError("step budget must be at least 1")

    def model(self) -> ExtCallModel:
        return ExtCallModel.from_specs(self.extcalls)

    @classmethod
    def parse(cls, text: str) -> "HarnessConfig":
        values: dict = {}
        extcalls = []
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or not value:
                raise HarnessError(f"line {lineno}: expected key = value")
            if key == "extcall":
                extcalls.append(parse_extcall(value))
            elif key == "mode":
                values["mode"] = value
            elif key in ("budget", "seed"):
                try:
                    values["step_budget" if key == "budget" else key] = int(value)
                except ValueError:
                    raise HarnessError(f"line {lineno}: {key} must be an integer") from None
            else:
                raise HarnessError(f"line {lineno}: unknown key {key!r}")
        return cls(extcalls=tuple(extcalls), **values)

    @classmethod
    def load(cls, path) -> "HarnessConfig":
        return cls.parse(Path(path).read_text(encoding="utf-8"))


# -- differential check ---------------------------------------------------------

@dataclass
class DiffResult:
    original: frozenset
    renamed: frozenset
    missing: Optional[Behavior] = None   # original behavior with no renamed image
    extra: Optional[Behavior] = None     # renamed behavior with no original preimage

    @property
    def ok(self) -> bool:
        return self.missing is None and self.extra is None


def _image_or_none(x, y, b):
    try:
        return rename_behavior(x, y, b)
    except RenameError:
        return None


def compare_behaviors(x: Ident, y: Ident, original, renamed) -> DiffResult:
    result = DiffResult(frozenset(original), frozenset(renamed))
    for b in canonical(original):
        if _image_or_none(x, y, b) not in result.renamed:
            result.missing = b
            break
    for b in canonical(renamed):
        if _image_or_none(y, x, b) not in result.original:
            result.extra = b
            break
    return result


def diff_behaviors(p: Program, x: Ident, y: Ident, config: HarnessConfig = HarnessConfig(),
                   unsafe: bool = False) -> DiffResult:
    """Run ``p`` and its renaming and compare behaviors up to renaming.

    Refuses (HarnessError) when the external-call model touches ``x`` or
    ``y``, unless ``unsafe`` is set.
    """
    model = config.model()
    problems = model.compliance_violations(x, y)
    if problems and not unsafe:
        raise HarnessError("; ".join(problems))
    renamed = rename_globvar_hard(x, y, p)
    b1 = run(p, model, config.mode, config.step_budget)
    b2 = run(renamed, model, config.mode, config.step_budget)
    return compare_behaviors(x, y, b1, b2)


def format_diff(result: DiffResult) -> str:
    if result.ok:
        return f"PASS ({len(result.original)} behavior(s) equal up to renaming)\n"
    lines = ["DIVERGENCE"]
    if result.missing is not None:
        lines.append("original behavior without renamed counterpart:")
        lines.append(format_behavior(result.missing).rstrip("\n"))
    if result.extra is not None:
        lines.append("renamed behavior without original counterpart:")
        lines.append(format_behavior(result.extra).rstrip("\n"))
    return "\n".join(lines) + "\n"


# -- property runner -------------------------------------------------------------

CHECKS = ("roundtrip", "precondition", "invertibility", "simulation", "step_commut")


@dataclass
class Counterexample:
    check: str
    index: int
    x: Ident
    y: Ident
    source: str
    detail: str


@dataclass
class ProptestReport:
    iterations: int = 0
    seed: int = 0
    renamed: int = 0
    refusals: Counter = field(default_factory=Counter)
    precondition_pass: int = 0
    precondition_fail: int = 0
    violated_clauses: Counter = field(default_factory=Counter)
    cases: Counter = field(default_factory=Counter)
    checked: Counter = field(default_factory=Counter)
    failures: Counter = field(default_factory=Counter)
    first: dict = field(default_factory=dict)
    outcomes: list = field(default_factory=list)
    elapsed: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.failures

    def fail(self, check: str, index: int, case: GenCase, detail: str) -> None:
        self.failures[check] += 1
        if check not in self.first:
            self.first[check] = Counterexample(
                check, index, case.x, case.y, pretty_print(case.program), detail)

    def format(self, timing: bool = False) -> str:
        lines = [
            f"iterations: {self.iterations}",
            f"seed: {self.seed}",
            f"renamed: {self.renamed}",
            f"refused: {sum(self.refusals.values())}",
        ]
        lines += [f"  refusal[{msg}]: {n}" for msg, n in sorted(self.refusals.items())]
        lines.append(f"precondition pass: {self.precondition_pass}")
        lines.append(f"precondition fail: {self.precondition_fail}")
        lines += [f"  clause[{c}]: {n}" for c, n in sorted(self.violated_clauses.items())]
        lines += [f"case[{c}]: {n}" for c, n in sorted(self.cases.items())]
        for check in CHECKS:
            if self.checked[check]:
                lines.append(f"check[{check}]: {self.checked[check]} checked, "
                             f"{self.failures[check]} counterexample(s)")
        for check in CHECKS:
            cx = self.first.get(check)
            if cx is None:
                continue
            lines.append(f"first counterexample for {check} (iteration {cx.index}, "
                         f"rename {cx.x} -> {cx.y}): {cx.detail}")
            lines += ["  | " + ln for ln in cx.source.splitlines()]
        if timing:
            lines.append(f"elapsed: {self.elapsed:.1f}s")
        lines.append("verdict: " + ("PASS" if self.ok else "FAIL"))
        return "\n".join(lines) + "\n"


def run_proptest(iterations: int, config: HarnessConfig = HarnessConfig(),
                 checks=CHECKS, commut_budget: int = 2_000,
                 stop_on_failure: bool = False) -> ProptestReport:
    """Generate ``iterations`` cases from ``config.seed`` and check the
    selected properties on each.  Simulation is checked in both modes."""
    if iterations < 1:
        raise HarnessError("iterations must be at least 1")
    unknown = set(checks) - set(CHECKS)
    if unknown:
        raise HarnessError(f"unknown checks {sorted(unknown)}")
    started = time.perf_counter()
    report = ProptestReport(seed=config.seed)
    gen = Generator(config.seed)
    model = config.model()
    for index in range(iterations):
        case = gen.case(index)
        report.iterations += 1
        report.cases[case.forced_case] += 1
        _check_case(report, index, case, checks, config, model, commut_budget)
        if stop_on_failure and report.failures:
            break
    report.elapsed = time.perf_counter() - started
    return report


def _check_case(report, index, case: GenCase, checks, config, model, commut_budget) -> None:
    p, x, y = case.program, case.x, case.y
    if "roundtrip" in checks:
        report.checked["roundtrip"] += 1
        if parse(pretty_print(p)) != p:
            report.fail("roundtrip", index, case, "parse(pretty_print(p)) != p")

    pre = check_sufficient_precondition(x, y, p)
    if pre.passed:
        report.precondition_pass += 1
    else:
        report.precondition_fail += 1
        report.violated_clauses.update(pre.violated)
    try:
        renamed = rename_globvar_hard(x, y, p)
        outcome = "renamed"
        report.renamed += 1
    except RenameError as err:
        renamed = None
        outcome = err.message
        report.refusals[err.message] += 1
    report.outcomes.append((index, pre.passed, outcome))

    if "precondition" in checks:
        report.checked["precondition"] += 1
        if pre.passed and renamed is None:
            report.fail("precondition", index, case, f"precondition holds but rename refused: {outcome}")
    if renamed is None:
        return

    if "invertibility" in checks:
        report.checked["invertibility"] += 1
        try:
            back = rename_globvar_hard(y, x, renamed)
        except RenameError as err:
            report.fail("invertibility", index, case, f"inverse rename refused: {err}")
        else:
            if back != p:
                report.fail("invertibility", index, case, "inverse rename did not restore the program")

    if model.compliance_violations(x, y):
        return
    if "simulation" in checks:
        for mode in (DETERMINISTIC, EXHAUSTIVE):
            report.checked["simulation"] += 1
            b1 = run(p, model, mode, config.step_budget)
            b2 = run(renamed, model, mode, config.step_budget)
            result = compare_behaviors(x, y, b1, b2)
            if not result.ok:
                report.fail("simulation", index, case, f"behaviors differ in {mode} mode")
    if "step_commut" in checks:
        report.checked["step_commut"] += 1
        result = check_step_commut(x, y, p, model, commut_budget)
        if not result.ok:
            report.fail("step_commut", index, case, result.counterexample["reason"])
