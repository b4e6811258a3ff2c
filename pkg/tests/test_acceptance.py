"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line.

Run standalone with ``python3 tests/test_acceptance.py`` for just the
summary lines.
"""
import json
import sys
import time
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from globrename.core import intern  # noqa: E402
from globrename.events import ExtCall, Terminates  # noqa: E402
from globrename.harness import HarnessConfig, diff_behaviors, run_proptest  # noqa: E402
from globrename.rename import CATALOG, MUTANTS, RenameError, mutated, rename_globvar_hard  # noqa: E402
from globrename.semantics import EXHAUSTIVE, run  # noqa: E402
from globrename.syntax import parse, pretty_print  # noqa: E402

CORPUS = Path(__file__).parent / "fixtures" / "corpus"
SEED, ITERATIONS, COMMUT_PROGRAMS = 42, 500, 200
SIM_BUDGET, COMMUT_BUDGET = 10_000, 2_000
PROPERTY_CHECKS = ("roundtrip", "precondition", "invertibility", "simulation")


def _line(n: int, ok: bool, detail: str) -> str:
    return f"[{'PASS' if ok else 'FAIL'}] criterion {n}: {detail}"


# -- criteria -----------------------------------------------------------------------

def corpus_verdicts():
    """Every corpus rename yields its recorded verdict.  Returns (ok, detail, mismatches)."""
    expected = json.loads((CORPUS / "expected.json").read_text())
    mismatches = []
    for case in expected["rename"]:
        p = parse((CORPUS / case["file"]).read_text())
        try:
            r = rename_globvar_hard(intern(case["old"]), intern(case["new"]), p)
            got = "renamed"
            if "golden" in case and pretty_print(r) != (CORPUS / case["golden"]).read_text():
                got = "renamed (output differs from golden file)"
        except RenameError as err:
            got = err.message
        want = "renamed" if case["exit"] == 0 else case["message"]
        if got != want:
            mismatches.append(f"{case['file']}: got {got!r}, want {want!r}")
    return not mismatches, mismatches


def criterion_1():
    started = time.perf_counter()
    ok, mismatches = corpus_verdicts()
    elapsed = time.perf_counter() - started
    ok = ok and elapsed < 1.0
    detail = f"corpus verdicts exact in {elapsed:.3f}s (limit 1s)"
    if mismatches:
        detail += "; " + "; ".join(mismatches)
    return ok, detail


def criterion_2():
    started = time.perf_counter()
    both = run(parse((CORPUS / "printf_interleaved.c").read_text()), mode=EXHAUSTIVE)
    one = run(parse((CORPUS / "printf_extracted.c").read_text()), mode=EXHAUSTIVE)
    elapsed = time.perf_counter() - started
    printf = intern("printf")
    a, b = ExtCall(printf, ("A",), 1), ExtCall(printf, ("B",), 1)
    ok = (both == {Terminates((a, b), 2), Terminates((b, a), 2)}
          and one == {Terminates((a, b), 2)} and one < both and elapsed < 1.0)
    return ok, (f"interleaved: {len(both)} behaviors, extracted: {len(one)}, "
                f"extracted strictly included: {one < both}, {elapsed:.3f}s (limit 1s)")


def property_run():
    return run_proptest(ITERATIONS, HarnessConfig(seed=SEED, step_budget=SIM_BUDGET), PROPERTY_CHECKS)


def criterion_3(report):
    n, bad = report.checked["simulation"], report.failures["simulation"]
    ok = bad == 0 and n > 0 and report.elapsed < 120
    return ok, (f"{ITERATIONS} programs, {n // 2} renamed and simulated in both modes, "
                f"{bad} counterexample(s), {report.elapsed:.1f}s (limit 120s)")


def criterion_4():
    report = run_proptest(COMMUT_PROGRAMS, HarnessConfig(seed=SEED), ("step_commut",),
                          commut_budget=COMMUT_BUDGET)
    n, bad = report.checked["step_commut"], report.failures["step_commut"]
    ok = bad == 0 and n > 0 and report.elapsed < 120
    return ok, (f"{COMMUT_PROGRAMS} programs, {n} lockstep-checked, {bad} counterexample(s), "
                f"{report.elapsed:.1f}s (limit 120s)")


def criterion_5(report):
    n, bad = report.checked["invertibility"], report.failures["invertibility"]
    ok = bad == 0 and n == report.renamed and n > 0
    return ok, f"{n}/{report.renamed} successful renames inverted exactly, {bad} failure(s)"


def criterion_6(report):
    bad = report.failures["precondition"]
    failing = [o for o in report.outcomes if not o[1]]
    recorded = all(out == "renamed" or out in CATALOG for _, _, out in failing)
    ok = bad == 0 and len(failing) >= 50 and recorded
    return ok, (f"PASS implied success in {report.precondition_pass}/{report.precondition_pass} cases, "
                f"{len(failing)} clause-failing triples recorded (need 50), "
                f"{sum(o[2] == 'renamed' for o in failing)} of them still renamed")


def criterion_7():
    started = time.perf_counter()
    cfg = HarnessConfig.load(CORPUS / "thelib.cfg")
    result = diff_behaviors(parse((CORPUS / "monprog.c").read_text()), intern("a"), intern("b"),
                            cfg, unsafe=True)
    elapsed = time.perf_counter() - started
    ok = not result.ok and elapsed < 1.0
    return ok, f"unsafe rename a->b under reads_global(a) diverges: {not result.ok}, {elapsed:.3f}s (limit 1s)"


def detect(mutant: str):
    """First criterion among 1-6 that fails under ``mutant``, or None."""
    with mutated(mutant):
        if not corpus_verdicts()[0]:
            return 1
        report = run_proptest(ITERATIONS, HarnessConfig(seed=SEED, step_budget=SIM_BUDGET),
                              PROPERTY_CHECKS, stop_on_failure=True)
        for n, check in ((3, "simulation"), (5, "invertibility"), (6, "precondition")):
            if report.failures[check]:
                return n
        if report.failures["roundtrip"]:
            return 3
        report = run_proptest(COMMUT_PROGRAMS, HarnessConfig(seed=SEED), ("step_commut",),
                              commut_budget=COMMUT_BUDGET, stop_on_failure=True)
        if report.failures["step_commut"]:
            return 4
    return None


def criterion_8():
    found = {m: detect(m) for m in MUTANTS}
    ok = all(v is not None for v in found.values())
    return ok, ", ".join(f"{m} caught by criterion {v}" if v else f"{m} NOT caught"
                         for m, v in found.items())


# -- pytest entry points ------------------------------------------------------------

@pytest.fixture(scope="module")
def report():
    return property_run()


@pytest.fixture
def emit(capsys):
    def _emit(n, result):
        ok, detail = result
        with capsys.disabled():
            print("\n" + _line(n, ok, detail))
        assert ok, detail
    return _emit


def test_criterion_1_corpus_verdicts(emit):
    emit(1, criterion_1())


def test_criterion_2_printf_nondeterminism(emit):
    emit(2, criterion_2())


def test_criterion_3_simulation(emit, report):
    emit(3, criterion_3(report))


def test_criterion_4_step_commut(emit):
    emit(4, criterion_4())


def test_criterion_5_invertibility(emit, report):
    emit(5, criterion_5(report))


def test_criterion_6_sufficient_precondition(emit, report):
    emit(6, criterion_6(report))


def test_criterion_7_library_pitfall(emit):
    emit(7, criterion_7())


def test_criterion_8_mutants_detected(emit):
    emit(8, criterion_8())


if __name__ == "__main__":
    shared = property_run()
    results = [criterion_1(), criterion_2(), criterion_3(shared), criterion_4(),
               criterion_5(shared), criterion_6(shared), criterion_7(), criterion_8()]
    for n, (ok, detail) in enumerate(results, 1):
        print(_line(n, ok, detail))
    sys.exit(0 if all(ok for ok, _ in results) else 1)
