from __future__ import annotations

from pathlib import Path

from mpmi.parser import parse_problem
from mpmi.problem import establish_support
from mpmi.verification.generators import GENERATORS

DATA = Path(__file__).parent / "data"

UNIT_BOX = "(declare-real x) (assert (< 0 x)) (assert (< x 1))"

SIMPLEX = """
(declare-real x1)
(declare-real x2)
(assert (< 0 x1)) (assert (< x1 1))
(assert (< 0 x2)) (assert (< x2 1))
(assert (< x2 x1))
"""

# three-node chain whose belief at x2 is x on [0,1] and x(2-x) on [1,2]
CHAIN3 = """
(declare-real x1)
(declare-real x2)
(declare-real x3)
(assert (< 0 x1)) (assert (< x1 2))
(assert (< x1 x2))
(assert (< 0 x2)) (assert (< x2 3))
(assert (< 0 x3)) (assert (< x3 1))
(assert (< (+ x2 x3) 2))
"""

# disconnected: a simplex plus an isolated variable of length 3
FOREST = SIMPLEX + "(declare-real y) (assert (< -1 y)) (assert (< y 2))"

DISJUNCTIVE = """
(declare-real a)
(declare-real b)
(declare-real c)
(assert (< -2 a)) (assert (< a 2))
(assert (< -2 b)) (assert (< b 2))
(assert (< -1 c)) (assert (< c 3))
(assert (or (< (+ a b) -1) (< 1 (- a b))))
(assert (or (< (* 2 c) b) (< c (- 0 b))))
"""

HAND_WRITTEN = {"unit_box": UNIT_BOX, "simplex": SIMPLEX, "chain3": CHAIN3,
                "forest": FOREST, "disjunctive": DISJUNCTIVE}


def load(text: str):
    return establish_support(parse_problem(text))


def corpus():
    """(name, problem) pairs used by the consistency and amortization checks."""
    out = [(name, load(text)) for name, text in HAND_WRITTEN.items()]
    from mpmi.cli import reduce_text

    out.append(("wmi_example", load(reduce_text((DATA / "wmi_example.wmi").read_text()))))
    for shape in ("path", "star", "snow"):
        for n, seed in ((5, 0), (10, 1), (20, 2)):
            out.append((f"{shape}{n}_s{seed}", establish_support(GENERATORS[shape](n, seed))))
    return out


_acceptance: dict = {}


def pytest_runtest_logreport(report):
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if name.startswith("test_criterion_"):
        key = name[len("test_criterion_"):].split("_")[0]
        prev = _acceptance.get(key, True)
        _acceptance[key] = prev and report.passed


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_acceptance, key=int):
        terminalreporter.write_line(f"criterion {key}: {'PASS' if _acceptance[key] else 'FAIL'}")
