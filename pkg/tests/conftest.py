import math
import random

import pytest

# acceptance criteria report: number -> (passed, detail)
CRITERIA = {}


def random_configuration(rng: random.Random, n: int, spread: float = 10.0, min_gap: float = 0.5):
    """``n`` points in a square with a minimum pairwise gap."""
    while True:
        pts = [(rng.uniform(-spread, spread), rng.uniform(-spread, spread)) for _ in range(n)]
        if all(math.dist(a, b) >= min_gap for i, a in enumerate(pts) for b in pts[i + 1:]):
            return pts


@pytest.fixture
def criterion():
    def report(number: int, passed: bool, detail: str) -> None:
        prev = CRITERIA.get(number)
        CRITERIA[number] = (passed and (prev is None or prev[0]), detail if prev is None else prev[1] + "; " + detail)
    return report


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        passed, detail = CRITERIA[number]
        terminalreporter.write_line(f"criterion {number}: {'PASS' if passed else 'FAIL'}  {detail}")
