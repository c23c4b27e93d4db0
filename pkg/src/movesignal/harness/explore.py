"""Bounded exhaustive exploration of activation schedules.

Every sequence of nonempty active sets up to the horizon is executed, depth
first, branching a cloned simulation and a cloned monitor suite at each
instant so shared prefixes run once.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional

from movesignal.harness.monitors import MonitorSuite, Verdict, safety_properties


class _StopExploring(Exception):
    pass


def active_subsets(n: int) -> list:
    """All nonempty subsets of ``range(n)``, smallest first."""
    return [frozenset(c) for k in range(1, n + 1) for c in combinations(range(n), k)]


@dataclass
class ExplorationResult:
    properties: list
    schedules: int = 0
    complete: bool = True
    failures: dict = field(default_factory=dict)  # property -> (schedule, Verdict)

    @property
    def passed(self) -> bool:
        return self.complete and not self.failures

    def verdicts(self) -> list:
        """One aggregate verdict per property; an incomplete run never passes."""
        out = []
        for p in self.properties:
            if p in self.failures:
                schedule, v = self.failures[p]
                ev = dict(v.evidence or {})
                ev["schedule"] = [sorted(s) for s in schedule]
                out.append(Verdict(p, False, v.first_violation, ev))
            elif not self.complete:
                out.append(Verdict(p, False, None, {
                    "detail": f"partial: exploration stopped after {self.schedules} schedules, none failing"}))
            else:
                out.append(Verdict(p, True))
        return out

    def to_json(self) -> dict:
        return {"schedules": self.schedules, "complete": self.complete, "passed": self.passed,
                "verdicts": [v.to_json() for v in self.verdicts()]}

    def merge(self, other: "ExplorationResult") -> None:
        self.schedules += other.schedules
        self.complete = self.complete and other.complete
        for p, f in other.failures.items():
            self.failures.setdefault(p, f)


class _Walker:
    def __init__(self, horizon, subsets, budget, stop_at_first, result):
        self.horizon = horizon
        self.subsets = subsets
        self.budget = budget
        self.stop_at_first = stop_at_first
        self.result = result

    def leaf(self, sim, suite, schedule) -> None:
        if self.budget is not None and self.result.schedules >= self.budget:
            raise _StopExploring
        self.result.schedules += 1
        final = sim.final_record()
        suite.feed(final)
        verdicts = suite.finish()
        bad = [v for v in verdicts if not v.passed and v.property not in self.result.failures]
        if bad:
            records = sim.records + [final]
            for v in suite.finish(records):
                if not v.passed and v.property not in self.result.failures:
                    self.result.failures[v.property] = (list(schedule), v)
            if self.stop_at_first:
                raise _StopExploring

    def walk(self, sim, suite, schedule) -> None:
        if sim.t >= self.horizon:
            self.leaf(sim, suite, schedule)
            return
        last = len(self.subsets) - 1
        for k, act in enumerate(self.subsets):
            # the last branch may consume the parent's state
            child, csuite = (sim, suite) if k == last else (sim.clone(), suite.copy())
            csuite.feed(child.advance(act))
            schedule.append(act)
            self.walk(child, csuite, schedule)
            schedule.pop()


def _explore_prefix(args):
    sim, horizon, properties, budget, stop_at_first, prefix = args
    header = dict(sim.header, schedule={"kind": "exhaustive"})
    if properties is None:
        properties = safety_properties(header)
    suite = MonitorSuite(header, properties)
    result = ExplorationResult(list(suite.properties))
    for act in prefix:
        suite.feed(sim.advance(act))
    walker = _Walker(horizon, active_subsets(len(sim.specs)), budget, stop_at_first, result)
    try:
        walker.walk(sim, suite, list(prefix))
    except _StopExploring:
        result.complete = False
    return result


def explore_schedules(sim, horizon: int, properties: Optional[list] = None,
                      budget: Optional[int] = None, stop_at_first: bool = False,
                      workers: int = 1, max_robots: int = 3) -> ExplorationResult:
    """Run every schedule of length ``horizon`` from ``sim``'s current state.

    ``properties`` defaults to the protocol's safety properties: liveness
    ("eventually") properties cannot hold on schedules that starve a robot.

    ``budget`` caps the number of complete schedules; reaching it yields an
    incomplete (partial) result.  With ``stop_at_first`` the search ends at
    the first failing schedule.  ``workers > 1`` splits the first instant's
    branches across processes; results are merged in branch order, so the
    outcome does not depend on the worker count (budgets apply per branch).
    """
    n = len(sim.specs)
    if n > max_robots:
        raise ValueError(f"exhaustive exploration is limited to {max_robots} robots, got {n}")
    if sim.t != 0 or sim.records:
        raise ValueError("explore from a fresh simulation at t0")
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    if workers <= 1 or horizon == 0:
        return _explore_prefix((sim, horizon, properties, budget, stop_at_first, ()))
    jobs = [(sim.clone(), horizon, properties, budget, stop_at_first, (act,)) for act in active_subsets(n)]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(_explore_prefix, jobs))
    total = parts[0]
    for part in parts[1:]:
        total.merge(part)
    return total
