import pytest

from mutants import no_resync_simulation
from movesignal.harness import build_simulation, explore_schedules
from movesignal.harness.explore import active_subsets
from movesignal.harness.monitors import safety_properties


def pair(bits_a=(1,), bits_b=(0,)):
    sim = build_simulation("async2", [(0.0, 0.0), (4.0, 0.0)], 1.0)
    sim.send(0, 1, list(bits_a))
    sim.send(1, 1, list(bits_b))
    return sim


def test_active_subsets():
    assert active_subsets(2) == [{0}, {1}, {0, 1}]
    assert len(active_subsets(3)) == 7


@pytest.mark.parametrize("horizon", [0, 1, 2, 5])
def test_schedule_count_is_three_to_the_horizon(horizon):
    result = explore_schedules(pair(), horizon)
    assert result.schedules == 3 ** horizon
    assert result.complete and result.passed


def test_three_robots_branch_seven_ways():
    sim = build_simulation("async_n", [(0, 0), (5, 0), (1, 4)], 0.5)
    sim.send_to(0, 2, [1])
    result = explore_schedules(sim, 3)
    assert result.schedules == 7 ** 3 and result.passed


def test_four_robots_refused():
    sim = build_simulation("async_n", [(0, 0), (5, 0), (1, 4), (6, 6)], 0.5)
    with pytest.raises(ValueError):
        explore_schedules(sim, 2)


def test_explore_needs_a_fresh_simulation():
    sim = pair()
    sim.advance()
    with pytest.raises(ValueError):
        explore_schedules(sim, 2)


def test_default_properties_are_the_safety_ones():
    sim = pair()
    result = explore_schedules(sim, 1)
    assert result.properties == safety_properties(sim.header)
    assert "emission" not in result.properties and "lemma1" in result.properties


def test_budget_gives_a_partial_result_that_does_not_pass():
    result = explore_schedules(pair(), 6, budget=100)
    assert result.schedules == 100 and not result.complete and not result.passed
    verdicts = result.verdicts()
    assert all(not v.passed and "partial" in v.evidence["detail"] for v in verdicts)
    assert result.to_json()["complete"] is False


def test_mutant_caught_with_a_replayable_schedule():
    result = explore_schedules(no_resync_simulation(), 9)
    assert result.complete and not result.passed
    assert {"lemma1", "receipt_progress"} <= set(result.failures)
    v = next(v for v in result.verdicts() if v.property == "lemma1")
    assert len(v.evidence["schedule"]) == 9 and v.evidence["records"]
    # replaying the reported schedule reproduces the violation
    from movesignal.harness import monitor_suite
    from movesignal.model import Explicit

    sim = no_resync_simulation()
    replay = build_simulation("async2", [(0.0, 0.0), (4.0, 0.0)], 1.0, schedule=Explicit(v.evidence["schedule"]),
                              robot_factory=type(sim.robots[0]))
    replay.send(0, 1, [0, 0])
    (again,) = monitor_suite(replay.run(9), ["lemma1"])
    assert not again.passed and again.first_violation == v.first_violation


def test_stop_at_first_ends_early():
    full = explore_schedules(no_resync_simulation(), 9)
    quick = explore_schedules(no_resync_simulation(), 9, stop_at_first=True)
    assert quick.failures and quick.schedules < full.schedules and not quick.complete


def test_workers_do_not_change_the_outcome():
    one = explore_schedules(no_resync_simulation(), 9)
    two = explore_schedules(no_resync_simulation(), 9, workers=2)
    assert one.to_json() == two.to_json()
