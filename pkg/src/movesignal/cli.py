"""``movesignal`` command: run a scenario, write trace, verdicts and summary.

Exit status: 0 when every verdict passes, 1 on a property violation, 2 on a
usage or validation error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from movesignal.harness.explore import explore_schedules
from movesignal.harness.messages import delivery_stats
from movesignal.harness.monitors import monitor_suite
from movesignal.harness.traceio import write_trace
from movesignal.model import ConfigurationError, EngineFault
from movesignal.scenario import bundled_scenarios, load_scenario

EXIT_OK, EXIT_VIOLATION, EXIT_USAGE = 0, 1, 2


def _write_json(path: Path, obj) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def summarize(trace, verdicts) -> dict:
    recs = trace.records
    travelled = [0.0] * trace.header["n"]
    for a, b in zip(recs, recs[1:]):
        for i, (p, q) in enumerate(zip(a.positions, b.positions)):
            travelled[i] += math.hypot(q[0] - p[0], q[1] - p[1])
    busy = [r.t for r in recs if any(e[0] in ("encode", "decode") for e in r.events)]
    stats = delivery_stats(trace)
    return {
        "protocol": trace.header["protocol"],
        "n": trace.header["n"],
        "horizon": trace.horizon,
        "schedule": trace.header["schedule"],
        **stats,
        "steps_used": busy[-1] + 1 if busy else 0,
        "distance_travelled": [round(d, 9) for d in travelled],
        "decode_faults": sum(1 for r in recs for e in r.events if e[0] == "fault"),
        "passed": all(v.passed for v in verdicts),
        "failed_properties": [v.property for v in verdicts if not v.passed],
    }


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="movesignal", description=__doc__.splitlines()[0])
    p.add_argument("scenario", help="scenario YAML file, or the name of a bundled scenario")
    p.add_argument("--seed", type=int, help="override the random_fair schedule seed")
    p.add_argument("--horizon", type=int, help="override the scenario horizon")
    p.add_argument("--out", default="movesignal-out", help="output directory (default: %(default)s)")
    p.add_argument("--explore", action="store_true",
                   help="check every activation schedule up to the horizon instead of one run")
    p.add_argument("--budget", type=int, help="with --explore: stop after this many schedules")
    p.add_argument("--workers", type=int, default=1, help="with --explore: worker processes")
    p.add_argument("--quiet", action="store_true", help="print nothing on success")
    return p


def _resolve(name: str) -> Path:
    path = Path(name)
    if path.exists():
        return path
    bundled = bundled_scenarios()
    if name in bundled:
        return bundled[name]
    raise ConfigurationError(f"no scenario file {name!r} and no bundled scenario of that name "
                             f"(bundled: {', '.join(bundled)})")


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        scenario = load_scenario(_resolve(args.scenario))
        horizon = scenario.horizon if args.horizon is None else args.horizon
        if horizon < 0:
            raise ConfigurationError("--horizon must be non-negative")
        sim = scenario.build(args.seed)
    except (ConfigurationError, ValueError) as exc:
        print(f"movesignal: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    if args.explore:
        try:
            result = explore_schedules(sim, horizon, budget=args.budget, workers=args.workers)
        except ValueError as exc:
            print(f"movesignal: error: {exc}", file=sys.stderr)
            return EXIT_USAGE
        _write_json(out / "exploration.json", result.to_json())
        if not args.quiet or not result.passed:
            state = "complete" if result.complete else "PARTIAL"
            print(f"explored {result.schedules} schedules ({state})")
            for v in result.verdicts():
                print(f"  {'pass' if v.passed else 'FAIL'}  {v.property}")
        return EXIT_OK if result.passed else EXIT_VIOLATION

    try:
        trace = sim.run(horizon)
    except (EngineFault, ValueError) as exc:
        print(f"movesignal: error: run aborted: {exc}", file=sys.stderr)
        return EXIT_USAGE
    verdicts = monitor_suite(trace)
    summary = summarize(trace, verdicts)
    write_trace(trace, out / "trace.jsonl")
    _write_json(out / "verdicts.json", [v.to_json() for v in verdicts])
    _write_json(out / "summary.json", summary)
    if not args.quiet or not summary["passed"]:
        print(f"{summary['protocol']}: n={summary['n']} horizon={summary['horizon']} "
              f"bits {summary['bits_delivered']}/{summary['bits_sent']} delivered, "
              f"steps used {summary['steps_used']}")
        for v in verdicts:
            line = f"  {'pass' if v.passed else 'FAIL'}  {v.property}"
            if not v.passed:
                line += f" at t={v.first_violation}: {v.evidence['detail']}"
            print(line)
        print(f"artifacts in {out}/")
    return EXIT_OK if summary["passed"] else EXIT_VIOLATION


if __name__ == "__main__":
    sys.exit(main())
