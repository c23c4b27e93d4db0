"""Line-delimited JSON traces: a header line, then one line per instant."""

from __future__ import annotations

import json
from pathlib import Path

from movesignal.model import Record, Trace


def _dumps(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), allow_nan=False)


def trace_lines(trace: Trace):
    yield _dumps({"header": trace.header})
    for rec in trace.records:
        yield _dumps(rec.to_json())


def write_trace(trace: Trace, path) -> Path:
    path = Path(path)
    with path.open("w", encoding="utf-8", newline="\n") as fh:
        for line in trace_lines(trace):
            fh.write(line + "\n")
    return path


def read_trace(path) -> Trace:
    with Path(path).open(encoding="utf-8") as fh:
        first = fh.readline()
        if not first:
            raise ValueError(f"{path}: empty trace file")
        head = json.loads(first)
        if "header" not in head:
            raise ValueError(f"{path}: first line is not a trace header")
        records = [Record.from_json(json.loads(line)) for line in fh if line.strip()]
    return Trace(head["header"], records)


def roundtrip(trace: Trace) -> Trace:
    """The trace as it would read back from disk."""
    lines = list(trace_lines(trace))
    return Trace(json.loads(lines[0])["header"], [Record.from_json(json.loads(x)) for x in lines[1:]])
