"""Runtime property monitors over traces.

Every monitor consumes records one at a time (``feed``) and reports a
:class:`Verdict` at the end (``finish``).  They keep no reference to the
records, so the explorer can copy a half-fed suite cheaply and branch.
All checks read only what the trace contains, which makes the verdicts a pure
function of the trace.
"""

from __future__ import annotations

import copy
import math
from collections import defaultdict
from dataclasses import dataclass, field
from typing import Optional

from movesignal.protocols import PROTOCOLS

# A bit counts as delivered on time if its addressee decoded it no later than
# the instant the sender finished encoding it (see README for the argument).
RECEIPT_SLACK = 0

ALL_PROPERTIES = (
    "emission", "receipt", "fifo", "receipt_progress", "collision", "sigma",
    "decode_faults", "containment", "redundancy", "silence", "lemma1", "remark6",
    "lemma3", "decay",
)


@dataclass
class Verdict:
    property: str
    passed: bool
    first_violation: Optional[int] = None
    evidence: Optional[dict] = None

    def to_json(self) -> dict:
        return {"property": self.property, "passed": self.passed,
                "first_violation": self.first_violation, "evidence": self.evidence}


class Monitor:
    name = "monitor"

    def __init__(self, header: dict):
        self.n = header["n"]
        self.violation = None  # (t, detail)

    def fail(self, t: int, detail: str) -> None:
        if self.violation is None:
            self.violation = (t, detail)

    def feed(self, rec) -> None:
        raise NotImplementedError

    def finish(self, last_t: int) -> None:
        pass

    def copy(self):
        return copy.deepcopy(self)


def _dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


class _Streams(Monitor):
    """Shared bookkeeping of bit streams per sender and per pair."""

    def __init__(self, header):
        super().__init__(header)
        self.queued = defaultdict(list)     # sender -> [(recipient, bit)]
        self.pair_queued = defaultdict(list)  # (s, r) -> [bit]
        self.started = defaultdict(list)    # (s, r) -> [bit]
        self.done = defaultdict(int)        # (s, r) -> count

    def track(self, e) -> None:
        tag = e[0]
        if tag == "enqueue":
            _, s, r, bits = e[:4]
            for b in bits:
                self.queued[s].append((r, int(b)))
                self.pair_queued[(s, r)].append(int(b))
        elif tag == "encode":
            _, s, r, b, stage = e
            if stage == "start":
                self.started[(s, r)].append(b)
            else:
                self.done[(s, r)] += 1

    def copy(self):
        other = copy.copy(self)
        for k in ("queued", "pair_queued", "started"):
            setattr(other, k, defaultdict(list, {key: list(v) for key, v in getattr(self, k).items()}))
        other.done = defaultdict(int, self.done)
        return other


class EmissionMonitor(_Streams):
    """Queued bits are encoded in outbox order, and all of them by the end."""

    name = "emission"

    def __init__(self, header):
        super().__init__(header)
        self.next_bit = defaultdict(int)
        self.in_flight = {}

    def feed(self, rec):
        for e in rec.events:
            self.track(e)
            if e[0] != "encode":
                continue
            _, s, r, b, stage = e
            if stage == "start":
                k = self.next_bit[s]
                want = self.queued[s][k] if k < len(self.queued[s]) else None
                if want != (r, b):
                    self.fail(rec.t, f"robot {s} encoded {(r, b)} but its next queued bit is {want}")
                if s in self.in_flight:
                    self.fail(rec.t, f"robot {s} started a bit before finishing the previous one")
                self.next_bit[s] = k + 1
                self.in_flight[s] = (r, b, rec.t)
            else:
                if self.in_flight.pop(s, None) is None:
                    self.fail(rec.t, f"robot {s} finished a bit it never started")

    def finish(self, last_t):
        for s in sorted(self.queued):
            if self.next_bit[s] < len(self.queued[s]):
                left = len(self.queued[s]) - self.next_bit[s]
                self.fail(last_t, f"robot {s} still has {left} queued bit(s) never encoded")
        for s in sorted(self.in_flight):
            self.fail(last_t, f"robot {s} never finished encoding the bit started at {self.in_flight[s][2]}")

    def copy(self):
        other = super().copy()
        other.next_bit = defaultdict(int, self.next_bit)
        other.in_flight = dict(self.in_flight)
        return other


class ReceiptMonitor(_Streams):
    """By the end, each addressee decoded exactly the bits queued for it."""

    name = "receipt"

    def __init__(self, header):
        super().__init__(header)
        self.got = defaultdict(list)
        self.start_times = defaultdict(list)

    def feed(self, rec):
        for e in rec.events:
            self.track(e)
            if e[0] == "decode" and e[1] == e[3]:
                self.got[(e[2], e[3])].append(e[4])
            elif e[0] == "encode" and e[4] == "start":
                self.start_times[(e[1], e[2])].append(rec.t)

    def finish(self, last_t):
        for pair in sorted(set(self.pair_queued) | set(self.got)):
            want, got = self.pair_queued.get(pair, []), self.got.get(pair, [])
            if want == got:
                continue
            k = next((i for i, (a, b) in enumerate(zip(want, got)) if a != b), min(len(want), len(got)))
            times = self.start_times.get(pair, [])
            t = times[k] if k < len(times) else last_t
            self.fail(t, f"robot {pair[1]} decoded {_bits(got)} from robot {pair[0]}, expected {_bits(want)}")

    def copy(self):
        other = super().copy()
        other.got = defaultdict(list, {k: list(v) for k, v in self.got.items()})
        other.start_times = defaultdict(list, {k: list(v) for k, v in self.start_times.items()})
        return other


class FifoMonitor(_Streams):
    """Each addressee's decoded stream stays a prefix of what was sent to it."""

    name = "fifo"

    def __init__(self, header):
        super().__init__(header)
        self.got = defaultdict(int)

    def feed(self, rec):
        for e in rec.events:
            self.track(e)
            if e[0] == "decode" and e[1] == e[3]:
                pair = (e[2], e[3])
                k = self.got[pair]
                sent = self.started.get(pair, [])
                if k >= len(sent):
                    self.fail(rec.t, f"robot {pair[1]} decoded an extra bit from robot {pair[0]}")
                elif sent[k] != e[4]:
                    self.fail(rec.t, f"robot {pair[1]} decoded bit #{k} from robot {pair[0]} as {e[4]}, sent {sent[k]}")
                self.got[pair] = k + 1

    def copy(self):
        other = super().copy()
        other.got = defaultdict(int, self.got)
        return other


class ReceiptProgressMonitor(_Streams):
    """A finished bit is already decoded by its addressee (slack ``RECEIPT_SLACK``)."""

    name = "receipt_progress"

    def __init__(self, header, slack: int = RECEIPT_SLACK):
        super().__init__(header)
        self.slack = slack
        self.got = defaultdict(int)
        self.done_at = defaultdict(list)

    def feed(self, rec):
        for e in rec.events:
            self.track(e)
            if e[0] == "decode" and e[1] == e[3]:
                self.got[(e[2], e[3])] += 1
            elif e[0] == "encode" and e[4] == "done":
                self.done_at[(e[1], e[2])].append(rec.t)
        for pair, times in self.done_at.items():
            due = sum(1 for t in times if t + self.slack <= rec.t)
            if self.got[pair] < due:
                self.fail(rec.t, f"robot {pair[0]} finished {due} bit(s) for robot {pair[1]}, "
                                 f"which decoded only {self.got[pair]}")

    def copy(self):
        other = super().copy()
        other.got = defaultdict(int, self.got)
        other.done_at = defaultdict(list, {k: list(v) for k, v in self.done_at.items()})
        return other


class RedundancyMonitor(_Streams):
    """Every robot, addressee or not, reads every finished bit correctly."""

    name = "redundancy"

    def __init__(self, header):
        super().__init__(header)
        self.sender_started = defaultdict(list)  # s -> [(r, b)]
        self.sender_done = defaultdict(int)
        self.read = defaultdict(int)  # (observer, sender) -> count

    def feed(self, rec):
        for e in rec.events:
            if e[0] == "encode":
                _, s, r, b, stage = e
                if stage == "start":
                    self.sender_started[s].append((r, b))
                else:
                    self.sender_done[s] += 1
            elif e[0] == "decode":
                _, o, s, r, b = e
                k = self.read[(o, s)]
                sent = self.sender_started.get(s, [])
                if k >= len(sent) or sent[k] != (r, b):
                    want = sent[k] if k < len(sent) else None
                    self.fail(rec.t, f"robot {o} read {(r, b)} as bit #{k} of robot {s}, which sent {want}")
                self.read[(o, s)] = k + 1
        for s, done in self.sender_done.items():
            for o in range(self.n):
                if o != s and self.read[(o, s)] < done:
                    self.fail(rec.t, f"robot {o} read {self.read[(o, s)]} of the {done} bits robot {s} finished")

    def copy(self):
        other = copy.copy(self)
        other.sender_started = defaultdict(list, {k: list(v) for k, v in self.sender_started.items()})
        other.sender_done = defaultdict(int, self.sender_done)
        other.read = defaultdict(int, self.read)
        return other


class _Moves(Monitor):
    """Monitors that look at each instant's moves need the next record."""

    def __init__(self, header):
        super().__init__(header)
        self.prev = None

    def feed(self, rec):
        if self.prev is not None:
            self.moved(self.prev, rec)
        self.prev = rec
        self.seen(rec)

    def seen(self, rec):
        pass

    def moved(self, before, after):
        raise NotImplementedError

    def copy(self):
        return copy.copy(self)


class CollisionMonitor(Monitor):
    name = "collision"

    def feed(self, rec):
        pts = rec.positions
        for i in range(len(pts)):
            for j in range(i + 1, len(pts)):
                if _dist(pts[i], pts[j]) <= 1e-9:
                    self.fail(rec.t, f"robots {i} and {j} collide at {pts[i]}")

    def copy(self):
        return copy.copy(self)


class SigmaMonitor(_Moves):
    """Active robots move at most sigma; inactive ones do not move."""

    name = "sigma"

    def __init__(self, header):
        super().__init__(header)
        self.sigma = list(header["sigma"])

    def moved(self, before, after):
        active = set(before.active)
        for i, (p, q) in enumerate(zip(before.positions, after.positions)):
            d = _dist(p, q)
            if i not in active and d > 0.0:
                self.fail(before.t, f"inactive robot {i} moved by {d:.3g}")
            elif d > self.sigma[i] * (1 + 1e-9) + 1e-9 * max(1.0, abs(p[0]), abs(p[1])):
                self.fail(before.t, f"robot {i} moved {d:.6g} > sigma {self.sigma[i]}")


class ContainmentMonitor(Monitor):
    """Robots stay strictly inside their granular."""

    name = "containment"

    def __init__(self, header):
        super().__init__(header)
        self.granulars = [tuple(g) for g in header["granulars"]]

    def feed(self, rec):
        for i, p in enumerate(rec.positions):
            cx, cy, radius = self.granulars[i]
            d = math.hypot(p[0] - cx, p[1] - cy)
            if not d < radius:
                self.fail(rec.t, f"robot {i} at distance {d:.6g} from its granular centre, radius {radius:.6g}")

    def copy(self):
        return copy.copy(self)


class SilenceMonitor(_Moves):
    """In synchronous protocols a robot moves only once it has something to say."""

    name = "silence"

    def __init__(self, header):
        super().__init__(header)
        self.talker = set()

    def seen(self, rec):
        for e in rec.events:
            if e[0] == "enqueue":
                self.talker.add(e[1])

    def moved(self, before, after):
        for i, (p, q) in enumerate(zip(before.positions, after.positions)):
            if i not in self.talker and p != q:
                self.fail(before.t, f"robot {i} moved without any message to send")

    def copy(self):
        other = copy.copy(self)
        other.talker = set(self.talker)
        return other


class AlwaysMovesMonitor(_Moves):
    """Asynchronous protocols: every activation moves the robot."""

    name = "remark6"

    def moved(self, before, after):
        for i in before.active:
            if before.positions[i] == after.positions[i]:
                self.fail(before.t, f"robot {i} was active at {before.t} but did not move")


class AcknowledgementMonitor(Monitor):
    """Two changes seen while holding a heading imply the peer saw one.

    When robot ``r`` has recorded a second change of ``r2`` since its last
    turn at ``T``, ``r2`` must itself have recorded a change of ``r`` at an
    instant strictly after ``T`` and strictly before now.
    """

    name = "lemma1"

    def __init__(self, header):
        super().__init__(header)
        n = self.n
        self.turn = [None] * n
        self.count = [[0] * n for _ in range(n)]
        self.last_change = [[-1] * n for _ in range(n)]  # [observer][target]

    def feed(self, rec):
        changes = [(e[1], e[2]) for e in rec.events if e[0] == "change"]
        for r, r2 in changes:
            self.count[r][r2] += 1
            T = self.turn[r]
            if T is not None and self.count[r][r2] >= 2 and not self.last_change[r2][r] > T:
                self.fail(rec.t, f"robot {r} saw robot {r2} move twice since its turn at {T}, "
                                 f"but robot {r2} saw no move of robot {r} since then")
        for r, r2 in changes:
            self.last_change[r][r2] = rec.t
        for e in rec.events:
            if e[0] == "turn":
                r = e[1]
                self.turn[r] = rec.t
                self.count[r] = [0] * self.n

    def copy(self):
        other = copy.copy(self)
        other.turn = list(self.turn)
        other.count = [list(c) for c in self.count]
        other.last_change = [list(c) for c in self.last_change]
        return other


class SightingWindowMonitor(Monitor):
    """Under a fair window, every robot keeps seeing every other one move."""

    name = "lemma3"

    def __init__(self, header, window: Optional[int] = None):
        super().__init__(header)
        self.window = window if window is not None else lemma3_window(header)
        self.last = [[0] * self.n for _ in range(self.n)]

    def feed(self, rec):
        for e in rec.events:
            if e[0] == "change":
                self.last[e[1]][e[2]] = rec.t
        if not rec.active:
            return
        for r in range(self.n):
            for r2 in range(self.n):
                if r != r2 and rec.t - self.last[r][r2] >= self.window:
                    self.fail(rec.t, f"robot {r} saw no move of robot {r2} during the "
                                     f"{self.window} instants up to {rec.t}")

    def copy(self):
        other = copy.copy(self)
        other.last = [list(c) for c in self.last]
        return other


def lemma3_window(header: dict) -> int:
    """``L(B) = 2B``.

    A peer moves at least once in any ``B`` consecutive instants (each
    activation moves it) and the observer looks within ``B`` instants after
    that, so consecutive sightings of a move are at most ``2B - 1`` apart.
    """
    sched = header.get("schedule", {})
    return 2 * int(sched.get("window", 8))


class DecayMonitor(_Moves):
    """Async n-robot: distance travelled under one heading stays below ``2 mu``."""

    name = "decay"

    def __init__(self, header):
        super().__init__(header)
        self.mu = list(header["mu"])
        self.travelled = [0.0] * self.n

    def moved(self, before, after):
        turned = {e[1] for e in before.events if e[0] == "turn"}
        for i in range(self.n):
            if i in turned:
                self.travelled[i] = 0.0
            self.travelled[i] += _dist(before.positions[i], after.positions[i])
            if not self.travelled[i] < 2.0 * self.mu[i]:
                self.fail(before.t, f"robot {i} travelled {self.travelled[i]:.6g} in one phase, "
                                    f"bound 2*mu = {2.0 * self.mu[i]:.6g}")

    def copy(self):
        other = copy.copy(self)
        other.travelled = list(self.travelled)
        return other


class DecodeFaultMonitor(Monitor):
    name = "decode_faults"

    def feed(self, rec):
        for e in rec.events:
            if e[0] == "fault":
                self.fail(rec.t, f"robot {e[1]}: {e[2]}")

    def copy(self):
        return copy.copy(self)


MONITORS = {
    "emission": EmissionMonitor,
    "receipt": ReceiptMonitor,
    "fifo": FifoMonitor,
    "receipt_progress": ReceiptProgressMonitor,
    "collision": CollisionMonitor,
    "sigma": SigmaMonitor,
    "decode_faults": DecodeFaultMonitor,
    "containment": ContainmentMonitor,
    "redundancy": RedundancyMonitor,
    "silence": SilenceMonitor,
    "lemma1": AcknowledgementMonitor,
    "remark6": AlwaysMovesMonitor,
    "lemma3": SightingWindowMonitor,
    "decay": DecayMonitor,
}


def applicable_properties(header: dict) -> list:
    """Properties that make sense for the trace's protocol and schedule."""
    info = PROTOCOLS[header["protocol"]]
    props = ["emission", "receipt", "fifo", "receipt_progress", "collision", "sigma", "decode_faults"]
    if info.uses_granulars:
        props += ["containment", "redundancy"]
    if info.synchronous:
        props.append("silence")
    else:
        props += ["lemma1", "remark6"]
        if header.get("schedule", {}).get("kind") == "random_fair":
            props.append("lemma3")
        if header["protocol"] == "async_n":
            props.append("decay")
    return props


# "eventually" properties; an arbitrary finite schedule may starve a robot,
# so the explorer leaves these out by default
LIVENESS = ("emission", "receipt", "lemma3")


def safety_properties(header: dict) -> list:
    return [p for p in applicable_properties(header) if p not in LIVENESS]


@dataclass
class MonitorSuite:
    """A bundle of online monitors fed in lockstep."""

    header: dict
    properties: Optional[list] = None
    monitors: list = field(init=False)
    last_t: int = field(init=False, default=0)

    def __post_init__(self):
        if self.properties is None:
            self.properties = applicable_properties(self.header)
        unknown = [p for p in self.properties if p not in MONITORS]
        if unknown:
            raise ValueError(f"unknown properties {unknown}; choose from {', '.join(MONITORS)}")
        self.monitors = [MONITORS[p](self.header) for p in self.properties]

    def feed(self, rec) -> None:
        self.last_t = rec.t
        for m in self.monitors:
            m.feed(rec)

    def failed(self) -> bool:
        return any(m.violation is not None for m in self.monitors)

    def copy(self) -> "MonitorSuite":
        other = copy.copy(self)
        other.monitors = [m.copy() for m in self.monitors]
        return other

    def finish(self, records=None) -> list:
        """Verdicts in property order; ``records`` (if given) supply evidence."""
        out = []
        for m in self.monitors:
            m = m.copy()
            m.finish(self.last_t)
            if m.violation is None:
                out.append(Verdict(m.name, True))
                continue
            t, detail = m.violation
            out.append(Verdict(m.name, False, t, evidence(records, t, detail)))
        return out


def evidence(records, t: int, detail: str) -> dict:
    """The trace slice from the last quiet instant up to the violation.

    An instant is quiet when no robot is in the middle of encoding a bit.
    """
    ev = {"detail": detail}
    if not records:
        return ev
    start, busy = 0, set()
    for rec in records:
        if rec.t > t:
            break
        if not busy:
            start = rec.t
        for e in rec.events:
            if e[0] == "encode":
                (busy.add if e[4] == "start" else busy.discard)(e[1])
    end = min(t + 1, records[-1].t)
    ev["window"] = [start, end]
    ev["records"] = [r.to_json() for r in records if start <= r.t <= end]
    return ev


def monitor_suite(trace, properties=None) -> list:
    """Run the monitors over a complete trace; returns one Verdict per property."""
    suite = MonitorSuite(trace.header, properties)
    for rec in trace.records:
        suite.feed(rec)
    return suite.finish(trace.records)


def _bits(bits) -> str:
    return "".join(str(b) for b in bits) or "(nothing)"
