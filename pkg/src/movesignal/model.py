"""Semi-synchronous execution engine.

At every instant a nonempty set of robots is active.  Each active robot looks
at the configuration through its own frame, its automaton picks a destination
in local coordinates, and the engine moves it there (or ``sigma`` of the way
along the segment).  All active robots read the same snapshot.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass, field
from itertools import combinations
from typing import Iterator, NamedTuple, Optional, Sequence

from movesignal.geometry import EPS, Point, dist, norm

TRACE_DIGITS = 12


class EngineFault(RuntimeError):
    """A protocol produced something the engine cannot execute."""


class ConfigurationError(ValueError):
    """A setup violates an assumption of the model or protocol."""


@dataclass(frozen=True)
class LocalFrame:
    """Private coordinate system: origin, orthonormal axes, unit length.

    Every frame has the standard handedness (``y`` is ``x`` turned a quarter
    counterclockwise); robots therefore agree on what "clockwise" means.
    """

    origin: Point
    x_axis: Point
    y_axis: Point
    unit_scale: float = 1.0

    def __post_init__(self):
        if not self.unit_scale > 0.0:
            raise ConfigurationError("unit_scale must be positive")
        for axis in (self.x_axis, self.y_axis):
            if abs(norm(axis) - 1.0) > 1e-9:
                raise ConfigurationError(f"frame axis {axis} is not unit length")
        if abs(self.x_axis[0] * self.y_axis[0] + self.x_axis[1] * self.y_axis[1]) > 1e-9:
            raise ConfigurationError("frame axes are not perpendicular")
        if self.x_axis[0] * self.y_axis[1] - self.x_axis[1] * self.y_axis[0] <= 0.0:
            raise ConfigurationError("frame handedness differs from the shared one")

    @classmethod
    def from_angle(cls, origin, angle: float = 0.0, unit_scale: float = 1.0) -> "LocalFrame":
        c, s = math.cos(angle), math.sin(angle)
        return cls(Point(*origin), Point(c, s), Point(-s, c), unit_scale)

    @classmethod
    def identity(cls) -> "LocalFrame":
        return cls(Point(0.0, 0.0), Point(1.0, 0.0), Point(0.0, 1.0), 1.0)

    def to_local(self, q) -> Point:
        dx, dy = q[0] - self.origin[0], q[1] - self.origin[1]
        s = self.unit_scale
        return Point((dx * self.x_axis[0] + dy * self.x_axis[1]) / s,
                     (dx * self.y_axis[0] + dy * self.y_axis[1]) / s)

    def to_global(self, p) -> Point:
        s = self.unit_scale
        return Point(self.origin[0] + s * (p[0] * self.x_axis[0] + p[1] * self.y_axis[0]),
                     self.origin[1] + s * (p[0] * self.x_axis[1] + p[1] * self.y_axis[1]))


def random_frame(origin, rng: random.Random, rotate: bool = True) -> LocalFrame:
    """Random orientation (unless ``rotate`` is off) and scale in [0.5, 2]."""
    angle = rng.uniform(0.0, 2.0 * math.pi) if rotate else 0.0
    return LocalFrame.from_angle(origin, angle, rng.uniform(0.5, 2.0))


@dataclass(frozen=True)
class Configuration:
    positions: tuple
    time: int = 0

    def __post_init__(self):
        pts = tuple(Point(float(x), float(y)) for x, y in self.positions)
        for p in pts:
            if not (math.isfinite(p[0]) and math.isfinite(p[1])):
                raise ConfigurationError(f"non-finite position {p}")
        object.__setattr__(self, "positions", pts)

    def __len__(self):
        return len(self.positions)

    def collisions(self, tol: float = EPS) -> list:
        return [(i, j) for i, j in combinations(range(len(self.positions)), 2)
                if dist(self.positions[i], self.positions[j]) <= tol]


class View(NamedTuple):
    """What one robot sees: every position in its own frame.

    ``me`` is the slot holding the observer itself (the point at its own
    frame position).  Slot order is fixed for the run; robots only ever use
    it to tell apart robots they could equally tell apart by their disjoint
    granulars.  ``ids`` is filled only in identified systems.
    """

    points: tuple
    me: int
    ids: Optional[tuple] = None


def observe(config: Configuration, frame: LocalFrame) -> tuple:
    return tuple(frame.to_local(q) for q in config.positions)


@dataclass
class RobotSpec:
    sigma: float
    frame: LocalFrame
    memory: object
    visible_id: Optional[object] = None

    def __post_init__(self):
        if not self.sigma > 0.0:
            raise ConfigurationError("sigma must be positive")


def clamp_move(start, target, sigma: float) -> Point:
    d = dist(start, target)
    if d <= sigma:
        return Point(target[0], target[1])
    k = sigma / d
    return Point(start[0] + (target[0] - start[0]) * k, start[1] + (target[1] - start[1]) * k)


def step(config: Configuration, active, specs: Sequence[RobotSpec], events: Optional[list] = None):
    """One SSM instant.  Returns ``(next_config, destinations)``.

    Destinations are global; inactive robots get ``None``.
    """
    if not active:
        raise EngineFault("an instant needs at least one active robot")
    if events is None:
        events = []
    ids = tuple(s.visible_id for s in specs) if specs[0].visible_id is not None else None
    n = len(config.positions)
    dests = [None] * n
    for i in sorted(active):
        spec = specs[i]
        view = View(observe(config, spec.frame), i, ids)
        local = spec.memory.activate(view, events)
        if not (math.isfinite(local[0]) and math.isfinite(local[1])):
            raise EngineFault(f"robot {i} chose a non-finite destination {local}")
        dests[i] = spec.frame.to_global(local)
    moved = list(config.positions)
    for i in active:
        moved[i] = clamp_move(config.positions[i], dests[i], specs[i].sigma)
    return Configuration(tuple(moved), config.time + 1), tuple(dests)


# -- schedules ----------------------------------------------------------------

class Synchronous:
    kind = "synchronous"

    def sets(self, n: int) -> Iterator[frozenset]:
        everyone = frozenset(range(n))
        while True:
            yield everyone

    def describe(self) -> dict:
        return {"kind": self.kind}


@dataclass
class RandomFair:
    """Random activations with a hard fairness window.

    Each robot is active with probability ``p`` per instant; a robot idle for
    ``window - 1`` consecutive instants is forced active, so no robot is idle
    ``window`` instants in a row.  An empty draw activates one robot at random.
    """

    seed: int = 0
    window: int = 8
    p: float = 0.5
    kind: str = field(default="random_fair", init=False)

    def __post_init__(self):
        if self.window < 1:
            raise ConfigurationError("fairness window must be at least 1")

    def sets(self, n: int) -> Iterator[frozenset]:
        rng = random.Random(self.seed)
        idle = [0] * n
        while True:
            act = {i for i in range(n) if idle[i] >= self.window - 1 or rng.random() < self.p}
            if not act:
                act = {rng.randrange(n)}
            for i in range(n):
                idle[i] = 0 if i in act else idle[i] + 1
            yield frozenset(act)

    def describe(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "window": self.window, "p": self.p}


@dataclass
class Explicit:
    active_sets: list
    kind: str = field(default="explicit", init=False)

    def __post_init__(self):
        self.active_sets = [frozenset(s) for s in self.active_sets]
        for t, s in enumerate(self.active_sets):
            if not s:
                raise ConfigurationError(f"explicit schedule has an empty active set at instant {t}")

    def sets(self, n: int) -> Iterator[frozenset]:
        for s in self.active_sets:
            if any(not 0 <= i < n for i in s):
                raise ConfigurationError(f"active set {sorted(s)} names a robot outside 0..{n - 1}")
            yield s
        raise EngineFault("explicit schedule exhausted before the horizon")

    def describe(self) -> dict:
        return {"kind": self.kind, "active_sets": [sorted(s) for s in self.active_sets]}


# -- traces -----------------------------------------------------------------

def canonical(x: float) -> float:
    """Round to the trace precision; idempotent and stable through text."""
    return float(f"{x:.{TRACE_DIGITS}g}")


@dataclass(slots=True)
class Record:
    """One instant: configuration ``P(t)`` and what happened during ``t``.

    The last record of a trace has an empty active set.
    """

    t: int
    active: tuple
    positions: tuple
    destinations: tuple
    phases: tuple
    events: tuple

    def to_json(self) -> dict:
        return {
            "t": self.t,
            "active": list(self.active),
            "pos": [list(p) for p in self.positions],
            "dest": [None if d is None else list(d) for d in self.destinations],
            "phase": list(self.phases),
            "events": [list(e) for e in self.events],
        }

    @classmethod
    def from_json(cls, obj: dict) -> "Record":
        return cls(
            obj["t"],
            tuple(obj["active"]),
            tuple((p[0], p[1]) for p in obj["pos"]),
            tuple(None if d is None else (d[0], d[1]) for d in obj["dest"]),
            tuple(obj["phase"]),
            tuple(tuple(e) for e in obj["events"]),
        )


@dataclass
class Trace:
    header: dict
    records: list = field(default_factory=list)

    def __len__(self):
        return len(self.records)

    @property
    def horizon(self) -> int:
        return len(self.records) - 1

    def configurations(self) -> list:
        return [r.positions for r in self.records]


def _canon_point(p):
    return None if p is None else (canonical(p[0]), canonical(p[1]))


class Simulation:
    """A run in progress: configuration, robots, schedule, and the trace so far.

    ``script`` holds ``(instant, sender, recipient_index, bits)`` messages
    that are enqueued at the start of their instant.
    """

    def __init__(self, initial: Configuration, specs: Sequence[RobotSpec], schedule=None,
                 header: Optional[dict] = None, script: Sequence = ()):
        if len(specs) != len(initial.positions):
            raise ConfigurationError("one RobotSpec per robot is required")
        self.config = initial
        self.specs = list(specs)
        self.schedule = schedule if schedule is not None else Synchronous()
        self._sets = None
        self.header = dict(header or {})
        self.header.setdefault("n", len(specs))
        self.header.setdefault("sigma", [s.sigma for s in specs])
        self.header.setdefault("schedule", self.schedule.describe())
        self.script = sorted(script, key=lambda m: m[0])
        self._script_pos = 0
        self.records: list = []
        self._pending: list = []
        self._next_msg = 0
        ids = tuple(s.visible_id for s in specs) if specs[0].visible_id is not None else None
        for i, spec in enumerate(self.specs):
            spec.memory.setup(View(observe(initial, spec.frame), i, ids))

    @property
    def t(self) -> int:
        return self.config.time

    @property
    def robots(self) -> list:
        return [s.memory for s in self.specs]

    def send(self, sender: int, recipient_label: int, bits) -> dict:
        """Queue ``bits`` at ``sender`` for the robot it calls ``recipient_label``."""
        bits = tuple(int(b) for b in bits)
        if not bits:
            raise ValueError("a message needs at least one bit")
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"bits must be 0/1, got {bits}")
        robot = self.specs[sender].memory
        recipient = robot.resolve_label(recipient_label)
        msg_id = self._next_msg
        self._next_msg += 1
        robot.outbox.push(msg_id, recipient_label, recipient, bits)
        self._pending.append(("enqueue", sender, recipient, "".join(map(str, bits)), msg_id, recipient_label))
        return {"msg_id": msg_id, "sender": sender, "recipient": recipient,
                "recipient_label": recipient_label, "bits": bits, "enqueued_at": self.t}

    def send_to(self, sender: int, recipient: int, bits) -> dict:
        """Like :meth:`send` but addressed by engine index."""
        return self.send(sender, self.specs[sender].memory.label_for(recipient), bits)

    def _enqueue_due(self) -> None:
        while self._script_pos < len(self.script) and self.script[self._script_pos][0] <= self.t:
            _, sender, recipient, bits = self.script[self._script_pos][:4]
            self.send_to(sender, recipient, bits)
            self._script_pos += 1

    def advance(self, active=None) -> Record:
        """Execute one instant; ``active`` overrides the schedule."""
        self._enqueue_due()
        if active is None:
            if self._sets is None:
                self._sets = self.schedule.sets(len(self.specs))
            active = next(self._sets)
        events = self._pending
        self._pending = []
        before = self.config
        self.config, dests = step(before, active, self.specs, events)
        rec = Record(
            before.time,
            tuple(sorted(active)),
            tuple(_canon_point(p) for p in before.positions),
            tuple(_canon_point(d) for d in dests),
            tuple(s.memory.phase for s in self.specs),
            tuple(events),
        )
        self.records.append(rec)
        return rec

    def final_record(self) -> Record:
        self._enqueue_due()
        events, self._pending = tuple(self._pending), []
        return Record(self.t, (), tuple(_canon_point(p) for p in self.config.positions),
                      (None,) * len(self.specs), tuple(s.memory.phase for s in self.specs), events)

    def run(self, horizon: int) -> Trace:
        if horizon < 0:
            raise ValueError("horizon must be non-negative")
        while self.t < horizon:
            self.advance()
        return Trace(dict(self.header, horizon=horizon), self.records + [self.final_record()])

    def clone(self) -> "Simulation":
        """Independent copy for branching exploration (schedule state is not copied)."""
        other = object.__new__(Simulation)
        other.__dict__.update(self.__dict__)
        other.specs = [RobotSpec(s.sigma, s.frame, s.memory.copy(), s.visible_id) for s in self.specs]
        other.records = list(self.records)
        other._pending = list(self._pending)
        other._sets = None
        return other


def run(initial: Configuration, specs: Sequence[RobotSpec], schedule, horizon: int,
        header: Optional[dict] = None, script: Sequence = ()) -> Trace:
    return Simulation(initial, specs, schedule, header, script).run(horizon)
