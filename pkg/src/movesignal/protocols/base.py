"""Pieces shared by every protocol automaton."""

from __future__ import annotations

import copy
from collections import deque

from movesignal.geometry import dist

# event tags written into traces
ENQUEUE = "enqueue"
CHANGE = "change"
TURN = "turn"
ENCODE = "encode"
DECODE = "decode"
FAULT = "fault"

# Frames are fixed for a run, so a robot that did not move maps to the same
# local point bit for bit; the threshold only needs to clear float noise.
CHANGE_EPS = 1e-12


class ProtocolFault(RuntimeError):
    pass


class Outbox:
    """FIFO of pending messages; bits leave one at a time."""

    def __init__(self):
        self._queue = deque()

    def push(self, msg_id, recipient_label, recipient, bits) -> None:
        if not bits:
            raise ValueError("empty message")
        self._queue.append([msg_id, recipient_label, recipient, tuple(bits), 0])

    def __len__(self):
        return len(self._queue)

    def __bool__(self):
        return bool(self._queue)

    def pending_bits(self) -> int:
        return sum(len(m[3]) - m[4] for m in self._queue)

    def pop_bit(self):
        """Return ``(recipient_label, recipient, bit)`` and advance."""
        msg = self._queue[0]
        bit = msg[3][msg[4]]
        msg[4] += 1
        if msg[4] == len(msg[3]):
            self._queue.popleft()
        return msg[1], msg[2], bit

    def copy(self) -> "Outbox":
        other = Outbox()
        other._queue = deque(list(m) for m in self._queue)
        return other


class PeerLog:
    """Last seen position of every other robot and change counters.

    At most one change is recorded per peer per activation: the peer's
    position now versus where this robot last saw it.
    """

    def __init__(self, n: int, me: int):
        self.me = me
        self.last_seen = [None] * n
        self.total = [0] * n
        self.since_turn = [0] * n

    def update(self, points, events=None) -> list:
        changed = []
        for j, q in enumerate(points):
            if j == self.me:
                continue
            last = self.last_seen[j]
            if last is not None and dist(q, last) > CHANGE_EPS * max(1.0, abs(q[0]), abs(q[1])):
                self.total[j] += 1
                self.since_turn[j] += 1
                changed.append(j)
                if events is not None:
                    events.append((CHANGE, self.me, j))
            self.last_seen[j] = q
        return changed

    def reset(self) -> None:
        self.since_turn = [0] * len(self.since_turn)

    def acked(self, peers, times: int = 2) -> bool:
        return all(self.since_turn[j] >= times for j in peers)

    def copy(self) -> "PeerLog":
        other = PeerLog.__new__(PeerLog)
        other.me = self.me
        other.last_seen = list(self.last_seen)
        other.total = list(self.total)
        other.since_turn = list(self.since_turn)
        return other


class ExcursionDecoder:
    """Turns per-sender position classes into bits.

    A class is ``None`` when the sender sits in its neutral region and
    ``(label, side)`` while it is out on a signalling half-diameter.  A bit is
    emitted on every neutral -> out transition; a switch between two different
    half-diameters without passing through neutral is a fault.
    """

    def __init__(self, n: int):
        self.state = [None] * n

    def feed(self, sender: int, cls):
        """Return ``("bit", label, side)``, ``("fault", text)`` or None."""
        prev = self.state[sender]
        self.state[sender] = cls
        if cls is None or cls == prev:
            return None
        if prev is None:
            return ("bit", cls[0], int(cls[1]))
        return ("fault", f"sender {sender} jumped from {prev} to {cls} without returning")

    def copy(self) -> "ExcursionDecoder":
        other = ExcursionDecoder.__new__(ExcursionDecoder)
        other.state = list(self.state)
        return other


class Robot:
    """Protocol automaton.  Subclasses implement :meth:`activate`.

    ``activate`` receives a :class:`~movesignal.model.View` and an event list,
    decodes what it sees, updates its memory and returns a destination in
    local coordinates.
    """

    synchronous = False
    phase = "asleep"

    def __init__(self, sigma: float):
        if not sigma > 0.0:
            raise ValueError("sigma must be positive")
        self.sigma = sigma
        self.outbox = Outbox()
        self.me = None
        self.n = None
        self.decoded = []

    def setup(self, view) -> None:
        self.me = view.me
        self.n = len(view.points)

    # naming -------------------------------------------------------------
    def resolve_label(self, label: int) -> int:
        """Engine index of the robot this robot calls ``label``."""
        raise NotImplementedError

    def label_for(self, index: int) -> int:
        raise NotImplementedError

    def activate(self, view, events: list):
        raise NotImplementedError

    def copy(self) -> "Robot":
        other = copy.copy(self)
        other.outbox = self.outbox.copy()
        other.decoded = list(self.decoded)
        return other

    def _emit_decoded(self, events, sender, recipient, bit) -> None:
        self.decoded.append((sender, recipient, bit))
        events.append((DECODE, self.me, sender, recipient, bit))
