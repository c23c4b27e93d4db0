"""Two asynchronous robots.

Both robots walk away from each other along the line H through their
starting positions.  Seeing the peer move twice while holding one direction
proves the peer has seen this robot move at least once, which is the only
acknowledgment available.  A bit is an excursion off H, to the East of the
robot's own North for 0 and to the West for 1, held until two peer moves are
seen.  The robot then jumps back to its departure point on H and walks North
again until two more peer moves are seen, so consecutive equal bits stay
apart.

Moves off H halve every activation, so the whole excursion stays shorter
than ``sigma`` and the way back is a single move.
"""

from __future__ import annotations

from movesignal.geometry import Point, add, dot, norm, right_of, scale, sub, unit
from movesignal.model import ConfigurationError
from movesignal.protocols.base import ENCODE, FAULT, TURN, PeerLog, Robot

NORTH_PHASE = "north"
SEND_PHASE = "send"
RETURN_PHASE = "return"
RESYNC_PHASE = "resync"


class Async2Robot(Robot):
    phase = "asleep"

    def __init__(self, sigma: float):
        super().__init__(sigma)
        self.step = sigma / 2.0
        self.ready = False
        self.k = 0
        self.anchor = None
        self.bit = None

    def setup(self, view) -> None:
        super().setup(view)
        if self.n != 2:
            raise ConfigurationError(f"async2 runs with exactly 2 robots, got {self.n}")
        self.peer = 1 - self.me
        pos, q = view.points[self.me], view.points[self.peer]
        self.north = unit(sub(pos, q))
        self.east = right_of(self.north)
        self.line_point = pos
        self.peer_east = Point(-self.east[0], -self.east[1])
        # moves are counted from the t0 configuration on
        self.log = PeerLog(2, self.me)
        self.log.last_seen = list(view.points)
        # decoder: None = peer on H, otherwise the side it is out on
        self.peer_side = None

    def resolve_label(self, label: int) -> int:
        if label != 1:
            raise ValueError("in async2 the only recipient label is 1 (the peer)")
        return self.peer

    def label_for(self, index: int) -> int:
        if index != self.peer:
            raise ValueError("async2 robots can only address their peer")
        return 1

    def copy(self):
        other = super().copy()
        other.log = self.log.copy()
        return other

    # -- decoding ---------------------------------------------------------
    def decode(self, q, events) -> None:
        rel = sub(q, self.line_point)
        offset = dot(rel, self.peer_east)
        tol = 1e-7 * max(1.0, norm(rel))
        side = None if abs(offset) <= tol else (0 if offset > 0.0 else 1)
        prev, self.peer_side = self.peer_side, side
        if side is None or side == prev:
            return
        if prev is not None:
            events.append((FAULT, self.me, "peer crossed H without stopping on it"))
            return
        self._emit_decoded(events, self.peer, self.me, side)

    # -- moving -----------------------------------------------------------
    def _turn(self, phase, events, anchor) -> None:
        self.phase = phase
        self.k = 0
        self.anchor = anchor
        self.log.reset()
        events.append((TURN, self.me, phase))

    def _north_move(self) -> Point:
        self.k += 1
        return add(self.anchor, scale(self.north, self.step * self.k))

    def _side_vector(self, bit: int) -> Point:
        return self.east if bit == 0 else Point(-self.east[0], -self.east[1])

    def _start_bit(self, pos, events) -> Point:
        _, recipient, bit = self.outbox.pop_bit()
        self.bit = (recipient, bit)
        events.append((ENCODE, self.me, recipient, bit, "start"))
        self._turn(SEND_PHASE, events, pos)
        return add(pos, scale(self._side_vector(bit), self.step))

    def _after_return(self, pos, events) -> Point:
        self.ready = False
        self._turn(RESYNC_PHASE, events, pos)
        return self._north_move()

    def activate(self, view, events):
        pos, q = view.points[self.me], view.points[self.peer]
        self.log.update(view.points, events)
        self.decode(q, events)
        if self.phase == "asleep":
            self._turn(NORTH_PHASE, events, pos)
            return self._north_move()
        acked = self.log.since_turn[self.peer] >= 2

        if self.phase in (NORTH_PHASE, RESYNC_PHASE):
            if acked:
                self.ready = True
                self.phase = NORTH_PHASE  # same heading, so not a turn
            if self.ready and self.outbox:
                return self._start_bit(pos, events)
            return self._north_move()

        if self.phase == SEND_PHASE:
            if acked:
                recipient, bit = self.bit
                events.append((ENCODE, self.me, recipient, bit, "done"))
                departure = self.anchor
                self._turn(RETURN_PHASE, events, departure)
                return departure
            self.k += 1
            return add(self.anchor, scale(self._side_vector(self.bit[1]), self.step * (2.0 - 0.5 ** self.k)))

        # RETURN_PHASE: back on H at the departure point
        return self._after_return(self.anchor, events)
