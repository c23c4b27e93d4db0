"""Two synchronous robots: one bit per pair of instants.

On an even instant a robot with a pending bit steps sideways, to its right
of the line toward the peer for 0 and to its left for 1.  On the following
odd instant it steps back home.  A robot with nothing to say never moves.
"""

from __future__ import annotations

import math

from movesignal.geometry import Point, add, clockwise_angle, dist, right_of, scale, sub, unit
from movesignal.model import ConfigurationError
from movesignal.protocols.base import DECODE, ENCODE, FAULT, Robot


class Sync2Robot(Robot):
    synchronous = True
    phase = "home"

    def __init__(self, sigma: float):
        super().__init__(sigma)
        self.clock = 0
        self.sending = None

    def setup(self, view) -> None:
        super().setup(view)
        if self.n != 2:
            raise ConfigurationError(f"sync2 runs with exactly 2 robots, got {self.n}")
        self.peer = 1 - self.me
        self.home = view.points[self.me]
        self.peer_home = view.points[self.peer]
        gap = dist(self.home, self.peer_home)
        self.amplitude = min(self.sigma, gap / 4.0)
        self.right = right_of(unit(sub(self.peer_home, self.home)))
        # the peer steps to ITS right of the line toward us for a 0
        self.peer_right = right_of(unit(sub(self.home, self.peer_home)))

    def resolve_label(self, label: int) -> int:
        if label != 1:
            raise ValueError("in sync2 the only recipient label is 1 (the peer)")
        return self.peer

    def label_for(self, index: int) -> int:
        if index != self.peer:
            raise ValueError("sync2 robots can only address their peer")
        return 1

    def decode(self, view, events) -> None:
        moved = sub(view.points[self.peer], self.peer_home)
        if math.hypot(*moved) <= 1e-9 * max(1.0, abs(self.peer_home[0]), abs(self.peer_home[1])):
            return
        if self.clock % 2 == 0:
            # the peer is only ever away from home right after an even instant
            events.append((FAULT, self.me, f"peer away from home at even instant {self.clock}"))
            return
        angle = clockwise_angle(self.peer_right, moved)
        if angle <= math.pi / 4 or angle >= 7 * math.pi / 4:
            bit = 0
        elif abs(angle - math.pi) <= math.pi / 4:
            bit = 1
        else:
            events.append((FAULT, self.me, f"peer displacement at {angle:.3f} rad is neither right nor left"))
            return
        self._emit_decoded(events, self.peer, self.me, bit)

    def activate(self, view, events):
        self.decode(view, events)
        t = self.clock
        self.clock += 1
        if t % 2 == 0:
            if not self.outbox:
                self.phase = "home"
                return self.home
            _, recipient, bit = self.outbox.pop_bit()
            self.sending = (recipient, bit)
            events.append((ENCODE, self.me, recipient, bit, "start"))
            self.phase = f"send{bit}"
            side = self.right if bit == 0 else Point(-self.right[0], -self.right[1])
            return add(self.home, scale(side, self.amplitude))
        if self.sending is not None:
            recipient, bit = self.sending
            events.append((ENCODE, self.me, recipient, bit, "done"))
            self.sending = None
        self.phase = "home"
        return self.home
