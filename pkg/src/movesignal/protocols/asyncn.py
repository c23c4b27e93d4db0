"""Asynchronous n-robot protocol.

Granulars carry ``n + 1`` diameters.  Diameter 0 (``kappa``) lies on the
robot's horizon ray and belongs to nobody: moving on it means "no bit".
Robot label ``k`` owns diameter ``k + 1``.

Every activation moves the robot.  Each heading is held until every other
robot has been seen to move twice, then the robot turns.  Sending a bit:

1. jump to the granular centre (if not there),
2. walk out on the recipient's diameter, side given by the bit,
3. once all peers moved twice, jump back to the centre,
4. walk on kappa until all peers moved twice again (resync).

With nothing to send the robot keeps bouncing on kappa.  Steps along a
heading halve each activation so the robot never reaches a target it is
walking toward.  Kappa walks alternate between the two halves of kappa and,
per half, between two disjoint distance bands, so a new heading never
revisits a spot visited under the previous heading.  That freshness is what
keeps the moved-twice acknowledgment sound.
"""

from __future__ import annotations

from movesignal.geometry import Point, Side, add, classify_displacement, scale, slice_direction
from movesignal.protocols.base import ENCODE, FAULT, TURN, ExcursionDecoder, PeerLog, Robot
from movesignal.protocols.syncn import ANON_CHIRALITY, NAMING_MODES, syncn_preprocess

ASLEEP = "asleep"
KAPPA = "kappa"
RESYNC = "resync"
CENTER = "center"
SEND = "send"
RETURN = "return"


class AsyncNRobot(Robot):
    phase = ASLEEP

    def __init__(self, sigma: float, mode: str = ANON_CHIRALITY):
        super().__init__(sigma)
        if mode not in NAMING_MODES:
            raise ValueError(f"unknown naming mode {mode!r}")
        self.mode = mode
        self.ready = True
        self.k = 0
        self.side = 1
        self.band = None
        self.last_band = {1: 1, -1: 1}
        self.sending = None

    def setup(self, view) -> None:
        """Preprocess from ``P(t0)``, which every robot is assumed to know."""
        super().setup(view)
        pre = syncn_preprocess(view.points, self.mode, view.ids, extra_slice=True)
        self.granulars = pre.granulars
        self.namings = pre.namings
        g = self.granulars[self.me]
        self.center = g.center
        self.kappa = g.zero_direction
        self.mu = min(self.sigma, g.radius / 4.0)
        a = self.mu / 8.0
        self.bands = ((a, 2.0 * a), (3.0 * a, 4.0 * a))
        self.send_band = self.bands[0]
        self.peers = [j for j in range(self.n) if j != self.me]
        self.log = PeerLog(self.n, self.me)
        self.log.last_seen = list(view.points)
        self.decoder = ExcursionDecoder(self.n)

    def resolve_label(self, label: int) -> int:
        if not 0 <= label < self.n:
            raise ValueError(f"recipient label {label} outside 0..{self.n - 1}")
        index = self.namings[self.me].index_of(label)
        if index == self.me:
            raise ValueError("a robot cannot address itself")
        return index

    def label_for(self, index: int) -> int:
        if index == self.me:
            raise ValueError("a robot cannot address itself")
        return self.namings[self.me].label_of(index)

    def copy(self):
        other = super().copy()
        other.log = self.log.copy()
        other.decoder = self.decoder.copy()
        other.last_band = dict(self.last_band)
        return other

    # -- decoding ---------------------------------------------------------
    def classify(self, sender: int, pos):
        g = self.granulars[sender]
        cls = classify_displacement(g, g.center, pos)
        if cls is None or cls[0] == 0:
            return None
        return cls[0] - 1, cls[1]

    def decode(self, points, events) -> None:
        for s in self.peers:
            out = self.decoder.feed(s, self.classify(s, points[s]))
            if out is None:
                continue
            if out[0] == "fault":
                events.append((FAULT, self.me, out[1]))
                continue
            _, label, bit = out
            recipient = self.namings[s].index_of(label)
            if recipient == s:
                events.append((FAULT, self.me, f"sender {s} used its own diameter {label}"))
                continue
            self._emit_decoded(events, s, recipient, bit)

    # -- moving -----------------------------------------------------------
    def _turn(self, phase, events) -> None:
        self.phase = phase
        self.k = 0
        self.log.reset()
        events.append((TURN, self.me, phase))

    def _kappa_point(self) -> Point:
        lo, hi = self.band
        d = lo if self.k == 0 else hi - (hi - lo) * 0.5 ** self.k
        return add(self.center, scale(self.kappa, self.side * d))

    def _start_kappa(self, side, phase, events) -> Point:
        self.side = side
        band = 1 - self.last_band[side]
        self.last_band[side] = band
        self.band = self.bands[band]
        self._turn(phase, events)
        return self._kappa_point()

    def _send_point(self) -> Point:
        lo, hi = self.send_band
        d = lo if self.k == 0 else hi - (hi - lo) * 0.5 ** self.k
        return add(self.center, scale(self.send_dir, d))

    def _start_send(self, events) -> Point:
        label, recipient, bit = self.outbox.pop_bit()
        self.sending = (recipient, bit)
        self.send_dir = slice_direction(self.granulars[self.me], label + 1, Side(bit))
        events.append((ENCODE, self.me, recipient, bit, "start"))
        self._turn(SEND, events)
        return self._send_point()

    def _to_center(self, events) -> Point:
        self._turn(CENTER, events)
        return self.center

    def activate(self, view, events):
        points = view.points
        self.log.update(points, events)
        self.decode(points, events)
        acked = self.log.acked(self.peers)
        phase = self.phase

        if phase == ASLEEP:
            if self.outbox:
                return self._start_send(events)
            return self._start_kappa(1, KAPPA, events)

        if phase in (KAPPA, RESYNC):
            if acked:
                self.ready = True
                if self.outbox:
                    return self._to_center(events)
                return self._start_kappa(-self.side, KAPPA, events)
            if self.ready and self.outbox:
                return self._to_center(events)
            self.k += 1
            return self._kappa_point()

        if phase == CENTER:
            return self._start_send(events)

        if phase == SEND:
            if acked:
                recipient, bit = self.sending
                events.append((ENCODE, self.me, recipient, bit, "done"))
                self.sending = None
                self._turn(RETURN, events)
                return self.center
            self.k += 1
            return self._send_point()

        # RETURN: at the centre again, resynchronise on kappa
        self.ready = False
        return self._start_kappa(-self.side, RESYNC, events)
