"""Synchronous n-robot protocol with three naming schemes.

Every robot owns a granular cut into ``n`` labelled diameters.  To send bit
``b`` to the robot it calls ``k``, a robot steps out along diameter ``k`` on
side ``b`` during an even instant and steps back on the next one.  Since each
robot can rebuild everyone's granular and naming, every robot decodes every
message.
"""

from __future__ import annotations

from dataclasses import dataclass

from movesignal.geometry import (
    Granular,
    Point,
    RelativeNaming,
    Side,
    add,
    classify_displacement,
    granular_radius,
    horizon_direction,
    relative_naming_chirality,
    relative_naming_sod,
    scale,
    slice_direction,
    smallest_enclosing_circle,
)
from movesignal.model import ConfigurationError
from movesignal.protocols.base import ENCODE, FAULT, ExcursionDecoder, Robot

IDENTIFIED = "identified"
ANON_SOD = "sod"
ANON_CHIRALITY = "chirality"
NAMING_MODES = (IDENTIFIED, ANON_SOD, ANON_CHIRALITY)
NORTH = Point(0.0, 1.0)


@dataclass(frozen=True)
class Preprocessed:
    granulars: tuple
    namings: tuple


def syncn_preprocess(points, mode: str, ids=None, extra_slice: bool = False) -> Preprocessed:
    """Granular and naming of every robot, as computed by one observer.

    ``points`` is the t0 configuration in the observer's frame.  With
    ``extra_slice`` the granulars get ``n + 1`` diameters, diameter 0 being
    the unassigned one and robot label ``k`` using diameter ``k + 1``.
    """
    n = len(points)
    if n < 2:
        raise ConfigurationError("n-robot protocols need at least 2 robots")
    if mode not in NAMING_MODES:
        raise ConfigurationError(f"unknown naming mode {mode!r}")
    slices = n + 1 if extra_slice else n
    if mode == ANON_CHIRALITY:
        sec = smallest_enclosing_circle(points)
        zeros = [horizon_direction(points, i, sec) for i in range(n)]
        namings = [relative_naming_chirality(points, i, sec) for i in range(n)]
    else:
        zeros = [NORTH] * n
        if mode == IDENTIFIED:
            if ids is None or any(v is None for v in ids):
                raise ConfigurationError("identified mode needs a visible id on every robot")
            if len(set(ids)) != n:
                raise ConfigurationError(f"visible ids {ids} are not distinct")
            order = sorted(range(n), key=lambda i: ids[i])
            labels = [0] * n
            for rank, i in enumerate(order):
                labels[i] = rank
            shared = RelativeNaming(None, tuple(labels))
        else:
            shared = relative_naming_sod(points)
        namings = [shared] * n
    granulars = []
    for i, p in enumerate(points):
        others = [q for j, q in enumerate(points) if j != i]
        granulars.append(Granular(p, granular_radius(p, others), slices, zeros[i]))
    return Preprocessed(tuple(granulars), tuple(namings))


class SyncNRobot(Robot):
    synchronous = True
    phase = "home"

    def __init__(self, sigma: float, mode: str = ANON_CHIRALITY):
        super().__init__(sigma)
        if mode not in NAMING_MODES:
            raise ConfigurationError(f"unknown naming mode {mode!r}")
        self.mode = mode
        self.clock = 0
        self.sending = None

    def setup(self, view) -> None:
        super().setup(view)
        pre = syncn_preprocess(view.points, self.mode, view.ids)
        self.granulars = pre.granulars
        self.namings = pre.namings
        self.home = self.granulars[self.me].center
        self.amplitude = min(self.sigma, self.granulars[self.me].radius / 2.0)
        self.decoder = ExcursionDecoder(self.n)

    def resolve_label(self, label: int) -> int:
        naming = self.namings[self.me]
        if not 0 <= label < self.n:
            raise ValueError(f"recipient label {label} outside 0..{self.n - 1}")
        index = naming.index_of(label)
        if index == self.me:
            raise ValueError("a robot cannot address itself")
        return index

    def label_for(self, index: int) -> int:
        if index == self.me:
            raise ValueError("a robot cannot address itself")
        return self.namings[self.me].label_of(index)

    def classify(self, sender: int, pos):
        g = self.granulars[sender]
        return classify_displacement(g, g.center, pos)

    def decode(self, view, events) -> None:
        for s, pos in enumerate(view.points):
            if s == self.me:
                continue
            out = self.decoder.feed(s, self.classify(s, pos))
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

    def activate(self, view, events):
        self.decode(view, events)
        t = self.clock
        self.clock += 1
        if t % 2 == 0:
            if not self.outbox:
                self.phase = "home"
                return self.home
            label, recipient, bit = self.outbox.pop_bit()
            self.sending = (recipient, bit)
            events.append((ENCODE, self.me, recipient, bit, "start"))
            self.phase = f"send{bit}"
            direction = slice_direction(self.granulars[self.me], label, Side(bit))
            return add(self.home, scale(direction, self.amplitude))
        if self.sending is not None:
            recipient, bit = self.sending
            events.append((ENCODE, self.me, recipient, bit, "done"))
            self.sending = None
        self.phase = "home"
        return self.home

    def copy(self):
        other = super().copy()
        other.decoder = self.decoder.copy()
        return other
