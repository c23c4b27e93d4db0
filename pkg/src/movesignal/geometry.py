"""Plane geometry for movement-signal protocols.

Points are plain ``(x, y)`` tuples (``Point`` is a NamedTuple so both styles
work).  All angles are measured clockwise, matching the handedness shared by
every robot: rotating ``(0, 1)`` clockwise by a quarter turn gives ``(1, 0)``.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from enum import IntEnum
from typing import NamedTuple, Optional, Sequence

EPS = 1e-9
ANGLE_EPS = 1e-9
TWO_PI = 2.0 * math.pi


class GeometryError(ValueError):
    """Raised on degenerate input (empty sets, coincident points, zero vectors)."""


class Point(NamedTuple):
    x: float
    y: float


class Side(IntEnum):
    """Half of a diameter.  ZERO is the N/E/NE half and carries bit 0."""

    ZERO = 0
    ONE = 1


def sub(p, q) -> Point:
    return Point(p[0] - q[0], p[1] - q[1])


def add(p, q) -> Point:
    return Point(p[0] + q[0], p[1] + q[1])


def scale(v, k: float) -> Point:
    return Point(v[0] * k, v[1] * k)


def dot(u, v) -> float:
    return u[0] * v[0] + u[1] * v[1]


def cross(u, v) -> float:
    return u[0] * v[1] - u[1] * v[0]


def norm(v) -> float:
    return math.hypot(v[0], v[1])


def dist(p, q) -> float:
    return math.hypot(p[0] - q[0], p[1] - q[1])


def unit(v) -> Point:
    n = math.hypot(v[0], v[1])
    if n == 0.0:
        raise GeometryError("cannot normalise the zero vector")
    return Point(v[0] / n, v[1] / n)


def rotate_cw(v, angle: float) -> Point:
    c, s = math.cos(angle), math.sin(angle)
    return Point(v[0] * c + v[1] * s, -v[0] * s + v[1] * c)


def right_of(v) -> Point:
    """Quarter turn clockwise."""
    return Point(v[1], -v[0])


@dataclass(frozen=True)
class Circle:
    center: Point
    radius: float

    def __post_init__(self):
        if not self.radius >= 0.0:
            raise GeometryError(f"negative radius {self.radius}")

    def contains(self, p, tol: float = EPS) -> bool:
        return dist(self.center, p) <= self.radius + tol


@dataclass(frozen=True)
class Granular:
    """A robot's private disc, cut into ``slice_count`` labelled diameters."""

    center: Point
    radius: float
    slice_count: int
    zero_direction: Point

    def __post_init__(self):
        if not self.radius > 0.0:
            raise GeometryError("granular radius must be positive")
        if self.slice_count < 1:
            raise GeometryError("granular needs at least one diameter")
        if abs(norm(self.zero_direction) - 1.0) > 1e-9:
            raise GeometryError("zero_direction must be a unit vector")

    @property
    def slice_angle(self) -> float:
        return math.pi / self.slice_count

    def contains(self, p) -> bool:
        """Strict interior test."""
        return dist(self.center, p) < self.radius


@dataclass(frozen=True)
class RelativeNaming:
    """Labels ``0..n-1`` handed out to robots (indexed as in the view)."""

    observer: Optional[int]
    labels: tuple

    def __post_init__(self):
        if sorted(self.labels) != list(range(len(self.labels))):
            raise GeometryError(f"labels {self.labels} are not a bijection onto 0..n-1")

    def index_of(self, label: int) -> int:
        return self.labels.index(label)

    def label_of(self, index: int) -> int:
        return self.labels[index]


def granular_radius(p, others: Sequence) -> float:
    """Radius of the largest disc centred at ``p`` inside its Voronoi cell.

    The nearest edge of ``p``'s cell lies on the bisector with its nearest
    neighbour, so the inscribed radius is half the nearest-neighbour distance;
    no cell polygon is needed.
    """
    if not others:
        raise GeometryError("granular_radius needs at least one other point")
    nearest = min(dist(p, q) for q in others)
    if nearest <= EPS:
        raise GeometryError(f"point {tuple(p)} coincides with another robot")
    return 0.5 * nearest


def clockwise_angle(reference, target) -> float:
    """Clockwise angle in ``[0, 2*pi)`` swept from ``reference`` to ``target``."""
    if (reference[0] == 0.0 and reference[1] == 0.0) or (target[0] == 0.0 and target[1] == 0.0):
        raise GeometryError("clockwise_angle is undefined for a zero vector")
    angle = math.atan2(-cross(reference, target), dot(reference, target))
    if angle < 0.0:
        angle += TWO_PI
    if angle >= TWO_PI:
        angle = 0.0
    return angle


# -- smallest enclosing circle ---------------------------------------------

_MULTIPLICATIVE_EPS = 1 + 1e-14


def _in_circle(c, p) -> bool:
    return c is not None and math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * _MULTIPLICATIVE_EPS


def _diametral(a, b):
    cx = (a[0] + b[0]) / 2.0
    cy = (a[1] + b[1]) / 2.0
    return (cx, cy, max(math.hypot(cx - a[0], cy - a[1]), math.hypot(cx - b[0], cy - b[1])))


def _circumcircle(a, b, c):
    # translate to the bounding-box centre to keep the determinant well scaled
    ox = (min(a[0], b[0], c[0]) + max(a[0], b[0], c[0])) / 2.0
    oy = (min(a[1], b[1], c[1]) + max(a[1], b[1], c[1])) / 2.0
    ax, ay = a[0] - ox, a[1] - oy
    bx, by = b[0] - ox, b[1] - oy
    cx, cy = c[0] - ox, c[1] - oy
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    x = ox + (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    y = oy + (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    r = max(math.hypot(x - a[0], y - a[1]), math.hypot(x - b[0], y - b[1]), math.hypot(x - c[0], y - c[1]))
    return (x, y, r)


def _circle_two(points, p, q):
    circ = _diametral(p, q)
    left = right = None
    for r in points:
        if _in_circle(circ, r):
            continue
        side = cross(sub(q, p), sub(r, p))
        c = _circumcircle(p, q, r)
        if c is None:
            continue
        pos = cross(sub(q, p), sub(c, p))
        if side > 0.0 and (left is None or pos > cross(sub(q, p), sub(left, p))):
            left = c
        elif side < 0.0 and (right is None or pos < cross(sub(q, p), sub(right, p))):
            right = c
    if left is None and right is None:
        return circ
    if left is None:
        return right
    if right is None:
        return left
    return left if left[2] <= right[2] else right


def _circle_one(points, p):
    c = (p[0], p[1], 0.0)
    for i, q in enumerate(points):
        if not _in_circle(c, q):
            c = _diametral(p, q) if c[2] == 0.0 else _circle_two(points[: i + 1], p, q)
    return c


def smallest_enclosing_circle(points: Sequence) -> Circle:
    """Welzl's randomised incremental algorithm with a fixed shuffle seed."""
    if not points:
        raise GeometryError("smallest enclosing circle of an empty set")
    pts = [(float(x), float(y)) for x, y in points]
    random.Random(0x5EC).shuffle(pts)
    c = None
    for i, p in enumerate(pts):
        if c is None or not _in_circle(c, p):
            c = _circle_one(pts[: i + 1], p)
    center = Point(c[0], c[1])
    # tighten to the farthest point so containment holds exactly
    radius = max(dist(center, p) for p in pts)
    return Circle(center, radius)


# -- slices ------------------------------------------------------------------

def slice_direction(g: Granular, label: int, side: Side) -> Point:
    if not 0 <= label < g.slice_count:
        raise GeometryError(f"slice label {label} outside 0..{g.slice_count - 1}")
    v = rotate_cw(g.zero_direction, label * math.pi / g.slice_count)
    return v if side == Side.ZERO else Point(-v[0], -v[1])


def classify_displacement(g: Granular, start, end, tolerance: Optional[float] = None):
    """Map a move inside ``g`` back to ``(label, side)``.

    Returns None for no move and for a move that lands on the centre.  The
    default tolerance is half the inter-diameter angle, so every direction has
    exactly one nearest half-diameter.
    """
    dx, dy = end[0] - start[0], end[1] - start[1]
    scale_ = max(1.0, abs(end[0]), abs(end[1]))
    if math.hypot(dx, dy) <= EPS * scale_:
        return None
    if dist(end, g.center) <= EPS * scale_:
        return None
    step = math.pi / g.slice_count
    angle = clockwise_angle(g.zero_direction, (dx, dy))
    k = int(round(angle / step))
    deviation = abs(angle - k * step)
    k %= 2 * g.slice_count
    if deviation > (step / 2.0 if tolerance is None else tolerance) + 1e-12:
        raise GeometryError(f"direction deviates {deviation:.3g} rad from every diameter")
    return k % g.slice_count, (Side.ZERO if k < g.slice_count else Side.ONE)


# -- naming -----------------------------------------------------------------

def _check_distinct(points) -> None:
    seen = {}
    for i, p in enumerate(points):
        key = (p[0], p[1])
        if key in seen:
            raise GeometryError(f"robots {seen[key]} and {i} share position {key}")
        seen[key] = i


def relative_naming_sod(positions: Sequence) -> RelativeNaming:
    """Total order shared by robots that agree on both axes: x first, then y.

    Invariant under translation and positive scaling, which is all that
    differs between frames when the axes are shared.
    """
    _check_distinct(positions)
    order = sorted(range(len(positions)), key=lambda i: (positions[i][0], positions[i][1]))
    labels = [0] * len(positions)
    for rank, i in enumerate(order):
        labels[i] = rank
    return RelativeNaming(None, tuple(labels))


def relative_naming_chirality(positions: Sequence, observer: int, sec: Circle) -> RelativeNaming:
    """Naming built by ``observer`` from the SEC centre and its horizon ray.

    Robots are ordered by the clockwise angle of their radius from the ray
    centre->observer; robots on a common radius are ordered outward from the
    centre.  A robot sitting on the centre itself comes first.
    """
    _check_distinct(positions)
    o = sec.center
    scale_ = max(sec.radius, 1e-300)
    horizon = sub(positions[observer], o)
    if norm(horizon) <= EPS * max(1.0, scale_):
        raise GeometryError(f"robot {observer} sits on the SEC centre; horizon line undefined")
    keyed = []
    for i, p in enumerate(positions):
        v = sub(p, o)
        r = norm(v)
        if r <= EPS * max(1.0, scale_):
            keyed.append((-1.0, 0.0, i))
            continue
        a = clockwise_angle(horizon, v)
        if a > TWO_PI - ANGLE_EPS:
            a = 0.0
        keyed.append((a, r, i))
    keyed.sort()
    # angles that agree within ANGLE_EPS share a radius
    groups = []
    for a, r, i in keyed:
        if groups and a - groups[-1][0] <= ANGLE_EPS:
            groups[-1][1].append((r, i))
        else:
            groups.append((a, [(r, i)]))
    labels = [0] * len(positions)
    rank = 0
    for _, members in groups:
        for _, i in sorted(members):
            labels[i] = rank
            rank += 1
    return RelativeNaming(observer, tuple(labels))


def horizon_direction(positions: Sequence, robot: int, sec: Circle) -> Point:
    """Unit vector from the SEC centre toward ``robot``."""
    v = sub(positions[robot], sec.center)
    if norm(v) <= EPS * max(1.0, sec.radius):
        raise GeometryError(f"robot {robot} sits on the SEC centre; horizon line undefined")
    return unit(v)
