"""Assemble a ready-to-run :class:`~movesignal.model.Simulation` for a protocol."""

from __future__ import annotations

import random
from typing import Optional, Sequence

from movesignal.geometry import GeometryError, Point, dist
from movesignal.model import (
    Configuration,
    ConfigurationError,
    RobotSpec,
    Simulation,
    Synchronous,
    random_frame,
)
from movesignal.protocols import PROTOCOLS, AsyncNRobot, protocol_info
from movesignal.protocols.syncn import ANON_CHIRALITY, IDENTIFIED, NAMING_MODES, syncn_preprocess

TRACE_FORMAT = 1


def validate_setup(protocol: str, positions, sigmas, visible_ids=None, schedule=None,
                   naming: Optional[str] = None) -> None:
    """Raise :class:`ConfigurationError` naming the first violated assumption."""
    info = protocol_info(protocol)
    n = len(positions)
    if n < 2:
        raise ConfigurationError(f"{protocol} needs at least 2 robots, got {n}")
    if info.n_robots is not None and n != info.n_robots:
        raise ConfigurationError(f"{protocol} needs exactly {info.n_robots} robots, got {n}")
    if len(sigmas) != n:
        raise ConfigurationError(f"got {len(sigmas)} sigmas for {n} robots")
    for i, s in enumerate(sigmas):
        if not s > 0.0:
            raise ConfigurationError(f"robot {i}: sigma must be positive, got {s}")
    for i in range(n):
        for j in range(i + 1, n):
            if dist(positions[i], positions[j]) <= 1e-9:
                raise ConfigurationError(f"robots {i} and {j} share the position {tuple(positions[i])}")
    mode = naming or info.naming
    if naming is not None and protocol != "async_n":
        raise ConfigurationError(f"a naming choice only applies to async_n, not {protocol}")
    if mode is not None and mode not in NAMING_MODES:
        raise ConfigurationError(f"unknown naming {mode!r}; choose from {', '.join(NAMING_MODES)}")
    if mode == IDENTIFIED:
        if visible_ids is None or any(v is None for v in visible_ids):
            raise ConfigurationError(f"{protocol} with identified naming needs a visible_id on every robot")
        if len(set(visible_ids)) != n:
            raise ConfigurationError(f"visible ids {list(visible_ids)} are not distinct")
    elif visible_ids is not None and any(v is not None for v in visible_ids):
        raise ConfigurationError(f"{protocol} runs anonymous robots; drop the visible_id fields")
    if info.synchronous and schedule is not None and not isinstance(schedule, Synchronous):
        raise ConfigurationError(f"{protocol} is synchronous and needs the synchronous schedule, "
                                 f"got {schedule.describe()['kind']}")
    if mode == ANON_CHIRALITY:
        try:
            syncn_preprocess([Point(*p) for p in positions], ANON_CHIRALITY)
        except GeometryError as exc:
            raise ConfigurationError(f"chirality naming impossible: {exc}") from None


def global_layout(protocol: str, positions, sigmas, visible_ids=None, naming=None) -> dict:
    """Granulars and step bounds in global coordinates, for the monitors."""
    info = protocol_info(protocol)
    mode = naming or info.naming
    if not info.uses_granulars:
        return {}
    pre = syncn_preprocess([Point(*p) for p in positions], mode, visible_ids, info.extra_slice)
    out = {"granulars": [[g.center[0], g.center[1], g.radius] for g in pre.granulars]}
    if protocol == "async_n":
        out["mu"] = [min(s, g.radius / 4.0) for s, g in zip(sigmas, pre.granulars)]
    return out


def build_simulation(protocol: str, positions: Sequence, sigma=1.0, schedule=None,
                     visible_ids=None, frame_seeds=None, messages: Sequence = (),
                     naming: Optional[str] = None, rotate_frames: bool = True,
                     robot_factory=None) -> Simulation:
    """Validated simulation at ``t0``.

    ``sigma`` is one value or one per robot, in global units; each robot
    receives it converted to its own unit.  ``messages`` holds
    ``(instant, sender, recipient_index, bits)`` tuples.  Frames are random
    per robot (seeded by ``frame_seeds``, default the robot index) except that
    naming modes relying on a shared North keep every frame upright.
    ``robot_factory(local_sigma)`` replaces the protocol's automaton, which
    is how tests plug in deliberately broken variants.
    """
    positions = [Point(float(p[0]), float(p[1])) for p in positions]
    n = len(positions)
    sigmas = [float(sigma)] * n if isinstance(sigma, (int, float)) else [float(s) for s in sigma]
    if schedule is None:
        schedule = Synchronous()
    if visible_ids is not None and all(v is None for v in visible_ids):
        visible_ids = None
    validate_setup(protocol, positions, sigmas, visible_ids, schedule, naming)
    info = PROTOCOLS[protocol]
    mode = naming or info.naming
    upright = mode in (IDENTIFIED, "sod")
    seeds = list(range(n)) if frame_seeds is None else list(frame_seeds)
    if len(seeds) != n:
        raise ConfigurationError(f"got {len(seeds)} frame seeds for {n} robots")

    specs = []
    for i, p in enumerate(positions):
        frame = random_frame(p, random.Random(seeds[i]), rotate=rotate_frames and not upright)
        local_sigma = sigmas[i] / frame.unit_scale
        if robot_factory is not None:
            robot = robot_factory(local_sigma)
        elif protocol == "async_n":
            robot = AsyncNRobot(local_sigma, mode)
        else:
            robot = info.factory(local_sigma)
        vid = None if visible_ids is None else visible_ids[i]
        specs.append(RobotSpec(sigmas[i], frame, robot, vid))

    for at, sender, recipient, bits in messages:
        if not 0 <= sender < n or not 0 <= recipient < n:
            raise ConfigurationError(f"message {sender}->{recipient} names a robot outside 0..{n - 1}")
        if sender == recipient:
            raise ConfigurationError(f"robot {sender} cannot send a message to itself")
        if at < 0:
            raise ConfigurationError("message enqueue instants must be non-negative")

    header = {
        "format_version": TRACE_FORMAT,
        "protocol": protocol,
        "naming": mode,
        "n": n,
        "sigma": sigmas,
        "schedule": schedule.describe(),
    }
    header.update(global_layout(protocol, positions, sigmas, visible_ids, naming))
    script = [(int(at), int(s), int(r), tuple(int(b) for b in bits)) for at, s, r, bits in messages]
    return Simulation(Configuration(tuple(positions)), specs, schedule, header, script)
