"""Scenario files: a versioned YAML description of one run.

Example::

    format_version: 1
    protocol: async_n          # sync2 | sync_n_id | sync_n_sod | sync_n_chirality | async2 | async_n
    naming: chirality          # async_n only: chirality | sod | identified
    horizon: 4000
    schedule: {kind: random_fair, seed: 7, window: 8}   # or {kind: synchronous}
                                                         # or {kind: explicit, active_sets: [[0], [0, 1]]}
    robots:
      - {position: [0, 0], sigma: 0.5, frame_seed: 11}
      - {position: [4, 1], sigma: 0.5, visible_id: 3}
    messages:
      - {sender: 0, recipient: 1, bits: "0110", at: 0}

Robots are referred to by their index in ``robots``.  ``bits`` is a 0/1
string or list.  ``frame_seed`` defaults to the robot index.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import yaml

from movesignal.harness.build import build_simulation
from movesignal.model import ConfigurationError, Explicit, RandomFair, Synchronous
from movesignal.protocols import PROTOCOLS

FORMAT_VERSION = 1


class ScenarioError(ConfigurationError):
    pass


@dataclass
class RobotEntry:
    position: tuple
    sigma: float = 1.0
    visible_id: Optional[object] = None
    frame_seed: Optional[int] = None


@dataclass
class Scenario:
    protocol: str
    robots: list
    horizon: int
    schedule: dict = field(default_factory=lambda: {"kind": "synchronous"})
    messages: list = field(default_factory=list)  # (at, sender, recipient, bits)
    naming: Optional[str] = None
    source: Optional[str] = None

    def make_schedule(self, seed: Optional[int] = None):
        spec = dict(self.schedule)
        kind = spec.pop("kind", "synchronous")
        if kind == "synchronous":
            return Synchronous()
        if kind == "random_fair":
            if seed is not None:
                spec["seed"] = seed
            return RandomFair(seed=int(spec.get("seed", 0)), window=int(spec.get("window", 8)),
                              p=float(spec.get("p", 0.5)))
        if kind == "explicit":
            return Explicit(spec.get("active_sets", []))
        raise ScenarioError(f"unknown schedule kind {kind!r}; use synchronous, random_fair or explicit")

    def build(self, seed: Optional[int] = None):
        return build_simulation(
            self.protocol,
            [r.position for r in self.robots],
            [r.sigma for r in self.robots],
            schedule=self.make_schedule(seed),
            visible_ids=[r.visible_id for r in self.robots],
            frame_seeds=[i if r.frame_seed is None else r.frame_seed for i, r in enumerate(self.robots)],
            messages=self.messages,
            naming=self.naming,
        )


def _bits(value, where: str) -> tuple:
    if isinstance(value, int) and not isinstance(value, bool):
        value = str(value)
    if isinstance(value, str):
        value = list(value.strip())
    try:
        bits = tuple(int(b) for b in value)
    except (TypeError, ValueError):
        raise ScenarioError(f"{where}: bits must be a 0/1 string or list, got {value!r}") from None
    if not bits or any(b not in (0, 1) for b in bits):
        raise ScenarioError(f"{where}: bits must be a nonempty 0/1 sequence, got {value!r}")
    return bits


def parse_scenario(data: dict, source: Optional[str] = None) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping")
    version = data.get("format_version")
    if version != FORMAT_VERSION:
        raise ScenarioError(f"format_version must be {FORMAT_VERSION}, got {version!r}")
    known = {"format_version", "protocol", "naming", "horizon", "schedule", "robots", "messages", "description"}
    extra = sorted(set(data) - known)
    if extra:
        raise ScenarioError(f"unknown scenario keys {extra}")
    protocol = data.get("protocol")
    if protocol not in PROTOCOLS:
        raise ScenarioError(f"protocol must be one of {', '.join(PROTOCOLS)}, got {protocol!r}")
    horizon = data.get("horizon")
    if not isinstance(horizon, int) or horizon < 0:
        raise ScenarioError(f"horizon must be a non-negative integer, got {horizon!r}")
    robots = []
    for i, r in enumerate(data.get("robots") or []):
        if not isinstance(r, dict) or "position" not in r:
            raise ScenarioError(f"robots[{i}] needs a position")
        pos = r["position"]
        if not (isinstance(pos, (list, tuple)) and len(pos) == 2):
            raise ScenarioError(f"robots[{i}].position must be [x, y], got {pos!r}")
        robots.append(RobotEntry((float(pos[0]), float(pos[1])), float(r.get("sigma", 1.0)),
                                 r.get("visible_id"), r.get("frame_seed")))
    schedule = data.get("schedule") or {"kind": "synchronous"}
    if not isinstance(schedule, dict):
        raise ScenarioError("schedule must be a mapping with a 'kind'")
    messages = []
    for i, m in enumerate(data.get("messages") or []):
        where = f"messages[{i}]"
        if not isinstance(m, dict) or not {"sender", "recipient", "bits"} <= set(m):
            raise ScenarioError(f"{where} needs sender, recipient and bits")
        messages.append((int(m.get("at", 0)), int(m["sender"]), int(m["recipient"]), _bits(m["bits"], where)))
    return Scenario(protocol, robots, horizon, schedule, messages, data.get("naming"), source)


def load_scenario(path) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ScenarioError(f"{path}: not valid YAML: {exc}") from None
    return parse_scenario(data, str(path))


def bundled_scenarios() -> dict:
    """Name -> path of the example scenarios shipped with the package."""
    folder = Path(__file__).parent / "scenarios"
    return {p.stem: p for p in sorted(folder.glob("*.yaml"))}
