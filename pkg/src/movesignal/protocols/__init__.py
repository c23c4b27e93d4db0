"""Protocol automata and the name -> factory registry."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

from movesignal.protocols.async2 import Async2Robot
from movesignal.protocols.asyncn import AsyncNRobot
from movesignal.protocols.base import Outbox, PeerLog, ProtocolFault, Robot
from movesignal.protocols.sync2 import Sync2Robot
from movesignal.protocols.syncn import ANON_CHIRALITY, ANON_SOD, IDENTIFIED, SyncNRobot, syncn_preprocess


@dataclass(frozen=True)
class ProtocolInfo:
    name: str
    factory: Callable[[float], Robot]
    synchronous: bool
    n_robots: int | None = None  # fixed robot count, if any
    needs_ids: bool = False
    uses_granulars: bool = False
    extra_slice: bool = False
    naming: str | None = None


PROTOCOLS = {
    "sync2": ProtocolInfo("sync2", Sync2Robot, True, n_robots=2),
    "sync_n_id": ProtocolInfo("sync_n_id", lambda s: SyncNRobot(s, IDENTIFIED), True,
                              needs_ids=True, uses_granulars=True, naming=IDENTIFIED),
    "sync_n_sod": ProtocolInfo("sync_n_sod", lambda s: SyncNRobot(s, ANON_SOD), True,
                               uses_granulars=True, naming=ANON_SOD),
    "sync_n_chirality": ProtocolInfo("sync_n_chirality", lambda s: SyncNRobot(s, ANON_CHIRALITY), True,
                                     uses_granulars=True, naming=ANON_CHIRALITY),
    "async2": ProtocolInfo("async2", Async2Robot, False, n_robots=2),
    "async_n": ProtocolInfo("async_n", lambda s: AsyncNRobot(s, ANON_CHIRALITY), False,
                            uses_granulars=True, extra_slice=True, naming=ANON_CHIRALITY),
}


def protocol_info(name: str) -> ProtocolInfo:
    try:
        return PROTOCOLS[name]
    except KeyError:
        raise ValueError(f"unknown protocol {name!r}; choose from {', '.join(PROTOCOLS)}") from None


__all__ = [
    "PROTOCOLS", "ProtocolInfo", "protocol_info", "Robot", "Outbox", "PeerLog", "ProtocolFault",
    "Sync2Robot", "SyncNRobot", "Async2Robot", "AsyncNRobot", "syncn_preprocess",
]
