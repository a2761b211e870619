"""Events the simulator emits each tick, consumed by the task runtime."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class NodeDug:
    pos: tuple[int, int, int]
    name: str


@dataclass(frozen=True)
class PlayerDied:
    pass


@dataclass(frozen=True)
class EntityDied:
    kind: str


@dataclass(frozen=True)
class EpisodeStart:
    pass


@dataclass(frozen=True)
class Tick:
    pass


SimEvent = NodeDug | PlayerDied | EntityDied | EpisodeStart | Tick
