"""Task layer: manifest files, event handlers, reward/termination state.

A task is a bundle of event handlers driving two pieces of episode state:
a persistent reward that pays out every step until changed, and an optional
one-shot reward that pays out on exactly one step and then resets the
persistent value. Termination is a sticky flag until the episode restarts.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

from . import sim as simmod
from .events import SimEvent
from .sim import SimState


class ManifestError(ValueError):
    pass


class MissingName(ManifestError):
    pass


class MalformedLine(ManifestError):
    def __init__(self, line_no: int):
        super().__init__(f"line {line_no}: expected 'key = value'")
        self.line_no = line_no


@dataclass
class TaskManifest:
    name: str
    description: str = ""
    depends: list[str] = field(default_factory=list)
    extra: dict[str, str] = field(default_factory=dict)


def parse_manifest(text: str) -> TaskManifest:
    """Parse line-oriented "key = value" metadata (UTF-8, LF lines)."""
    name = None
    description = ""
    depends: list[str] = []
    extra: dict[str, str] = {}
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r")
        if not line.strip():
            continue
        if line.startswith("#"):
            continue
        if "=" not in line:
            raise MalformedLine(line_no)
        key, value = line.split("=", 1)
        key = key.strip()
        value = value.strip()
        if key == "name":
            name = value
        elif key == "description":
            description = value
        elif key == "depends":
            depends = [d.strip() for d in value.split(",") if d.strip()]
        else:
            extra[key] = value
    if not name:
        raise MissingName("manifest has no 'name' entry")
    return TaskManifest(name, description, depends, extra)


def serialize_manifest(manifest: TaskManifest) -> str:
    lines = [f"name = {manifest.name}"]
    if manifest.description:
        lines.append(f"description = {manifest.description}")
    if manifest.depends:
        lines.append(f"depends = {', '.join(manifest.depends)}")
    for key, value in manifest.extra.items():
        lines.append(f"{key} = {value}")
    return "\n".join(lines) + "\n"


@dataclass
class RewardState:
    persistent: float = 0.0
    once: tuple[float, float] | None = None  # (value, reset)
    terminated: bool = False


def collect_step(state: RewardState) -> tuple[float, bool]:
    """Reward for the step just finished; consumes a pending one-shot."""
    if state.once is not None:
        value, reset = state.once
        state.once = None
        state.persistent = reset
        return value, state.terminated
    return state.persistent, state.terminated


Handler = Callable[[SimEvent, "TaskContext"], None]


class TaskScript:
    """Ordered event-handler registry: dispatch order = registration order."""

    def __init__(self):
        self.handlers: dict[type, list[Handler]] = {}

    def on(self, kind: type, handler: Handler) -> None:
        self.handlers.setdefault(kind, []).append(handler)


def register_handler(script: TaskScript, kind: type, handler: Handler) -> None:
    script.on(kind, handler)


class ContextExpired(RuntimeError):
    pass


class TaskContext:
    """Capability handle passed to handlers; dies when dispatch returns."""

    def __init__(self, sim: SimState, reward: RewardState):
        self._sim = sim
        self._reward = reward
        self._active = False

    def _check(self):
        if not self._active:
            raise ContextExpired("task context used outside event dispatch")

    # reward / termination

    def set_reward(self, value: float) -> None:
        self._check()
        self._reward.persistent = float(value)
        self._reward.once = None

    def set_reward_once(self, value: float, reset: float) -> None:
        self._check()
        self._reward.once = (float(value), float(reset))

    def get_reward(self) -> float:
        self._check()
        if self._reward.once is not None:
            return self._reward.once[0]
        return self._reward.persistent

    def set_termination(self) -> None:
        self._check()
        self._reward.terminated = True

    # simulation control

    def teleport_player(self, pos) -> None:
        self._check()
        simmod.teleport_player(self._sim, pos)

    def spawn_entity(self, kind: str, pos) -> int:
        self._check()
        return simmod.spawn_entity(self._sim, kind, pos)

    def set_player_health(self, health: int) -> None:
        self._check()
        simmod.set_player_health(self._sim, health)

    def player_pos(self) -> tuple[float, float, float]:
        self._check()
        return tuple(self._sim.player.pos)

    def player_health(self) -> int:
        self._check()
        return self._sim.player.health

    def tick(self) -> int:
        self._check()
        return self._sim.tick


def dispatch_events(script: TaskScript, events: list[SimEvent], ctx: TaskContext) -> None:
    """Run handlers for each event in order; handler errors propagate."""
    ctx._active = True
    try:
        for event in events:
            for handler in script.handlers.get(type(event), ()):
                handler(event, ctx)
    finally:
        ctx._active = False
