"""The agent action: 21 key states plus a mouse delta pair.

Key order is fixed; the wire protocol, wrappers and the simulator all index
into this table. Slot keys and a few others are accepted but do nothing in
the built-in tasks, keeping the full action space at its documented width.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

KEY_FORWARD = 0
KEY_BACKWARD = 1
KEY_LEFT = 2
KEY_RIGHT = 3
KEY_JUMP = 4
KEY_SNEAK = 5
KEY_SPRINT = 6
KEY_DIG = 7
KEY_PLACE = 8
KEY_DROP = 9
KEY_INVENTORY = 10
KEY_ZOOM = 11
# 12..20 are hotbar slots 1..9
KEY_SLOT_1 = 12

NUM_KEYS = 21

KEY_NAMES = (
    "forward",
    "backward",
    "left",
    "right",
    "jump",
    "sneak",
    "sprint",
    "dig",
    "place",
    "drop",
    "inventory",
    "zoom",
    "slot_1",
    "slot_2",
    "slot_3",
    "slot_4",
    "slot_5",
    "slot_6",
    "slot_7",
    "slot_8",
    "slot_9",
)

KEY_INDEX = {name: i for i, name in enumerate(KEY_NAMES)}


def clamp_delta(v: float) -> float:
    if math.isnan(v):
        return 0.0
    return min(1.0, max(-1.0, float(v)))


@dataclass(frozen=True)
class Action:
    keys: tuple[bool, ...] = field(default=(False,) * NUM_KEYS)
    mouse: tuple[float, float] = (0.0, 0.0)

    def __post_init__(self):
        if len(self.keys) != NUM_KEYS:
            raise ValueError(f"expected {NUM_KEYS} key states, got {len(self.keys)}")
        object.__setattr__(self, "keys", tuple(bool(k) for k in self.keys))
        dx, dy = self.mouse
        object.__setattr__(self, "mouse", (clamp_delta(dx), clamp_delta(dy)))

    @classmethod
    def none(cls) -> "Action":
        return cls()

    @classmethod
    def of(cls, *names: str, mouse: tuple[float, float] = (0.0, 0.0)) -> "Action":
        keys = [False] * NUM_KEYS
        for name in names:
            keys[KEY_INDEX[name]] = True
        return cls(tuple(keys), mouse)

    def pressed(self, index: int) -> bool:
        return self.keys[index]
