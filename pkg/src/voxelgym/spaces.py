"""Action space descriptors and their mapping onto full actions.

A DiscreteMap turns an index into a full action with exactly one key or one
mouse axis active; index 0 is always the no-op. A BinaryMap exposes one bit
per selected key or mouse direction. Both are what the built-in tasks use
to shrink the raw 21-key space down to what a task actually needs.
"""

from __future__ import annotations

from dataclasses import dataclass

from .actions import KEY_INDEX, NUM_KEYS, Action

MOUSE_DIRS = ("left", "right", "up", "down")


class InvalidAction(ValueError):
    pass


def _mouse_delta(direction: str, magnitude: float) -> tuple[float, float]:
    if direction == "left":
        return (-magnitude, 0.0)
    if direction == "right":
        return (magnitude, 0.0)
    if direction == "up":
        return (0.0, magnitude)
    if direction == "down":
        return (0.0, -magnitude)
    raise ValueError(f"unknown mouse direction {direction!r}")


def _key_indices(keys) -> tuple[int, ...]:
    out = []
    for key in keys:
        if isinstance(key, str):
            out.append(KEY_INDEX[key])
        else:
            idx = int(key)
            if not 0 <= idx < NUM_KEYS:
                raise ValueError(f"key index {idx} out of range")
            out.append(idx)
    if len(set(out)) != len(out):
        raise ValueError("duplicate keys in action map")
    return tuple(out)


@dataclass(frozen=True)
class DiscreteMap:
    """Index 0 = no-op, then one entry per key, then one per mouse direction."""

    keys: tuple = ()
    mouse_dirs: tuple[str, ...] = ()
    magnitude: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "keys", _key_indices(self.keys))
        for d in self.mouse_dirs:
            if d not in MOUSE_DIRS:
                raise ValueError(f"unknown mouse direction {d!r}")
        if len(set(self.mouse_dirs)) != len(self.mouse_dirs):
            raise ValueError("duplicate mouse directions")
        if not 0.0 < self.magnitude <= 1.0:
            raise ValueError("magnitude must be in (0, 1]")

    @property
    def n(self) -> int:
        return 1 + len(self.keys) + len(self.mouse_dirs)

    def to_action(self, index: int) -> Action:
        if not 0 <= index < self.n:
            raise InvalidAction(f"discrete index {index} out of range 0..{self.n - 1}")
        if index == 0:
            return Action.none()
        index -= 1
        if index < len(self.keys):
            keys = [False] * NUM_KEYS
            keys[self.keys[index]] = True
            return Action(tuple(keys))
        direction = self.mouse_dirs[index - len(self.keys)]
        return Action(mouse=_mouse_delta(direction, self.magnitude))


@dataclass(frozen=True)
class BinaryMap:
    """One independent bit per selected key, then per mouse direction."""

    keys: tuple = ()
    mouse_dirs: tuple[str, ...] = ()
    magnitude: float = 0.5

    def __post_init__(self):
        object.__setattr__(self, "keys", _key_indices(self.keys))
        for d in self.mouse_dirs:
            if d not in MOUSE_DIRS:
                raise ValueError(f"unknown mouse direction {d!r}")
        if len(set(self.mouse_dirs)) != len(self.mouse_dirs):
            raise ValueError("duplicate mouse directions")
        if not 0.0 < self.magnitude <= 1.0:
            raise ValueError("magnitude must be in (0, 1]")

    @property
    def m(self) -> int:
        return len(self.keys) + len(self.mouse_dirs)

    def to_action(self, bits) -> Action:
        bits = list(bits)
        if len(bits) != self.m:
            raise InvalidAction(f"expected {self.m} bits, got {len(bits)}")
        keys = [False] * NUM_KEYS
        for i, key_idx in enumerate(self.keys):
            if bits[i]:
                keys[key_idx] = True
        dx = dy = 0.0
        for j, direction in enumerate(self.mouse_dirs):
            if bits[len(self.keys) + j]:
                ddx, ddy = _mouse_delta(direction, self.magnitude)
                dx += ddx
                dy += ddy
        return Action(tuple(keys), (dx, dy))


@dataclass(frozen=True)
class SpaceSpec:
    """Observation and action shapes a handle exposes."""

    obs_shape: tuple[int, ...]  # (h, w, 3) or (k, h, w, 3) under frame stacking
    kind: str  # "full21" | "discrete" | "binary"
    n: int | None = None  # discrete arity
    m: int | None = None  # binary width
