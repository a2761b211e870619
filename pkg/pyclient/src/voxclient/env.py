"""Gymnasium-flavored environment handles over the socket protocol.

BoundEnv exposes the standard reset/step five-tuple contract with numpy
image observations. The discrete action tables mirror the published specs
of the five server-side environments: index 0 is the no-op, then one entry
per key, then one per mouse direction at magnitude 0.5.
"""

from __future__ import annotations

import socket

import numpy as np

from . import protocol


class ClientError(Exception):
    pass


class UnknownEnv(ClientError):
    pass


class ServerError(ClientError):
    def __init__(self, code: int, message: str):
        super().__init__(f"server error {code}: {message}")
        self.code = code


# key indices in the 21-slot action table
FORWARD, LEFT, RIGHT, JUMP, DIG = 0, 2, 3, 4, 7

MOUSE = {"left": (-0.5, 0.0), "right": (0.5, 0.0), "up": (0.0, 0.5), "down": (0.0, -0.5)}
ALL_DIRS = ("left", "right", "up", "down")
TURN_DIRS = ("left", "right")

# env id -> (keys, mouse directions); action arity is 1 + len + len
ENV_ACTIONS: dict[str, tuple[tuple[int, ...], tuple[str, ...]]] = {
    "Craftium/ChopTree-v0": ((FORWARD, DIG), ALL_DIRS),
    "Craftium/Room-v0": ((FORWARD,), TURN_DIRS),
    "Craftium/SmallRoom-v0": ((FORWARD,), TURN_DIRS),
    "Craftium/Speleo-v0": ((FORWARD, JUMP), ALL_DIRS),
    "Craftium/SpidersAttack-v0": ((FORWARD, LEFT, RIGHT, JUMP, DIG), ALL_DIRS),
}


class DiscreteSpace:
    """Uniform integer space with its own tiny deterministic generator."""

    def __init__(self, n: int, seed: int = 0):
        self.n = n
        self._state = seed & 0xFFFFFFFFFFFFFFFF

    def _next(self) -> int:
        self._state = (self._state + 0x9E3779B97F4A7C15) & 0xFFFFFFFFFFFFFFFF
        z = self._state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & 0xFFFFFFFFFFFFFFFF
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & 0xFFFFFFFFFFFFFFFF
        return (z ^ (z >> 31)) & 0xFFFFFFFFFFFFFFFF

    def sample(self) -> int:
        return self._next() % self.n

    def contains(self, a) -> bool:
        return isinstance(a, (int, np.integer)) and 0 <= int(a) < self.n


class BoundEnv:
    """One protocol session bound to a server-side environment."""

    def __init__(self, env_id: str, address: tuple[str, int], obs_w: int = 64,
                 obs_h: int = 64, seed: int = 0):
        if env_id not in ENV_ACTIONS:
            raise UnknownEnv(f"{env_id!r} is not a published environment id")
        self.env_id = env_id
        self.obs_w = obs_w
        self.obs_h = obs_h
        keys, dirs = ENV_ACTIONS[env_id]
        self._keys = keys
        self._dirs = dirs
        self.action_space = DiscreteSpace(1 + len(keys) + len(dirs), seed)
        self.observation_shape = (obs_h, obs_w, 3)
        self._closed = False
        self._in_episode = False

        self._sock = socket.create_connection(address, timeout=60)
        self._sock.settimeout(60)
        self._sock.sendall(protocol.encode_hello())
        self._sock.sendall(protocol.encode_config(env_id, obs_w, obs_h, seed))

    # -- plumbing ---------------------------------------------------------

    def _exchange(self, frame: bytes) -> dict:
        self._sock.sendall(frame)
        reply = protocol.decode(protocol.read_frame(self._sock))
        if reply["type"] == "error":
            raise ServerError(reply["code"], reply["message"])
        return reply

    def _image(self, msg: dict) -> np.ndarray:
        arr = np.frombuffer(msg["pixels"], dtype=np.uint8)
        return arr.reshape(msg["obs_h"], msg["obs_w"], 3)

    def _action_fields(self, action) -> tuple[list[int], float, float]:
        idx = int(action)
        if not self.action_space.contains(idx):
            raise ClientError(f"action {action!r} outside Discrete({self.action_space.n})")
        if idx == 0:
            return [], 0.0, 0.0
        idx -= 1
        if idx < len(self._keys):
            return [self._keys[idx]], 0.0, 0.0
        dx, dy = MOUSE[self._dirs[idx - len(self._keys)]]
        return [], dx, dy

    # -- the standard agent loop surface ----------------------------------

    def reset(self, seed: int | None = None):
        if self._closed:
            raise ClientError("environment is closed")
        msg = self._exchange(protocol.encode_reset(seed))
        if msg["type"] != "reset_result":
            raise ClientError(f"expected reset_result, got {msg['type']}")
        self._in_episode = True
        return self._image(msg), dict(msg["info"])

    def step(self, action):
        if self._closed:
            raise ClientError("environment is closed")
        if not self._in_episode:
            raise ClientError("step before reset (or after a finished episode)")
        keys, dx, dy = self._action_fields(action)
        msg = self._exchange(protocol.encode_step(keys, dx, dy))
        if msg["type"] != "step_result":
            raise ClientError(f"expected step_result, got {msg['type']}")
        if msg["terminated"] or msg["truncated"]:
            self._in_episode = False
        return (
            self._image(msg),
            msg["reward"],
            msg["terminated"],
            msg["truncated"],
            dict(msg["info"]),
        )

    def close(self):
        if self._closed:
            return
        self._closed = True
        try:
            self._sock.sendall(protocol.encode_close())
        except OSError:
            pass
        self._sock.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class FrameStack:
    """Minimal observation wrapper: stack the last k frames along axis 0."""

    def __init__(self, env: BoundEnv, k: int):
        if k < 1:
            raise ValueError("k must be >= 1")
        self.env = env
        self.k = k
        self._frames: list[np.ndarray] = []
        self.action_space = env.action_space
        self.observation_shape = (k,) + env.observation_shape

    def reset(self, seed: int | None = None):
        obs, info = self.env.reset(seed)
        self._frames = [obs] * self.k
        return np.stack(self._frames), info

    def step(self, action):
        obs, reward, terminated, truncated, info = self.env.step(action)
        self._frames = self._frames[1:] + [obs]
        return np.stack(self._frames), reward, terminated, truncated, info

    def close(self):
        self.env.close()


def make(env_id: str, address: str | tuple[str, int], obs_w: int = 64,
         obs_h: int = 64, seed: int = 0) -> BoundEnv:
    """Connect to a running server and bind one of the published envs."""
    if isinstance(address, str):
        host, _, port = address.rpartition(":")
        address = (host or "127.0.0.1", int(port))
    return BoundEnv(env_id, address, obs_w, obs_h, seed)
