"""Agent-side library: connect (or spawn) a server and drive episodes.

`make()` returns a handle for one of the registered environments with the
task's discrete action map already applied, mirroring the usual RL loop:

    env = make("Craftium/Room-v0", seed=1)
    obs, info = env.reset()
    obs, reward, terminated, truncated, info = env.step(env.action_space.sample())
    env.close()
"""

from __future__ import annotations

import socket
import subprocess
import sys
import time

import numpy as np

from .actions import NUM_KEYS, Action
from .envs import EnvBuilder, builtin_registry
from .prng import SplitMix64
from .spaces import BinaryMap, DiscreteMap, InvalidAction, SpaceSpec
from .wire import (
    E_UNKNOWN_ENV,
    E_UNSUPPORTED_VERSION,
    CloseMsg,
    Config,
    ErrorMsg,
    Hello,
    Reset,
    ResetResult,
    Step,
    StepResult,
    WireError,
    read_message,
    write_message,
)


class ClientError(Exception):
    pass


class UnknownEnv(ClientError):
    pass


class ConnectFailure(ClientError):
    pass


class VersionMismatch(ClientError):
    pass


class ProtocolError(ClientError):
    def __init__(self, message: str, code: int | None = None):
        super().__init__(message)
        self.code = code


class InvalidState(ClientError):
    pass


_REQUEST_TIMEOUT = 60.0
_SPAWN_CONNECT_WINDOW = 60.0


class ActionSpace:
    """Base: holds its own deterministic generator for sample()."""

    def __init__(self, seed: int = 0):
        self._rng = SplitMix64(seed)

    def sample(self, rng: SplitMix64 | None = None):
        raise NotImplementedError


class DiscreteSpace(ActionSpace):
    def __init__(self, n: int, seed: int = 0):
        super().__init__(seed)
        if n < 1:
            raise ValueError("discrete space needs n >= 1")
        self.n = n

    def sample(self, rng: SplitMix64 | None = None) -> int:
        rng = rng if rng is not None else self._rng
        return rng.below(self.n)

    def contains(self, a) -> bool:
        return isinstance(a, (int, np.integer)) and 0 <= int(a) < self.n


class BinarySpace(ActionSpace):
    def __init__(self, m: int, seed: int = 0):
        super().__init__(seed)
        self.m = m

    def sample(self, rng: SplitMix64 | None = None) -> tuple[int, ...]:
        rng = rng if rng is not None else self._rng
        return tuple(rng.below(2) for _ in range(self.m))


class Full21Space(ActionSpace):
    def sample(self, rng: SplitMix64 | None = None) -> Action:
        rng = rng if rng is not None else self._rng
        keys = tuple(rng.below(2) == 1 for _ in range(NUM_KEYS))
        dx = rng.uniform() * 2.0 - 1.0
        dy = rng.uniform() * 2.0 - 1.0
        return Action(keys, (dx, dy))


def sample_action(handle, rng: SplitMix64):
    """Draw a uniform action for the handle's action space."""
    return handle.action_space.sample(rng)


def _find_free_port() -> int:
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


class EnvHandle:
    """Raw full-action-space handle over one protocol session."""

    def __init__(self, env_id: str, obs_w: int = 64, obs_h: int = 64,
                 seed: int | None = None, connect: str | None = None,
                 registry: dict[str, EnvBuilder] | None = None):
        registry = registry if registry is not None else builtin_registry()
        if env_id not in registry:
            raise UnknownEnv(f"no environment registered under {env_id!r}")
        self.env_id = env_id
        self.obs_w = obs_w
        self.obs_h = obs_h
        self._builder = registry[env_id]
        self._state = "idle"
        self._proc: subprocess.Popen | None = None
        self._sock: socket.socket | None = None
        self.action_space = Full21Space(seed if seed is not None else 0)

        if connect is None:
            self._spawn_server()
        else:
            host, _, port = connect.rpartition(":")
            self._connect(host or "127.0.0.1", int(port))

        config_seed = seed if seed is not None else 0
        try:
            write_message(self._sock, Hello())
            write_message(self._sock, Config(env_id, obs_w, obs_h, config_seed))
            # RESET doubles as the handshake sync point: the reply surfaces
            # version or env mismatches immediately.
            write_message(self._sock, Reset(seed))
            reply = read_message(self._sock)
        except (OSError, WireError) as exc:
            self.close()
            raise ConnectFailure(f"handshake failed: {exc}") from exc
        if isinstance(reply, ErrorMsg):
            self.close()
            if reply.code == E_UNSUPPORTED_VERSION:
                raise VersionMismatch(reply.message)
            if reply.code == E_UNKNOWN_ENV:
                raise UnknownEnv(reply.message)
            raise ProtocolError(reply.message, reply.code)
        if not isinstance(reply, ResetResult):
            self.close()
            raise ProtocolError(f"unexpected handshake reply {type(reply).__name__}")

    # -- connection management ------------------------------------------

    def _connect(self, host: str, port: int) -> None:
        try:
            sock = socket.create_connection((host, port), timeout=_REQUEST_TIMEOUT)
        except OSError as exc:
            raise ConnectFailure(f"cannot connect to {host}:{port}: {exc}") from exc
        sock.settimeout(_REQUEST_TIMEOUT)
        self._sock = sock

    def _spawn_server(self) -> None:
        port = _find_free_port()
        self._proc = subprocess.Popen(
            [
                sys.executable,
                "-m",
                "voxelgym",
                "serve",
                "--bind",
                f"127.0.0.1:{port}",
                "--max-sessions",
                "4",
                "--log-level",
                "warn",
            ]
        )
        deadline = time.monotonic() + _SPAWN_CONNECT_WINDOW
        last_err: Exception | None = None
        while time.monotonic() < deadline:
            if self._proc.poll() is not None:
                raise ConnectFailure(
                    f"server subprocess exited with code {self._proc.returncode}"
                )
            try:
                self._connect("127.0.0.1", port)
                return
            except ConnectFailure as exc:
                last_err = exc
                time.sleep(0.05)
        raise ConnectFailure(f"server did not come up: {last_err}")

    def _request(self, msg):
        if self._sock is None:
            raise InvalidState("handle is closed")
        try:
            write_message(self._sock, msg)
            reply = read_message(self._sock)
        except (OSError, WireError) as exc:
            raise ProtocolError(f"transport failure: {exc}") from exc
        if isinstance(reply, ErrorMsg):
            raise ProtocolError(reply.message, reply.code)
        return reply

    # -- the agent-facing interface ---------------------------------------

    @property
    def observation_shape(self) -> tuple[int, int, int]:
        return (self.obs_h, self.obs_w, 3)

    @property
    def space_spec(self) -> SpaceSpec:
        return SpaceSpec(self.observation_shape, "full21")

    def reset(self, seed: int | None = None):
        if self._state == "closed":
            raise InvalidState("handle is closed")
        reply = self._request(Reset(seed))
        if not isinstance(reply, ResetResult):
            raise ProtocolError(f"expected RESET_RESULT, got {type(reply).__name__}")
        self._state = "in_episode"
        return self._decode_obs(reply.obs), dict(reply.info)

    def step(self, action: Action):
        if self._state == "closed":
            raise InvalidState("handle is closed")
        if self._state != "in_episode":
            raise InvalidState("step outside an episode; call reset()")
        if not isinstance(action, Action):
            raise InvalidAction(f"expected an Action, got {type(action).__name__}")
        reply = self._request(Step(action))
        if not isinstance(reply, StepResult):
            raise ProtocolError(f"expected STEP_RESULT, got {type(reply).__name__}")
        if reply.terminated or reply.truncated:
            self._state = "final"
        return (
            self._decode_obs(reply.obs),
            reply.reward,
            reply.terminated,
            reply.truncated,
            dict(reply.info),
        )

    def close(self) -> None:
        if self._state == "closed":
            return
        self._state = "closed"
        if self._sock is not None:
            try:
                write_message(self._sock, CloseMsg())
            except (OSError, WireError):
                pass
            try:
                self._sock.close()
            except OSError:
                pass
            self._sock = None
        if self._proc is not None:
            self._proc.terminate()
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait(timeout=5)
            self._proc = None

    def _decode_obs(self, obs) -> np.ndarray:
        return np.frombuffer(obs.pixels, dtype=np.uint8).reshape(obs.h, obs.w, 3)

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class _Wrapper:
    """Shared delegation for wrappers; attribute-level passthrough."""

    def __init__(self, inner):
        self.inner = inner

    @property
    def env_id(self):
        return self.inner.env_id

    @property
    def action_space(self):
        return self.inner.action_space

    @property
    def observation_shape(self):
        return self.inner.observation_shape

    def reset(self, seed: int | None = None):
        return self.inner.reset(seed)

    def step(self, action):
        return self.inner.step(action)

    def close(self):
        return self.inner.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()


class DiscreteActionWrapper(_Wrapper):
    def __init__(self, inner, dmap: DiscreteMap, seed: int = 0):
        super().__init__(inner)
        self.map = dmap
        self._space = DiscreteSpace(dmap.n, seed)

    @property
    def action_space(self) -> DiscreteSpace:
        return self._space

    @property
    def space_spec(self) -> SpaceSpec:
        return SpaceSpec(self.observation_shape, "discrete", n=self.map.n)

    def step(self, action):
        if isinstance(action, Action):
            return self.inner.step(action)
        return self.inner.step(self.map.to_action(int(action)))


class BinaryActionWrapper(_Wrapper):
    def __init__(self, inner, bmap: BinaryMap, seed: int = 0):
        super().__init__(inner)
        self.map = bmap
        self._space = BinarySpace(bmap.m, seed)

    @property
    def action_space(self) -> BinarySpace:
        return self._space

    @property
    def space_spec(self) -> SpaceSpec:
        return SpaceSpec(self.observation_shape, "binary", m=self.map.m)

    def step(self, action):
        if isinstance(action, Action):
            return self.inner.step(action)
        return self.inner.step(self.map.to_action(action))


class FrameStackWrapper(_Wrapper):
    def __init__(self, inner, k: int):
        super().__init__(inner)
        if k < 1:
            raise ValueError("frame stack depth must be >= 1")
        self.k = k
        self._frames: list[np.ndarray] = []

    @property
    def observation_shape(self):
        return (self.k,) + tuple(self.inner.observation_shape)

    def reset(self, seed: int | None = None):
        obs, info = self.inner.reset(seed)
        self._frames = [obs] * self.k
        return np.stack(self._frames), info

    def step(self, action):
        obs, reward, terminated, truncated, info = self.inner.step(action)
        self._frames = self._frames[1:] + [obs]
        return np.stack(self._frames), reward, terminated, truncated, info


def wrap_frame_stack(handle, k: int) -> FrameStackWrapper:
    return FrameStackWrapper(handle, k)


def wrap_discrete(handle, dmap: DiscreteMap, seed: int = 0) -> DiscreteActionWrapper:
    return DiscreteActionWrapper(handle, dmap, seed)


def wrap_binary(handle, keys, mouse_dirs, magnitude: float,
                seed: int = 0) -> BinaryActionWrapper:
    return BinaryActionWrapper(handle, BinaryMap(keys, tuple(mouse_dirs), magnitude), seed)


def make(env_id: str, obs_w: int = 64, obs_h: int = 64, seed: int | None = None,
         connect: str | None = None,
         registry: dict[str, EnvBuilder] | None = None) -> DiscreteActionWrapper:
    """Create a handle for a registered env with its discrete action map applied."""
    registry = registry if registry is not None else builtin_registry()
    base = EnvHandle(env_id, obs_w, obs_h, seed, connect, registry)
    return DiscreteActionWrapper(base, base._builder.action_map,
                                 seed if seed is not None else 0)
