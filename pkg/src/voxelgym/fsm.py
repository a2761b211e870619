"""Session state machine for one protocol connection.

States walk HELLO -> CONFIG -> episodes. RESET is legal whenever a session
is configured (restarting mid-episode discards the old one); STEP only
inside an episode. Any protocol violation answers with an ERROR frame and
closes the session.
"""

from __future__ import annotations

import enum
from typing import Protocol

from .wire import (
    E_BAD_STATE,
    E_UNKNOWN_ENV,
    E_UNSUPPORTED_VERSION,
    PROTOCOL_VERSION,
    CloseMsg,
    Config,
    ErrorMsg,
    Hello,
    Reset,
    ResetResult,
    Step,
    StepResult,
    WireMessage,
)


class SessionState(enum.Enum):
    AWAIT_HELLO = "await_hello"
    AWAIT_CONFIG = "await_config"
    READY = "ready"
    IN_EPISODE = "in_episode"
    CLOSED = "closed"


class SessionBackend(Protocol):
    def configure(self, config: Config) -> bool:
        """Bind the env; False if the env id is unknown."""

    def reset(self, seed: int | None) -> ResetResult: ...

    def step(self, action) -> StepResult: ...


class SessionFsm:
    def __init__(self, backend: SessionBackend):
        self.backend = backend
        self.state = SessionState.AWAIT_HELLO

    @property
    def closed(self) -> bool:
        return self.state == SessionState.CLOSED

    def _fail(self, code: int, message: str) -> list[WireMessage]:
        self.state = SessionState.CLOSED
        return [ErrorMsg(code, message)]

    def handle(self, msg: WireMessage) -> list[WireMessage]:
        """Process one inbound message; returns the frames to send back."""
        if self.state == SessionState.CLOSED:
            return []

        if isinstance(msg, CloseMsg):
            self.state = SessionState.CLOSED
            return []

        if isinstance(msg, Hello):
            if self.state != SessionState.AWAIT_HELLO:
                return self._fail(E_BAD_STATE, "unexpected HELLO")
            if msg.version != PROTOCOL_VERSION:
                return self._fail(
                    E_UNSUPPORTED_VERSION,
                    f"protocol version {msg.version} unsupported",
                )
            self.state = SessionState.AWAIT_CONFIG
            return []

        if isinstance(msg, Config):
            if self.state != SessionState.AWAIT_CONFIG:
                return self._fail(E_BAD_STATE, "unexpected CONFIG")
            if not self.backend.configure(msg):
                return self._fail(E_UNKNOWN_ENV, f"unknown env id {msg.env_id!r}")
            self.state = SessionState.READY
            return []

        if isinstance(msg, Reset):
            if self.state not in (SessionState.READY, SessionState.IN_EPISODE):
                return self._fail(E_BAD_STATE, "RESET before CONFIG")
            result = self.backend.reset(msg.seed)
            self.state = SessionState.IN_EPISODE
            return [result]

        if isinstance(msg, Step):
            if self.state != SessionState.IN_EPISODE:
                return self._fail(E_BAD_STATE, "STEP outside an episode")
            result = self.backend.step(msg.action)
            if result.terminated or result.truncated:
                self.state = SessionState.READY
            return [result]

        return self._fail(E_BAD_STATE, f"unexpected message {type(msg).__name__}")
