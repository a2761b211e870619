"""TCP server binding simulator, task runtime and renderer into sessions.

Each accepted connection gets its own session (sim, script, reward state)
and its own thread; sessions share nothing mutable. Connections beyond the
session cap are refused with an ERROR frame rather than queued.
"""

from __future__ import annotations

import logging
import socket
import threading
from dataclasses import dataclass

from .envs import EnvBuilder, builtin_registry
from .fsm import SessionFsm
from .session import EnvSession, ScriptError
from .wire import (
    E_BAD_FRAME,
    E_BAD_STATE,
    BadFrame,
    CloseMsg,
    ErrorMsg,
    Oversize,
    StreamClosed,
    Truncated,
    decode_message,
    encode_message,
    read_frame,
    write_frame,
)

log = logging.getLogger("voxelgym.server")


class BindFailure(OSError):
    pass


@dataclass
class ServerConfig:
    host: str = "127.0.0.1"
    port: int = 4117
    max_sessions: int = 8

    def __post_init__(self):
        if self.max_sessions < 1:
            raise ValueError("max_sessions must be >= 1")


class EnvServer:
    def __init__(self, config: ServerConfig, registry: dict[str, EnvBuilder] | None = None):
        self.config = config
        self.registry = registry if registry is not None else builtin_registry()
        self._listener: socket.socket | None = None
        self._accept_thread: threading.Thread | None = None
        self._sessions_lock = threading.Lock()
        self._live: set[socket.socket] = set()
        self._stopping = threading.Event()

    @property
    def port(self) -> int:
        return self._listener.getsockname()[1]

    def start(self) -> None:
        listener = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
        listener.setsockopt(socket.SOL_SOCKET, socket.SO_REUSEADDR, 1)
        try:
            listener.bind((self.config.host, self.config.port))
        except OSError as exc:
            listener.close()
            raise BindFailure(
                f"cannot bind {self.config.host}:{self.config.port}: {exc}"
            ) from exc
        listener.listen(16)
        listener.settimeout(0.25)  # lets the accept loop notice shutdown
        self._listener = listener
        self._accept_thread = threading.Thread(target=self._accept_loop, daemon=True)
        self._accept_thread.start()
        log.info("listening on %s:%d", self.config.host, self.port)

    def stop(self) -> None:
        self._stopping.set()
        if self._listener is not None:
            try:
                self._listener.close()
            except OSError:
                pass
        with self._sessions_lock:
            live = list(self._live)
        for conn in live:
            try:
                write_frame(conn, encode_message(CloseMsg()))
            except OSError:
                pass
            try:
                conn.shutdown(socket.SHUT_RDWR)
            except OSError:
                pass
            conn.close()
        if self._accept_thread is not None:
            self._accept_thread.join(timeout=5)
        log.info("server stopped")

    def serve_forever(self) -> None:
        self.start()
        try:
            self._stopping.wait()
        except KeyboardInterrupt:
            log.info("interrupt received, shutting down")
        finally:
            self.stop()

    # -- internals ---------------------------------------------------------

    def _accept_loop(self) -> None:
        while not self._stopping.is_set():
            try:
                conn, addr = self._listener.accept()
            except socket.timeout:
                continue
            except OSError:
                return
            conn.settimeout(None)
            with self._sessions_lock:
                if len(self._live) >= self.config.max_sessions:
                    log.warning("refusing connection from %s: at capacity", addr)
                    try:
                        write_frame(
                            conn,
                            encode_message(ErrorMsg(E_BAD_STATE, "server at session capacity")),
                        )
                    except OSError:
                        pass
                    conn.close()
                    continue
                self._live.add(conn)
            thread = threading.Thread(target=self._session_loop, args=(conn, addr),
                                      daemon=True)
            thread.start()

    def _session_loop(self, conn: socket.socket, addr) -> None:
        log.info("session open from %s", addr)
        fsm = SessionFsm(EnvSession(self.registry))
        try:
            while not fsm.closed:
                try:
                    frame = read_frame(conn)
                except StreamClosed:
                    log.info("session from %s disconnected", addr)
                    return
                except (Truncated, Oversize) as exc:
                    log.warning("framing failure from %s: %s", addr, exc)
                    self._try_send(conn, ErrorMsg(E_BAD_FRAME, str(exc)))
                    return
                try:
                    msg = decode_message(frame)
                except (BadFrame, Oversize) as exc:
                    log.warning("bad frame from %s: %s", addr, exc)
                    self._try_send(conn, ErrorMsg(E_BAD_FRAME, str(exc)))
                    return
                try:
                    replies = fsm.handle(msg)
                except ScriptError as exc:
                    log.error("task script failed for %s: %s", addr, exc)
                    self._try_send(conn, ErrorMsg(E_BAD_STATE, str(exc)))
                    return
                for reply in replies:
                    write_frame(conn, encode_message(reply))
            log.info("session from %s closed", addr)
        except OSError as exc:
            log.info("session from %s dropped: %s", addr, exc)
        finally:
            with self._sessions_lock:
                self._live.discard(conn)
            conn.close()

    @staticmethod
    def _try_send(conn: socket.socket, msg) -> None:
        try:
            write_frame(conn, encode_message(msg))
        except OSError:
            pass


def serve(config: ServerConfig, registry: dict[str, EnvBuilder] | None = None) -> None:
    """Run the server until interrupted."""
    EnvServer(config, registry).serve_forever()
