"""Binary framing and message codecs for the agent<->environment protocol.

Frame layout: u32 big-endian length (type byte + payload), u8 type, payload.
All multi-byte integers and floats are big-endian; strings are u16 length +
UTF-8 bytes. The byte layouts here are normative: the golden-vector test
table pins them for any other implementation of the protocol.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

from .actions import NUM_KEYS, Action, clamp_delta
from .render import Framebuffer

MAX_FRAME = 16 * 2 ** 20
PROTOCOL_VERSION = 1
DEFAULT_PORT = 4117

T_HELLO = 0x01
T_CONFIG = 0x02
T_RESET = 0x03
T_RESET_RESULT = 0x04
T_STEP = 0x05
T_STEP_RESULT = 0x06
T_CLOSE = 0x07
T_ERROR = 0x08

E_BAD_FRAME = 1
E_UNKNOWN_ENV = 2
E_BAD_STATE = 3
E_UNSUPPORTED_VERSION = 4


class WireError(Exception):
    pass


class BadFrame(WireError):
    pass


class Truncated(WireError):
    pass


class StreamClosed(WireError):
    """Stream ended cleanly on a frame boundary."""


class Oversize(WireError):
    pass


@dataclass(frozen=True)
class Hello:
    version: int = PROTOCOL_VERSION


@dataclass(frozen=True)
class Config:
    env_id: str
    obs_w: int
    obs_h: int
    seed: int


@dataclass(frozen=True)
class Reset:
    seed: int | None = None


@dataclass(frozen=True)
class ResetResult:
    obs: Framebuffer
    info: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class Step:
    action: Action


@dataclass(frozen=True)
class StepResult:
    reward: float
    terminated: bool
    truncated: bool
    obs: Framebuffer
    info: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class CloseMsg:
    pass


@dataclass(frozen=True)
class ErrorMsg:
    code: int
    message: str


WireMessage = Hello | Config | Reset | ResetResult | Step | StepResult | CloseMsg | ErrorMsg


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.off = 0

    def take(self, n: int) -> bytes:
        if self.off + n > len(self.data):
            raise BadFrame("payload shorter than declared fields")
        chunk = self.data[self.off : self.off + n]
        self.off += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return struct.unpack(">H", self.take(2))[0]

    def u64(self) -> int:
        return struct.unpack(">Q", self.take(8))[0]

    def f32(self) -> float:
        return struct.unpack(">f", self.take(4))[0]

    def f64(self) -> float:
        return struct.unpack(">d", self.take(8))[0]

    def string(self) -> str:
        n = self.u16()
        raw = self.take(n)
        try:
            return raw.decode("utf-8", errors="strict")
        except UnicodeDecodeError as exc:
            raise BadFrame(f"invalid UTF-8 in string field: {exc}") from None

    def done(self) -> None:
        if self.off != len(self.data):
            raise BadFrame("trailing bytes after message payload")


def _pack_string(s: str) -> bytes:
    raw = s.encode("utf-8")
    if len(raw) > 0xFFFF:
        raise ValueError("string too long for wire format")
    return struct.pack(">H", len(raw)) + raw


def _pack_info(info: dict[str, str]) -> bytes:
    if len(info) > 0xFFFF:
        raise ValueError("info map too large")
    out = [struct.pack(">H", len(info))]
    for key, value in info.items():
        out.append(_pack_string(key))
        out.append(_pack_string(value))
    return b"".join(out)


def _read_info(r: _Reader) -> dict[str, str]:
    count = r.u16()
    info = {}
    for _ in range(count):
        key = r.string()
        value = r.string()
        info[key] = value
    return info


def _pack_obs(obs: Framebuffer) -> bytes:
    return struct.pack(">HH", obs.w, obs.h) + obs.pixels


def _read_obs(r: _Reader) -> Framebuffer:
    w = r.u16()
    h = r.u16()
    if w < 1 or h < 1:
        raise BadFrame("observation dimensions must be positive")
    pixels = bytes(r.take(3 * w * h))
    return Framebuffer(w, h, pixels)


def encode_action(action: Action) -> bytes:
    b = bytearray(3)
    for i in range(NUM_KEYS):
        if action.keys[i]:
            b[i // 8] |= 1 << (i % 8)
    return bytes(b) + struct.pack(">ff", action.mouse[0], action.mouse[1])


def decode_action(r: _Reader) -> Action:
    raw = r.take(3)
    if raw[2] & 0b11100000:
        raise BadFrame("reserved key bits set")
    keys = tuple(bool(raw[i // 8] >> (i % 8) & 1) for i in range(NUM_KEYS))
    dx = clamp_delta(r.f32())
    dy = clamp_delta(r.f32())
    return Action(keys, (dx, dy))


def encode_message(msg: WireMessage) -> bytes:
    if isinstance(msg, Hello):
        mtype, payload = T_HELLO, struct.pack(">B", msg.version)
    elif isinstance(msg, Config):
        mtype = T_CONFIG
        payload = (
            _pack_string(msg.env_id)
            + struct.pack(">HHQ", msg.obs_w, msg.obs_h, msg.seed)
        )
    elif isinstance(msg, Reset):
        mtype = T_RESET
        if msg.seed is None:
            payload = b"\x00"
        else:
            payload = b"\x01" + struct.pack(">Q", msg.seed)
    elif isinstance(msg, ResetResult):
        mtype = T_RESET_RESULT
        payload = _pack_obs(msg.obs) + _pack_info(msg.info)
    elif isinstance(msg, Step):
        mtype, payload = T_STEP, encode_action(msg.action)
    elif isinstance(msg, StepResult):
        mtype = T_STEP_RESULT
        flags = (1 if msg.terminated else 0) | (2 if msg.truncated else 0)
        payload = (
            struct.pack(">dB", msg.reward, flags)
            + _pack_obs(msg.obs)
            + _pack_info(msg.info)
        )
    elif isinstance(msg, CloseMsg):
        mtype, payload = T_CLOSE, b""
    elif isinstance(msg, ErrorMsg):
        mtype = T_ERROR
        payload = struct.pack(">H", msg.code) + _pack_string(msg.message)
    else:
        raise TypeError(f"not a wire message: {msg!r}")
    length = 1 + len(payload)
    if length > MAX_FRAME:
        raise Oversize(f"frame of {length} bytes exceeds the 16 MiB cap")
    return struct.pack(">IB", length, mtype) + payload


def decode_message(data: bytes) -> WireMessage:
    """Decode exactly one complete frame (length prefix included)."""
    if len(data) < 5:
        raise BadFrame("frame shorter than header")
    length = struct.unpack(">I", data[:4])[0]
    if length > MAX_FRAME:
        raise Oversize(f"declared frame length {length} exceeds the 16 MiB cap")
    if length < 1:
        raise BadFrame("frame length must cover the type byte")
    if len(data) != 4 + length:
        raise BadFrame("frame length prefix does not match buffer size")
    mtype = data[4]
    r = _Reader(data[5:])
    if mtype == T_HELLO:
        msg: WireMessage = Hello(r.u8())
    elif mtype == T_CONFIG:
        env_id = r.string()
        obs_w = r.u16()
        obs_h = r.u16()
        seed = r.u64()
        msg = Config(env_id, obs_w, obs_h, seed)
    elif mtype == T_RESET:
        has_seed = r.u8()
        if has_seed == 0:
            msg = Reset(None)
        elif has_seed == 1:
            msg = Reset(r.u64())
        else:
            raise BadFrame("reset has_seed flag must be 0 or 1")
    elif mtype == T_RESET_RESULT:
        obs = _read_obs(r)
        msg = ResetResult(obs, _read_info(r))
    elif mtype == T_STEP:
        msg = Step(decode_action(r))
    elif mtype == T_STEP_RESULT:
        reward = r.f64()
        flags = r.u8()
        if flags & 0b11111100:
            raise BadFrame("reserved step-result flag bits set")
        obs = _read_obs(r)
        msg = StepResult(reward, bool(flags & 1), bool(flags & 2), obs, _read_info(r))
    elif mtype == T_CLOSE:
        msg = CloseMsg()
    elif mtype == T_ERROR:
        code = r.u16()
        msg = ErrorMsg(code, r.string())
    else:
        raise BadFrame(f"unknown message type 0x{mtype:02x}")
    r.done()
    return msg


# -- stream framing ----------------------------------------------------------


def _recv_exact(sock, n: int, at_boundary: bool = False) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            if at_boundary and not buf:
                raise StreamClosed("peer closed the stream")
            raise Truncated(f"stream ended after {len(buf)} of {n} bytes")
        buf.extend(chunk)
    return bytes(buf)


def read_frame(sock) -> bytes:
    """Read one complete frame (prefix included); blocks until available."""
    header = _recv_exact(sock, 4, at_boundary=True)
    length = struct.unpack(">I", header)[0]
    if length > MAX_FRAME:
        raise Oversize(f"declared frame length {length} exceeds the 16 MiB cap")
    body = _recv_exact(sock, length) if length else b""
    return header + body


def write_frame(sock, frame: bytes) -> None:
    sock.sendall(frame)


def read_message(sock) -> WireMessage:
    return decode_message(read_frame(sock))


def write_message(sock, msg: WireMessage) -> None:
    write_frame(sock, encode_message(msg))
