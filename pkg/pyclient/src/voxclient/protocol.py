"""Standalone codec for the voxelgym wire protocol.

Implements the published byte layout directly; shares no code with the
server-side package. Frames are u32 big-endian length (type byte plus
payload), u8 type, payload. Integers and floats are big-endian; strings
are u16 length plus UTF-8 bytes.
"""

from __future__ import annotations

import struct

MAX_FRAME = 16 * 1024 * 1024
VERSION = 1

HELLO = 0x01
CONFIG = 0x02
RESET = 0x03
RESET_RESULT = 0x04
STEP = 0x05
STEP_RESULT = 0x06
CLOSE = 0x07
ERROR = 0x08

NUM_KEYS = 21


class ProtocolError(Exception):
    pass


class FrameError(ProtocolError):
    """Raised for any malformed or oversized frame."""


def _frame(msg_type: int, payload: bytes) -> bytes:
    length = 1 + len(payload)
    if length > MAX_FRAME:
        raise FrameError("frame too large")
    return struct.pack(">IB", length, msg_type) + payload


def _string(value: str) -> bytes:
    raw = value.encode("utf-8")
    return struct.pack(">H", len(raw)) + raw


def encode_hello(version: int = VERSION) -> bytes:
    return _frame(HELLO, struct.pack(">B", version))


def encode_config(env_id: str, obs_w: int, obs_h: int, seed: int) -> bytes:
    return _frame(CONFIG, _string(env_id) + struct.pack(">HHQ", obs_w, obs_h, seed))


def encode_reset(seed: int | None = None) -> bytes:
    if seed is None:
        return _frame(RESET, b"\x00")
    return _frame(RESET, b"\x01" + struct.pack(">Q", seed))


def encode_step(keys, dx: float, dy: float) -> bytes:
    bits = bytearray(3)
    for idx in keys:
        if not 0 <= idx < NUM_KEYS:
            raise ValueError(f"key index {idx} out of range")
        bits[idx >> 3] |= 1 << (idx & 7)
    return _frame(STEP, bytes(bits) + struct.pack(">ff", dx, dy))


def encode_close() -> bytes:
    return _frame(CLOSE, b"")


def encode_reset_result(w: int, h: int, pixels: bytes, info: dict) -> bytes:
    return _frame(RESET_RESULT, _obs_bytes(w, h, pixels) + _info_bytes(info))


def encode_step_result(reward: float, terminated: bool, truncated: bool,
                       w: int, h: int, pixels: bytes, info: dict) -> bytes:
    flags = (1 if terminated else 0) | (2 if truncated else 0)
    return _frame(
        STEP_RESULT,
        struct.pack(">dB", reward, flags) + _obs_bytes(w, h, pixels) + _info_bytes(info),
    )


def encode_error(code: int, message: str) -> bytes:
    return _frame(ERROR, struct.pack(">H", code) + _string(message))


def _obs_bytes(w: int, h: int, pixels: bytes) -> bytes:
    if len(pixels) != 3 * w * h:
        raise ValueError("pixel buffer does not match dimensions")
    return struct.pack(">HH", w, h) + pixels


def _info_bytes(info: dict) -> bytes:
    parts = [struct.pack(">H", len(info))]
    for key, value in info.items():
        parts.append(_string(key))
        parts.append(_string(value))
    return b"".join(parts)


class _Cursor:
    def __init__(self, buf: bytes):
        self.buf = buf
        self.pos = 0

    def pull(self, fmt: str):
        size = struct.calcsize(fmt)
        if self.pos + size > len(self.buf):
            raise FrameError("payload ends inside a field")
        values = struct.unpack_from(fmt, self.buf, self.pos)
        self.pos += size
        return values

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.buf):
            raise FrameError("payload ends inside a field")
        out = self.buf[self.pos : self.pos + n]
        self.pos += n
        return out

    def text(self) -> str:
        (n,) = self.pull(">H")
        try:
            return self.raw(n).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise FrameError(f"bad UTF-8: {exc}") from None

    def finish(self):
        if self.pos != len(self.buf):
            raise FrameError("unexpected trailing bytes")


def _read_obs(cur: _Cursor):
    w, h = cur.pull(">HH")
    if w < 1 or h < 1:
        raise FrameError("zero observation dimension")
    return w, h, bytes(cur.raw(3 * w * h))


def _read_info(cur: _Cursor) -> dict:
    (count,) = cur.pull(">H")
    return {cur.text(): cur.text() for _ in range(count)}


def decode(frame: bytes) -> dict:
    """Decode one complete frame into a tagged dict."""
    if len(frame) < 5:
        raise FrameError("frame shorter than its header")
    (length,) = struct.unpack_from(">I", frame, 0)
    if length > MAX_FRAME:
        raise FrameError("declared length above the 16 MiB cap")
    if len(frame) != 4 + length or length < 1:
        raise FrameError("length prefix does not match frame size")
    msg_type = frame[4]
    cur = _Cursor(frame[5:])
    if msg_type == HELLO:
        (version,) = cur.pull(">B")
        out = {"type": "hello", "version": version}
    elif msg_type == CONFIG:
        env_id = cur.text()
        w, h, seed = cur.pull(">HHQ")
        out = {"type": "config", "env_id": env_id, "obs_w": w, "obs_h": h, "seed": seed}
    elif msg_type == RESET:
        (has_seed,) = cur.pull(">B")
        if has_seed == 0:
            out = {"type": "reset", "seed": None}
        elif has_seed == 1:
            out = {"type": "reset", "seed": cur.pull(">Q")[0]}
        else:
            raise FrameError("invalid has_seed flag")
    elif msg_type == RESET_RESULT:
        w, h, pixels = _read_obs(cur)
        out = {"type": "reset_result", "obs_w": w, "obs_h": h, "pixels": pixels,
               "info": _read_info(cur)}
    elif msg_type == STEP:
        bits = cur.raw(3)
        if bits[2] & 0xE0:
            raise FrameError("reserved key bits set")
        keys = [i for i in range(NUM_KEYS) if bits[i >> 3] >> (i & 7) & 1]
        dx, dy = cur.pull(">ff")
        out = {"type": "step", "keys": keys, "dx": dx, "dy": dy}
    elif msg_type == STEP_RESULT:
        reward, flags = cur.pull(">dB")
        if flags & 0xFC:
            raise FrameError("reserved flag bits set")
        w, h, pixels = _read_obs(cur)
        out = {
            "type": "step_result",
            "reward": reward,
            "terminated": bool(flags & 1),
            "truncated": bool(flags & 2),
            "obs_w": w,
            "obs_h": h,
            "pixels": pixels,
            "info": _read_info(cur),
        }
    elif msg_type == CLOSE:
        out = {"type": "close"}
    elif msg_type == ERROR:
        (code,) = cur.pull(">H")
        out = {"type": "error", "code": code, "message": cur.text()}
    else:
        raise FrameError(f"unknown type byte 0x{msg_type:02x}")
    cur.finish()
    return out


def reencode(msg: dict) -> bytes:
    """Inverse of decode; used to prove byte-level conformance."""
    kind = msg["type"]
    if kind == "hello":
        return encode_hello(msg["version"])
    if kind == "config":
        return encode_config(msg["env_id"], msg["obs_w"], msg["obs_h"], msg["seed"])
    if kind == "reset":
        return encode_reset(msg["seed"])
    if kind == "reset_result":
        return encode_reset_result(msg["obs_w"], msg["obs_h"], msg["pixels"], msg["info"])
    if kind == "step":
        return encode_step(msg["keys"], msg["dx"], msg["dy"])
    if kind == "step_result":
        return encode_step_result(msg["reward"], msg["terminated"], msg["truncated"],
                                  msg["obs_w"], msg["obs_h"], msg["pixels"], msg["info"])
    if kind == "close":
        return encode_close()
    if kind == "error":
        return encode_error(msg["code"], msg["message"])
    raise ValueError(f"unknown message kind {kind!r}")


def read_frame(sock) -> bytes:
    header = _recv_all(sock, 4)
    (length,) = struct.unpack(">I", header)
    if length > MAX_FRAME:
        raise FrameError("peer announced an oversized frame")
    return header + _recv_all(sock, length)


def _recv_all(sock, n: int) -> bytes:
    buf = bytearray()
    while len(buf) < n:
        chunk = sock.recv(n - len(buf))
        if not chunk:
            raise ProtocolError("connection closed by peer")
        buf.extend(chunk)
    return bytes(buf)
