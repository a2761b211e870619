"""Byte-level conformance against the shared golden-vector table."""

import json
from pathlib import Path

import pytest

from voxclient import protocol

VECTOR_FILE = Path(__file__).parents[2] / "tests" / "data" / "golden_vectors.json"
VECTORS = json.loads(VECTOR_FILE.read_text())


def client_side_encode(desc):
    """Encode the message descriptions this client can originate."""
    kind = desc["kind"]
    if kind == "hello":
        return protocol.encode_hello(desc["version"])
    if kind == "config":
        return protocol.encode_config(desc["env_id"], desc["obs_w"], desc["obs_h"],
                                      desc["seed"])
    if kind == "reset":
        return protocol.encode_reset(desc["seed"])
    if kind == "step":
        return protocol.encode_step(desc["keys"], desc["dx"], desc["dy"])
    if kind == "close":
        return protocol.encode_close()
    return None


@pytest.mark.parametrize("vec", VECTORS["valid"], ids=lambda v: v["name"])
def test_decode_reencode_byte_identical(vec):
    raw = bytes.fromhex(vec["hex"])
    msg = protocol.decode(raw)
    assert protocol.reencode(msg) == raw


@pytest.mark.parametrize("vec", VECTORS["valid"], ids=lambda v: v["name"])
def test_client_side_messages_match_vectors(vec):
    frame = client_side_encode(vec["message"])
    if frame is not None:
        assert frame.hex() == vec["hex"]


@pytest.mark.parametrize("vec", VECTORS["invalid"], ids=lambda v: v["name"])
def test_invalid_vectors_rejected(vec):
    with pytest.raises(protocol.FrameError):
        protocol.decode(bytes.fromhex(vec["hex"]))


def test_decoded_fields_match_descriptions():
    for vec in VECTORS["valid"]:
        msg = protocol.decode(bytes.fromhex(vec["hex"]))
        desc = vec["message"]
        assert msg["type"] == desc["kind"]
        if desc["kind"] == "config":
            assert msg["env_id"] == desc["env_id"]
            assert (msg["obs_w"], msg["obs_h"], msg["seed"]) == (
                desc["obs_w"], desc["obs_h"], desc["seed"])
        elif desc["kind"] == "step":
            assert msg["keys"] == desc["keys"]
            assert msg["dx"] == desc["dx"] and msg["dy"] == desc["dy"]
        elif desc["kind"] == "step_result":
            assert msg["reward"] == desc["reward"]
            assert msg["terminated"] == desc["terminated"]
            assert msg["truncated"] == desc["truncated"]
            assert msg["pixels"] == bytes.fromhex(desc["pixels_hex"])
            assert msg["info"] == dict(desc["info"])
        elif desc["kind"] == "error":
            assert (msg["code"], msg["message"]) == (desc["code"], desc["message"])
