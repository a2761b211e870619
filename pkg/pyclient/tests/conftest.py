import socket
import subprocess
import sys
import time

import pytest


def _free_port() -> int:
    probe = socket.socket()
    probe.bind(("127.0.0.1", 0))
    port = probe.getsockname()[1]
    probe.close()
    return port


@pytest.fixture(scope="session")
def server_addr():
    """A real server process, reached only through its CLI and TCP port."""
    port = _free_port()
    proc = subprocess.Popen(
        [sys.executable, "-m", "voxelgym", "serve",
         "--bind", f"127.0.0.1:{port}", "--max-sessions", "16",
         "--log-level", "warn"],
    )
    deadline = time.monotonic() + 60
    while time.monotonic() < deadline:
        if proc.poll() is not None:
            raise RuntimeError(f"server exited early with {proc.returncode}")
        try:
            socket.create_connection(("127.0.0.1", port), timeout=1).close()
            break
        except OSError:
            time.sleep(0.05)
    else:
        proc.terminate()
        raise RuntimeError("server never came up")
    yield f"127.0.0.1:{port}"
    proc.terminate()
    try:
        proc.wait(timeout=10)
    except subprocess.TimeoutExpired:
        proc.kill()
