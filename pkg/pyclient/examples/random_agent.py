"""The canonical agent loop against a running server.

Usage: python random_agent.py [host:port]
"""

import sys

import voxclient


def run(address: str, steps: int = 500) -> float:
    env = voxclient.make("Craftium/Room-v0", address)

    obs, inf = env.reset()
    total = 0.0
    for t in range(steps):
        a = env.action_space.sample()
        obs, r, tm, tc, inf = env.step(a)
        total += r

        if tm or tc:
            obs, inf = env.reset()

    env.close()
    return total


if __name__ == "__main__":
    addr = sys.argv[1] if len(sys.argv) > 1 else "127.0.0.1:4117"
    print(f"total reward: {run(addr):.3f}")
