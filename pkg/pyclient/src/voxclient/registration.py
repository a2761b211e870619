"""Optional gymnasium integration.

When gymnasium is installed, `register_all(address)` publishes the five
environment ids so `gymnasium.make("Craftium/Room-v0")` resolves to a
BoundEnv talking to the given server. Without gymnasium this module is
inert; `voxclient.make` offers the same construction shape.
"""

from __future__ import annotations

from .env import ENV_ACTIONS, BoundEnv

try:
    import gymnasium
    from gymnasium import spaces

    HAVE_GYMNASIUM = True
except ImportError:
    HAVE_GYMNASIUM = False


if HAVE_GYMNASIUM:

    import numpy as np

    class GymBoundEnv(gymnasium.Env):
        metadata = {"render_modes": []}

        def __init__(self, env_id: str, address, obs_w: int = 64, obs_h: int = 64,
                     seed: int = 0):
            self._env = BoundEnv(env_id, address, obs_w, obs_h, seed)
            self.observation_space = spaces.Box(0, 255, (obs_h, obs_w, 3), np.uint8)
            self.action_space = spaces.Discrete(self._env.action_space.n)

        def reset(self, *, seed=None, options=None):
            super().reset(seed=seed)
            return self._env.reset(seed)

        def step(self, action):
            return self._env.step(int(action))

        def close(self):
            self._env.close()

    def register_all(address) -> None:
        for env_id in ENV_ACTIONS:
            gymnasium.register(
                id=env_id,
                entry_point="voxclient.registration:GymBoundEnv",
                kwargs={"env_id": env_id, "address": address},
            )

else:

    def register_all(address) -> None:
        raise ImportError("gymnasium is not installed; use voxclient.make instead")
