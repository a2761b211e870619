"""voxelgym: a headless voxel-world RL environment engine.

A deterministic voxel simulator with a software raycast renderer is served
over a synchronous TCP step protocol; this package holds both the server
side (world, sim, tasks, renderer, protocol) and the agent-side client with
Gym-style handles, wrappers and CLI tools.
"""

from .actions import Action
from .client import (
    BinaryActionWrapper,
    DiscreteActionWrapper,
    EnvHandle,
    FrameStackWrapper,
    make,
    sample_action,
    wrap_binary,
    wrap_discrete,
    wrap_frame_stack,
)
from .envs import builtin_registry
from .prng import SplitMix64

__version__ = "0.1.0"

__all__ = [
    "Action",
    "BinaryActionWrapper",
    "DiscreteActionWrapper",
    "EnvHandle",
    "FrameStackWrapper",
    "SplitMix64",
    "builtin_registry",
    "make",
    "sample_action",
    "wrap_binary",
    "wrap_discrete",
    "wrap_frame_stack",
]
