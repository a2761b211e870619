"""voxclient: standalone client for the voxelgym environment protocol."""

from .env import BoundEnv, ClientError, DiscreteSpace, FrameStack, ServerError, UnknownEnv, make
from .registration import HAVE_GYMNASIUM, register_all

__version__ = "0.1.0"

__all__ = [
    "BoundEnv",
    "ClientError",
    "DiscreteSpace",
    "FrameStack",
    "HAVE_GYMNASIUM",
    "ServerError",
    "UnknownEnv",
    "make",
    "register_all",
]
