"""Exact voxel ray traversal (Amanatides & Woo style DDA).

Rays walk every cell they cross, in order, and stop at the first stored
solid node. Space outside the stored world is transparent to rays; the
out-of-world barrier only exists for physics reads (see world.get_node).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .world import VoxelWorld

_FACE_NAMES = {
    (0, 1): "+x",
    (0, -1): "-x",
    (1, 1): "+y",
    (1, -1): "-y",
    (2, 1): "+z",
    (2, -1): "-z",
}


@dataclass(frozen=True)
class Hit:
    pos: tuple[int, int, int]
    node: int
    face: str  # face the ray entered through: "+x", "-x", "+y", "-y", "+z", "-z"
    dist: float


def _entry_clip(origin, direction, lo, hi, max_dist):
    """Clip ray to the inclusive cell box [lo, hi]; returns (t0, t1) or None."""
    t0, t1 = 0.0, max_dist
    for a in range(3):
        o, d = origin[a], direction[a]
        b0, b1 = float(lo[a]), float(hi[a] + 1)
        if abs(d) < 1e-15:
            if o < b0 or o > b1:
                return None
        else:
            ta = (b0 - o) / d
            tb = (b1 - o) / d
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
    if t0 > t1:
        return None
    return t0, t1


def voxel_raycast(world: VoxelWorld, origin, direction, max_dist: float) -> Hit | None:
    """First solid stored node the ray crosses within max_dist, or None."""
    norm = math.sqrt(direction[0] ** 2 + direction[1] ** 2 + direction[2] ** 2)
    if abs(norm - 1.0) > 1e-9:
        raise ValueError("direction must be a unit vector")
    if max_dist <= 0:
        raise ValueError("max_dist must be positive")

    box, grid = world.dense()
    lo = box
    hi = (box[0] + grid.shape[0] - 1, box[1] + grid.shape[1] - 1, box[2] + grid.shape[2] - 1)
    clip = _entry_clip(origin, direction, lo, hi, max_dist)
    if clip is None:
        return None
    t0, t1 = clip

    solid = _solid_lut(world.registry)

    # Nudge just inside the entry plane so floor() lands in the entered cell.
    eps = 1e-12
    px = origin[0] + direction[0] * (t0 + eps)
    py = origin[1] + direction[1] * (t0 + eps)
    pz = origin[2] + direction[2] * (t0 + eps)
    cx, cy, cz = math.floor(px), math.floor(py), math.floor(pz)

    step = [0, 0, 0]
    t_max = [math.inf, math.inf, math.inf]
    t_delta = [math.inf, math.inf, math.inf]
    cell = [cx, cy, cz]
    for a, d in enumerate(direction):
        if d > 0:
            step[a] = 1
            t_max[a] = t0 + ((cell[a] + 1) - (origin[a] + d * t0)) / d
            t_delta[a] = 1.0 / d
        elif d < 0:
            step[a] = -1
            t_max[a] = t0 + (cell[a] - (origin[a] + d * t0)) / d
            t_delta[a] = -1.0 / d

    t = t0
    entry_axis = -1
    while t <= t1:
        if (
            lo[0] <= cell[0] <= hi[0]
            and lo[1] <= cell[1] <= hi[1]
            and lo[2] <= cell[2] <= hi[2]
        ):
            nid = int(grid[cell[0] - lo[0], cell[1] - lo[1], cell[2] - lo[2]])
            if solid[nid]:
                if entry_axis < 0:
                    # Ray started inside this cell (or on the clip plane):
                    # attribute the dominant travel axis.
                    entry_axis = max(range(3), key=lambda a: abs(direction[a]))
                face = _FACE_NAMES[(entry_axis, -step[entry_axis] if step[entry_axis] else 1)]
                return Hit((cell[0], cell[1], cell[2]), nid, face, t)
        axis = 0 if t_max[0] < t_max[1] and t_max[0] < t_max[2] else (1 if t_max[1] < t_max[2] else 2)
        t = t_max[axis]
        cell[axis] += step[axis]
        t_max[axis] += t_delta[axis]
        entry_axis = axis
    return None


def _solid_lut(registry):
    """Per-registry solidity table indexed by node id, cached on the registry."""
    import numpy as np

    cached = getattr(registry, "_solid_lut", None)
    if cached is not None and cached[0] == len(registry):
        return cached[1]
    lut = np.zeros(65536, dtype=bool)
    for nid in range(len(registry)):
        lut[nid] = registry.get(nid).solid
    lut[0xFFFF] = True
    registry._solid_lut = (len(registry), lut)
    return lut
