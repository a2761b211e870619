"""Chunked voxel world storage.

Nodes live in 16^3 chunks keyed by floor-divided coordinates. Reads outside
every generated chunk (or outside the world bounds, when set) resolve to the
solid barrier node, so physics can never walk an agent out of the world.
Ray queries (`stored_node`) see only real stored cells: the virtual barrier
blocks movement but is invisible to the renderer and to dig targeting.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .nodes import AIR_ID, BARRIER_ID, NodeRegistry

CHUNK = 16


class OutOfBounds(ValueError):
    pass


@dataclass(frozen=True)
class Bounds:
    """Inclusive axis-aligned integer box."""

    lo: tuple[int, int, int]
    hi: tuple[int, int, int]

    def contains(self, x: int, y: int, z: int) -> bool:
        return (
            self.lo[0] <= x <= self.hi[0]
            and self.lo[1] <= y <= self.hi[1]
            and self.lo[2] <= z <= self.hi[2]
        )


def _chunk_key(x: int, y: int, z: int) -> tuple[int, int, int]:
    return (x // CHUNK, y // CHUNK, z // CHUNK)


class VoxelWorld:
    def __init__(self, registry: NodeRegistry, bounds: Bounds | None = None):
        self.registry = registry
        self.bounds = bounds
        self.chunks: dict[tuple[int, int, int], np.ndarray] = {}
        self._dense: tuple[tuple[int, int, int], np.ndarray] | None = None

    # -- storage ---------------------------------------------------------

    def get_node(self, pos) -> int:
        x, y, z = int(pos[0]), int(pos[1]), int(pos[2])
        if self.bounds is not None and not self.bounds.contains(x, y, z):
            return BARRIER_ID
        chunk = self.chunks.get(_chunk_key(x, y, z))
        if chunk is None:
            return BARRIER_ID
        return int(chunk[x % CHUNK, y % CHUNK, z % CHUNK])

    def set_node(self, pos, nid: int) -> None:
        x, y, z = int(pos[0]), int(pos[1]), int(pos[2])
        if not self.registry.has_id(nid):
            from .nodes import UnknownNodeId

            raise UnknownNodeId(nid)
        if self.bounds is not None and not self.bounds.contains(x, y, z):
            raise OutOfBounds(f"set_node at {(x, y, z)} outside world bounds")
        key = _chunk_key(x, y, z)
        chunk = self.chunks.get(key)
        if chunk is None:
            chunk = np.full((CHUNK, CHUNK, CHUNK), AIR_ID, dtype=np.uint16)
            self.chunks[key] = chunk
            self._dense = None
        chunk[x % CHUNK, y % CHUNK, z % CHUNK] = nid
        if self._dense is not None:
            origin, grid = self._dense
            ix, iy, iz = x - origin[0], y - origin[1], z - origin[2]
            if 0 <= ix < grid.shape[0] and 0 <= iy < grid.shape[1] and 0 <= iz < grid.shape[2]:
                grid[ix, iy, iz] = nid
            else:
                self._dense = None

    def fill_box(self, lo, hi, nid: int) -> None:
        """Set every cell in the inclusive box [lo, hi] to nid."""
        if not self.registry.has_id(nid):
            from .nodes import UnknownNodeId

            raise UnknownNodeId(nid)
        if self.bounds is not None and not (
            self.bounds.contains(*lo) and self.bounds.contains(*hi)
        ):
            raise OutOfBounds(f"fill_box {lo}..{hi} outside world bounds")
        for cx in range(lo[0] // CHUNK, hi[0] // CHUNK + 1):
            for cy in range(lo[1] // CHUNK, hi[1] // CHUNK + 1):
                for cz in range(lo[2] // CHUNK, hi[2] // CHUNK + 1):
                    key = (cx, cy, cz)
                    chunk = self.chunks.get(key)
                    if chunk is None:
                        chunk = np.full((CHUNK, CHUNK, CHUNK), AIR_ID, dtype=np.uint16)
                        self.chunks[key] = chunk
                    x0, y0, z0 = cx * CHUNK, cy * CHUNK, cz * CHUNK
                    chunk[
                        max(lo[0] - x0, 0) : min(hi[0] - x0 + 1, CHUNK),
                        max(lo[1] - y0, 0) : min(hi[1] - y0 + 1, CHUNK),
                        max(lo[2] - z0, 0) : min(hi[2] - z0 + 1, CHUNK),
                    ] = nid
        self._dense = None

    def stored_node(self, x: int, y: int, z: int) -> int:
        """Raw stored id; AIR for cells no chunk covers. Ignores bounds."""
        chunk = self.chunks.get(_chunk_key(x, y, z))
        if chunk is None:
            return AIR_ID
        return int(chunk[x % CHUNK, y % CHUNK, z % CHUNK])

    def solid_at(self, x: int, y: int, z: int) -> bool:
        """Physics solidity: barrier outside the generated world counts."""
        return self.registry.is_solid(self.get_node((x, y, z)))

    # -- aggregate queries -------------------------------------------------

    def non_air_count(self) -> int:
        return int(sum(np.count_nonzero(c) for c in self.chunks.values()))

    def chunk_box(self) -> Bounds | None:
        """Bounding box of all generated chunks, in node coordinates."""
        if not self.chunks:
            return None
        keys = np.array(list(self.chunks.keys()))
        lo = keys.min(axis=0) * CHUNK
        hi = (keys.max(axis=0) + 1) * CHUNK - 1
        return Bounds(tuple(int(v) for v in lo), tuple(int(v) for v in hi))

    def dense(self) -> tuple[tuple[int, int, int], np.ndarray]:
        """(origin, grid) snapshot of the stored cells, cached between edits.

        The grid covers the world bounds when set, else the chunk bounding
        box. Cells no chunk covers read as air, matching `stored_node`.
        """
        if self._dense is not None:
            return self._dense
        box = self.bounds or self.chunk_box()
        if box is None:
            origin = (0, 0, 0)
            grid = np.zeros((1, 1, 1), dtype=np.uint16)
            self._dense = (origin, grid)
            return self._dense
        lo, hi = box.lo, box.hi
        shape = (hi[0] - lo[0] + 1, hi[1] - lo[1] + 1, hi[2] - lo[2] + 1)
        grid = np.zeros(shape, dtype=np.uint16)
        for (cx, cy, cz), chunk in self.chunks.items():
            x0, y0, z0 = cx * CHUNK, cy * CHUNK, cz * CHUNK
            sx = slice(max(x0, lo[0]), min(x0 + CHUNK, hi[0] + 1))
            sy = slice(max(y0, lo[1]), min(y0 + CHUNK, hi[1] + 1))
            sz = slice(max(z0, lo[2]), min(z0 + CHUNK, hi[2] + 1))
            if sx.start >= sx.stop or sy.start >= sy.stop or sz.start >= sz.stop:
                continue
            grid[
                sx.start - lo[0] : sx.stop - lo[0],
                sy.start - lo[1] : sy.stop - lo[1],
                sz.start - lo[2] : sz.stop - lo[2],
            ] = chunk[
                sx.start - x0 : sx.stop - x0,
                sy.start - y0 : sy.stop - y0,
                sz.start - z0 : sz.stop - z0,
            ]
        self._dense = (tuple(lo), grid)
        return self._dense
