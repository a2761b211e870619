"""Seeded procedural world generators.

Four parameterized layouts cover the built-in tasks: a flat forest, a closed
room with a red target column, a descending torch-lit cave, and a sealed
arena cage. Generation is a pure function of the spec (seed included): the
same spec yields chunk-for-chunk identical worlds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .nodes import AIR_ID, standard_registry
from .prng import SplitMix64
from .world import Bounds, VoxelWorld


@dataclass(frozen=True)
class FlatForest:
    extent: int
    tree_count: int
    seed: int

    def __post_init__(self):
        if self.extent < 3:
            raise ValueError("extent must be >= 3")
        if self.tree_count < 0:
            raise ValueError("tree_count must be >= 0")


@dataclass(frozen=True)
class EnclosedRoom:
    """Outer footprint width (x) by depth (z), including the 1-node shell."""

    width: int
    depth: int
    seed: int

    def __post_init__(self):
        if self.width < 3 or self.depth < 3:
            raise ValueError("room dimensions must be >= 3")
        if (self.width - 2) * (self.depth - 2) < 2:
            raise ValueError("room interior must hold both the player and the target")


@dataclass(frozen=True)
class CaveDescent:
    depth: int
    seed: int

    def __post_init__(self):
        if self.depth < 3:
            raise ValueError("depth must be >= 3")


@dataclass(frozen=True)
class Cage:
    radius: int
    seed: int

    def __post_init__(self):
        if self.radius < 3:
            raise ValueError("radius must be >= 3")


WorldSpec = FlatForest | EnclosedRoom | CaveDescent | Cage

ROOM_HEIGHT = 5  # floor + 3 air + ceiling
CAGE_WALL_HEIGHT = 4
TORCH_SPACING = 3  # path cells between torches (spec cap: every <= 4)


@dataclass
class SpawnInfo:
    player_pos: tuple[float, float, float]
    player_yaw: float
    markers: dict = field(default_factory=dict)


def generate_world(spec: WorldSpec) -> tuple[VoxelWorld, SpawnInfo]:
    if isinstance(spec, FlatForest):
        return _gen_flat_forest(spec)
    if isinstance(spec, EnclosedRoom):
        return _gen_room(spec)
    if isinstance(spec, CaveDescent):
        return _gen_cave(spec)
    if isinstance(spec, Cage):
        return _gen_cage(spec)
    raise TypeError(f"unknown world spec {spec!r}")


def _gen_flat_forest(spec: FlatForest) -> tuple[VoxelWorld, SpawnInfo]:
    rng = SplitMix64(spec.seed)
    reg = standard_registry()
    e = spec.extent
    world = VoxelWorld(reg, bounds=Bounds((0, 0, 0), (e - 1, 15, e - 1)))
    grass = reg.id_of("default:grass")
    tree = reg.id_of("default:tree")
    leaves = reg.id_of("default:leaves")

    world.fill_box((0, 0, 0), (e - 1, 0, e - 1), grass)

    # Spawn near the center, jittered so episodes differ between seeds.
    sx = min(e - 2, max(1, e // 2 + rng.below(5) - 2))
    sz = min(e - 2, max(1, e // 2 + rng.below(5) - 2))
    yaw = float(rng.below(360))

    margin = 2
    interior = [
        (x, z)
        for x in range(margin, e - margin)
        for z in range(margin, e - margin)
        if abs(x - sx) > 1 or abs(z - sz) > 1
    ]
    count = min(spec.tree_count, len(interior))
    picks = rng.sample_indices(len(interior), count)
    trunk_cells = []
    for i in picks:
        x, z = interior[i]
        trunk_cells.append((x, z))
        for y in range(1, 5):
            world.set_node((x, y, z), tree)
    for x, z in trunk_cells:
        for dx in (-1, 0, 1):
            for dz in (-1, 0, 1):
                if world.get_node((x + dx, 5, z + dz)) == AIR_ID:
                    world.set_node((x + dx, 5, z + dz), leaves)
        if world.get_node((x, 6, z)) == AIR_ID:
            world.set_node((x, 6, z), leaves)

    spawn = SpawnInfo(
        player_pos=(sx + 0.5, 1.0, sz + 0.5),
        player_yaw=yaw,
        markers={"tree_cells": [(x, z) for x, z in trunk_cells]},
    )
    return world, spawn


def _gen_room(spec: EnclosedRoom) -> tuple[VoxelWorld, SpawnInfo]:
    rng = SplitMix64(spec.seed)
    reg = standard_registry()
    w, d, h = spec.width, spec.depth, ROOM_HEIGHT
    world = VoxelWorld(reg, bounds=Bounds((0, 0, 0), (w - 1, h - 1, d - 1)))
    diamond = reg.id_of("default:diamondblock")
    red = reg.id_of("craftium:red_block")

    world.fill_box((0, 0, 0), (w - 1, h - 1, d - 1), diamond)
    world.fill_box((1, 1, 1), (w - 2, h - 2, d - 2), AIR_ID)

    # Player in one half, target in the other, split along the longer
    # horizontal axis (always >= 4 cells); sides swap by seed.
    split_x = w >= d
    span = w if split_x else d
    other = d if split_x else w
    mid = span // 2
    near = (1, mid - 1)
    far = (span - mid, span - 2)
    if rng.below(2) == 0:
        player_span, target_span = near, far
    else:
        player_span, target_span = far, near
    pa = player_span[0] + rng.below(player_span[1] - player_span[0] + 1)
    pb = 1 + rng.below(other - 2)
    ta = target_span[0] + rng.below(target_span[1] - target_span[0] + 1)
    tb = 1 + rng.below(other - 2)
    px, pz = (pa, pb) if split_x else (pb, pa)
    tx, tz = (ta, tb) if split_x else (tb, ta)
    world.set_node((tx, 1, tz), red)
    world.set_node((tx, 2, tz), red)

    spawn = SpawnInfo(
        player_pos=(px + 0.5, 1.0, pz + 0.5),
        player_yaw=float(rng.below(360)),
        markers={"red_block": (tx, 1, tz)},
    )
    return world, spawn


def _gen_cave(spec: CaveDescent) -> tuple[VoxelWorld, SpawnInfo]:
    rng = SplitMix64(spec.seed)
    reg = standard_registry()
    stone = reg.id_of("default:stone")
    torch = reg.id_of("craftium:torch")

    # Walk a stepped path: one cell forward, one cell down, occasional turns.
    headings = [(1, 0), (0, 1), (-1, 0), (0, -1)]
    hi = 0
    x, z = 0, 0
    path = [(x, -1, z)]  # floor cells; tops are one above
    for _ in range(spec.depth):
        if rng.below(4) == 0:
            hi = (hi + rng.choice([1, 3])) % 4
        dx, dz = headings[hi]
        x, z = x + dx, z + dz
        path.append((x, path[-1][1] - 1, z))

    xs = [p[0] for p in path]
    ys = [p[1] for p in path]
    zs = [p[2] for p in path]
    lo = (min(xs) - 2, min(ys) - 2, min(zs) - 2)
    hi_b = (max(xs) + 2, max(ys) + 5, max(zs) + 2)
    world = VoxelWorld(reg, bounds=Bounds(lo, hi_b))
    world.fill_box(lo, hi_b, stone)

    for fx, fy, fz in path:
        for dy in (1, 2, 3):
            world.set_node((fx, fy + dy, fz), AIR_ID)

    # Torches go in after carving so the walkway cannot swallow them: every
    # TORCH_SPACING-th path cell lights the first still-solid wall around it.
    for i in range(0, len(path), TORCH_SPACING):
        fx, fy, fz = path[i]
        candidates = [
            (fx + 1, fy + 2, fz),
            (fx - 1, fy + 2, fz),
            (fx, fy + 2, fz + 1),
            (fx, fy + 2, fz - 1),
            (fx, fy + 4, fz),
        ]
        for cell in candidates:
            if world.get_node(cell) == stone:
                world.set_node(cell, torch)
                break

    start = path[0]
    first_step = (path[1][0] - start[0], path[1][2] - start[2])
    yaw_of = {(0, 1): 0.0, (1, 0): 90.0, (0, -1): 180.0, (-1, 0): 270.0}
    spawn = SpawnInfo(
        player_pos=(start[0] + 0.5, float(start[1] + 1), start[2] + 0.5),
        player_yaw=yaw_of[first_step],
        markers={"bottom": path[-1]},
    )
    return world, spawn


def _gen_cage(spec: Cage) -> tuple[VoxelWorld, SpawnInfo]:
    rng = SplitMix64(spec.seed)
    reg = standard_registry()
    stone = reg.id_of("default:stone")
    r = spec.radius
    h = CAGE_WALL_HEIGHT + 1  # ceiling layer index
    world = VoxelWorld(reg, bounds=Bounds((-r, 0, -r), (r, h, r)))

    world.fill_box((-r, 0, -r), (r, h, r), stone)
    world.fill_box((-r + 1, 1, -r + 1), (r - 1, h - 1, r - 1), AIR_ID)

    perimeter = []
    for x in range(-r + 1, r):
        perimeter.append((x, -r + 1))
        perimeter.append((x, r - 1))
    for z in range(-r + 2, r - 1):
        perimeter.append((-r + 1, z))
        perimeter.append((r - 1, z))
    perimeter.sort()

    spawn = SpawnInfo(
        player_pos=(0.5, 1.0, 0.5),
        player_yaw=float(rng.below(360)),
        markers={"perimeter": perimeter},
    )
    return world, spawn
