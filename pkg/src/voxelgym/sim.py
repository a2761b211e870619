"""Fixed-timestep simulation: player controller, physics, digging, mobs.

One environment step is one tick of dt = 0.05 s. Everything here is
deterministic: identical (seed, action sequence) pairs replay identical
trajectories, so episodes can be reproduced from transcripts alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .actions import (
    KEY_BACKWARD,
    KEY_DIG,
    KEY_FORWARD,
    KEY_JUMP,
    KEY_LEFT,
    KEY_RIGHT,
    KEY_SPRINT,
    Action,
)
from .events import EntityDied, NodeDug, PlayerDied, SimEvent, Tick
from .nodes import AIR_ID
from .prng import SplitMix64
from .raycast import voxel_raycast
from .world import OutOfBounds, VoxelWorld

DT = 0.05
WALK_SPEED = 4.0
SPRINT_MULT = 1.5
JUMP_SPEED = 8.0
GRAVITY = 25.0
REACH = 4.0
MOUSE_SENS_DEG = 10.0
PITCH_LIMIT = 89.9

PLAYER_HALF = (0.3, 0.9, 0.3)  # AABB half extents; pos is the bottom center
EYE_HEIGHT = 1.6
MAX_HEALTH = 20

SPIDER_HALF = (0.45, 0.45, 0.45)
SPIDER_SPEED = 2.5
SPIDER_HEALTH = 10
SPIDER_RANGE = 1.2
SPIDER_DAMAGE = 2
SPIDER_COOLDOWN = 20
SPIDER_COLOR = (30, 30, 30)

SWORD_DAMAGE = 5
HAND_DAMAGE = 1

# Clamp per-axis movement below one cell per sub-step so fast falls
# cannot tunnel through single-node floors.
_MAX_AXIS_STEP = 0.49
_SKIN = 1e-9


@dataclass
class PlayerState:
    pos: list[float]
    vel: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    yaw: float = 0.0
    pitch: float = 0.0
    health: int = MAX_HEALTH
    grounded: bool = False
    wielded: str = "none"


@dataclass
class Entity:
    eid: int
    kind: str
    pos: list[float]
    vel: list[float] = field(default_factory=lambda: [0.0, 0.0, 0.0])
    health: int = SPIDER_HEALTH
    attack_cooldown: int = 0


@dataclass(frozen=True)
class NodeTarget:
    pos: tuple[int, int, int]
    dist: float


@dataclass(frozen=True)
class EntityTarget:
    eid: int
    dist: float


class SimState:
    def __init__(self, world: VoxelWorld, spawn_pos, spawn_yaw: float, seed: int,
                 wielded: str = "none"):
        self.world = world
        self.player = PlayerState(pos=list(spawn_pos), yaw=spawn_yaw % 360.0,
                                  wielded=wielded)
        self.entities: list[Entity] = []
        self.tick = 0
        self.rng = SplitMix64(seed)
        self.dig_progress: tuple[tuple[int, int, int], int] | None = None
        self._next_eid = 1
        self._player_died_emitted = False

    def entity(self, eid: int) -> Entity | None:
        for e in self.entities:
            if e.eid == eid:
                return e
        return None


def forward_vector(yaw: float, pitch: float) -> tuple[float, float, float]:
    """Unit view direction. Yaw 0 faces +z; yaw grows turning right."""
    yr = math.radians(yaw)
    pr = math.radians(pitch)
    return (math.sin(yr) * math.cos(pr), math.sin(pr), math.cos(yr) * math.cos(pr))


def apply_mouse(player: PlayerState, dx: float, dy: float) -> None:
    player.yaw = (player.yaw + dx * MOUSE_SENS_DEG) % 360.0
    player.pitch = min(PITCH_LIMIT, max(-PITCH_LIMIT, player.pitch + dy * MOUSE_SENS_DEG))


def _solid_cells(world: VoxelWorld, mn, mx):
    """Solid cells whose open cube strictly overlaps the open box [mn, mx).

    Inlines the world read: this runs per collision substep for the player
    and every mob, so it avoids the per-cell method chain.
    """
    from .raycast import _solid_lut

    lut = _solid_lut(world.registry)
    bounds = world.bounds
    chunks = world.chunks
    hits = []
    for cx in range(math.floor(mn[0]), math.ceil(mx[0])):
        for cy in range(math.floor(mn[1]), math.ceil(mx[1])):
            for cz in range(math.floor(mn[2]), math.ceil(mx[2])):
                if bounds is not None and not (
                    bounds.lo[0] <= cx <= bounds.hi[0]
                    and bounds.lo[1] <= cy <= bounds.hi[1]
                    and bounds.lo[2] <= cz <= bounds.hi[2]
                ):
                    hits.append((cx, cy, cz))  # out of world: barrier
                    continue
                chunk = chunks.get((cx >> 4, cy >> 4, cz >> 4))
                if chunk is None:
                    hits.append((cx, cy, cz))
                    continue
                if lut[chunk[cx & 15, cy & 15, cz & 15]]:
                    hits.append((cx, cy, cz))
    return hits


def aabb_of(pos, half):
    return (
        (pos[0] - half[0], pos[1], pos[2] - half[2]),
        (pos[0] + half[0], pos[1] + 2 * half[1], pos[2] + half[2]),
    )


def resolve_move(world: VoxelWorld, half, pos, vel, dt: float):
    """Axis-separated collision: integrate y, then x, then z.

    On contact the position is clamped flush against the blocking cell and
    the velocity component zeroed. Returns (pos, vel, grounded) where
    grounded means downward motion was blocked during this call.
    """
    pos = list(pos)
    vel = list(vel)
    grounded = False
    for axis in (1, 0, 2):
        delta = vel[axis] * dt
        if delta == 0.0:
            continue
        steps = max(1, math.ceil(abs(delta) / _MAX_AXIS_STEP))
        sub = delta / steps
        for _ in range(steps):
            pos[axis] += sub
            mn, mx = aabb_of(pos, half)
            blockers = _solid_cells(world, mn, mx)
            if not blockers:
                continue
            if sub > 0:
                edge = min(b[axis] for b in blockers)
                if axis == 1:
                    pos[1] = edge - 2 * half[1] - _SKIN
                else:
                    pos[axis] = edge - half[axis] - _SKIN
            else:
                edge = max(b[axis] + 1 for b in blockers)
                if axis == 1:
                    pos[1] = float(edge)  # land exactly on the cell top
                    grounded = True
                else:
                    pos[axis] = edge + half[axis] + _SKIN
            vel[axis] = 0.0
            break
    return pos, vel, grounded


def _ray_aabb(origin, direction, mn, mx, max_dist: float) -> float | None:
    """Entry distance of a ray into a box, or None if missed within max_dist."""
    t0, t1 = 0.0, max_dist
    for a in range(3):
        o, d = origin[a], direction[a]
        if abs(d) < 1e-15:
            if o < mn[a] or o > mx[a]:
                return None
        else:
            ta = (mn[a] - o) / d
            tb = (mx[a] - o) / d
            if ta > tb:
                ta, tb = tb, ta
            t0 = max(t0, ta)
            t1 = min(t1, tb)
    if t0 > t1:
        return None
    return t0


def crosshair_target(sim: SimState) -> NodeTarget | EntityTarget | None:
    """Nearest node or entity on the view ray within reach, node on ties."""
    p = sim.player
    eye = (p.pos[0], p.pos[1] + EYE_HEIGHT, p.pos[2])
    d = forward_vector(p.yaw, p.pitch)
    hit = voxel_raycast(sim.world, eye, d, REACH)

    best_ent: EntityTarget | None = None
    for e in sim.entities:
        mn, mx = aabb_of(e.pos, SPIDER_HALF)
        t = _ray_aabb(eye, d, mn, mx, REACH)
        if t is not None and (best_ent is None or t < best_ent.dist):
            best_ent = EntityTarget(e.eid, t)

    if hit is not None and (best_ent is None or hit.dist <= best_ent.dist):
        return NodeTarget(hit.pos, hit.dist)
    return best_ent


def _attack_damage(wielded: str) -> int:
    return SWORD_DAMAGE if wielded == "steel_sword" else HAND_DAMAGE


def _process_dig(sim: SimState, events: list[SimEvent]) -> None:
    target = crosshair_target(sim)
    if isinstance(target, NodeTarget):
        nid = sim.world.get_node(target.pos)
        ndef = sim.world.registry.get(nid)
        if not ndef.diggable:
            sim.dig_progress = None
            return
        if sim.dig_progress is not None and sim.dig_progress[0] == target.pos:
            held = sim.dig_progress[1] + 1
        else:
            held = 1
        if held >= ndef.dig_ticks:
            sim.world.set_node(target.pos, AIR_ID)
            events.append(NodeDug(target.pos, ndef.name))
            sim.dig_progress = None
        else:
            sim.dig_progress = (target.pos, held)
    elif isinstance(target, EntityTarget):
        sim.dig_progress = None
        ent = sim.entity(target.eid)
        if ent is not None:
            ent.health -= _attack_damage(sim.player.wielded)
            if ent.health <= 0:
                sim.entities.remove(ent)
                events.append(EntityDied(ent.kind))
    else:
        sim.dig_progress = None


def update_entities(sim: SimState, dt: float) -> list[SimEvent]:
    """Mob tick: chase the player, bite on contact with a cooldown."""
    events: list[SimEvent] = []
    p = sim.player
    for e in list(sim.entities):
        dx = p.pos[0] - e.pos[0]
        dz = p.pos[2] - e.pos[2]
        dist_h = math.hypot(dx, dz)
        if dist_h > 1e-9:
            e.vel[0] = dx / dist_h * SPIDER_SPEED
            e.vel[2] = dz / dist_h * SPIDER_SPEED
        else:
            e.vel[0] = 0.0
            e.vel[2] = 0.0
        e.vel[1] -= GRAVITY * dt
        e.pos, e.vel, _ = resolve_move(sim.world, SPIDER_HALF, e.pos, e.vel, dt)

        if e.attack_cooldown > 0:
            e.attack_cooldown -= 1
        dist = math.dist(e.pos, p.pos)
        if dist <= SPIDER_RANGE and e.attack_cooldown == 0 and p.health > 0:
            p.health = max(0, p.health - SPIDER_DAMAGE)
            e.attack_cooldown = SPIDER_COOLDOWN
    return events


def step_tick(sim: SimState, action: Action) -> list[SimEvent]:
    """Advance one tick; returns the events in occurrence order, Tick last."""
    events: list[SimEvent] = []
    p = sim.player

    apply_mouse(p, action.mouse[0], action.mouse[1])

    f = (1.0 if action.pressed(KEY_FORWARD) else 0.0) - (
        1.0 if action.pressed(KEY_BACKWARD) else 0.0
    )
    s = (1.0 if action.pressed(KEY_RIGHT) else 0.0) - (
        1.0 if action.pressed(KEY_LEFT) else 0.0
    )
    yr = math.radians(p.yaw)
    ix = f * math.sin(yr) + s * math.cos(yr)
    iz = f * math.cos(yr) - s * math.sin(yr)
    mag = math.hypot(ix, iz)
    speed = WALK_SPEED * (SPRINT_MULT if action.pressed(KEY_SPRINT) else 1.0)
    if mag > 1e-12:
        p.vel[0] = ix / mag * speed
        p.vel[2] = iz / mag * speed
    else:
        p.vel[0] = 0.0
        p.vel[2] = 0.0

    if action.pressed(KEY_JUMP) and p.grounded:
        p.vel[1] = JUMP_SPEED

    p.vel[1] -= GRAVITY * DT
    p.pos, p.vel, p.grounded = resolve_move(sim.world, PLAYER_HALF, p.pos, p.vel, DT)

    if action.pressed(KEY_DIG):
        _process_dig(sim, events)
    else:
        sim.dig_progress = None

    events.extend(update_entities(sim, DT))

    if p.health == 0 and not sim._player_died_emitted:
        sim._player_died_emitted = True
        events.append(PlayerDied())

    events.append(Tick())
    sim.tick += 1
    return events


# -- control operations used by task scripts --------------------------------


def _check_in_bounds(world: VoxelWorld, pos) -> None:
    if world.bounds is not None and not world.bounds.contains(
        math.floor(pos[0]), math.floor(pos[1]), math.floor(pos[2])
    ):
        raise OutOfBounds(f"position {tuple(pos)} outside world bounds")


def teleport_player(sim: SimState, pos) -> None:
    _check_in_bounds(sim.world, pos)
    sim.player.pos = [float(pos[0]), float(pos[1]), float(pos[2])]
    sim.player.vel = [0.0, 0.0, 0.0]


def spawn_entity(sim: SimState, kind: str, pos) -> int:
    if kind != "spider":
        raise ValueError(f"unknown entity kind {kind!r}")
    _check_in_bounds(sim.world, pos)
    eid = sim._next_eid
    sim._next_eid += 1
    sim.entities.append(Entity(eid, kind, [float(pos[0]), float(pos[1]), float(pos[2])]))
    return eid


def set_player_health(sim: SimState, health: int) -> None:
    if not 0 <= health <= MAX_HEALTH:
        raise ValueError(f"health must be in 0..{MAX_HEALTH}")
    sim.player.health = int(health)
