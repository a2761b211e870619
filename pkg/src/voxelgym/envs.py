"""The five built-in benchmark environments.

Each bundles a world generator, a task script, a discrete action map, and a
step budget under a fixed environment id. World geometry re-rolls from the
episode seed on every reset, so agents cannot memorize layouts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .spaces import DiscreteMap
from .events import EntityDied, EpisodeStart, NodeDug, PlayerDied, Tick
from .prng import SplitMix64
from .sim import SimState
from .tasks import RewardState, TaskManifest, TaskScript, parse_manifest
from .worldgen import Cage, CaveDescent, EnclosedRoom, FlatForest, SpawnInfo, generate_world

ROOM_REACH = 1.2  # horizontal distance that counts as touching the target
SPIDER_ROUNDS = 5


@dataclass
class Episode:
    sim: SimState
    script: TaskScript
    reward: RewardState
    spawn: SpawnInfo


@dataclass(frozen=True)
class EnvBuilder:
    env_id: str
    build: Callable[[int], Episode]
    action_map: DiscreteMap
    budget: int
    manifest: TaskManifest


def _chop_tree_episode(seed: int) -> Episode:
    world, spawn = generate_world(FlatForest(extent=64, tree_count=80, seed=seed))
    sim = SimState(world, spawn.player_pos, spawn.player_yaw, seed=seed,
                   wielded="steel_axe")
    script = TaskScript()

    def on_dig(event, ctx):
        if "tree" in event.name:
            ctx.set_reward_once(1.0, 0.0)

    script.on(NodeDug, on_dig)
    return Episode(sim, script, RewardState(), spawn)


def _room_episode(seed: int, width: int, depth: int) -> Episode:
    world, spawn = generate_world(EnclosedRoom(width=width, depth=depth, seed=seed))
    sim = SimState(world, spawn.player_pos, spawn.player_yaw, seed=seed)
    script = TaskScript()
    tx, _, tz = spawn.markers["red_block"]
    target = (tx + 0.5, tz + 0.5)

    def on_start(event, ctx):
        ctx.set_reward(-1.0)

    def on_tick(event, ctx):
        px, _, pz = ctx.player_pos()
        if math.hypot(px - target[0], pz - target[1]) <= ROOM_REACH:
            ctx.set_termination()

    script.on(EpisodeStart, on_start)
    script.on(Tick, on_tick)
    return Episode(sim, script, RewardState(), spawn)


def _speleo_episode(seed: int) -> Episode:
    world, spawn = generate_world(CaveDescent(depth=30, seed=seed))
    sim = SimState(world, spawn.player_pos, spawn.player_yaw, seed=seed)
    script = TaskScript()

    def on_tick(event, ctx):
        ctx.set_reward(-ctx.player_pos()[1])

    script.on(Tick, on_tick)
    return Episode(sim, script, RewardState(), spawn)


def _spiders_episode(seed: int) -> Episode:
    world, spawn = generate_world(Cage(radius=8, seed=seed))
    sim = SimState(world, spawn.player_pos, spawn.player_yaw, seed=seed,
                   wielded="steel_sword")
    script = TaskScript()
    perimeter = spawn.markers["perimeter"]
    # separate stream from the worldgen draws on the same seed
    rng = SplitMix64(seed ^ 0x9E3779B97F4A7C15)
    state = {"round": 0, "alive": 0}

    def spawn_round(ctx):
        state["round"] += 1
        count = state["round"]
        picks = rng.sample_indices(len(perimeter), count)
        for i in picks:
            x, z = perimeter[i]
            ctx.spawn_entity("spider", (x + 0.5, 1.0, z + 0.5))
        state["alive"] = count

    def on_start(event, ctx):
        spawn_round(ctx)

    def on_entity_died(event, ctx):
        if event.kind != "spider":
            return
        ctx.set_reward_once(1.0, 0.0)
        state["alive"] -= 1
        if state["alive"] == 0:
            if state["round"] >= SPIDER_ROUNDS:
                ctx.set_termination()
            else:
                spawn_round(ctx)

    def on_player_died(event, ctx):
        ctx.set_termination()

    script.on(EpisodeStart, on_start)
    script.on(EntityDied, on_entity_died)
    script.on(PlayerDied, on_player_died)
    return Episode(sim, script, RewardState(), spawn)


_MOUSE_ALL = ("left", "right", "up", "down")
_MOUSE_HORIZONTAL = ("left", "right")


def _manifest(name: str, description: str) -> TaskManifest:
    text = f"name = {name}\ndescription = {description}\ndepends = default\n"
    return parse_manifest(text)


def builtin_registry() -> dict[str, EnvBuilder]:
    return {
        "Craftium/ChopTree-v0": EnvBuilder(
            env_id="Craftium/ChopTree-v0",
            build=_chop_tree_episode,
            action_map=DiscreteMap(keys=("forward", "dig"), mouse_dirs=_MOUSE_ALL,
                                   magnitude=0.5),
            budget=500,
            manifest=_manifest("chop_tree", "Chop trees for reward."),
        ),
        "Craftium/Room-v0": EnvBuilder(
            env_id="Craftium/Room-v0",
            build=lambda seed: _room_episode(seed, width=21, depth=11),
            action_map=DiscreteMap(keys=("forward",), mouse_dirs=_MOUSE_HORIZONTAL,
                                   magnitude=0.5),
            budget=500,
            manifest=_manifest("room", "Reach the red block."),
        ),
        "Craftium/SmallRoom-v0": EnvBuilder(
            env_id="Craftium/SmallRoom-v0",
            build=lambda seed: _room_episode(seed, width=11, depth=9),
            action_map=DiscreteMap(keys=("forward",), mouse_dirs=_MOUSE_HORIZONTAL,
                                   magnitude=0.5),
            budget=200,
            manifest=_manifest("small_room", "Reach the red block in a small room."),
        ),
        "Craftium/Speleo-v0": EnvBuilder(
            env_id="Craftium/Speleo-v0",
            build=_speleo_episode,
            action_map=DiscreteMap(keys=("forward", "jump"), mouse_dirs=_MOUSE_ALL,
                                   magnitude=0.5),
            budget=500,
            manifest=_manifest("speleo", "Descend to the cave bottom."),
        ),
        "Craftium/SpidersAttack-v0": EnvBuilder(
            env_id="Craftium/SpidersAttack-v0",
            build=_spiders_episode,
            action_map=DiscreteMap(keys=("forward", "left", "right", "jump", "dig"),
                                   mouse_dirs=_MOUSE_ALL, magnitude=0.5),
            budget=2000,
            manifest=_manifest("spiders_attack", "Survive five spider rounds."),
        ),
    }
