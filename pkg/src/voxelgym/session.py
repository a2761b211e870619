"""Episode orchestration behind the protocol state machine.

A session owns one simulator, one task script and one reward state. Each
step runs the fixed pipeline: tick the sim, dispatch events to the task
script, collect the reward/termination pair, count the step against the
budget, render the observation, and assemble the reply.
"""

from __future__ import annotations

from .envs import Episode, EnvBuilder
from .events import EpisodeStart
from .prng import SplitMix64
from .render import Camera, render
from .tasks import RewardState, TaskContext, collect_step, dispatch_events
from .wire import Config, ResetResult, StepResult


class ScriptError(RuntimeError):
    pass


class EnvSession:
    """Backend driven by the session FSM: configure, reset, step."""

    def __init__(self, registry: dict[str, EnvBuilder]):
        self.registry = registry
        self.builder: EnvBuilder | None = None
        self.obs_w = 64
        self.obs_h = 64
        self._master: SplitMix64 | None = None
        self.episode: Episode | None = None
        self.steps_taken = 0

    def configure(self, config: Config) -> bool:
        builder = self.registry.get(config.env_id)
        if builder is None:
            return False
        if config.obs_w < 1 or config.obs_h < 1:
            return False
        self.builder = builder
        self.obs_w = config.obs_w
        self.obs_h = config.obs_h
        self._master = SplitMix64(config.seed)
        return True

    def _observe(self):
        ep = self.episode
        camera = Camera.for_player(ep.sim.player)
        return render(ep.sim.world, ep.sim.entities, camera, self.obs_w, self.obs_h)

    def _info(self) -> dict[str, str]:
        sim = self.episode.sim
        pos = sim.player.pos
        return {
            "tick": str(sim.tick),
            "player_pos": f"{pos[0]:.3f},{pos[1]:.3f},{pos[2]:.3f}",
        }

    def reset(self, seed: int | None) -> ResetResult:
        if self.builder is None:
            raise RuntimeError("reset before configure")
        episode_seed = seed if seed is not None else self._master.next_u64()
        self.episode = self.builder.build(episode_seed)
        self.steps_taken = 0
        ctx = TaskContext(self.episode.sim, self.episode.reward)
        try:
            dispatch_events(self.episode.script, [EpisodeStart()], ctx)
        except Exception as exc:
            raise ScriptError(f"task handler failed during reset: {exc!r}") from exc
        return ResetResult(self._observe(), self._info())

    def step(self, action) -> StepResult:
        if self.episode is None:
            raise RuntimeError("step before reset")
        ep = self.episode
        from .sim import step_tick

        events = step_tick(ep.sim, action)
        ctx = TaskContext(ep.sim, ep.reward)
        try:
            dispatch_events(ep.script, events, ctx)
        except Exception as exc:
            raise ScriptError(f"task handler failed: {exc!r}") from exc
        reward, terminated = collect_step(ep.reward)
        self.steps_taken += 1
        truncated = self.steps_taken >= self.builder.budget and not terminated
        return StepResult(reward, terminated, truncated, self._observe(), self._info())
