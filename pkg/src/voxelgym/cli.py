"""Command line tools: serve, random-agent, bench."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

from .client import make, sample_action
from .prng import SplitMix64
from .server import ServerConfig, serve

_LOG_LEVELS = {
    "error": logging.ERROR,
    "warn": logging.WARNING,
    "info": logging.INFO,
    "debug": logging.DEBUG,
}


def _parse_bind(value: str) -> tuple[str, int]:
    host, _, port = value.rpartition(":")
    if not port:
        raise argparse.ArgumentTypeError("expected host:port")
    return host or "127.0.0.1", int(port)


def write_ppm(path: Path, w: int, h: int, pixels: bytes) -> None:
    with open(path, "wb") as fh:
        fh.write(f"P6\n{w} {h}\n255\n".encode("ascii"))
        fh.write(pixels)


def _cmd_serve(args) -> int:
    logging.basicConfig(
        stream=sys.stderr,
        level=_LOG_LEVELS[args.log_level],
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )
    host, port = _parse_bind(args.bind)
    serve(ServerConfig(host=host, port=port, max_sessions=args.max_sessions))
    return 0


def _cmd_random_agent(args) -> int:
    rng = SplitMix64(args.seed)
    record_dir = Path(args.record) if args.record else None
    if record_dir is not None:
        record_dir.mkdir(parents=True, exist_ok=True)

    env = make(args.env, seed=args.seed, connect=args.connect)
    rows = []
    try:
        obs, _ = env.reset(args.seed)
        if record_dir is not None:
            write_ppm(record_dir / "frame_000000.ppm", obs.shape[1], obs.shape[0],
                      obs.tobytes())
        for t in range(args.steps):
            action = sample_action(env, rng)
            obs, reward, terminated, truncated, _ = env.step(action)
            rows.append((t, reward, terminated, truncated))
            if record_dir is not None:
                write_ppm(record_dir / f"frame_{t + 1:06d}.ppm", obs.shape[1],
                          obs.shape[0], obs.tobytes())
            if terminated or truncated:
                obs, _ = env.reset()
    finally:
        env.close()

    if record_dir is not None:
        with open(record_dir / "rewards.csv", "w", newline="") as fh:
            fh.write("t,reward,terminated,truncated\n")
            for t, reward, tm, tc in rows:
                fh.write(f"{t},{reward:.3f},{int(tm)},{int(tc)}\n")
    total = sum(r[1] for r in rows)
    print(f"{len(rows)} steps, total reward {total:.3f}")
    return 0


def _cmd_bench(args) -> int:
    rng = SplitMix64(args.seed)
    env = make(args.env, seed=args.seed, connect=args.connect)
    try:
        env.reset(args.seed)
        # warm the JIT and caches before the timed section
        for _ in range(10):
            _, _, tm, tc, _ = env.step(sample_action(env, rng))
            if tm or tc:
                env.reset()
        steps = 0
        start = time.perf_counter()
        deadline = start + args.seconds
        while time.perf_counter() < deadline:
            _, _, tm, tc, _ = env.step(sample_action(env, rng))
            steps += 1
            if tm or tc:
                env.reset()
        elapsed = time.perf_counter() - start
    finally:
        env.close()
    print(f"{steps} steps in {elapsed:.2f} s -> {steps / elapsed:.1f} steps/s")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="voxelgym")
    sub = parser.add_subparsers(dest="command", required=True)

    p_serve = sub.add_parser("serve", help="run the environment server")
    p_serve.add_argument("--bind", default="127.0.0.1:4117", help="host:port to listen on")
    p_serve.add_argument("--max-sessions", type=int, default=8)
    p_serve.add_argument("--log-level", choices=sorted(_LOG_LEVELS), default="info")
    p_serve.set_defaults(func=_cmd_serve)

    p_agent = sub.add_parser("random-agent", help="run a random policy")
    p_agent.add_argument("--env", required=True)
    p_agent.add_argument("--steps", type=int, default=500)
    p_agent.add_argument("--seed", type=int, default=0)
    p_agent.add_argument("--record", help="directory for PPM frames and rewards.csv")
    p_agent.add_argument("--connect", help="host:port of a running server "
                                           "(default: spawn one)")
    p_agent.set_defaults(func=_cmd_random_agent)

    p_bench = sub.add_parser("bench", help="measure step throughput")
    p_bench.add_argument("--env", required=True)
    p_bench.add_argument("--seconds", type=float, default=10.0)
    p_bench.add_argument("--seed", type=int, default=0)
    p_bench.add_argument("--connect", help="host:port of a running server "
                                           "(default: spawn one)")
    p_bench.set_defaults(func=_cmd_bench)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except Exception as exc:  # surface protocol/env failures as exit codes
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
