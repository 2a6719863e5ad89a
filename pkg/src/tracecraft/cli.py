"""Command-line front door: reproducible workflows over all subsystems."""

from __future__ import annotations

import argparse
import asyncio
import json
import os
import sys

from .afd import evaluate, report_table
from .corpus import build_corpus, load_manifest, load_records, replay_bundle
from .rng import Stream
from .scenegen import SceneConfig, SceneGenerationError, generate_scene
from .server import ServeConfig, TraceServer
from .storage import save_log, save_scene
from .taskgraph import TASK_WEIGHTS, TaskId
from .vandal import vandal_run


def _emit(args, payload: dict, text: str) -> None:
    if args.format == "json":
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _cmd_generate(args) -> int:
    world = generate_scene(args.seed, SceneConfig())
    out = args.out or f"scene_{args.seed}.json"
    save_scene(world, out)
    _emit(args, {"out": out, "seed": args.seed, "hash": world.state_hash()}, f"wrote {out} (hash {world.state_hash()[:16]})")
    return 0


def _cmd_vandal_run(args) -> int:
    world = generate_scene(args.seed, SceneConfig())
    task = TaskId(args.task) if args.task else Stream(args.seed, "cli").weighted_choice(
        list(TASK_WEIGHTS), list(TASK_WEIGHTS.values())
    )
    world_after, log = vandal_run(world, task, Stream(args.seed, "vandal"), args.budget)
    if args.out:
        save_log(log, args.out)
    if args.scene_out:
        save_scene(world_after, args.scene_out)
    payload = {
        "task": task.value,
        "status": log.status,
        "events": len(log.events),
        "death_cause": log.death_cause,
        "hash": world_after.state_hash(),
    }
    _emit(args, payload, f"task {task.value}: {log.status} after {len(log.events)} events")
    return 0


def _cmd_build_corpus(args) -> int:
    ratios = tuple(float(x) for x in args.ratios.split(","))
    manifest = build_corpus(
        args.scenes, args.seed, args.out, split_ratios=ratios, with_tracks=args.with_tracks
    )
    payload = {
        "out": args.out,
        "scenes": manifest.n_scenes,
        "questions": len(manifest.questions),
        "splits": manifest.split_counts,
    }
    _emit(args, payload, f"built {manifest.n_scenes} scenes, {len(manifest.questions)} questions in {args.out}")
    return 0


def _cmd_evaluate(args) -> int:
    records = load_records(args.corpus, split=args.split, limit=args.limit)
    report = evaluate(records, explorer=args.explorer, reasoner=args.reasoner, seed=args.seed)
    _emit(args, report, report_table(report))
    return 0 if not report["failures"] else 1


def _cmd_serve(args) -> int:
    config = ServeConfig(corpus_dir=args.corpus, data_dir=args.data_dir, default_seed=args.seed)

    async def run() -> None:
        server = TraceServer(args.host, args.port, config)
        await server.start()
        print(f"serving wire protocol v1 on {args.host}:{server.bound_port}", flush=True)
        try:
            await server.serve_forever()
        except asyncio.CancelledError:
            pass
        finally:
            await server.stop()

    try:
        asyncio.run(run())
    except KeyboardInterrupt:
        pass
    return 0


def _cmd_replay(args) -> int:
    result = replay_bundle(args.corpus or ".", args.bundle)
    ok = result["world_hash_ok"] and result["track_hash_ok"]
    _emit(args, result, ("ok: " if ok else "MISMATCH: ") + result["resimulated_world_hash"][:16])
    return 0 if ok else 1


def _cmd_stats(args) -> int:
    manifest = load_manifest(os.path.join(args.corpus, "manifest.json"))
    payload = {
        "scenes": manifest["n_scenes"],
        "questions": manifest["question_count"],
        "categories": manifest["category_counts"],
        "splits": manifest["split_counts"],
        "choice_positions": manifest["choice_position_counts"],
    }
    lines = [f"scenes: {manifest['n_scenes']}  questions: {manifest['question_count']}"]
    lines.append(f"{'category':<10} {'count':>6} {'train':>6} {'test':>6} {'val':>6}  positions A/B/C/D")
    for cat, stats in manifest["category_counts"].items():
        pos = "/".join(str(p) for p in stats["positions"])
        sp = stats["splits"]
        lines.append(f"{cat:<10} {stats['count']:>6} {sp['train']:>6} {sp['test']:>6} {sp['val']:>6}  {pos}")
    _emit(args, payload, "\n".join(lines))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tracecraft", description="Detective-game world, corpora, and reasoners")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a scene")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out")
    p.set_defaults(fn=_cmd_generate)

    p = sub.add_parser("vandal-run", help="run the vandal on a task")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--task", choices=[t.value for t in TaskId])
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--out", help="episode log path")
    p.add_argument("--scene-out", help="post-run scene path")
    p.set_defaults(fn=_cmd_vandal_run)

    p = sub.add_parser("build-corpus", help="build a question corpus")
    p.add_argument("--scenes", type=int, required=True)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.add_argument("--ratios", default="0.8,0.1,0.1")
    p.add_argument("--with-tracks", action="store_true")
    p.set_defaults(fn=_cmd_build_corpus)

    p = sub.add_parser("evaluate", help="accuracy of an explorer+reasoner over a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--explorer", choices=("random", "greedy", "ideal"), default="ideal")
    p.add_argument("--reasoner", choices=("afd", "oracle", "random"), default="afd")
    p.add_argument("--split", choices=("train", "test", "val"))
    p.add_argument("--limit", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(fn=_cmd_evaluate)

    p = sub.add_parser("serve", help="run the session server")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7878)
    p.add_argument("--corpus")
    p.add_argument("--data-dir")
    p.add_argument("--seed", type=int, default=7)
    p.set_defaults(fn=_cmd_serve)

    p = sub.add_parser("replay", help="re-simulate a replay bundle and verify hashes")
    p.add_argument("bundle")
    p.add_argument("--corpus")
    p.set_defaults(fn=_cmd_replay)

    p = sub.add_parser("stats", help="corpus statistics")
    p.add_argument("--corpus", required=True)
    p.set_defaults(fn=_cmd_stats)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except (SceneGenerationError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
