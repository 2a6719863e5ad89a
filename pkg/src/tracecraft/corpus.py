"""Corpus assembly: scenes, vandal runs, questions, splits, and statistics.

One corpus directory holds a manifest, a questions.jsonl, per-scene scene
and log files, and content-addressed replay bundles. Everything derives
from the corpus seed, so two builds of the same seed are byte-identical.
"""

from __future__ import annotations

import json
import os
import time
from dataclasses import dataclass, field
from typing import Optional

from .events import EpisodeLog
from .questions import Question, generate_questions
from .rng import Stream
from .scenegen import SceneConfig, SceneGenerationError, generate_scene
from .storage import (
    CORPUS_FORMAT,
    ParseError,
    UnsupportedVersionError,
    bundle_to_json,
    canonical_json,
    load_log,
    load_scene,
    save_bundle,
    save_log,
    save_scene,
    save_track,
    track_hash,
)
from .taskgraph import TASK_WEIGHTS, TaskId
from .vandal import vandal_run
from .world import WorldState

SPLITS = ("train", "test", "val")


class CorpusBuildError(Exception):
    def __init__(self, scene_index: int, cause: Exception):
        self.scene_index = scene_index
        self.cause = cause
        super().__init__(f"scene {scene_index}: {cause}")


@dataclass
class CorpusManifest:
    seed: int
    n_scenes: int
    split_ratios: tuple[float, float, float]
    questions: list[dict] = field(default_factory=list)
    scenes: list[dict] = field(default_factory=list)
    category_counts: dict = field(default_factory=dict)
    split_counts: dict = field(default_factory=dict)
    choice_position_counts: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "format": CORPUS_FORMAT,
            "seed": self.seed,
            "n_scenes": self.n_scenes,
            "split_ratios": list(self.split_ratios),
            "question_count": len(self.questions),
            "category_counts": self.category_counts,
            "split_counts": self.split_counts,
            "choice_position_counts": self.choice_position_counts,
            "scenes": self.scenes,
        }


def _split_assignment(n: int, ratios: tuple[float, float, float], rng: Stream) -> list[str]:
    """Deterministic partition with split sizes within one of ratio*n."""
    counts = [int(r * n) for r in ratios]
    while sum(counts) < n:
        counts[0] += 1
    order = list(range(n))
    rng.shuffle(order)
    assignment = [""] * n
    k = 0
    for split, count in zip(SPLITS, counts):
        for idx in order[k : k + count]:
            assignment[idx] = split
        k += count
    return assignment


def build_corpus(
    n_scenes: int,
    seed: int,
    out_dir: str,
    split_ratios: tuple[float, float, float] = (0.8, 0.1, 0.1),
    config: Optional[SceneConfig] = None,
    step_budget: int = 1000,
    with_tracks: bool = False,
) -> CorpusManifest:
    """Generate scenes, run the vandal, synthesize questions, write the tree."""
    if n_scenes < 1:
        raise ValueError("n_scenes must be >= 1")
    if abs(sum(split_ratios) - 1.0) > 1e-9:
        raise ValueError("split ratios must sum to 1")
    config = config or SceneConfig()
    root = Stream(seed, "corpus")
    tasks = list(TASK_WEIGHTS)
    weights = list(TASK_WEIGHTS.values())

    manifest = CorpusManifest(seed=seed, n_scenes=n_scenes, split_ratios=split_ratios)
    all_questions: list[Question] = []

    os.makedirs(out_dir, exist_ok=True)
    subdirs = ["scenes", "logs", "bundles"] + (["tracks"] if with_tracks else [])
    for sub in subdirs:
        os.makedirs(os.path.join(out_dir, sub), exist_ok=True)

    for i in range(n_scenes):
        stream = root.child("scene", i)
        scene_seed = stream.randint(0, 2**62)
        task = stream.weighted_choice(tasks, weights)
        try:
            world = generate_scene(scene_seed, config)
        except SceneGenerationError as exc:
            raise CorpusBuildError(i, exc) from exc
        world_after, log = vandal_run(world, task, stream.child("vandal"), step_budget)
        scene_id = f"scene_{i:05d}"
        questions = generate_questions(log, world_after, stream.child("questions"), scene_id=scene_id)

        scene_rel = f"scenes/{scene_id}.json"
        log_rel = f"logs/{scene_id}.log.json"
        save_scene(world_after, os.path.join(out_dir, scene_rel))
        save_log(log, os.path.join(out_dir, log_rel))

        track_rel = None
        t_hash = None
        if with_tracks:
            from .detective import ideal_explorer, spawn_detective

            if questions:
                ep = spawn_detective(world_after, questions[0], log)
                track = ideal_explorer(ep)
                track_rel = f"tracks/{scene_id}.track.json"
                save_track(track, os.path.join(out_dir, track_rel))
                t_hash = track_hash(track)

        bundle = bundle_to_json(
            scene_seed=scene_seed,
            config=config.to_dict(),
            task=task.value,
            vandal_stream=stream.child("vandal").state_dict(),
            final_world_hash=world_after.state_hash(),
            track_hash_value=t_hash,
            questions=questions,
            scene_path=scene_rel,
            log_path=log_rel,
            track_path=track_rel,
        )
        bundle_rel = os.path.relpath(save_bundle(bundle, os.path.join(out_dir, "bundles")), out_dir)

        manifest.scenes.append(
            {
                "scene_id": scene_id,
                "seed": scene_seed,
                "task": task.value,
                "status": log.status,
                "scene_path": scene_rel,
                "log_path": log_rel,
                "bundle_path": bundle_rel,
                "question_ids": [q.id for q in questions],
            }
        )
        all_questions.extend(questions)

    splits = _split_assignment(len(all_questions), split_ratios, root.child("split"))
    for q, s in zip(all_questions, splits):
        q.split = s

    manifest.questions = [q.to_json() for q in all_questions]
    cat_counts: dict = {}
    pos_counts = {str(i): 0 for i in range(4)}
    split_counts = {s: 0 for s in SPLITS}
    for q in all_questions:
        cat = cat_counts.setdefault(q.category, {"count": 0, "positions": [0, 0, 0, 0], "splits": {s: 0 for s in SPLITS}})
        cat["count"] += 1
        cat["positions"][q.answer_index] += 1
        cat["splits"][q.split] += 1
        pos_counts[str(q.answer_index)] += 1
        split_counts[q.split] += 1
    manifest.category_counts = cat_counts
    manifest.split_counts = split_counts
    manifest.choice_position_counts = pos_counts

    with open(os.path.join(out_dir, "questions.jsonl"), "w", encoding="utf-8") as fh:
        for q in all_questions:
            fh.write(canonical_json(q.to_json()))
            fh.write("\n")
    with open(os.path.join(out_dir, "manifest.json"), "w", encoding="utf-8") as fh:
        fh.write(canonical_json(manifest.to_json()))
        fh.write("\n")
    return manifest


def load_manifest(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", offset=exc.pos) from exc
    if doc.get("format") != CORPUS_FORMAT:
        raise UnsupportedVersionError(str(doc.get("format")), CORPUS_FORMAT)
    return doc


def load_questions(corpus_dir: str) -> list[Question]:
    out = []
    with open(os.path.join(corpus_dir, "questions.jsonl"), "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                out.append(Question.from_json(json.loads(line)))
    return out


def load_records(
    corpus_dir: str, split: Optional[str] = None, limit: Optional[int] = None
) -> list[tuple[Question, WorldState, EpisodeLog]]:
    """(question, world, log) triples ready for evaluation."""
    manifest = load_manifest(os.path.join(corpus_dir, "manifest.json"))
    questions = load_questions(corpus_dir)
    by_scene: dict[str, dict] = {s["scene_id"]: s for s in manifest["scenes"]}
    cache: dict[str, tuple[WorldState, EpisodeLog]] = {}
    out = []
    for q in questions:
        if split and q.split != split:
            continue
        scene = by_scene[q.scene_id]
        if q.scene_id not in cache:
            cache[q.scene_id] = (
                load_scene(os.path.join(corpus_dir, scene["scene_path"])),
                load_log(os.path.join(corpus_dir, scene["log_path"])),
            )
        world, log = cache[q.scene_id]
        out.append((q, world, log))
        if limit is not None and len(out) >= limit:
            break
    return out


def replay_bundle(corpus_dir: str, bundle_path: str) -> dict:
    """Re-simulate a bundle from its seeds; verify stored hashes."""
    from .storage import load_bundle

    doc = load_bundle(bundle_path if os.path.isabs(bundle_path) else os.path.join(corpus_dir, bundle_path))
    world = generate_scene(int(doc["scene_seed"]), SceneConfig.from_dict(doc["config"]))
    rng = Stream.from_state_dict(doc["vandal_stream"])
    world_after, log = vandal_run(world, doc["task"], rng)
    ok_world = world_after.state_hash() == doc["final_world_hash"]
    ok_track = True
    if doc.get("track_hash"):
        from .detective import ideal_explorer, spawn_detective

        questions = [Question.from_json(qd) for qd in doc["questions"]]
        if questions:
            ep = spawn_detective(world_after, questions[0], log)
            track = ideal_explorer(ep)
            ok_track = track_hash(track) == doc["track_hash"]
    return {
        "world_hash_ok": ok_world,
        "track_hash_ok": ok_track,
        "stored_world_hash": doc["final_world_hash"],
        "resimulated_world_hash": world_after.state_hash(),
    }
