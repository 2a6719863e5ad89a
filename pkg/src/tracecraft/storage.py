"""Versioned on-disk formats: scenes, logs, frame tracks, replay bundles.

All documents are JSON with a `format` field; loads reject unknown versions
by name and surface malformed input as position-annotated parse errors.
Round-trips are bit-exact: load(save(x)) reproduces the same state hash.
"""

from __future__ import annotations

import hashlib
import json
import os
from typing import Any

import numpy as np

from .achievements import Achievement
from .detective import EncodedObservation, FrameTrack
from .events import EpisodeLog
from .items import Item
from .questions import Question, mask_from_rle, mask_to_rle
from .rng import Stream
from .tiles import Direction
from .world import SIZE, AgentState, Creature, WorldState

SCENE_FORMAT = "tracecraft-scene/1"
LOG_FORMAT = "tracecraft-log/1"
TRACK_FORMAT = "tracecraft-track/1"
CORPUS_FORMAT = "tracecraft-corpus/1"
BUNDLE_FORMAT = "tracecraft-bundle/1"


class ParseError(Exception):
    def __init__(self, message: str, offset: int | None = None):
        self.offset = offset
        super().__init__(f"{message}" + (f" (byte offset {offset})" if offset is not None else ""))


class UnsupportedVersionError(Exception):
    def __init__(self, found: str, expected: str):
        self.found = found
        self.expected = expected
        super().__init__(f"unsupported document version {found!r}, expected {expected!r}")


def canonical_json(obj: Any) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_hash(obj: Any) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def _load_document(path: str, expected_format: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(doc, dict) or "format" not in doc:
        raise ParseError(f"{path}: missing format field")
    if doc["format"] != expected_format:
        raise UnsupportedVersionError(str(doc["format"]), expected_format)
    return doc


def _write_document(path: str, doc: dict) -> None:
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(canonical_json(doc))
        fh.write("\n")


# -- run-length encoding ------------------------------------------------------


def rle_encode(values: np.ndarray) -> list[list[int]]:
    flat = np.asarray(values).ravel()
    runs: list[list[int]] = []
    if flat.size == 0:
        return runs
    cur = int(flat[0])
    count = 1
    for v in flat[1:]:
        v = int(v)
        if v == cur:
            count += 1
        else:
            runs.append([cur, count])
            cur, count = v, 1
    runs.append([cur, count])
    return runs


def rle_decode(runs: list[list[int]], size: int, dtype=np.int16) -> np.ndarray:
    out = np.empty(size, dtype=dtype)
    pos = 0
    for value, count in runs:
        out[pos : pos + count] = value
        pos += count
    if pos != size:
        raise ParseError(f"run-length data covers {pos} cells, expected {size}")
    return out


# -- scene ---------------------------------------------------------------------


def _agent_to_json(a: AgentState) -> dict:
    return {
        "role": a.role,
        "pos": list(a.pos),
        "facing": int(a.facing),
        "inventory": {i.value: n for i, n in sorted(a.inventory.items(), key=lambda kv: kv[0].value)},
        "health": a.health,
        "food": a.food,
        "drink": a.drink,
        "energy": a.energy,
        "alive": a.alive,
        "sleeping": a.sleeping,
        "fired": sorted(x.value for x in a.fired),
    }


def _agent_from_json(d: dict) -> AgentState:
    return AgentState(
        role=d["role"],
        pos=tuple(d["pos"]),
        facing=Direction(d["facing"]),
        inventory={Item(k): int(v) for k, v in d["inventory"].items()},
        health=int(d["health"]),
        food=int(d["food"]),
        drink=int(d["drink"]),
        energy=int(d["energy"]),
        alive=bool(d["alive"]),
        sleeping=bool(d["sleeping"]),
        fired={Achievement(x) for x in d["fired"]},
    )


def scene_to_json(world: WorldState) -> dict:
    return {
        "format": SCENE_FORMAT,
        "seed": world.seed,
        "config": dict(world.config),
        "grid_rle": rle_encode(world.grid),
        "creatures": [[c.kind, list(c.pos), c.health, c.cooldown] for c in world.creatures],
        "agents": {role: _agent_to_json(a) for role, a in sorted(world.agents.items())},
        "tick": world.tick,
        "phase": world.phase,
        "vandal_start": list(world.vandal_start) if world.vandal_start else None,
        "rng": world.rng.state_dict(),
    }


def scene_from_json(doc: dict) -> WorldState:
    grid = rle_decode(doc["grid_rle"], SIZE * SIZE).reshape(SIZE, SIZE)
    return WorldState(
        grid=grid,
        creatures=[Creature(k, tuple(p), int(h), int(cd)) for k, p, h, cd in doc["creatures"]],
        agents={role: _agent_from_json(a) for role, a in doc["agents"].items()},
        tick=int(doc["tick"]),
        rng=Stream.from_state_dict(doc["rng"]),
        phase=doc["phase"],
        vandal_start=tuple(doc["vandal_start"]) if doc.get("vandal_start") else None,
        seed=int(doc["seed"]),
        config=dict(doc["config"]),
    )


def save_scene(world: WorldState, path: str) -> None:
    _write_document(path, scene_to_json(world))


def load_scene(path: str) -> WorldState:
    return scene_from_json(_load_document(path, SCENE_FORMAT))


# -- episode log ------------------------------------------------------------------


def save_log(log: EpisodeLog, path: str) -> None:
    doc = {"format": LOG_FORMAT, **log.to_json()}
    _write_document(path, doc)


def load_log(path: str) -> EpisodeLog:
    doc = _load_document(path, LOG_FORMAT)
    return EpisodeLog.from_json(doc)


# -- frame track --------------------------------------------------------------------


def track_to_json(track: FrameTrack) -> dict:
    mask = track.frames[0].mask if track.frames else np.zeros((SIZE, SIZE), dtype=bool)
    return {
        "format": TRACK_FORMAT,
        "question_id": track.question_id,
        "truncated": track.truncated,
        "mask_rle": mask_to_rle(mask),
        "rewards": [round(r, 6) for r in track.rewards],
        "positions": [list(p) for p in track.positions],
        "frames": [{"pos": list(f.pos), "channel0_rle": rle_encode(f.channel0)} for f in track.frames],
    }


def track_from_json(doc: dict) -> FrameTrack:
    mask = mask_from_rle(doc["mask_rle"])
    frames = [
        EncodedObservation(
            channel0=rle_decode(f["channel0_rle"], SIZE * SIZE).reshape(SIZE, SIZE),
            mask=mask,
            pos=tuple(f["pos"]),
        )
        for f in doc["frames"]
    ]
    track = FrameTrack(
        frames=frames,
        rewards=[float(r) for r in doc["rewards"]],
        positions=[tuple(p) for p in doc["positions"]],
        truncated=bool(doc["truncated"]),
        question_id=doc.get("question_id"),
    )
    return track


def save_track(track: FrameTrack, path: str) -> None:
    _write_document(path, track_to_json(track))


def load_track(path: str) -> FrameTrack:
    return track_from_json(_load_document(path, TRACK_FORMAT))


def track_hash(track: FrameTrack) -> str:
    return content_hash(track_to_json(track))


# -- replay bundle ---------------------------------------------------------------------


def bundle_to_json(
    scene_seed: int,
    config: dict,
    task: str,
    vandal_stream: dict,
    final_world_hash: str,
    track_hash_value: str | None,
    questions: list[Question],
    scene_path: str,
    log_path: str,
    track_path: str | None,
) -> dict:
    return {
        "format": BUNDLE_FORMAT,
        "scene_seed": scene_seed,
        "config": dict(config),
        "task": task,
        "vandal_stream": vandal_stream,
        "final_world_hash": final_world_hash,
        "track_hash": track_hash_value,
        "questions": [q.to_json() for q in questions],
        "answers": {q.id: q.answer_index for q in questions},
        "scene_path": scene_path,
        "log_path": log_path,
        "track_path": track_path,
    }


def save_bundle(doc: dict, directory: str) -> str:
    """Content-addressed write; returns the bundle path."""
    digest = content_hash(doc)
    path = os.path.join(directory, f"{digest[:16]}.bundle.json")
    _write_document(path, doc)
    return path


def load_bundle(path: str) -> dict:
    return _load_document(path, BUNDLE_FORMAT)
