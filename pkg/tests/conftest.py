from __future__ import annotations

import numpy as np
import pytest

from tracecraft.events import EpisodeLog
from tracecraft.rng import Stream
from tracecraft.scenegen import generate_scene
from tracecraft.taskgraph import TaskId
from tracecraft.tiles import TileKind
from tracecraft.vandal import vandal_run
from tracecraft.world import SIZE, VANDAL, AgentState, WorldState


def make_arena(
    vandal_pos=(32, 32),
    tiles: dict | None = None,
    creatures=None,
    detective_pos=None,
    phase: str = "vandal",
) -> WorldState:
    """Flat grass arena with hand-placed tiles, for exact step semantics."""
    grid = np.full((SIZE, SIZE), int(TileKind.grass), dtype=np.int16)
    for cell, kind in (tiles or {}).items():
        grid[cell] = int(kind)
    agents = {VANDAL: AgentState(role=VANDAL, pos=vandal_pos)}
    if detective_pos is not None:
        from tracecraft.world import DETECTIVE

        agents[DETECTIVE] = AgentState(role=DETECTIVE, pos=detective_pos)
    world = WorldState(
        grid=grid,
        creatures=list(creatures or []),
        agents=agents,
        tick=0,
        rng=Stream(0, "arena"),
        phase=phase,
        vandal_start=vandal_pos,
        seed=0,
    )
    return world


@pytest.fixture(scope="session")
def world7():
    return generate_scene(7)


@pytest.fixture(scope="session")
def diamond_episode():
    """A completed get_diamond run used by several modules."""
    world = generate_scene(5003)
    world_after, log = vandal_run(world, TaskId.get_diamond, Stream(11, "v"))
    assert log.status == "completed"
    return world_after, log


@pytest.fixture(scope="session")
def small_corpus(tmp_path_factory):
    from tracecraft.corpus import build_corpus

    out = tmp_path_factory.mktemp("corpus") / "c"
    manifest = build_corpus(8, 42, str(out))
    return str(out), manifest
