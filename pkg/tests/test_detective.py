from __future__ import annotations

import numpy as np
import pytest

from conftest import make_arena
from tracecraft.actions import ActionKind
from tracecraft.events import ActionEvent, EpisodeLog
from tracecraft.items import Item
from tracecraft.detective import (
    DetectiveEpisode,
    decode_local_view,
    detective_step,
    encode_observation,
    spawn_detective,
)
from tracecraft.questions import Question, generate_questions
from tracecraft.rng import Stream
from tracecraft.tiles import TileKind
from tracecraft.world import DETECTIVE, SIZE, local_view


def _mini_scene(trace_cells: dict, mask_cells=(), start=(32, 32), task="get_wood"):
    """Arena + synthetic log stamping `trace_cells`; question mask over `mask_cells`."""
    world = make_arena(vandal_pos=(5, 5), tiles=dict(trace_cells))
    world.vandal_start = start  # the vandal has long since wandered off
    world.phase = "vandal"
    log = EpisodeLog(task=task, status="completed", vandal_start=start)
    ev = ActionEvent(tick=1, actor="vandal", action=ActionKind.do, outcome="succeeded", pos=start)
    ev.target_tile = TileKind.tree
    ev.items_gained = {Item.wood: 1}
    ev.traces_stamped = [(cell, kind) for cell, kind in trace_cells.items()]
    log.append(ev)
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    for cell in mask_cells:
        mask[cell] = True
    if not mask.any():
        mask[start] = True
    question = Question(
        id="q_test",
        scene_id="mini",
        category="Goal",
        template_id="g_final",
        text="What was the vandal's final goal?",
        choices=("get wood", "get stone", "get coal", "get iron"),
        answer_index=0,
        mask=mask,
        provenance=(1, 1),
        anchor_tick=None,
    )
    return world, log, question


def test_spawn_initial_state():
    world, log, q = _mini_scene({(40, 40): TileKind.tree_cut})
    ep = spawn_detective(world, q, log)
    assert ep.steps == 0
    assert len(ep.track) == 1
    assert not ep.done
    assert ep.detective.pos == (32, 32)


def test_spawn_on_footprinted_start_discovers_it():
    world, log, q = _mini_scene({(32, 32): TileKind.grass_fp_right})
    ep = spawn_detective(world, q, log)
    assert (32, 32) in ep.discovered


def test_identical_spawns_are_identical():
    world, log, q = _mini_scene({(40, 40): TileKind.tree_cut})
    a = spawn_detective(world, q, log)
    b = spawn_detective(world, q, log)
    assert a.world.state_hash() == b.world.state_hash()
    assert a.discovered == b.discovered


def test_blocked_start_relocates_to_nearest_walkable():
    world, log, q = _mini_scene({(32, 32): TileKind.stone})
    ep = spawn_detective(world, q, log)
    assert ep.relocated_spawn
    assert ep.detective.pos != (32, 32)
    r, c = ep.detective.pos
    assert abs(r - 32) + abs(c - 32) == 1


# -- the reward decomposition unit suite -------------------------------------


def test_reward_move_revealing_nothing_is_time_penalty_only():
    world, log, q = _mini_scene({(50, 50): TileKind.tree_cut})
    ep = spawn_detective(world, q, log)
    _obs, reward, _done = detective_step(ep, ActionKind.move_up)
    assert reward == -0.1


def test_reward_operating_action_revealing_nothing():
    world, log, q = _mini_scene({(50, 50): TileKind.tree_cut})
    ep = spawn_detective(world, q, log)
    _obs, reward, _done = detective_step(ep, ActionKind.do)
    assert reward == -1.1


def test_reward_plain_trace_cell_plus_time_penalty():
    # one unassociated trace cell enters the view: +1 - 0.1; another trace
    # far away keeps the completion bonus out of this step
    world, log, q = _mini_scene({(32, 37): TileKind.tree_cut, (60, 60): TileKind.stone_left})
    ep = spawn_detective(world, q, log)
    assert (32, 37) not in ep.discovered
    _obs, reward, _done = detective_step(ep, ActionKind.move_right)
    assert reward == pytest.approx(0.9)


def test_reward_question_associated_cell():
    world, log, q = _mini_scene(
        {(32, 37): TileKind.tree_cut, (60, 60): TileKind.stone_left}, mask_cells=[(32, 37)]
    )
    ep = spawn_detective(world, q, log)
    _obs, reward, _done = detective_step(ep, ActionKind.move_right)
    assert reward == pytest.approx(1.9)


def test_reward_completion_bonus_fires_once_and_ends_episode():
    world, log, q = _mini_scene({(32, 37): TileKind.tree_cut})
    ep = spawn_detective(world, q, log)
    _obs, reward, done = detective_step(ep, ActionKind.move_right)
    # newly visible unassociated trace (+1), completion (+100), time (-0.1)
    assert reward == pytest.approx(100.9)
    assert done and ep.done and ep.completion_fired
    with pytest.raises(RuntimeError):
        detective_step(ep, ActionKind.noop)


def test_reward_lower_bound_and_time_penalty_everywhere():
    world, log, q = _mini_scene({(50, 50): TileKind.tree_cut})
    ep = spawn_detective(world, q, log)
    rng = Stream(5, "w")
    moves = [ActionKind.move_up, ActionKind.move_down, ActionKind.move_left, ActionKind.move_right, ActionKind.do]
    for _ in range(80):
        if ep.done:
            break
        _o, r, _d = detective_step(ep, moves[rng.randint(0, len(moves))])
        assert r >= -1.1
    assert all(r >= -1.1 for r in ep.track.rewards)


def test_discovery_monotone_and_step_cap():
    world, log, q = _mini_scene({(1, 1): TileKind.tree_cut})  # far away
    ep = spawn_detective(world, q, log)
    prev: set = set()
    for _ in range(ep.cap):
        if ep.done:
            break
        detective_step(ep, ActionKind.noop)
        assert prev <= ep.discovered
        prev = set(ep.discovered)
    assert ep.done and ep.steps == ep.cap == 500


def test_encoding_fidelity_roundtrip(diamond_episode):
    world, log = diamond_episode
    qs = generate_questions(log, world, Stream(4, "q"), scene_id="enc")
    ep = spawn_detective(world, qs[0], log)
    for _ in range(12):
        obs, _r, done = detective_step(ep, ActionKind.move_down if ep.steps % 2 else ActionKind.move_right)
        assert (decode_local_view(obs) == local_view(ep.world, DETECTIVE)).all()
        if done:
            break


def test_channel0_nonzero_only_in_window():
    world, log, q = _mini_scene({(40, 40): TileKind.tree_cut})
    ep = spawn_detective(world, q, log)
    obs = ep.track.frames[0]
    nz = np.argwhere(obs.channel0 > 0)
    r, c = ep.detective.pos
    assert len(nz) <= 81
    assert (np.abs(nz[:, 0] - r) <= 4).all() and (np.abs(nz[:, 1] - c) <= 4).all()
    tensor = obs.tensor()
    assert tensor.shape == (64, 64, 2)
    assert (tensor[:, :, 1] == q.mask.astype(np.int16)).all()
