from __future__ import annotations

import pytest

from conftest import make_arena
from tracecraft.achievements import Achievement, detect_achievements
from tracecraft.actions import ActionKind
from tracecraft.events import BUDGET_EXHAUSTED, COMPLETED, DIED
from tracecraft.items import MAKE_RECIPES, PLACE_RECIPES, Item
from tracecraft.rng import Stream
from tracecraft.scenegen import generate_scene
from tracecraft.taskgraph import TaskId
from tracecraft.tiles import TileKind
from tracecraft.vandal import vandal_run
from tracecraft.world import Creature


def test_place_table_completes_with_collects_then_one_place(world7):
    _w, log = vandal_run(world7, TaskId.place_table, Stream(1, "t"))
    assert log.status == COMPLETED
    collects = [e for e in log.events if e.outcome == "succeeded" and e.target_tile in (TileKind.tree, TileKind.apple_tree)]
    places = [e for e in log.events if e.outcome == "succeeded" and e.action is ActionKind.place_table]
    assert len(collects) >= 1
    assert len(places) == 1


def test_tiny_budget_exhausts(world7):
    _w, log = vandal_run(world7, TaskId.get_diamond, Stream(1, "t"), step_budget=5)
    assert log.status == BUDGET_EXHAUSTED
    assert len(log.events) == 5


def test_budget_must_be_positive(world7):
    with pytest.raises(ValueError):
        vandal_run(world7, TaskId.get_wood, Stream(1, "t"), step_budget=0)


def test_overwhelmed_vandal_dies_with_cause_recorded():
    # health 1, boxed in by a zombie pack: no way out
    creatures = [Creature("zombie", (10, 11), 3), Creature("zombie", (11, 10), 3), Creature("zombie", (9, 10), 3)]
    tiles = {(14, 14): TileKind.tree}
    world = make_arena(vandal_pos=(10, 10), tiles=tiles, creatures=creatures)
    world.agents["vandal"].health = 1
    _w, log = vandal_run(world, TaskId.get_wood, Stream(1, "t"))
    assert log.status == DIED
    assert log.death_cause == "zombie"
    assert log.events[-1].death_cause == "zombie"


def test_prerequisite_ordering_in_completed_log(diamond_episode):
    """Every make/place success is preceded by gathers covering its recipe."""
    _w, log = diamond_episode
    holdings: dict[Item, int] = {}
    for ev in log.events:
        if ev.outcome != "succeeded":
            continue
        recipe = MAKE_RECIPES.get(ev.action) or PLACE_RECIPES.get(ev.action)
        if recipe is not None:
            for item, n in recipe.consumes.items():
                assert holdings.get(item, 0) >= n, f"{ev.action.name} at tick {ev.tick} lacked {item.value}"
        for item, n in ev.items_gained.items():
            holdings[item] = holdings.get(item, 0) + n
        for item, n in ev.items_spent.items():
            holdings[item] = holdings.get(item, 0) - n


def test_survival_interrupts_are_annotated():
    world = generate_scene(31)
    world.agents["vandal"].food = 3  # hungry from the start
    _w, log = vandal_run(world, TaskId.get_diamond, Stream(2, "t"))
    interrupts = {e.interrupt for e in log.events if e.interrupt}
    assert "eat" in interrupts


def test_ticks_strictly_increase(diamond_episode):
    _w, log = diamond_episode
    ticks = [e.tick for e in log.events]
    assert all(b > a for a, b in zip(ticks, ticks[1:]))


def test_completed_log_contains_goal_achievement(diamond_episode):
    _w, log = diamond_episode
    assert Achievement.collect_diamond in detect_achievements(log)


def test_all_traces_in_log_exist_in_returned_world(diamond_episode):
    world, log = diamond_episode
    from tracecraft.tiles import is_trace

    for cell in log.stamped_cells():
        assert is_trace(world.tile(cell)), f"stamped cell {cell} lost its trace"
