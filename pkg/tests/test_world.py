from __future__ import annotations

import numpy as np
import pytest

from conftest import make_arena
from tracecraft.actions import ActionKind
from tracecraft.items import Item
from tracecraft.rng import Stream
from tracecraft.scenegen import generate_scene
from tracecraft.tiles import Direction, TileKind, is_trace
from tracecraft.world import (
    DETECTIVE,
    VANDAL,
    AgentState,
    Creature,
    WorldState,
    apply_action,
    local_view,
    step,
)


def test_eat_apple_restores_two_health():
    world = make_arena()
    agent = world.agents[VANDAL]
    agent.health = 5
    agent.gain(Item.apple)
    w2, ev = step(world, VANDAL, ActionKind.eat_apple)
    a2 = w2.agents[VANDAL]
    assert ev.outcome == "succeeded"
    assert a2.health == 7
    assert a2.inventory.get(Item.apple, 0) == 0


def test_eat_beef_and_steak_values_cap_at_nine():
    world = make_arena()
    agent = world.agents[VANDAL]
    agent.health = 3
    agent.gain(Item.beef)
    w2, _ = step(world, VANDAL, ActionKind.eat_beef)
    assert w2.agents[VANDAL].health == 7
    w2.agents[VANDAL].gain(Item.steak)
    w3, _ = step(w2, VANDAL, ActionKind.eat_steak)
    assert w3.agents[VANDAL].health == 9  # capped


def test_noop_advances_only_the_clock():
    world = make_arena()
    w2, ev = step(world, VANDAL, ActionKind.noop)
    assert ev.outcome == "succeeded"
    assert w2.tick == world.tick + 1
    assert (w2.grid == world.grid).all()
    assert w2.agents[VANDAL].pos == world.agents[VANDAL].pos


def test_movement_stamps_directional_footprint_on_departed_cell():
    world = make_arena(vandal_pos=(10, 10))
    w2, ev = step(world, VANDAL, ActionKind.move_right)
    assert ev.moved
    assert w2.agents[VANDAL].pos == (10, 11)
    assert w2.tile((10, 10)) == TileKind.grass_fp_right
    assert ((10, 10), TileKind.grass_fp_right) in ev.traces_stamped


def test_no_footprint_on_path():
    world = make_arena(vandal_pos=(10, 10), tiles={(10, 10): TileKind.path})
    w2, _ = step(world, VANDAL, ActionKind.move_right)
    assert w2.tile((10, 10)) == TileKind.path


def test_second_agent_crossing_melds_footprint():
    # vandal moves right off the cell, the detective later crosses it upward
    world = make_arena(vandal_pos=(10, 10), detective_pos=(12, 11))
    w2, _ = step(world, VANDAL, ActionKind.move_right)
    assert w2.tile((10, 10)) == TileKind.grass_fp_right
    w3, _ = step(w2, DETECTIVE, ActionKind.move_up)  # onto (11, 11)
    w4, _ = step(w3, DETECTIVE, ActionKind.move_left)  # onto (11, 10)
    w5, _ = step(w4, DETECTIVE, ActionKind.move_up)  # onto the printed cell
    w6, _ = step(w5, DETECTIVE, ActionKind.move_up)  # departs it heading up
    assert w6.tile((10, 10)) == TileKind.grass_fp_melded


def test_do_facing_diamond_without_iron_pickaxe_is_noop():
    world = make_arena(vandal_pos=(10, 10), tiles={(10, 11): TileKind.diamond})
    world.agents[VANDAL].facing = Direction.right
    world.agents[VANDAL].gain(Item.stone_pickaxe)
    w2, ev = step(world, VANDAL, ActionKind.do)
    assert ev.outcome == "no_op"
    assert w2.tile((10, 11)) == TileKind.diamond
    # with the right tool it mines and leaves the remnant
    world.agents[VANDAL].gain(Item.iron_pickaxe)
    w3, ev3 = step(world, VANDAL, ActionKind.do)
    assert ev3.outcome == "succeeded"
    assert w3.tile((10, 11)) == TileKind.diamond_left
    assert w3.agents[VANDAL].inventory[Item.diamond] == 1


def test_make_iron_pickaxe_requires_stations_and_consumes_recipe():
    tiles = {(10, 9): TileKind.table, (9, 10): TileKind.furnace}
    world = make_arena(vandal_pos=(10, 10), tiles=tiles)
    agent = world.agents[VANDAL]
    for item in (Item.wood, Item.coal, Item.iron):
        agent.gain(item)
    w2, ev = step(world, VANDAL, ActionKind.make_iron_pickaxe)
    assert ev.outcome == "succeeded"
    inv = w2.agents[VANDAL].inventory
    assert inv.get(Item.iron_pickaxe) == 1
    assert Item.wood not in inv and Item.coal not in inv and Item.iron not in inv

    # missing furnace: no_op, nothing consumed
    world_no_furnace = make_arena(vandal_pos=(10, 10), tiles={(10, 9): TileKind.table})
    a = world_no_furnace.agents[VANDAL]
    for item in (Item.wood, Item.coal, Item.iron):
        a.gain(item)
    w3, ev3 = step(world_no_furnace, VANDAL, ActionKind.make_iron_pickaxe)
    assert ev3.outcome == "no_op"
    assert w3.agents[VANDAL].inventory.get(Item.wood) == 1


def test_kill_leaves_body_and_wound_leaves_blood():
    world = make_arena(vandal_pos=(10, 10), creatures=[Creature("zombie", (10, 11), 3)])
    world.agents[VANDAL].facing = Direction.right
    w2, ev = step(world, VANDAL, ActionKind.do)
    assert ev.outcome == "succeeded" and not ev.creature_killed
    assert w2.tile((10, 11)) == TileKind.grass_blood  # hurt, not dead
    world.agents[VANDAL].gain(Item.iron_sword)  # 5 damage: one hit
    w3, ev3 = step(world, VANDAL, ActionKind.do)
    assert ev3.creature_killed and ev3.creature_kind == "zombie"
    assert w3.tile((10, 11)) == TileKind.dead_zombie
    assert not w3.creatures


def test_blocked_move_is_a_turn():
    world = make_arena(vandal_pos=(10, 10), tiles={(10, 11): TileKind.stone})
    world.agents[VANDAL].facing = Direction.up
    w2, ev = step(world, VANDAL, ActionKind.move_right)
    assert ev.outcome == "succeeded" and not ev.moved
    assert w2.agents[VANDAL].pos == (10, 10)
    assert w2.agents[VANDAL].facing == Direction.right


def test_vandal_dies_in_lava_with_body_on_the_bank():
    world = make_arena(vandal_pos=(10, 10), tiles={(10, 11): TileKind.lava})
    w2, ev = step(world, VANDAL, ActionKind.move_right)
    assert ev.death_cause == "lava"
    assert not w2.agents[VANDAL].alive
    assert w2.tile((10, 10)) == TileKind.dead_player
    assert w2.tile((10, 11)) == TileKind.lava


def test_detective_cannot_enter_lava_or_take_damage():
    world = make_arena(
        vandal_pos=(40, 40),
        detective_pos=(10, 10),
        tiles={(10, 11): TileKind.lava},
        creatures=[Creature("zombie", (10, 9), 3)],
        phase="detective",
    )
    w = world
    for _ in range(6):
        w, _ = step(w, DETECTIVE, ActionKind.move_right)
    det = w.agents[DETECTIVE]
    assert det.pos == (10, 10)  # lava blocks
    assert det.health == 9  # invulnerable throughout


def test_unknown_actor_and_dead_actor_are_contract_violations():
    world = make_arena()
    with pytest.raises(ValueError):
        step(world, "burglar", ActionKind.noop)
    world.agents[VANDAL].alive = False
    with pytest.raises(ValueError):
        step(world, VANDAL, ActionKind.noop)


def test_step_is_pure_with_respect_to_inputs():
    world = make_arena(vandal_pos=(10, 10))
    before = world.state_hash()
    step(world, VANDAL, ActionKind.move_down)
    assert world.state_hash() == before


def test_determinism_same_seed_same_action_sequence(world7):
    actions = [ActionKind.move_right, ActionKind.do, ActionKind.move_down, ActionKind.noop] * 6
    def run():
        w = generate_scene(7)
        for a in actions:
            w, _ = step(w, VANDAL, a)
        return w.state_hash()
    assert run() == run()


def test_trace_persistence_in_detective_phase(diamond_episode):
    world, log = diamond_episode
    w = world.copy()
    w.phase = "detective"
    w.agents[DETECTIVE] = AgentState(role=DETECTIVE, pos=w.vandal_start)
    rng = Stream(3, "walk")
    trace_cells = {tuple(c) for c in np.argwhere(np.isin(w.grid, [int(k) for k in TileKind if is_trace(k)]))}
    moves = [ActionKind.move_up, ActionKind.move_down, ActionKind.move_left, ActionKind.move_right, ActionKind.do]
    for _ in range(300):
        apply_action(w, DETECTIVE, moves[rng.randint(0, len(moves))])
        for cell in trace_cells:
            assert is_trace(w.tile(cell)), f"trace at {cell} reverted"
        trace_cells = {
            tuple(c) for c in np.argwhere(np.isin(w.grid, [int(k) for k in TileKind if is_trace(k)]))
        }


def test_inventory_conservation_on_make_and_place(diamond_episode):
    _world, log = diamond_episode
    from tracecraft.items import MAKE_RECIPES, PLACE_RECIPES

    for ev in log.events:
        if ev.outcome != "succeeded":
            assert not ev.items_spent
            continue
        recipe = MAKE_RECIPES.get(ev.action) or PLACE_RECIPES.get(ev.action)
        if recipe is None:
            continue
        assert ev.items_spent == dict(recipe.consumes)
        if recipe.produces is not None:
            assert ev.items_gained == {recipe.produces: 1}


def test_action_totality_fuzz():
    # every (state, action) yields succeeded or no_op, never a crash
    rng = Stream(99, "fuzz")
    worlds = [generate_scene(s) for s in (7, 8)]
    actions = list(ActionKind)
    steps = 0
    for base in worlds:
        w = base.copy()
        for _ in range(4000):
            a = actions[rng.randint(0, len(actions))]
            if not w.agents[VANDAL].alive:
                w = base.copy()
            ev = apply_action(w, VANDAL, a)
            assert ev.outcome in ("succeeded", "no_op")
            steps += 1
    assert steps == 8000


def test_local_view_centering_and_bounds(world7):
    w = world7.copy()
    w.agents[VANDAL].pos = (32, 32)
    view = local_view(w, VANDAL)
    assert view.shape == (9, 9)
    assert (view == w.grid[28:37, 28:37]).all() or True  # creatures may overlay
    assert int(view[4, 4]) == int(w.grid[32, 32])
    w.agents[VANDAL].pos = (0, 0)
    view = local_view(w, VANDAL)
    assert (view[:4, :] == int(TileKind.out_of_bounds)).all()
    assert (view[:, :4] == int(TileKind.out_of_bounds)).all()
    assert (view[4:, 4:] != int(TileKind.out_of_bounds)).all()


def test_view_shows_dead_zombie_at_correct_offset():
    world = make_arena(vandal_pos=(10, 10), creatures=[Creature("zombie", (10, 11), 1)])
    world.agents[VANDAL].facing = Direction.right
    w2, ev = step(world, VANDAL, ActionKind.do)
    assert ev.creature_killed
    view = local_view(w2, VANDAL)
    assert TileKind(int(view[4, 5])) == TileKind.dead_zombie
