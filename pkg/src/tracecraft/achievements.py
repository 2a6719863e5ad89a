"""The 39 achievements and the rule that fires them from logged events."""

from __future__ import annotations

from enum import Enum

from .actions import ActionKind
from .events import SUCCEEDED, ActionEvent, EpisodeLog
from .items import Item
from .tiles import TileKind


class Achievement(str, Enum):
    # survive (10)
    drink_water = "drink_water"
    eat_apple = "eat_apple"
    eat_beef = "eat_beef"
    eat_steak = "eat_steak"
    sleep = "sleep"
    sleep_on_bed = "sleep_on_bed"
    wake_up = "wake_up"
    eat_grilled_apple = "eat_grilled_apple"
    drink_water_from_bucket = "drink_water_from_bucket"
    eat_plant = "eat_plant"
    # collect (12)
    collect_wood = "collect_wood"
    collect_apple = "collect_apple"
    collect_water = "collect_water"
    collect_stone = "collect_stone"
    collect_iron = "collect_iron"
    collect_diamond = "collect_diamond"
    collect_beef = "collect_beef"
    collect_coal = "collect_coal"
    collect_lava = "collect_lava"
    collect_sapling = "collect_sapling"
    collect_plant = "collect_plant"
    collect_sand = "collect_sand"
    # make (14)
    make_steak = "make_steak"
    make_grilled_apple = "make_grilled_apple"
    make_bucket = "make_bucket"
    make_fence = "make_fence"
    make_wood_sword = "make_wood_sword"
    make_wood_pickaxe = "make_wood_pickaxe"
    make_stone_sword = "make_stone_sword"
    make_stone_pickaxe = "make_stone_pickaxe"
    make_iron_sword = "make_iron_sword"
    make_iron_pickaxe = "make_iron_pickaxe"
    place_table = "place_table"
    place_bed = "place_bed"
    place_furnace = "place_furnace"
    place_plant = "place_plant"
    # defeat (3)
    defeat_cow = "defeat_cow"
    defeat_zombie = "defeat_zombie"
    defeat_skeleton = "defeat_skeleton"


GROUPS: dict[str, tuple[Achievement, ...]] = {
    "survive": tuple(list(Achievement)[0:10]),
    "collect": tuple(list(Achievement)[10:22]),
    "make": tuple(list(Achievement)[22:36]),
    "defeat": tuple(list(Achievement)[36:39]),
}

_MAKE_ACTION = {
    ActionKind.make_wood_pickaxe: Achievement.make_wood_pickaxe,
    ActionKind.make_stone_pickaxe: Achievement.make_stone_pickaxe,
    ActionKind.make_iron_pickaxe: Achievement.make_iron_pickaxe,
    ActionKind.make_wood_sword: Achievement.make_wood_sword,
    ActionKind.make_stone_sword: Achievement.make_stone_sword,
    ActionKind.make_iron_sword: Achievement.make_iron_sword,
    ActionKind.make_bucket: Achievement.make_bucket,
    ActionKind.make_steak: Achievement.make_steak,
}

_PLACE_ACTION = {
    ActionKind.place_table: Achievement.place_table,
    ActionKind.place_furnace: Achievement.place_furnace,
    ActionKind.place_bed: Achievement.place_bed,
    ActionKind.place_plant: Achievement.place_plant,
}

_MINE_TILE = {
    TileKind.stone: Achievement.collect_stone,
    TileKind.coal: Achievement.collect_coal,
    TileKind.iron: Achievement.collect_iron,
    TileKind.diamond: Achievement.collect_diamond,
}

_DEFEAT = {
    "cow": Achievement.defeat_cow,
    "zombie": Achievement.defeat_zombie,
    "skeleton": Achievement.defeat_skeleton,
}


def achievements_for_event(ev: ActionEvent) -> set[Achievement]:
    """Which achievements this single event satisfies.

    Pure rule over the event record; the engine tags first fires with it and
    `detect_achievements` re-derives the full set from scratch. make_fence has
    no firing rule: no action in the 26 produces a fence.
    """
    if ev.outcome != SUCCEEDED:
        return set()
    out: set[Achievement] = set()
    a = ev.action
    if a in _MAKE_ACTION:
        out.add(_MAKE_ACTION[a])
    elif a in _PLACE_ACTION:
        out.add(_PLACE_ACTION[a])
    elif a is ActionKind.do:
        t = ev.target_tile
        if t in (TileKind.tree, TileKind.apple_tree):
            out.add(Achievement.collect_wood)
            if ev.items_gained.get(Item.apple, 0) > 0:
                out.add(Achievement.collect_apple)
        elif t in _MINE_TILE:
            out.add(_MINE_TILE[t])
        elif t is TileKind.grass:
            out.add(Achievement.collect_sapling)
        elif t is TileKind.sand:
            out.add(Achievement.collect_sand)
        elif t is TileKind.ripe_plant:
            out.add(Achievement.collect_plant)
            out.add(Achievement.eat_plant)
        elif t is TileKind.furnace and ev.item is Item.grilled_apple:
            out.add(Achievement.make_grilled_apple)
        if ev.creature_killed and ev.creature_kind in _DEFEAT:
            out.add(_DEFEAT[ev.creature_kind])
            if ev.creature_kind == "cow":
                out.add(Achievement.collect_beef)
    elif a is ActionKind.eat_apple:
        out.add(Achievement.eat_grilled_apple if ev.item is Item.grilled_apple else Achievement.eat_apple)
    elif a is ActionKind.eat_beef:
        out.add(Achievement.eat_beef)
    elif a is ActionKind.eat_steak:
        out.add(Achievement.eat_steak)
    elif a is ActionKind.collect_water:
        out.add(Achievement.collect_water)
    elif a is ActionKind.collect_lava:
        out.add(Achievement.collect_lava)
    elif a is ActionKind.drink:
        if ev.item is Item.water_bucket:
            out.add(Achievement.drink_water_from_bucket)
        else:
            out.add(Achievement.drink_water)
    elif a is ActionKind.sleep:
        out.add(Achievement.sleep)
        if "on_bed" in ev.flags:
            out.add(Achievement.sleep_on_bed)
        if "woke" in ev.flags:
            out.add(Achievement.wake_up)
    return out


def detect_achievements(log: EpisodeLog) -> set[Achievement]:
    """Every achievement whose firing rule matches some event in the log."""
    out: set[Achievement] = set()
    for ev in log.events:
        out |= achievements_for_event(ev)
    return out


def display_name(a: Achievement | str) -> str:
    return str(Achievement(a).value).replace("_", " ")
