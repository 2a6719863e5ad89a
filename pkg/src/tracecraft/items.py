"""Inventory items, recipes, and tool tiers."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .actions import ActionKind
from .tiles import TileKind


class Item(str, Enum):
    wood = "wood"
    stone = "stone"
    coal = "coal"
    iron = "iron"
    diamond = "diamond"
    sapling = "sapling"
    sand = "sand"
    apple = "apple"
    grilled_apple = "grilled_apple"
    beef = "beef"
    steak = "steak"
    bucket = "bucket"
    water_bucket = "water_bucket"
    lava_bucket = "lava_bucket"
    wood_pickaxe = "wood_pickaxe"
    stone_pickaxe = "stone_pickaxe"
    iron_pickaxe = "iron_pickaxe"
    wood_sword = "wood_sword"
    stone_sword = "stone_sword"
    iron_sword = "iron_sword"


TOOLS = frozenset(
    {
        Item.bucket,
        Item.wood_sword,
        Item.wood_pickaxe,
        Item.stone_sword,
        Item.stone_pickaxe,
        Item.iron_sword,
        Item.iron_pickaxe,
    }
)


@dataclass(frozen=True)
class Recipe:
    consumes: dict[Item, int]
    near: tuple[TileKind, ...] = ()
    produces: Item | None = None


# Crafting at stations. `near` means a matching station within the 3x3
# neighborhood of the agent (a used bed still counts as a bed).
MAKE_RECIPES: dict[ActionKind, Recipe] = {
    ActionKind.make_wood_pickaxe: Recipe({Item.wood: 2}, (TileKind.table,), Item.wood_pickaxe),
    ActionKind.make_stone_pickaxe: Recipe({Item.wood: 2, Item.stone: 1}, (TileKind.table,), Item.stone_pickaxe),
    ActionKind.make_iron_pickaxe: Recipe(
        {Item.wood: 1, Item.coal: 1, Item.iron: 1}, (TileKind.table, TileKind.furnace), Item.iron_pickaxe
    ),
    ActionKind.make_wood_sword: Recipe({Item.wood: 2}, (TileKind.table,), Item.wood_sword),
    ActionKind.make_stone_sword: Recipe({Item.wood: 2, Item.stone: 1}, (TileKind.table,), Item.stone_sword),
    ActionKind.make_iron_sword: Recipe(
        {Item.wood: 1, Item.coal: 1, Item.iron: 1}, (TileKind.table, TileKind.furnace), Item.iron_sword
    ),
    ActionKind.make_bucket: Recipe({Item.wood: 1, Item.stone: 1}, (TileKind.table,), Item.bucket),
    ActionKind.make_steak: Recipe({Item.beef: 1}, (TileKind.table, TileKind.furnace), Item.steak),
}

# Placing builds the station from raw materials on the spot.
PLACE_RECIPES: dict[ActionKind, Recipe] = {
    ActionKind.place_stone: Recipe({Item.stone: 1}),
    ActionKind.place_table: Recipe({Item.wood: 3}),
    ActionKind.place_furnace: Recipe({Item.stone: 2}),
    ActionKind.place_plant: Recipe({Item.sapling: 1}),
    ActionKind.place_bed: Recipe({Item.wood: 2}, (TileKind.table,)),
}

PLACED_TILE: dict[ActionKind, TileKind] = {
    ActionKind.place_stone: TileKind.stone,
    ActionKind.place_table: TileKind.table,
    ActionKind.place_furnace: TileKind.furnace,
    ActionKind.place_plant: TileKind.sapling,
    ActionKind.place_bed: TileKind.bed,
}

# (health restored, food restored) per eaten item
FOOD_VALUE: dict[Item, tuple[int, int]] = {
    Item.apple: (2, 5),
    Item.grilled_apple: (3, 6),
    Item.beef: (4, 8),
    Item.steak: (6, 9),
}

# Pickaxe tier needed to mine each ore terrain.
MINE_TIER: dict[TileKind, int] = {
    TileKind.stone: 1,
    TileKind.coal: 1,
    TileKind.iron: 2,
    TileKind.diamond: 3,
}

_PICKAXE_TIER = {Item.wood_pickaxe: 1, Item.stone_pickaxe: 2, Item.iron_pickaxe: 3}
_WEAPON_DAMAGE = {
    Item.wood_sword: 2,
    Item.wood_pickaxe: 2,
    Item.stone_sword: 3,
    Item.stone_pickaxe: 3,
    Item.iron_sword: 5,
    Item.iron_pickaxe: 5,
}


def pickaxe_tier(inventory: dict[Item, int]) -> int:
    """0 if no pickaxe held, else the best tier in the inventory."""
    return max((t for i, t in _PICKAXE_TIER.items() if inventory.get(i, 0) > 0), default=0)


def melee_damage(inventory: dict[Item, int]) -> int:
    """Bare fists do 1; swords and pickaxes raise it by tier."""
    return max((d for i, d in _WEAPON_DAMAGE.items() if inventory.get(i, 0) > 0), default=1)


def best_weapon(inventory: dict[Item, int]) -> Item | None:
    held = [(d, i) for i, d in _WEAPON_DAMAGE.items() if inventory.get(i, 0) > 0]
    if not held:
        return None
    held.sort(key=lambda p: (-p[0], p[1].value))
    return held[0][1]
