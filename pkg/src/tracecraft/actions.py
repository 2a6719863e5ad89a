"""The 26-action space shared by both agents."""

from __future__ import annotations

from enum import IntEnum

from .tiles import Direction


class ActionKind(IntEnum):
    noop = 0
    move_up = 1
    move_down = 2
    move_left = 3
    move_right = 4
    do = 5
    sleep = 6
    place_stone = 7
    place_table = 8
    place_furnace = 9
    place_plant = 10
    place_bed = 11
    make_wood_pickaxe = 12
    make_stone_pickaxe = 13
    make_iron_pickaxe = 14
    make_wood_sword = 15
    make_stone_sword = 16
    make_iron_sword = 17
    make_bucket = 18
    make_steak = 19
    eat_apple = 20
    eat_beef = 21
    eat_steak = 22
    collect_water = 23
    collect_lava = 24
    drink = 25


MOVE_FOR_DIRECTION = {
    Direction.up: ActionKind.move_up,
    Direction.down: ActionKind.move_down,
    Direction.left: ActionKind.move_left,
    Direction.right: ActionKind.move_right,
}

DIRECTION_FOR_MOVE = {v: k for k, v in MOVE_FOR_DIRECTION.items()}

MOVES = frozenset(DIRECTION_FOR_MOVE)


def is_operating(action: ActionKind | int) -> bool:
    """Everything except movement and noop counts as an operating action."""
    a = ActionKind(action)
    return a is not ActionKind.noop and a not in MOVES
