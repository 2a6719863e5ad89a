"""Cell kinds for the 64x64 playground.

Indices 0..17 are plain terrain and stations, 18..49 are the 32 persistent
trace kinds, 50 is the reserved out-of-bounds marker used by local views,
and 51..54 are view-only overlays for creatures and the other agent.
Only indices 0..49 are ever stored in a world grid.
"""

from __future__ import annotations

from enum import IntEnum


class Direction(IntEnum):
    up = 0
    down = 1
    left = 2
    right = 3


# (row, col) deltas; row 0 is the top of the map.
DELTAS: dict[Direction, tuple[int, int]] = {
    Direction.up: (-1, 0),
    Direction.down: (1, 0),
    Direction.left: (0, -1),
    Direction.right: (0, 1),
}


class TileKind(IntEnum):
    # terrain and stations
    grass = 0
    sand = 1
    path = 2
    water = 3
    lava = 4
    stone = 5
    tree = 6
    apple_tree = 7
    coal = 8
    iron = 9
    diamond = 10
    sapling = 11
    young_plant = 12
    ripe_plant = 13
    table = 14
    furnace = 15
    bed = 16
    fence = 17
    # traces: directional footprints
    grass_fp_up = 18
    grass_fp_down = 19
    grass_fp_left = 20
    grass_fp_right = 21
    sand_fp_up = 22
    sand_fp_down = 23
    sand_fp_left = 24
    sand_fp_right = 25
    # traces: melded footprints
    grass_fp_melded = 26
    sand_fp_melded = 27
    # traces: spilled water and shed blood
    grass_water = 28
    sand_water = 29
    grass_blood = 30
    sand_blood = 31
    # traces: harvested and mined remnants
    tree_cut = 32
    apple_tree_cut = 33
    stone_left = 34
    coal_left = 35
    iron_left = 36
    diamond_left = 37
    # traces: wrecked or used stations
    table_left = 38
    furnace_left = 39
    bed_left = 40
    bed_used = 41
    # traces: combat and consumption leftovers
    arrow_left = 42
    apple_core = 43
    bone_left = 44
    plant_left = 45
    dead_cow = 46
    dead_zombie = 47
    dead_skeleton = 48
    dead_player = 49
    # reserved: outside the map in a local view
    out_of_bounds = 50
    # view-only overlays (never stored in grid)
    cow = 51
    zombie = 52
    skeleton = 53
    player = 54


GRID_KIND_COUNT = 50  # kinds that may appear in a stored grid

TRACE_KINDS = frozenset(TileKind(i) for i in range(18, 50))

_WALKABLE = frozenset(
    {TileKind.grass, TileKind.sand, TileKind.path, TileKind.lava, TileKind.bed}
    | TRACE_KINDS
)


def is_trace(kind: TileKind | int) -> bool:
    return TileKind(kind) in TRACE_KINDS


def walkable(kind: TileKind | int) -> bool:
    """Whether an agent may stand on this cell. Lava is enterable (and lethal)."""
    return TileKind(kind) in _WALKABLE


# -- footprint algebra ----------------------------------------------------

_FOOTPRINT: dict[tuple[str, Direction], TileKind] = {
    ("grass", Direction.up): TileKind.grass_fp_up,
    ("grass", Direction.down): TileKind.grass_fp_down,
    ("grass", Direction.left): TileKind.grass_fp_left,
    ("grass", Direction.right): TileKind.grass_fp_right,
    ("sand", Direction.up): TileKind.sand_fp_up,
    ("sand", Direction.down): TileKind.sand_fp_down,
    ("sand", Direction.left): TileKind.sand_fp_left,
    ("sand", Direction.right): TileKind.sand_fp_right,
}

_MELDED = {"grass": TileKind.grass_fp_melded, "sand": TileKind.sand_fp_melded}

_SOFT_FAMILY: dict[TileKind, str] = {TileKind.grass: "grass", TileKind.sand: "sand"}
for (_fam, _d), _k in _FOOTPRINT.items():
    _SOFT_FAMILY[_k] = _fam
for _fam, _k in _MELDED.items():
    _SOFT_FAMILY[_k] = _fam

_FP_DIRECTION = {kind: d for (_f, d), kind in _FOOTPRINT.items()}


def soft_family(kind: TileKind | int) -> str | None:
    """'grass' / 'sand' for soft cells (incl. their footprints), else None."""
    return _SOFT_FAMILY.get(TileKind(kind))


def footprint_direction(kind: TileKind | int) -> Direction | None:
    return _FP_DIRECTION.get(TileKind(kind))


def stamp_footprint(kind: TileKind | int, direction: Direction) -> TileKind:
    """Footprint result of leaving `kind` toward `direction`.

    Plain soft terrain takes a directional print; a print of another
    direction melds; everything else (non-soft terrain, non-footprint
    traces) is returned unchanged.
    """
    kind = TileKind(kind)
    fam = _SOFT_FAMILY.get(kind)
    if fam is None:
        return kind
    if kind in (TileKind.grass, TileKind.sand):
        return _FOOTPRINT[(fam, direction)]
    prev = _FP_DIRECTION.get(kind)
    if prev is None:  # already melded
        return kind
    return kind if prev == direction else _MELDED[fam]


_OVERLAY = {
    "water": {"grass": TileKind.grass_water, "sand": TileKind.sand_water},
    "blood": {"grass": TileKind.grass_blood, "sand": TileKind.sand_blood},
}


def stamp_overlay(kind: TileKind | int, overlay: str) -> TileKind:
    """Water/blood lands only on plain grass or sand; other cells keep their kind."""
    kind = TileKind(kind)
    if kind in (TileKind.grass, TileKind.sand):
        return _OVERLAY[overlay][_SOFT_FAMILY[kind]]
    return kind


# Plain, trace-free cells that generic leftovers (cores, bones, arrows) may claim.
STAMPABLE_PLAIN = frozenset({TileKind.grass, TileKind.sand, TileKind.path})


def display_name(kind: TileKind | int) -> str:
    return TileKind(kind).name.replace("_", " ")
