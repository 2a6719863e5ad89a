from __future__ import annotations

import pytest

from tracecraft.tiles import (
    Direction,
    GRID_KIND_COUNT,
    TRACE_KINDS,
    TileKind,
    display_name,
    footprint_direction,
    is_trace,
    soft_family,
    stamp_footprint,
    stamp_overlay,
    walkable,
)


def test_grid_kind_count_and_indices():
    # 50 storable kinds, then the reserved out-of-bounds marker
    assert GRID_KIND_COUNT == 50
    values = [int(k) for k in TileKind]
    assert values == list(range(len(values)))  # unique, stable, contiguous
    assert int(TileKind.out_of_bounds) == 50
    assert len(TileKind) >= 50


def test_exactly_32_trace_kinds():
    assert len(TRACE_KINDS) == 32
    assert sum(1 for k in TileKind if is_trace(k)) == 32
    # traces occupy a contiguous index block inside the storable range
    assert all(18 <= int(k) < 50 for k in TRACE_KINDS)


def test_predicates_total_over_enumeration():
    for kind in TileKind:
        assert isinstance(walkable(kind), bool)
        assert isinstance(is_trace(kind), bool)
        assert display_name(kind)


def test_walkability_basics():
    assert walkable(TileKind.grass) and walkable(TileKind.sand) and walkable(TileKind.path)
    assert walkable(TileKind.lava)  # enterable, lethally
    assert not walkable(TileKind.water)
    assert not walkable(TileKind.stone)
    assert not walkable(TileKind.table)
    assert all(walkable(k) for k in TRACE_KINDS)


@pytest.mark.parametrize("terrain", [TileKind.grass, TileKind.sand])
def test_footprint_algebra_by_enumeration(terrain):
    melded = stamp_footprint(stamp_footprint(terrain, Direction.up), Direction.down)
    for d1 in Direction:
        first = stamp_footprint(terrain, d1)
        assert is_trace(first)
        assert footprint_direction(first) == d1
        assert soft_family(first) == soft_family(terrain)
        for d2 in Direction:
            second = stamp_footprint(first, d2)
            if d1 == d2:
                assert second == first  # idempotent per direction
            else:
                assert second == melded
            # melded is absorbing
            assert stamp_footprint(melded, d2) == melded


def test_footprints_only_on_soft_terrain():
    for kind in (TileKind.path, TileKind.stone, TileKind.water, TileKind.tree_cut, TileKind.grass_blood):
        for d in Direction:
            assert stamp_footprint(kind, d) == kind


def test_overlays_claim_only_plain_soft_ground():
    assert stamp_overlay(TileKind.grass, "water") == TileKind.grass_water
    assert stamp_overlay(TileKind.sand, "blood") == TileKind.sand_blood
    # never over existing traces or hard ground
    assert stamp_overlay(TileKind.grass_fp_up, "blood") == TileKind.grass_fp_up
    assert stamp_overlay(TileKind.path, "water") == TileKind.path
    assert stamp_overlay(TileKind.grass_water, "water") == TileKind.grass_water
