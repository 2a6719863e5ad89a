"""Breadth-first grid pathfinding with a fixed direction tie-break.

Neighbors expand in up < down < left < right order, so among equal-length
paths the returned action sequence is the lexicographically smallest under
that priority — stable across runs and platforms. Lava is never entered.
Creatures are ignored here; executors resolve them on contact.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Iterable

from .actions import ActionKind, MOVE_FOR_DIRECTION
from .events import Cell
from .tiles import DELTAS, Direction, TileKind, walkable
from .world import SIZE, WorldState

_ORDER = (Direction.up, Direction.down, Direction.left, Direction.right)


@dataclass
class PathResult:
    reachable: bool
    moves: list[ActionKind] = field(default_factory=list)
    dest: Cell | None = None

    def __len__(self) -> int:
        return len(self.moves)


def _passable(world: WorldState, cell: Cell) -> bool:
    if not (0 <= cell[0] < SIZE and 0 <= cell[1] < SIZE):
        return False
    t = world.tile(cell)
    return walkable(t) and t is not TileKind.lava


def pathfind(
    world: WorldState,
    start: Cell,
    goal: Callable[[Cell], bool],
    avoid: frozenset[Cell] | set[Cell] | None = None,
) -> PathResult:
    """Shortest move sequence from `start` to any cell satisfying `goal`.

    `start` must be passable. Cells in `avoid` are treated as blocked unless
    they satisfy the goal. Returns an explicit unreachable result rather
    than raising when no satisfying cell can be reached.
    """
    if not _passable(world, start):
        raise ValueError(f"pathfind start {start} is not walkable")
    if goal(start):
        return PathResult(True, [], start)
    avoid = avoid or frozenset()
    parent: dict[Cell, tuple[Cell, Direction]] = {}
    seen = {start}
    q: deque[Cell] = deque([start])
    while q:
        cur = q.popleft()
        for d in _ORDER:
            dr, dc = DELTAS[d]
            nxt = (cur[0] + dr, cur[1] + dc)
            if nxt in seen or not _passable(world, nxt):
                continue
            if nxt in avoid and not goal(nxt):
                seen.add(nxt)
                continue
            seen.add(nxt)
            parent[nxt] = (cur, d)
            if goal(nxt):
                moves: list[ActionKind] = []
                node = nxt
                while node != start:
                    node, d_ = parent[node]
                    moves.append(MOVE_FOR_DIRECTION[d_])
                moves.reverse()
                return PathResult(True, moves, nxt)
            q.append(nxt)
    return PathResult(False)


def adjacent_to_kinds(world: WorldState, kinds: Iterable[TileKind]) -> Callable[[Cell], bool]:
    """Goal predicate: standing cell has a 4-neighbor of one of `kinds`."""
    wanted = {int(k) for k in kinds}

    def pred(cell: Cell) -> bool:
        for dr, dc in DELTAS.values():
            rr, cc = cell[0] + dr, cell[1] + dc
            if 0 <= rr < SIZE and 0 <= cc < SIZE and int(world.grid[rr, cc]) in wanted:
                return True
        return False

    return pred


def facing_direction(from_cell: Cell, to_cell: Cell) -> Direction:
    dr = to_cell[0] - from_cell[0]
    dc = to_cell[1] - from_cell[1]
    for d, (ddr, ddc) in DELTAS.items():
        if (dr, dc) == (ddr, ddc):
            return d
    raise ValueError(f"{to_cell} is not 4-adjacent to {from_cell}")


def neighbor_of_kind(world: WorldState, cell: Cell, kinds: Iterable[TileKind]) -> Cell | None:
    """First 4-neighbor (up,down,left,right order) holding one of `kinds`."""
    wanted = {int(k) for k in kinds}
    for d in _ORDER:
        dr, dc = DELTAS[d]
        rr, cc = cell[0] + dr, cell[1] + dc
        if 0 <= rr < SIZE and 0 <= cc < SIZE and int(world.grid[rr, cc]) in wanted:
            return (rr, cc)
    return None
