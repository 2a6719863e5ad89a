"""Seeded scene generation with a reachability repair loop.

Terrain comes from layered value noise: a water/sand low band, a grass
middle, and a stone highland laced with cave paths that hold the ores and
lava. After seeding resources and creatures, the generator verifies that
everything any of the 60 tasks could need is reachable from the vandal
spawn and patches what is missing; if a configuration makes that
impossible, generation fails naming the offending resource.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .rng import Stream
from .tiles import DELTAS, TileKind, walkable
from .world import SIZE, VANDAL, AgentState, Creature, WorldState


class SceneGenerationError(Exception):
    def __init__(self, seed: int, resource: str):
        self.seed = seed
        self.resource = resource
        super().__init__(f"seed {seed}: could not provide a reachable '{resource}'")


@dataclass(frozen=True)
class SceneConfig:
    """Placement targets. Counts are what the generator will guarantee at most;
    solvability needs the REQUIRED floor below, so dropping a count under its
    floor makes generation fail by design."""

    trees: int = 12
    apple_trees: int = 3
    coal: int = 5
    iron: int = 4
    diamond: int = 2
    lava: int = 3
    cows: int = 4
    zombies: int = 2
    skeletons: int = 2
    max_attempts: int = 8

    def to_dict(self) -> dict:
        return {
            "trees": self.trees,
            "apple_trees": self.apple_trees,
            "coal": self.coal,
            "iron": self.iron,
            "diamond": self.diamond,
            "lava": self.lava,
            "cows": self.cows,
            "zombies": self.zombies,
            "skeletons": self.skeletons,
            "max_attempts": self.max_attempts,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SceneConfig":
        return cls(**{k: int(v) for k, v in d.items()})


# Reachable minima implied by the task set (worst single task per resource:
# five tree cuts for the big wood haul, two apple trees for the double pick,
# two buckets' worth of stone plus furnace stock, and so on).
REQUIRED: dict[str, int] = {
    "tree": 5,
    "apple_tree": 2,
    "stone": 6,
    "coal": 2,
    "iron": 2,
    "diamond": 1,
    "water": 1,
    "lava": 1,
    "sand": 1,
    "grass": 4,
    "cow": 1,
    "zombie": 1,
    "skeleton": 1,
}

_RESOURCE_TILE = {
    "tree": TileKind.tree,
    "apple_tree": TileKind.apple_tree,
    "stone": TileKind.stone,
    "coal": TileKind.coal,
    "iron": TileKind.iron,
    "diamond": TileKind.diamond,
    "water": TileKind.water,
    "lava": TileKind.lava,
    "sand": TileKind.sand,
    "grass": TileKind.grass,
}


def _value_noise(rng: Stream, res: int) -> np.ndarray:
    """Bilinear-upsampled uniform noise on a (res+1)^2 lattice."""
    coarse = np.array([[rng.random() for _ in range(res + 1)] for _ in range(res + 1)])
    xs = np.linspace(0, res, SIZE)
    i0 = np.clip(xs.astype(int), 0, res - 1)
    f = xs - i0
    rows = coarse[i0][:, i0] * np.outer(1 - f, 1 - f)
    rows += coarse[i0 + 1][:, i0] * np.outer(f, 1 - f)
    rows += coarse[i0][:, i0 + 1] * np.outer(1 - f, f)
    rows += coarse[i0 + 1][:, i0 + 1] * np.outer(f, f)
    return rows


def _pathfinding_walkable(kind: int) -> bool:
    return walkable(kind) and TileKind(kind) is not TileKind.lava


def _reachable_mask(grid: np.ndarray, start: tuple[int, int]) -> np.ndarray:
    seen = np.zeros_like(grid, dtype=bool)
    if not _pathfinding_walkable(int(grid[start])):
        return seen
    q = deque([start])
    seen[start] = True
    while q:
        r, c = q.popleft()
        for dr, dc in DELTAS.values():
            rr, cc = r + dr, c + dc
            if 0 <= rr < SIZE and 0 <= cc < SIZE and not seen[rr, cc] and _pathfinding_walkable(int(grid[rr, cc])):
                seen[rr, cc] = True
                q.append((rr, cc))
    return seen


def _adjacent_to(mask: np.ndarray) -> np.ndarray:
    adj = np.zeros_like(mask)
    adj[:-1, :] |= mask[1:, :]
    adj[1:, :] |= mask[:-1, :]
    adj[:, :-1] |= mask[:, 1:]
    adj[:, 1:] |= mask[:, :-1]
    return adj


def _count_reachable(grid: np.ndarray, reach: np.ndarray, kind: TileKind) -> int:
    """Cells of `kind` that are reachable or touch a reachable cell."""
    usable = reach | _adjacent_to(reach)
    return int(np.count_nonzero((grid == int(kind)) & usable))


def generate_scene(seed: int, config: SceneConfig | None = None) -> WorldState:
    """Deterministic world for (seed, config); raises SceneGenerationError if
    the config cannot satisfy the task set's resource floor."""
    config = config or SceneConfig()
    failing = "unknown"
    for attempt in range(config.max_attempts):
        rng = Stream(seed, f"scenegen/{attempt}")
        world = _build_once(seed, config, rng)
        failing = _verify_and_repair(world, config, rng)
        if failing is None:
            return world
    raise SceneGenerationError(seed, failing)


def _build_once(seed: int, config: SceneConfig, rng: Stream) -> WorldState:
    elev = 0.65 * _value_noise(rng.child("elev1"), 6) + 0.35 * _value_noise(rng.child("elev2"), 13)
    cave = _value_noise(rng.child("cave"), 10)

    q = np.quantile(elev, [0.16, 0.24, 0.68])
    grid = np.full((SIZE, SIZE), int(TileKind.grass), dtype=np.int16)
    grid[elev < q[2]] = int(TileKind.grass)
    grid[elev < q[1]] = int(TileKind.sand)
    grid[elev < q[0]] = int(TileKind.water)
    highland = elev >= q[2]
    grid[highland] = int(TileKind.stone)
    grid[highland & (cave > 0.55)] = int(TileKind.path)

    # forests on mid grass
    forest = _value_noise(rng.child("forest"), 8)
    grass_mask = grid == int(TileKind.grass)
    tree_cells = np.argwhere(grass_mask & (forest > np.quantile(forest, 0.88)))
    rng.shuffle(tree_cells := [tuple(map(int, c)) for c in tree_cells])
    for cell in tree_cells[: max(config.trees * 3, 24)]:
        grid[cell] = int(TileKind.tree)

    world = WorldState(
        grid=grid,
        creatures=[],
        agents={},
        tick=0,
        rng=Stream(seed, "world"),
        phase="vandal",
        seed=seed,
        config=config.to_dict(),
    )

    # spawn on the largest open component
    best: tuple[int, tuple[int, int]] | None = None
    seen = np.zeros((SIZE, SIZE), dtype=bool)
    for r in range(SIZE):
        for c in range(SIZE):
            if seen[r, c] or not _pathfinding_walkable(int(grid[r, c])):
                continue
            comp = _reachable_mask(grid, (r, c))
            seen |= comp
            size = int(comp.sum())
            if best is None or size > best[0]:
                cand = np.argwhere(comp & (grid == int(TileKind.grass)))
                if len(cand):
                    pick = tuple(map(int, cand[rng.randint(0, len(cand))]))
                    best = (size, pick)
    spawn = best[1] if best else (SIZE // 2, SIZE // 2)
    if not _pathfinding_walkable(int(grid[spawn])):
        grid[spawn] = int(TileKind.grass)
    world.vandal_start = spawn
    # the vandal arrives already somewhat worn from travel, so survival
    # behavior shows up in ordinary episodes
    stats_rng = rng.child("stats")
    world.agents[VANDAL] = AgentState(
        role=VANDAL,
        pos=spawn,
        food=9 - stats_rng.randint(0, 6),
        drink=9 - stats_rng.randint(0, 6),
        energy=9 - stats_rng.randint(0, 4),
    )

    reach = _reachable_mask(grid, spawn)

    # ores and lava carved into the stone frontier so they touch open ground
    frontier = np.argwhere((grid == int(TileKind.stone)) & _adjacent_to(reach))
    frontier = [tuple(map(int, c)) for c in frontier]
    rng.shuffle(frontier)
    wanted = [(TileKind.coal, config.coal), (TileKind.iron, config.iron), (TileKind.diamond, config.diamond), (TileKind.lava, config.lava)]
    idx = 0
    for kind, count in wanted:
        placed = 0
        while placed < count and idx < len(frontier):
            grid[frontier[idx]] = int(kind)
            idx += 1
            placed += 1

    # a few of the trees become apple trees
    trees_now = [tuple(map(int, c)) for c in np.argwhere((grid == int(TileKind.tree)) & (reach | _adjacent_to(reach)))]
    rng.shuffle(trees_now)
    for cell in trees_now[: config.apple_trees]:
        grid[cell] = int(TileKind.apple_tree)

    _spawn_creatures(world, config, rng, reach)
    return world


def _spawn_creatures(world: WorldState, config: SceneConfig, rng: Stream, reach: np.ndarray) -> None:
    spawn = world.vandal_start
    open_cells = [tuple(map(int, c)) for c in np.argwhere(reach)]
    far = [c for c in open_cells if abs(c[0] - spawn[0]) + abs(c[1] - spawn[1]) >= 10]
    rng.shuffle(far)
    want = [("cow", config.cows), ("zombie", config.zombies), ("skeleton", config.skeletons)]
    i = 0
    for kind, count in want:
        placed = 0
        while placed < count and i < len(far):
            cell = far[i]
            i += 1
            if world.creature_at(cell) is None:
                world.creatures.append(Creature(kind, cell, _creature_hp(kind)))
                placed += 1


def _creature_hp(kind: str) -> int:
    from .world import CREATURE_HEALTH

    return CREATURE_HEALTH[kind]


def _verify_and_repair(world: WorldState, config: SceneConfig, rng: Stream) -> str | None:
    """Patch shortfalls up to the config's targets; return a failing resource
    name if the solvability floor still cannot be met, else None."""
    grid = world.grid
    spawn = world.vandal_start
    config_target = {
        "tree": config.trees,
        "apple_tree": config.apple_trees,
        "coal": config.coal,
        "iron": config.iron,
        "diamond": config.diamond,
        "lava": config.lava,
        "stone": REQUIRED["stone"],
        "water": REQUIRED["water"],
        "sand": REQUIRED["sand"],
        "grass": REQUIRED["grass"],
        "cow": config.cows,
        "zombie": config.zombies,
        "skeleton": config.skeletons,
    }

    for _round in range(4):
        reach = _reachable_mask(grid, spawn)
        shortfalls: list[tuple[str, int]] = []
        for name, floor in REQUIRED.items():
            if name in ("cow", "zombie", "skeleton"):
                have = sum(1 for cr in world.creatures if cr.kind == name and reach[cr.pos])
            else:
                have = _count_reachable(grid, reach, _RESOURCE_TILE[name])
            need = min(config_target[name], max(floor, 0))
            target = max(floor, 0) if config_target[name] >= floor else config_target[name]
            # repair only up to what the config allows
            allowed = config_target[name]
            missing = max(floor - have, 0)
            if missing > 0:
                if allowed < floor:
                    return name  # config forbids reaching the floor
                shortfalls.append((name, missing))
        if not shortfalls:
            return None
        for name, missing in shortfalls:
            _repair(world, name, missing, rng)
    # final check
    reach = _reachable_mask(grid, spawn)
    for name, floor in REQUIRED.items():
        if name in ("cow", "zombie", "skeleton"):
            have = sum(1 for cr in world.creatures if cr.kind == name and reach[cr.pos])
        else:
            have = _count_reachable(grid, reach, _RESOURCE_TILE[name])
        if have < floor:
            return name
    return None


def _repair(world: WorldState, name: str, missing: int, rng: Stream) -> None:
    grid = world.grid
    spawn = world.vandal_start
    reach = _reachable_mask(grid, spawn)
    open_grass = [tuple(map(int, c)) for c in np.argwhere(reach & (grid == int(TileKind.grass)))]
    rng.shuffle(open_grass)
    # keep the spawn cell itself intact
    open_grass = [c for c in open_grass if c != spawn and world.creature_at(c) is None]

    if name in ("cow", "zombie", "skeleton"):
        far = [c for c in open_grass if abs(c[0] - spawn[0]) + abs(c[1] - spawn[1]) >= 8]
        for cell in (far or open_grass)[:missing]:
            world.creatures.append(Creature(name, cell, _creature_hp(name)))
        return

    kind = _RESOURCE_TILE[name]
    if name in ("coal", "iron", "diamond", "stone", "lava"):
        frontier = [tuple(map(int, c)) for c in np.argwhere((grid == int(TileKind.stone)) & _adjacent_to(reach))]
        rng.shuffle(frontier)
        pool = frontier if name != "stone" else []
        for cell in pool[:missing]:
            grid[cell] = int(kind)
            missing -= 1
    # whatever is still missing materializes on open grass (an outcropping,
    # a pond, a lone tree); neighbors stay reachable by construction
    for cell in open_grass[:missing]:
        if name == "water":
            grid[cell] = int(TileKind.water)
        elif name == "grass":
            break
        else:
            grid[cell] = int(kind)
