"""World state and the deterministic 26-action transition function.

The grid is a 64x64 array of TileKind indices (0..49). Creatures and agents
live on top of it; traces are written into it and never age away. `step` is
pure: it copies the incoming state and returns the successor plus the
ActionEvent describing everything that happened during the tick, including
creature retaliation and stat decay.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Optional

import numpy as np

from .achievements import Achievement, achievements_for_event
from .actions import ActionKind, DIRECTION_FOR_MOVE
from .events import NO_OP, SUCCEEDED, ActionEvent, Cell
from .items import (
    FOOD_VALUE,
    Item,
    MAKE_RECIPES,
    MINE_TIER,
    PLACED_TILE,
    PLACE_RECIPES,
    best_weapon,
    melee_damage,
    pickaxe_tier,
)
from .rng import Stream
from .tiles import (
    DELTAS,
    Direction,
    STAMPABLE_PLAIN,
    TileKind,
    is_trace,
    soft_family,
    stamp_footprint,
    stamp_overlay,
    walkable,
)

SIZE = 64
VIEW_RADIUS = 4  # 9x9 view

VANDAL = "vandal"
DETECTIVE = "detective"

STAT_DECAY_PERIOD = 25  # vandal food/drink/energy lose 1 every this many ticks
STAT_MAX = 9

CREATURE_HEALTH = {"cow": 3, "zombie": 3, "skeleton": 2}
ZOMBIE_DAMAGE = 2
SKELETON_DAMAGE = 1
ZOMBIE_CHASE_RANGE = 6
SKELETON_SHOT_RANGE = 5

_CREATURE_VIEW = {"cow": TileKind.cow, "zombie": TileKind.zombie, "skeleton": TileKind.skeleton}

_DIR_ORDER = (Direction.up, Direction.down, Direction.left, Direction.right)


@dataclass
class Creature:
    kind: str
    pos: Cell
    health: int
    cooldown: int = 0

    def copy(self) -> "Creature":
        return Creature(self.kind, self.pos, self.health, self.cooldown)


@dataclass
class AgentState:
    role: str
    pos: Cell
    facing: Direction = Direction.down
    inventory: dict[Item, int] = field(default_factory=dict)
    health: int = STAT_MAX
    food: int = STAT_MAX
    drink: int = STAT_MAX
    energy: int = STAT_MAX
    alive: bool = True
    sleeping: bool = False
    fired: set[Achievement] = field(default_factory=set)

    def has(self, item: Item, n: int = 1) -> bool:
        return self.inventory.get(item, 0) >= n

    def gain(self, item: Item, n: int = 1) -> None:
        self.inventory[item] = self.inventory.get(item, 0) + n

    def spend(self, item: Item, n: int = 1) -> None:
        have = self.inventory.get(item, 0)
        if have < n:
            raise ValueError(f"cannot spend {n} {item.value}, have {have}")
        if have == n:
            del self.inventory[item]
        else:
            self.inventory[item] = have - n

    def copy(self) -> "AgentState":
        return AgentState(
            role=self.role,
            pos=self.pos,
            facing=self.facing,
            inventory=dict(self.inventory),
            health=self.health,
            food=self.food,
            drink=self.drink,
            energy=self.energy,
            alive=self.alive,
            sleeping=self.sleeping,
            fired=set(self.fired),
        )


@dataclass
class WorldState:
    grid: np.ndarray
    creatures: list[Creature]
    agents: dict[str, AgentState]
    tick: int
    rng: Stream
    phase: str = "vandal"
    vandal_start: Optional[Cell] = None
    seed: int = 0
    config: dict = field(default_factory=dict)

    def copy(self) -> "WorldState":
        return WorldState(
            grid=self.grid.copy(),
            creatures=[c.copy() for c in self.creatures],
            agents={r: a.copy() for r, a in self.agents.items()},
            tick=self.tick,
            rng=self.rng.copy(),
            phase=self.phase,
            vandal_start=self.vandal_start,
            seed=self.seed,
            config=dict(self.config),
        )

    def in_bounds(self, cell: Cell) -> bool:
        r, c = cell
        return 0 <= r < SIZE and 0 <= c < SIZE

    def tile(self, cell: Cell) -> TileKind:
        return TileKind(int(self.grid[cell[0], cell[1]]))

    def set_tile(self, cell: Cell, kind: TileKind) -> None:
        self.grid[cell[0], cell[1]] = int(kind)

    def creature_at(self, cell: Cell) -> Optional[Creature]:
        for cr in self.creatures:
            if cr.pos == cell:
                return cr
        return None

    def agent_at(self, cell: Cell) -> Optional[AgentState]:
        for a in self.agents.values():
            if a.alive and a.pos == cell:
                return a
        return None

    def occupied(self, cell: Cell) -> bool:
        return self.creature_at(cell) is not None or self.agent_at(cell) is not None

    def state_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.grid.astype(np.int16).tobytes())
        blob = {
            "tick": self.tick,
            "phase": self.phase,
            "seed": self.seed,
            "vandal_start": self.vandal_start,
            "creatures": [[c.kind, list(c.pos), c.health, c.cooldown] for c in self.creatures],
            "agents": {
                r: [
                    list(a.pos),
                    int(a.facing),
                    sorted((i.value, n) for i, n in a.inventory.items()),
                    a.health,
                    a.food,
                    a.drink,
                    a.energy,
                    a.alive,
                    a.sleeping,
                    sorted(x.value for x in a.fired),
                ]
                for r, a in sorted(self.agents.items())
            },
            "rng": self.rng.state_dict(),
        }
        h.update(json.dumps(blob, sort_keys=True).encode())
        return h.hexdigest()


# ---------------------------------------------------------------------------
# observation


def local_view(world: WorldState, role: str) -> np.ndarray:
    """9x9 symbolic view centered on the actor; off-map cells read out_of_bounds.

    Creatures and the other (living) agent overlay the tile they stand on.
    """
    if role not in world.agents:
        raise ValueError(f"unknown actor role: {role}")
    pr, pc = world.agents[role].pos
    view = np.full((2 * VIEW_RADIUS + 1,) * 2, int(TileKind.out_of_bounds), dtype=np.int16)
    r0, r1 = max(0, pr - VIEW_RADIUS), min(SIZE, pr + VIEW_RADIUS + 1)
    c0, c1 = max(0, pc - VIEW_RADIUS), min(SIZE, pc + VIEW_RADIUS + 1)
    view[
        r0 - (pr - VIEW_RADIUS) : r1 - (pr - VIEW_RADIUS),
        c0 - (pc - VIEW_RADIUS) : c1 - (pc - VIEW_RADIUS),
    ] = world.grid[r0:r1, c0:c1]
    for cr in world.creatures:
        dr, dc = cr.pos[0] - pr, cr.pos[1] - pc
        if abs(dr) <= VIEW_RADIUS and abs(dc) <= VIEW_RADIUS:
            view[dr + VIEW_RADIUS, dc + VIEW_RADIUS] = int(_CREATURE_VIEW[cr.kind])
    for other_role, other in world.agents.items():
        if other_role == role or not other.alive:
            continue
        dr, dc = other.pos[0] - pr, other.pos[1] - pc
        if abs(dr) <= VIEW_RADIUS and abs(dc) <= VIEW_RADIUS:
            view[dr + VIEW_RADIUS, dc + VIEW_RADIUS] = int(TileKind.player)
    return view


# ---------------------------------------------------------------------------
# stamping helpers (record what changed so logs carry the ground truth)


def _stamp(world: WorldState, ev: ActionEvent, cell: Cell, new_kind: TileKind) -> None:
    if world.tile(cell) != new_kind:
        world.set_tile(cell, new_kind)
        ev.traces_stamped.append((cell, new_kind))


def _stamp_footprint(world: WorldState, ev: ActionEvent, cell: Cell, direction: Direction) -> None:
    new_kind = stamp_footprint(world.tile(cell), direction)
    _stamp(world, ev, cell, new_kind)


def _stamp_overlay(world: WorldState, ev: ActionEvent, cell: Cell, overlay: str) -> None:
    new_kind = stamp_overlay(world.tile(cell), overlay)
    if is_trace(new_kind):
        _stamp(world, ev, cell, new_kind)


def _stamp_plain(world: WorldState, ev: ActionEvent, cell: Cell, kind: TileKind) -> None:
    """Generic leftovers claim only plain, trace-free ground."""
    if world.tile(cell) in STAMPABLE_PLAIN:
        _stamp(world, ev, cell, kind)


def _stamp_body(world: WorldState, ev: ActionEvent, cell: Cell, kind: TileKind) -> None:
    """Bodies are decisive evidence: in the vandal phase they overwrite anything
    walkable; once the detective is on scene existing traces are preserved."""
    cur = world.tile(cell)
    if world.phase == "vandal":
        if walkable(cur) or cur is TileKind.lava:
            _stamp(world, ev, cell, kind)
    elif cur in STAMPABLE_PLAIN:
        _stamp(world, ev, cell, kind)


# ---------------------------------------------------------------------------
# the transition function


def step(world: WorldState, role: str, action: ActionKind | int) -> tuple[WorldState, ActionEvent]:
    """Apply one action for one actor; returns the successor world and event."""
    w = world.copy()
    ev = apply_action(w, role, action)
    return w, ev


def apply_action(world: WorldState, role: str, action: ActionKind | int) -> ActionEvent:
    """In-place variant of `step` for runners that own their world copy."""
    action = ActionKind(action)
    agent = world.agents.get(role)
    if agent is None:
        raise ValueError(f"unknown actor role: {role}")
    if not agent.alive:
        raise ValueError(f"{role} is dead and takes no further actions")

    ev = ActionEvent(tick=world.tick, actor=role, action=action, pos=agent.pos, facing=agent.facing)

    if agent.sleeping and action is not ActionKind.sleep:
        agent.sleeping = False  # any other action wakes without the wake_up rule

    handler = _HANDLERS[action]
    handler(world, agent, ev)

    _creatures_turn(world, ev)
    _vandal_upkeep(world, ev)

    world.tick += 1
    ev.pos = agent.pos
    ev.facing = agent.facing

    new_achievements = achievements_for_event(ev) - agent.fired
    agent.fired |= new_achievements
    ev.achievements = sorted(a.value for a in new_achievements)
    return ev


def _set_stat(agent: AgentState, ev: ActionEvent, name: str, delta: int) -> None:
    cur = getattr(agent, name)
    new = max(0, min(STAT_MAX, cur + delta))
    if new != cur:
        setattr(agent, name, new)
        ev.stat_deltas[name] = ev.stat_deltas.get(name, 0) + (new - cur)


def _facing_cell(agent: AgentState) -> Cell:
    dr, dc = DELTAS[agent.facing]
    return (agent.pos[0] + dr, agent.pos[1] + dc)


def _near_station(world: WorldState, agent: AgentState, kind: TileKind) -> bool:
    """Station within the 3x3 neighborhood; a slept-in bed still counts as a bed."""
    r, c = agent.pos
    for rr in range(r - 1, r + 2):
        for cc in range(c - 1, c + 2):
            if not world.in_bounds((rr, cc)):
                continue
            t = world.tile((rr, cc))
            if t is kind or (kind is TileKind.bed and t is TileKind.bed_used):
                return True
    return False


# -- movement ----------------------------------------------------------------


def _do_move(world: WorldState, agent: AgentState, ev: ActionEvent, direction: Direction) -> None:
    # Moving always turns the agent; it advances only when the target is free.
    # A blocked move is still a successful turn, which is how `do` gets aimed.
    agent.facing = direction
    ev.outcome = SUCCEEDED
    target = _facing_cell(agent)
    if not world.in_bounds(target):
        return
    t = world.tile(target)
    if not walkable(t) or world.occupied(target):
        return
    if t is TileKind.lava and agent.role == DETECTIVE:
        return  # the detective cannot die, so lava simply blocks it
    departed = agent.pos
    agent.pos = target
    ev.moved = True
    ev.cell = target
    _stamp_footprint(world, ev, departed, direction)
    if t is TileKind.lava and agent.role == VANDAL:
        agent.health = 0
        ev.stat_deltas["health"] = -STAT_MAX
        _kill_agent(world, agent, ev, "lava", body_cell=departed)


def _kill_agent(world: WorldState, agent: AgentState, ev: ActionEvent, cause: str, body_cell: Cell | None = None) -> None:
    agent.alive = False
    agent.sleeping = False
    ev.death_cause = cause
    _stamp_body(world, ev, body_cell if body_cell is not None else agent.pos, TileKind.dead_player)


# -- do ------------------------------------------------------------------------

_DO_GAIN = {
    TileKind.tree: ((Item.wood, 1),),
    TileKind.apple_tree: ((Item.wood, 1), (Item.apple, 2)),
    TileKind.stone: ((Item.stone, 1),),
    TileKind.coal: ((Item.coal, 1),),
    TileKind.iron: ((Item.iron, 1),),
    TileKind.diamond: ((Item.diamond, 1),),
}

_DO_REMNANT = {
    TileKind.tree: TileKind.tree_cut,
    TileKind.apple_tree: TileKind.apple_tree_cut,
    TileKind.stone: TileKind.stone_left,
    TileKind.coal: TileKind.coal_left,
    TileKind.iron: TileKind.iron_left,
    TileKind.diamond: TileKind.diamond_left,
}

_BODY_TILE = {"cow": TileKind.dead_cow, "zombie": TileKind.dead_zombie, "skeleton": TileKind.dead_skeleton}


def _do_do(world: WorldState, agent: AgentState, ev: ActionEvent) -> None:
    target = _facing_cell(agent)
    if not world.in_bounds(target):
        return
    ev.cell = target

    cr = world.creature_at(target)
    if cr is not None:
        _attack(world, agent, ev, cr)
        return

    t = world.tile(target)
    ev.target_tile = t
    if t in (TileKind.tree, TileKind.apple_tree):
        for item, n in _DO_GAIN[t]:
            agent.gain(item, n)
            ev.items_gained[item] = ev.items_gained.get(item, 0) + n
        ev.item = best_weapon(agent.inventory)  # tool used for the cut, None = bare hands
        _stamp(world, ev, target, _DO_REMNANT[t])
        ev.outcome = SUCCEEDED
    elif t in MINE_TIER:
        if pickaxe_tier(agent.inventory) < MINE_TIER[t]:
            ev.target_tile = t
            return  # wrong tool tier: no_op
        for item, n in _DO_GAIN[t]:
            agent.gain(item, n)
            ev.items_gained[item] = ev.items_gained.get(item, 0) + n
        _stamp(world, ev, target, _DO_REMNANT[t])
        ev.outcome = SUCCEEDED
    elif t is TileKind.grass:
        agent.gain(Item.sapling)
        ev.items_gained[Item.sapling] = 1
        ev.outcome = SUCCEEDED
    elif t is TileKind.sand:
        agent.gain(Item.sand)
        ev.items_gained[Item.sand] = 1
        _stamp(world, ev, target, TileKind.path)
        ev.outcome = SUCCEEDED
    elif t is TileKind.ripe_plant:
        _stamp(world, ev, target, TileKind.plant_left)
        _set_stat(agent, ev, "health", 1)
        _set_stat(agent, ev, "food", 4)
        ev.outcome = SUCCEEDED
    elif t is TileKind.furnace and agent.has(Item.apple):
        agent.spend(Item.apple)
        agent.gain(Item.grilled_apple)
        ev.items_spent[Item.apple] = 1
        ev.items_gained[Item.grilled_apple] = 1
        ev.item = Item.grilled_apple
        ev.outcome = SUCCEEDED
    # anything else: no_op


def _attack(world: WorldState, agent: AgentState, ev: ActionEvent, cr: Creature) -> None:
    ev.outcome = SUCCEEDED
    ev.creature_kind = cr.kind
    ev.item = best_weapon(agent.inventory)
    cr.health -= melee_damage(agent.inventory)
    if cr.health <= 0:
        world.creatures.remove(cr)
        ev.creature_killed = True
        if cr.kind == "cow":
            agent.gain(Item.beef)
            ev.items_gained[Item.beef] = 1
        _stamp_body(world, ev, cr.pos, _BODY_TILE[cr.kind])
    else:
        _stamp_overlay(world, ev, cr.pos, "blood")


# -- sleep ---------------------------------------------------------------------


def _do_sleep(world: WorldState, agent: AgentState, ev: ActionEvent) -> None:
    if agent.energy >= STAT_MAX:
        return
    on_bed = world.tile(agent.pos) in (TileKind.bed, TileKind.bed_used) or _near_station(world, agent, TileKind.bed)
    agent.sleeping = True
    ev.outcome = SUCCEEDED
    ev.flags.append("asleep")
    if on_bed:
        ev.flags.append("on_bed")
    _set_stat(agent, ev, "energy", 2 if on_bed else 1)
    if agent.energy >= STAT_MAX:
        agent.sleeping = False
        ev.flags.append("woke")
        if on_bed:
            bed_cell = _find_near(world, agent.pos, (TileKind.bed,))
            if bed_cell is not None:
                _stamp(world, ev, bed_cell, TileKind.bed_used)


def _find_near(world: WorldState, pos: Cell, kinds: tuple[TileKind, ...]) -> Cell | None:
    r, c = pos
    for rr in range(r - 1, r + 2):
        for cc in range(c - 1, c + 2):
            if world.in_bounds((rr, cc)) and world.tile((rr, cc)) in kinds:
                return (rr, cc)
    return None


# -- place / make ----------------------------------------------------------------


def _placeable(world: WorldState, cell: Cell, action: ActionKind) -> bool:
    if not world.in_bounds(cell) or world.occupied(cell):
        return False
    t = world.tile(cell)
    if action is ActionKind.place_plant:
        return t is TileKind.grass
    return t in STAMPABLE_PLAIN


def _do_place(world: WorldState, agent: AgentState, ev: ActionEvent, action: ActionKind) -> None:
    # The faced cell is preferred; otherwise the first suitable 4-neighbor
    # (up, down, left, right) takes the placement.
    recipe = PLACE_RECIPES[action]
    target = _facing_cell(agent)
    if not _placeable(world, target, action):
        target = None
        for d in _DIR_ORDER:
            dr, dc = DELTAS[d]
            cand = (agent.pos[0] + dr, agent.pos[1] + dc)
            if _placeable(world, cand, action):
                target = cand
                break
    if target is None:
        return
    ev.cell = target
    if any(not _near_station(world, agent, k) for k in recipe.near):
        return
    if any(not agent.has(i, n) for i, n in recipe.consumes.items()):
        return
    for i, n in recipe.consumes.items():
        agent.spend(i, n)
        ev.items_spent[i] = n
    tile = PLACED_TILE[action]
    world.set_tile(target, tile)
    ev.target_tile = tile
    ev.outcome = SUCCEEDED


def _do_make(world: WorldState, agent: AgentState, ev: ActionEvent, action: ActionKind) -> None:
    recipe = MAKE_RECIPES[action]
    if any(not _near_station(world, agent, k) for k in recipe.near):
        return
    if any(not agent.has(i, n) for i, n in recipe.consumes.items()):
        return
    for i, n in recipe.consumes.items():
        agent.spend(i, n)
        ev.items_spent[i] = n
    agent.gain(recipe.produces)
    ev.items_gained[recipe.produces] = 1
    ev.item = recipe.produces
    ev.outcome = SUCCEEDED


# -- eating and drinking ----------------------------------------------------------


def _do_eat(world: WorldState, agent: AgentState, ev: ActionEvent, action: ActionKind) -> None:
    if action is ActionKind.eat_apple:
        item = Item.apple if agent.has(Item.apple) else Item.grilled_apple
    elif action is ActionKind.eat_beef:
        item = Item.beef
    else:
        item = Item.steak
    if not agent.has(item):
        return
    agent.spend(item)
    ev.items_spent[item] = 1
    ev.item = item
    health, food = FOOD_VALUE[item]
    _set_stat(agent, ev, "health", health)
    _set_stat(agent, ev, "food", food)
    leftover = TileKind.apple_core if item in (Item.apple, Item.grilled_apple) else TileKind.bone_left
    _stamp_plain(world, ev, agent.pos, leftover)
    ev.outcome = SUCCEEDED


def _adjacent_liquid(world: WorldState, agent: AgentState, wanted: TileKind) -> Cell | None:
    """Liquids are drawn from any 4-neighbor, faced one first."""
    target = _facing_cell(agent)
    if world.in_bounds(target) and world.tile(target) is wanted:
        return target
    for d in _DIR_ORDER:
        dr, dc = DELTAS[d]
        cand = (agent.pos[0] + dr, agent.pos[1] + dc)
        if world.in_bounds(cand) and world.tile(cand) is wanted:
            return cand
    return None


def _do_collect_liquid(world: WorldState, agent: AgentState, ev: ActionEvent, action: ActionKind) -> None:
    wanted = TileKind.water if action is ActionKind.collect_water else TileKind.lava
    target = _adjacent_liquid(world, agent, wanted)
    if target is None:
        return
    if not agent.has(Item.bucket):
        return
    agent.spend(Item.bucket)
    filled = Item.water_bucket if wanted is TileKind.water else Item.lava_bucket
    agent.gain(filled)
    ev.items_spent[Item.bucket] = 1
    ev.items_gained[filled] = 1
    ev.item = filled
    ev.cell = target
    ev.target_tile = wanted
    if wanted is TileKind.water:
        _stamp_overlay(world, ev, agent.pos, "water")
    ev.outcome = SUCCEEDED


def _do_drink(world: WorldState, agent: AgentState, ev: ActionEvent) -> None:
    target = _adjacent_liquid(world, agent, TileKind.water)
    if target is not None:
        ev.cell = target
        ev.target_tile = TileKind.water
        _set_stat(agent, ev, "drink", 6)
        _stamp_overlay(world, ev, agent.pos, "water")
        ev.outcome = SUCCEEDED
    elif agent.has(Item.water_bucket):
        agent.spend(Item.water_bucket)
        agent.gain(Item.bucket)
        ev.items_spent[Item.water_bucket] = 1
        ev.items_gained[Item.bucket] = 1
        ev.item = Item.water_bucket
        _set_stat(agent, ev, "drink", 6)
        ev.outcome = SUCCEEDED


def _do_noop(world: WorldState, agent: AgentState, ev: ActionEvent) -> None:
    ev.outcome = SUCCEEDED


_HANDLERS: dict[ActionKind, Callable[[WorldState, AgentState, ActionEvent], None]] = {
    ActionKind.noop: _do_noop,
    ActionKind.do: _do_do,
    ActionKind.sleep: _do_sleep,
    ActionKind.drink: _do_drink,
}
for _mv, _dir in DIRECTION_FOR_MOVE.items():
    _HANDLERS[_mv] = (lambda d: lambda w, a, e: _do_move(w, a, e, d))(_dir)
for _pl in PLACE_RECIPES:
    _HANDLERS[_pl] = (lambda act: lambda w, a, e: _do_place(w, a, e, act))(_pl)
for _mk in MAKE_RECIPES:
    _HANDLERS[_mk] = (lambda act: lambda w, a, e: _do_make(w, a, e, act))(_mk)
for _ea in (ActionKind.eat_apple, ActionKind.eat_beef, ActionKind.eat_steak):
    _HANDLERS[_ea] = (lambda act: lambda w, a, e: _do_eat(w, a, e, act))(_ea)
for _cl in (ActionKind.collect_water, ActionKind.collect_lava):
    _HANDLERS[_cl] = (lambda act: lambda w, a, e: _do_collect_liquid(w, a, e, act))(_cl)


# ---------------------------------------------------------------------------
# creatures


def _creature_blocked(world: WorldState, cell: Cell) -> bool:
    if not world.in_bounds(cell):
        return True
    t = world.tile(cell)
    if not walkable(t) or t is TileKind.lava:
        return True
    return world.occupied(cell)


def _wander(world: WorldState, cr: Creature) -> None:
    d = _DIR_ORDER[world.rng.randint(0, 4)]
    dr, dc = DELTAS[d]
    target = (cr.pos[0] + dr, cr.pos[1] + dc)
    if not _creature_blocked(world, target):
        cr.pos = target


def _step_toward(world: WorldState, cr: Creature, target: Cell) -> None:
    dr = target[0] - cr.pos[0]
    dc = target[1] - cr.pos[1]
    prefs: list[Direction] = []
    if abs(dr) >= abs(dc):
        prefs += [Direction.down if dr > 0 else Direction.up]
        if dc != 0:
            prefs += [Direction.right if dc > 0 else Direction.left]
    else:
        prefs += [Direction.right if dc > 0 else Direction.left]
        if dr != 0:
            prefs += [Direction.down if dr > 0 else Direction.up]
    for d in prefs:
        ddr, ddc = DELTAS[d]
        nxt = (cr.pos[0] + ddr, cr.pos[1] + ddc)
        if not _creature_blocked(world, nxt):
            cr.pos = nxt
            return


def _line_clear(world: WorldState, a: Cell, b: Cell) -> bool:
    if a[0] == b[0]:
        lo, hi = sorted((a[1], b[1]))
        cells = [(a[0], c) for c in range(lo + 1, hi)]
    else:
        lo, hi = sorted((a[0], b[0]))
        cells = [(r, a[1]) for r in range(lo + 1, hi)]
    return all(walkable(world.tile(c)) and world.creature_at(c) is None for c in cells)


def _creatures_turn(world: WorldState, ev: ActionEvent) -> None:
    """Creatures act after the agent, in stable list order.

    In the vandal phase monsters hunt the vandal and may wreck placed
    stations; once the detective phase begins they only wander, so the
    scene's evidence stays frozen apart from the detective's own marks.
    """
    vandal = world.agents.get(VANDAL)
    hunting = world.phase == "vandal" and vandal is not None and vandal.alive

    for cr in list(world.creatures):
        if cr.cooldown > 0:
            cr.cooldown -= 1
            continue
        if cr.kind == "cow":
            if world.tick % 2 == 0:
                _wander(world, cr)
            continue
        if not hunting:
            if world.tick % 3 == 0:
                _wander(world, cr)
            continue
        tpos = vandal.pos
        dist = abs(cr.pos[0] - tpos[0]) + abs(cr.pos[1] - tpos[1])
        if cr.kind == "zombie":
            if dist == 1:
                vandal_was = vandal.health
                _set_stat(vandal, ev, "health", -ZOMBIE_DAMAGE)
                ev.damage_taken += vandal_was - vandal.health
                _stamp_overlay(world, ev, vandal.pos, "blood")
                cr.cooldown = 1
                if vandal.health <= 0 and vandal.alive:
                    _kill_agent(world, vandal, ev, "zombie")
            elif dist <= ZOMBIE_CHASE_RANGE:
                _step_toward(world, cr, tpos)
            else:
                station = _find_near(world, cr.pos, (TileKind.table, TileKind.furnace, TileKind.bed, TileKind.bed_used))
                wrecking = (
                    station is not None
                    and abs(station[0] - cr.pos[0]) + abs(station[1] - cr.pos[1]) == 1
                    and world.rng.random() < 0.15
                )
                if wrecking:
                    wreck = {
                        TileKind.table: TileKind.table_left,
                        TileKind.furnace: TileKind.furnace_left,
                        TileKind.bed: TileKind.bed_left,
                        TileKind.bed_used: TileKind.bed_left,
                    }[world.tile(station)]
                    _stamp(world, ev, station, wreck)
                    cr.cooldown = 8
                elif world.tick % 3 == 0:
                    _wander(world, cr)
        elif cr.kind == "skeleton":
            aligned = cr.pos[0] == tpos[0] or cr.pos[1] == tpos[1]
            if aligned and 0 < dist <= SKELETON_SHOT_RANGE and _line_clear(world, cr.pos, tpos):
                vandal_was = vandal.health
                _set_stat(vandal, ev, "health", -SKELETON_DAMAGE)
                ev.damage_taken += vandal_was - vandal.health
                if soft_family(world.tile(vandal.pos)) is not None:
                    _stamp_overlay(world, ev, vandal.pos, "blood")
                else:
                    _stamp_plain(world, ev, vandal.pos, TileKind.arrow_left)
                cr.cooldown = 2
                if vandal.health <= 0 and vandal.alive:
                    _kill_agent(world, vandal, ev, "skeleton")
            elif world.tick % 3 == 0:
                _wander(world, cr)


# ---------------------------------------------------------------------------
# upkeep: hunger, thirst, fatigue, plant growth


def _vandal_upkeep(world: WorldState, ev: ActionEvent) -> None:
    # plants mature on a global pulse so no per-cell clock is needed
    if (world.tick + 1) % STAT_DECAY_PERIOD == 0:
        ripening = world.grid == int(TileKind.young_plant)
        sprouting = world.grid == int(TileKind.sapling)
        world.grid[ripening] = int(TileKind.ripe_plant)
        world.grid[sprouting] = int(TileKind.young_plant)

    if world.phase != "vandal":
        return
    vandal = world.agents.get(VANDAL)
    if vandal is None or not vandal.alive:
        return
    if (world.tick + 1) % STAT_DECAY_PERIOD == 0:
        _set_stat(vandal, ev, "food", -1)
        _set_stat(vandal, ev, "drink", -1)
        if not vandal.sleeping:
            _set_stat(vandal, ev, "energy", -1)
    if (world.tick + 1) % 15 == 0 and vandal.food >= 6 and vandal.drink >= 6:
        _set_stat(vandal, ev, "health", 1)  # slow mend while well supplied
    starving = [name for name in ("food", "drink", "energy") if getattr(vandal, name) == 0]
    if starving:
        _set_stat(vandal, ev, "health", -1)
        if vandal.health <= 0 and vandal.alive:
            cause = {"food": "hunger", "drink": "thirst", "energy": "exhaustion"}[starving[0]]
            _kill_agent(world, vandal, ev, cause)
