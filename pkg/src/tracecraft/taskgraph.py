"""Task space, dependency graph, and the probabilistic goal parser.

The 60 tasks are built over the 39 achievements. Expansion turns a goal
into an ordered subgoal sequence by walking requirement rules (consumed
items, required tools and stations, prerequisite achievements); wherever an
OR-group offers several viable routes, `parse_goal` resolves it by a
uniform draw, while the plan library enumerates every resolution for exact
likelihood scoring.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Iterable, Optional

import numpy as np

from .achievements import Achievement
from .items import Item, MAKE_RECIPES, PLACE_RECIPES
from .actions import ActionKind
from .rng import Stream
from .tiles import TileKind
from .world import WorldState
from .scenegen import _reachable_mask, _adjacent_to  # reuse the generator's BFS


class PlanningError(Exception):
    def __init__(self, goal: str, node: str):
        self.goal = goal
        self.node = node
        super().__init__(f"goal {goal}: no viable expansion at '{node}'")


class TaskId(str, Enum):
    # the 25 named tasks (these carry the published sampling weights)
    get_drink = "get_drink"
    defeat_cow = "defeat_cow"
    get_apple = "get_apple"
    make_stone_pickaxe = "make_stone_pickaxe"
    place_bed = "place_bed"
    place_furnace = "place_furnace"
    get_lava = "get_lava"
    defeat_skeleton = "defeat_skeleton"
    make_iron_sword = "make_iron_sword"
    get_coal = "get_coal"
    get_beef = "get_beef"
    get_diamond = "get_diamond"
    get_stone = "get_stone"
    make_bucket = "make_bucket"
    get_iron = "get_iron"
    get_water = "get_water"
    make_iron_pickaxe = "make_iron_pickaxe"
    make_bed = "make_bed"
    make_steak = "make_steak"
    make_wood_sword = "make_wood_sword"
    defeat_zombie = "defeat_zombie"
    make_stone_sword = "make_stone_sword"
    place_table = "place_table"
    get_wood = "get_wood"
    make_wood_pickaxe = "make_wood_pickaxe"
    # composite tasks rounding the space out to 60 (reconstruction, not
    # ground truth: the composition list is ours)
    get_sapling = "get_sapling"
    get_sand = "get_sand"
    place_plant = "place_plant"
    grow_plant = "grow_plant"
    eat_plant = "eat_plant"
    eat_apple = "eat_apple"
    eat_beef = "eat_beef"
    eat_steak = "eat_steak"
    make_grilled_apple = "make_grilled_apple"
    eat_grilled_apple = "eat_grilled_apple"
    drink_from_bucket = "drink_from_bucket"
    take_nap = "take_nap"
    sleep_on_bed = "sleep_on_bed"
    wake_up_rested = "wake_up_rested"
    have_meal = "have_meal"
    defeat_monsters = "defeat_monsters"
    trophy_hunter = "trophy_hunter"
    hunt_feast = "hunt_feast"
    make_wood_kit = "make_wood_kit"
    make_stone_kit = "make_stone_kit"
    make_iron_kit = "make_iron_kit"
    all_pickaxes = "all_pickaxes"
    all_swords = "all_swords"
    build_camp = "build_camp"
    furnish_home = "furnish_home"
    stock_ores = "stock_ores"
    deep_mine = "deep_mine"
    lumberjack = "lumberjack"
    stockpile_wood = "stockpile_wood"
    stone_mason = "stone_mason"
    apple_picker = "apple_picker"
    fire_and_water = "fire_and_water"
    survivalist = "survivalist"
    armed_defense = "armed_defense"
    skeleton_hunter = "skeleton_hunter"


# Scene-level sampling weights (percent); composites are goal-space only.
TASK_WEIGHTS: dict[TaskId, float] = {
    TaskId.get_drink: 2.47,
    TaskId.defeat_cow: 8.49,
    TaskId.get_apple: 2.52,
    TaskId.make_stone_pickaxe: 2.87,
    TaskId.place_bed: 8.44,
    TaskId.place_furnace: 8.23,
    TaskId.get_lava: 2.72,
    TaskId.defeat_skeleton: 8.7,
    TaskId.make_iron_sword: 2.64,
    TaskId.get_coal: 2.42,
    TaskId.get_beef: 2.7,
    TaskId.get_diamond: 2.39,
    TaskId.get_stone: 2.67,
    TaskId.make_bucket: 3.11,
    TaskId.get_iron: 2.44,
    TaskId.get_water: 2.2,
    TaskId.make_iron_pickaxe: 2.95,
    TaskId.make_bed: 2.71,
    TaskId.make_steak: 2.81,
    TaskId.make_wood_sword: 2.53,
    TaskId.defeat_zombie: 7.8,
    TaskId.make_stone_sword: 2.65,
    TaskId.place_table: 8.24,
    TaskId.get_wood: 2.67,
    TaskId.make_wood_pickaxe: 2.63,
}


def task_display(task: TaskId | str) -> str:
    return str(TaskId(task).value).replace("_", " ")


TASK_BY_DISPLAY = {task_display(t): t for t in TaskId}


# ---------------------------------------------------------------------------
# requirement rules

A = Achievement


@dataclass(frozen=True)
class Rule:
    consumes: tuple[tuple[Item, int], ...] = ()
    produces: tuple[tuple[Item, int], ...] = ()
    stations: tuple[TileKind, ...] = ()
    pickaxe_tier: int = 0
    pre: tuple[Achievement, ...] = ()
    world: tuple[str, ...] = ()  # scene resources this subgoal consumes/visits
    or_group: Optional[str] = None  # name of an OR-group attached to this subgoal


def _mk(action: ActionKind, ach: Achievement, world: tuple[str, ...] = ()) -> Rule:
    r = MAKE_RECIPES[action]
    return Rule(
        consumes=tuple(r.consumes.items()),
        produces=((r.produces, 1),),
        stations=r.near,
        world=world,
    )


RULES: dict[Achievement, Rule] = {
    A.collect_wood: Rule(produces=((Item.wood, 1),), world=("tree",)),
    A.collect_apple: Rule(produces=((Item.apple, 1), (Item.wood, 1)), world=("apple_tree",)),
    A.collect_stone: Rule(produces=((Item.stone, 1),), pickaxe_tier=1, world=("stone",)),
    A.collect_coal: Rule(produces=((Item.coal, 1),), pickaxe_tier=1, world=("coal",)),
    A.collect_iron: Rule(produces=((Item.iron, 1),), pickaxe_tier=2, world=("iron",)),
    A.collect_diamond: Rule(produces=((Item.diamond, 1),), pickaxe_tier=3, world=("diamond",)),
    A.collect_sapling: Rule(produces=((Item.sapling, 1),), world=("grass",)),
    A.collect_sand: Rule(produces=((Item.sand, 1),), world=("sand",)),
    A.collect_water: Rule(consumes=((Item.bucket, 1),), produces=((Item.water_bucket, 1),), world=("water",)),
    A.collect_lava: Rule(consumes=((Item.bucket, 1),), produces=((Item.lava_bucket, 1),), world=("lava",)),
    A.collect_plant: Rule(pre=(A.place_plant,)),
    A.defeat_cow: Rule(produces=((Item.beef, 1),), world=("cow",)),
    A.defeat_zombie: Rule(world=("zombie",), or_group="zombie_weapon"),
    A.defeat_skeleton: Rule(world=("skeleton",), or_group="skeleton_weapon"),
    A.make_wood_pickaxe: _mk(ActionKind.make_wood_pickaxe, A.make_wood_pickaxe),
    A.make_stone_pickaxe: _mk(ActionKind.make_stone_pickaxe, A.make_stone_pickaxe),
    A.make_iron_pickaxe: _mk(ActionKind.make_iron_pickaxe, A.make_iron_pickaxe),
    A.make_wood_sword: _mk(ActionKind.make_wood_sword, A.make_wood_sword),
    A.make_stone_sword: _mk(ActionKind.make_stone_sword, A.make_stone_sword),
    A.make_iron_sword: _mk(ActionKind.make_iron_sword, A.make_iron_sword),
    A.make_bucket: _mk(ActionKind.make_bucket, A.make_bucket),
    A.make_steak: _mk(ActionKind.make_steak, A.make_steak),
    A.make_grilled_apple: Rule(
        consumes=((Item.apple, 1),), produces=((Item.grilled_apple, 1),), stations=(TileKind.furnace,)
    ),
    A.place_table: Rule(consumes=tuple(PLACE_RECIPES[ActionKind.place_table].consumes.items())),
    A.place_furnace: Rule(consumes=tuple(PLACE_RECIPES[ActionKind.place_furnace].consumes.items())),
    A.place_bed: Rule(
        consumes=tuple(PLACE_RECIPES[ActionKind.place_bed].consumes.items()), stations=(TileKind.table,)
    ),
    A.place_plant: Rule(consumes=((Item.sapling, 1),), world=("grass",)),
    A.eat_apple: Rule(consumes=((Item.apple, 1),)),
    A.eat_grilled_apple: Rule(consumes=((Item.grilled_apple, 1),)),
    A.eat_beef: Rule(consumes=((Item.beef, 1),)),
    A.eat_steak: Rule(consumes=((Item.steak, 1),)),
    A.eat_plant: Rule(pre=(A.place_plant,)),
    A.drink_water: Rule(world=("water",)),
    A.drink_water_from_bucket: Rule(consumes=((Item.water_bucket, 1),), produces=((Item.bucket, 1),)),
    A.sleep: Rule(),
    A.sleep_on_bed: Rule(stations=(TileKind.bed,)),
    A.wake_up: Rule(pre=(A.sleep,)),
    # make_fence stays rule-less: nothing in the action space produces a fence
}

# Subgoals the executor can realize directly. Achievements outside this set
# expand to an executable stand-in (they fire as side effects of it).
EXPAND_AS: dict[Achievement, Achievement] = {
    A.collect_beef: A.defeat_cow,
    A.eat_plant: A.collect_plant,
    A.wake_up: A.sleep,
}

# Achievements that co-fire with a subgoal when the vandal executes it.
AUTO_FIRE: dict[Achievement, tuple[Achievement, ...]] = {
    A.defeat_cow: (A.collect_beef,),
    A.collect_plant: (A.eat_plant,),
    A.collect_apple: (A.collect_wood,),
    A.sleep: (A.wake_up,),
    A.sleep_on_bed: (A.sleep, A.wake_up),
}

_PICKAXE_FOR_TIER = {1: Item.wood_pickaxe, 2: Item.stone_pickaxe, 3: Item.iron_pickaxe}
_PICKAXE_PRODUCER = {
    Item.wood_pickaxe: A.make_wood_pickaxe,
    Item.stone_pickaxe: A.make_stone_pickaxe,
    Item.iron_pickaxe: A.make_iron_pickaxe,
}

PRODUCER: dict[Item, Achievement] = {
    Item.wood: A.collect_wood,
    Item.apple: A.collect_apple,
    Item.stone: A.collect_stone,
    Item.coal: A.collect_coal,
    Item.iron: A.collect_iron,
    Item.diamond: A.collect_diamond,
    Item.sapling: A.collect_sapling,
    Item.sand: A.collect_sand,
    Item.beef: A.defeat_cow,
    Item.steak: A.make_steak,
    Item.grilled_apple: A.make_grilled_apple,
    Item.bucket: A.make_bucket,
    Item.water_bucket: A.collect_water,
    Item.lava_bucket: A.collect_lava,
    Item.wood_pickaxe: A.make_wood_pickaxe,
    Item.stone_pickaxe: A.make_stone_pickaxe,
    Item.iron_pickaxe: A.make_iron_pickaxe,
    Item.wood_sword: A.make_wood_sword,
    Item.stone_sword: A.make_stone_sword,
    Item.iron_sword: A.make_iron_sword,
}

_STATION_PRODUCER = {
    TileKind.table: A.place_table,
    TileKind.furnace: A.place_furnace,
    TileKind.bed: A.place_bed,
}

# OR-groups: alternative requirement bundles, drawn uniformly when viable.
OR_GROUPS: dict[str, tuple[tuple[Achievement, ...], ...]] = {
    "zombie_weapon": ((A.make_wood_sword,), (A.make_stone_sword,)),
    "skeleton_weapon": ((), (A.make_wood_sword,)),
    "meal": ((A.eat_apple,), (A.eat_beef,), (A.eat_steak,)),
}


@dataclass(frozen=True)
class OrStep:
    group: str


TaskStep = object  # (Achievement, int) tuples or OrStep


@dataclass(frozen=True)
class TaskDef:
    steps: tuple[TaskStep, ...]
    targets: frozenset[Achievement]


def _t(steps: Iterable, targets: Iterable[Achievement] | None = None) -> TaskDef:
    steps = tuple(steps)
    if targets is None:
        targets = [s[0] for s in steps if isinstance(s, tuple)]
    return TaskDef(steps, frozenset(targets))


TASK_DEFS: dict[TaskId, TaskDef] = {
    TaskId.get_drink: _t([(A.drink_water, 1)]),
    TaskId.defeat_cow: _t([(A.defeat_cow, 1)]),
    TaskId.get_apple: _t([(A.collect_apple, 1)]),
    TaskId.make_stone_pickaxe: _t([(A.make_stone_pickaxe, 1)]),
    TaskId.place_bed: _t([(A.place_bed, 1)]),
    TaskId.place_furnace: _t([(A.place_furnace, 1)]),
    TaskId.get_lava: _t([(A.collect_lava, 1)]),
    TaskId.defeat_skeleton: _t([(A.defeat_skeleton, 1)]),
    TaskId.make_iron_sword: _t([(A.make_iron_sword, 1)]),
    TaskId.get_coal: _t([(A.collect_coal, 1)]),
    TaskId.get_beef: _t([(A.collect_beef, 1)], targets=[A.collect_beef]),
    TaskId.get_diamond: _t([(A.collect_diamond, 1)]),
    TaskId.get_stone: _t([(A.collect_stone, 1)]),
    TaskId.make_bucket: _t([(A.make_bucket, 1)]),
    TaskId.get_iron: _t([(A.collect_iron, 1)]),
    TaskId.get_water: _t([(A.collect_water, 1)]),
    TaskId.make_iron_pickaxe: _t([(A.make_iron_pickaxe, 1)]),
    TaskId.make_bed: _t([(A.place_bed, 1)]),
    TaskId.make_steak: _t([(A.make_steak, 1)]),
    TaskId.make_wood_sword: _t([(A.make_wood_sword, 1)]),
    TaskId.defeat_zombie: _t([(A.defeat_zombie, 1)]),
    TaskId.make_stone_sword: _t([(A.make_stone_sword, 1)]),
    TaskId.place_table: _t([(A.place_table, 1)]),
    TaskId.get_wood: _t([(A.collect_wood, 1)]),
    TaskId.make_wood_pickaxe: _t([(A.make_wood_pickaxe, 1)]),
    TaskId.get_sapling: _t([(A.collect_sapling, 1)]),
    TaskId.get_sand: _t([(A.collect_sand, 1)]),
    TaskId.place_plant: _t([(A.place_plant, 1)]),
    TaskId.grow_plant: _t([(A.collect_plant, 1)], targets=[A.place_plant, A.collect_plant]),
    TaskId.eat_plant: _t([(A.eat_plant, 1)], targets=[A.eat_plant]),
    TaskId.eat_apple: _t([(A.eat_apple, 1)]),
    TaskId.eat_beef: _t([(A.eat_beef, 1)]),
    TaskId.eat_steak: _t([(A.eat_steak, 1)]),
    TaskId.make_grilled_apple: _t([(A.make_grilled_apple, 1)]),
    TaskId.eat_grilled_apple: _t([(A.eat_grilled_apple, 1)]),
    TaskId.drink_from_bucket: _t([(A.drink_water_from_bucket, 1)]),
    TaskId.take_nap: _t([(A.sleep, 1)]),
    TaskId.sleep_on_bed: _t([(A.sleep_on_bed, 1)]),
    TaskId.wake_up_rested: _t([(A.wake_up, 1)], targets=[A.sleep, A.wake_up]),
    TaskId.have_meal: _t([OrStep("meal")], targets=[]),
    TaskId.defeat_monsters: _t([(A.defeat_zombie, 1), (A.defeat_skeleton, 1)]),
    TaskId.trophy_hunter: _t([(A.defeat_cow, 1), (A.defeat_zombie, 1), (A.defeat_skeleton, 1)]),
    TaskId.hunt_feast: _t([(A.defeat_cow, 1), (A.eat_beef, 1)]),
    TaskId.make_wood_kit: _t([(A.make_wood_pickaxe, 1), (A.make_wood_sword, 1)]),
    TaskId.make_stone_kit: _t([(A.make_stone_pickaxe, 1), (A.make_stone_sword, 1)]),
    TaskId.make_iron_kit: _t([(A.make_iron_pickaxe, 1), (A.make_iron_sword, 1)]),
    TaskId.all_pickaxes: _t([(A.make_wood_pickaxe, 1), (A.make_stone_pickaxe, 1), (A.make_iron_pickaxe, 1)]),
    TaskId.all_swords: _t([(A.make_wood_sword, 1), (A.make_stone_sword, 1), (A.make_iron_sword, 1)]),
    TaskId.build_camp: _t([(A.place_table, 1), (A.place_furnace, 1)]),
    TaskId.furnish_home: _t([(A.place_table, 1), (A.place_furnace, 1), (A.place_bed, 1)]),
    TaskId.stock_ores: _t([(A.collect_coal, 1), (A.collect_iron, 1)]),
    TaskId.deep_mine: _t([(A.collect_stone, 1), (A.collect_coal, 1), (A.collect_iron, 1), (A.collect_diamond, 1)]),
    TaskId.lumberjack: _t([(A.collect_wood, 5)]),
    TaskId.stockpile_wood: _t([(A.collect_wood, 3)]),
    TaskId.stone_mason: _t([(A.collect_stone, 3)]),
    TaskId.apple_picker: _t([(A.collect_apple, 2)]),
    TaskId.fire_and_water: _t([(A.collect_water, 1), (A.collect_lava, 1)]),
    TaskId.survivalist: _t([(A.drink_water, 1), (A.eat_apple, 1), (A.sleep, 1)]),
    TaskId.armed_defense: _t(
        [(A.make_wood_sword, 1), (A.defeat_zombie, 1)], targets=[A.make_wood_sword, A.defeat_zombie]
    ),
    TaskId.skeleton_hunter: _t([(A.make_stone_sword, 1), (A.defeat_skeleton, 1)]),
}

# armed_defense / skeleton_hunter carry their weapon explicitly; suppress the
# weapon OR-group when the sword is already a step so plans stay minimal.
_EXPLICIT_WEAPON_TASKS = {TaskId.armed_defense, TaskId.skeleton_hunter}


# ---------------------------------------------------------------------------
# expansion


@dataclass
class SubgoalPlan:
    goal: TaskId
    subgoals: tuple[Achievement, ...]
    choice_trace: tuple[tuple[str, int, int], ...]  # (group, chosen index, n options)

    def event_set(self) -> frozenset[Achievement]:
        out: set[Achievement] = set()
        for s in self.subgoals:
            out.add(s)
            out.update(AUTO_FIRE.get(s, ()))
        return frozenset(out)


class _Expander:
    """Walks requirement rules, tracking a virtual inventory and camp."""

    def __init__(self, choices: "_ChoiceSource", suppress_weapon_or: bool = False):
        self.inv: dict[Item, int] = {}
        self.stations: set[TileKind] = set()
        self.done: set[Achievement] = set()
        self.out: list[Achievement] = []
        self.choices = choices
        self.suppress_weapon_or = suppress_weapon_or
        self.depth = 0

    def _have(self, item: Item, n: int) -> bool:
        return self.inv.get(item, 0) >= n

    def _pickaxe_tier(self) -> int:
        for tier in (3, 2, 1):
            if self.inv.get(_PICKAXE_FOR_TIER[tier], 0) > 0:
                return tier
        return 0

    def ensure_item(self, item: Item, n: int) -> None:
        guard = 0
        while self.inv.get(item, 0) < n:
            guard += 1
            if guard > 64:
                raise PlanningError("?", item.value)
            self.emit(PRODUCER[item], force=True)

    def ensure_tier(self, tier: int) -> None:
        if self._pickaxe_tier() >= tier:
            return
        self.emit(_PICKAXE_PRODUCER[_PICKAXE_FOR_TIER[tier]])

    def ensure_station(self, kind: TileKind) -> None:
        if kind in self.stations:
            return
        self.emit(_STATION_PRODUCER[kind])

    def emit(self, ach: Achievement, force: bool = False) -> None:
        """Resolve prerequisites in camp-first order, then emit the subgoal.

        Order within a rule: table, mining tools for consumed ores, consumed
        items, remaining stations, prerequisite achievements. Single-shot
        subgoals (placements, crafts of reusable tools) are skipped when done
        unless a consumer forces a repeat (a second bucket, say).
        """
        self.depth += 1
        if self.depth > 128:
            raise PlanningError("?", ach.value)
        ach = EXPAND_AS.get(ach, ach)
        rule = RULES[ach]
        repeat_ok = force or ach not in self.done
        if not repeat_ok:
            self.depth -= 1
            return

        if TileKind.table in rule.stations:
            self.ensure_station(TileKind.table)
        if rule.pickaxe_tier:
            self.ensure_tier(rule.pickaxe_tier)
        for item, n in rule.consumes:
            if PRODUCER.get(item) in (A.collect_stone, A.collect_coal, A.collect_iron, A.collect_diamond):
                tier = RULES[PRODUCER[item]].pickaxe_tier
                if not self._have(item, n):
                    self.ensure_tier(tier)
        for item, n in rule.consumes:
            self.ensure_item(item, n)
        for st in rule.stations:
            if st is not TileKind.table:
                self.ensure_station(st)
        for pre in rule.pre:
            if pre not in self.done:
                self.emit(pre)
        if rule.or_group and not self.suppress_weapon_or:
            option = self.choices.resolve(rule.or_group)
            for extra in option:
                self.emit(extra)

        for item, n in rule.consumes:
            self.inv[item] = self.inv.get(item, 0) - n
        for item, n in rule.produces:
            self.inv[item] = self.inv.get(item, 0) + n
        if ach is A.place_table:
            self.stations.add(TileKind.table)
        elif ach is A.place_furnace:
            self.stations.add(TileKind.furnace)
        elif ach is A.place_bed:
            self.stations.add(TileKind.bed)
        self.out.append(ach)
        self.done.add(ach)
        self.depth -= 1


class _ChoiceSource:
    """Resolves OR-groups; records the trace for likelihood scoring."""

    def __init__(self, rng: Stream | None, fixed: dict[str, int] | None, viable: "dict[str, list[int]] | None"):
        self.rng = rng
        self.fixed = dict(fixed or {})
        self.viable = viable or {}
        self.trace: list[tuple[str, int, int]] = []

    def resolve(self, group: str) -> tuple[Achievement, ...]:
        options = OR_GROUPS[group]
        allowed = self.viable.get(group, list(range(len(options))))
        if not allowed:
            raise PlanningError("?", group)
        if group in self.fixed:
            pick = self.fixed[group]
        elif self.rng is not None:
            pick = allowed[self.rng.randint(0, len(allowed))]
        else:
            pick = allowed[0]
        self.trace.append((group, pick, len(allowed)))
        return options[pick]


def _expand(goal: TaskId, choices: _ChoiceSource) -> SubgoalPlan:
    ex = _Expander(choices, suppress_weapon_or=goal in _EXPLICIT_WEAPON_TASKS)
    for step in TASK_DEFS[goal].steps:
        if isinstance(step, OrStep):
            for ach in choices.resolve(step.group):
                ex.emit(ach, force=True)
        else:
            ach, count = step
            for _ in range(count):
                ex.emit(ach, force=True)
    return SubgoalPlan(goal, tuple(ex.out), tuple(choices.trace))


# ---------- world viability -------------------------------------------------


def reachable_resources(world: WorldState) -> dict[str, int]:
    """Counts of each scene resource reachable (or adjacent) from the vandal start."""
    start = world.vandal_start or world.agents["vandal"].pos
    reach = _reachable_mask(world.grid, start)
    usable = reach | _adjacent_to(reach)
    grid = world.grid
    names = {
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
    out = {name: int(np.count_nonzero((grid == int(k)) & usable)) for name, k in names.items()}
    for kind in ("cow", "zombie", "skeleton"):
        out[kind] = sum(1 for cr in world.creatures if cr.kind == kind and reach[cr.pos])
    # a tree of either kind supplies wood
    out["tree"] += out["apple_tree"]
    return out


def plan_world_needs(subgoals: Iterable[Achievement]) -> set[str]:
    needs: set[str] = set()
    for s in subgoals:
        needs.update(RULES[EXPAND_AS.get(s, s)].world)
    return needs


def _viable_options(goal: TaskId, world: WorldState) -> dict[str, list[int]]:
    """Per OR-group, the option indices whose full expansion the scene supports."""
    resources = reachable_resources(world)
    viable: dict[str, list[int]] = {}
    for group, options in OR_GROUPS.items():
        ok: list[int] = []
        for i in range(len(options)):
            plan = _expand_fixed(goal, {group: i})
            if plan is None:
                continue
            if all(resources.get(need, 0) > 0 for need in plan_world_needs(plan.subgoals)):
                ok.append(i)
        # with no viable route, fall through to the default so the resource
        # check in parse_goal can name the missing node
        viable[group] = ok or [0]
    return viable


def _expand_fixed(goal: TaskId, fixed: dict[str, int]) -> SubgoalPlan | None:
    try:
        return _expand(goal, _ChoiceSource(None, fixed, None))
    except PlanningError:
        return None


def parse_goal(goal: TaskId | str, world: WorldState, rng: Stream) -> SubgoalPlan:
    """Linearize `goal` into subgoals, drawing OR-group routes uniformly from
    the scene-viable alternatives. Deterministic given (goal, world, rng state).
    """
    goal = TaskId(goal)
    viable = _viable_options(goal, world)
    plan = _expand(goal, _ChoiceSource(rng, None, viable))
    resources = reachable_resources(world)
    for need in plan_world_needs(plan.subgoals):
        if resources.get(need, 0) <= 0:
            raise PlanningError(goal.value, need)
    return plan


# ---------- exhaustive plan library ------------------------------------------


@lru_cache(maxsize=None)
def plan_library(goal: TaskId) -> tuple[SubgoalPlan, ...]:
    """Every OR-resolution of `goal`, expanded. Small by construction."""
    goal = TaskId(goal)
    groups = _groups_touched(goal)
    plans: list[SubgoalPlan] = []
    combos: list[dict[str, int]] = [{}]
    for g in groups:
        combos = [dict(c, **{g: i}) for c in combos for i in range(len(OR_GROUPS[g]))]
    seen: set[tuple[Achievement, ...]] = set()
    for fixed in combos:
        plan = _expand_fixed(goal, fixed)
        if plan is not None and plan.subgoals not in seen:
            seen.add(plan.subgoals)
            plans.append(plan)
    return tuple(plans)


def _groups_touched(goal: TaskId) -> list[str]:
    plan = _expand_fixed(goal, {})
    if plan is None:
        return []
    return sorted({g for g, _i, _n in plan.choice_trace})


@lru_cache(maxsize=None)
def goal_event_set(goal: TaskId) -> frozenset[Achievement]:
    out: set[Achievement] = set()
    for plan in plan_library(goal):
        out |= plan.event_set()
    return frozenset(out)


EPSILON = 0.01  # likelihood floor for events outside every plan of a goal


def policy_likelihood(goal: TaskId | str, event, context=None) -> float:
    """Probability an optimal executor of `goal` emits this event: (1 - eps)
    when some admissible plan emits it, else eps.

    Navigation (moves, noop) and survival interrupts are emitted under every
    goal; `context` is accepted for interface completeness, since membership
    scoring deliberately coarsens away the reconstructed state.
    """
    from .achievements import achievements_for_event
    from .actions import ActionKind, MOVES

    goal = TaskId(goal)
    if getattr(event, "interrupt", None) is not None:
        return 1.0 - EPSILON
    action = ActionKind(event.action)
    if action is ActionKind.noop or action in MOVES:
        return 1.0 - EPSILON
    classes = achievements_for_event(event)
    if not classes:
        return 1.0 - EPSILON
    return (1.0 - EPSILON) if classes & goal_event_set(goal) else EPSILON


@lru_cache(maxsize=None)
def achievement_depth(ach: Achievement) -> int:
    """Dependency depth used to order reconstructed evidence (wood before
    tables, tables before pickaxes, and so on)."""

    def depth(a: Achievement, stack: frozenset[Achievement]) -> int:
        a = EXPAND_AS.get(a, a)
        if a in stack:
            raise ValueError(f"dependency cycle at {a}")
        rule = RULES.get(a)
        if rule is None:
            return 0
        stack = stack | {a}
        best = 0
        for item, _n in rule.consumes:
            best = max(best, 1 + depth(PRODUCER[item], stack))
        if rule.pickaxe_tier:
            best = max(best, 1 + depth(_PICKAXE_PRODUCER[_PICKAXE_FOR_TIER[rule.pickaxe_tier]], stack))
        for st in rule.stations:
            best = max(best, 1 + depth(_STATION_PRODUCER[st], stack))
        for pre in rule.pre:
            best = max(best, 1 + depth(pre, stack))
        return best

    return depth(ach, frozenset())


# ---------- serialization ------------------------------------------------------

TASKGRAPH_FORMAT = "tracecraft-taskgraph/1"


def serialize_graph() -> dict:
    """Versioned document of nodes, quantified edges, and OR-groups, diffable
    against the recipe and task tables."""
    edges: list[dict] = []
    for ach, rule in RULES.items():
        for item, n in rule.consumes:
            edges.append({"from": ach.value, "kind": "consumes", "to": item.value, "qty": n})
        for item, n in rule.produces:
            edges.append({"from": ach.value, "kind": "produces", "to": item.value, "qty": n})
        for st in rule.stations:
            edges.append({"from": ach.value, "kind": "near", "to": st.name, "qty": 1})
        if rule.pickaxe_tier:
            edges.append({"from": ach.value, "kind": "tool_tier", "to": str(rule.pickaxe_tier), "qty": 1})
        for pre in rule.pre:
            edges.append({"from": ach.value, "kind": "after", "to": pre.value, "qty": 1})
        for res in rule.world:
            edges.append({"from": ach.value, "kind": "scene", "to": res, "qty": 1})
    tasks = {
        t.value: {
            "steps": [
                {"or_group": s.group} if isinstance(s, OrStep) else {"achievement": s[0].value, "count": s[1]}
                for s in d.steps
            ],
            "targets": sorted(a.value for a in d.targets),
            "weight": TASK_WEIGHTS.get(t, 0.0),
        }
        for t, d in TASK_DEFS.items()
    }
    return {
        "format": TASKGRAPH_FORMAT,
        "achievements": [a.value for a in Achievement],
        "edges": sorted(edges, key=lambda e: (e["from"], e["kind"], e["to"])),
        "or_groups": {g: [[a.value for a in opt] for opt in opts] for g, opts in OR_GROUPS.items()},
        "tasks": tasks,
    }
