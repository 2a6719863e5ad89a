"""Scripted vandal: executes a parsed subgoal plan while staying alive.

Every world change flows through the 26-action interface, so the episode
log is a complete ground-truth record. Survival interrupts (drink, eat,
flee, sleep, in that priority) preempt the plan, are tagged on their
events, and the plan resumes where it left off.
"""

from __future__ import annotations

from dataclasses import dataclass

from .achievements import Achievement, display_name
from .actions import ActionKind, MOVE_FOR_DIRECTION
from .events import BUDGET_EXHAUSTED, COMPLETED, DIED, ActionEvent, Cell, EpisodeLog
from .items import Item
from .pathfind import adjacent_to_kinds, facing_direction, neighbor_of_kind, pathfind
from .rng import Stream
from .taskgraph import TASK_DEFS, SubgoalPlan, TaskId, parse_goal, reachable_resources
from .tiles import DELTAS, Direction, TileKind, walkable
from .world import SIZE, VANDAL, WorldState, apply_action

A = Achievement

DEFAULT_STEP_BUDGET = 1000

# survival thresholds, checked in priority order drink > food > flee > sleep
DRINK_LOW = 3
FOOD_LOW = 3
HEALTH_LOW = 4
ENERGY_LOW = 2

_ORE_FOR = {
    A.collect_stone: TileKind.stone,
    A.collect_coal: TileKind.coal,
    A.collect_iron: TileKind.iron,
    A.collect_diamond: TileKind.diamond,
}

_EAT_FOR = {
    Item.steak: ActionKind.eat_steak,
    Item.beef: ActionKind.eat_beef,
    Item.grilled_apple: ActionKind.eat_apple,
    Item.apple: ActionKind.eat_apple,
}


class _Stop(Exception):
    def __init__(self, reason: str):
        self.reason = reason
        super().__init__(reason)


class _Unrealizable(Exception):
    pass


def vandal_run(
    world: WorldState,
    goal: TaskId | str,
    rng: Stream,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> tuple[WorldState, EpisodeLog]:
    """Run the vandal on `goal`; returns the scarred world and its log."""
    if step_budget < 1:
        raise ValueError("step_budget must be >= 1")
    goal = TaskId(goal)
    w = world.copy()
    plan = parse_goal(goal, w, rng.child("parse"))
    log = EpisodeLog(task=goal.value, vandal_start=w.agents[VANDAL].pos)
    ex = _Executor(w, plan, rng, step_budget, log)
    ex.run()
    return w, log


@dataclass
class _Camp:
    table: Cell | None = None
    furnace: Cell | None = None
    bed: Cell | None = None
    plant: Cell | None = None


class _Executor:
    def __init__(self, world: WorldState, plan: SubgoalPlan, rng: Stream, budget: int, log: EpisodeLog):
        self.w = world
        self.plan = plan
        self.rng = rng.child("exec")
        self.budget = budget
        self.log = log
        self.steps = 0
        self.camp = _Camp()
        self.subgoal: str | None = None
        self.interrupt: str | None = None
        self.fighting = False
        self._snooze: dict[str, int] = {}  # interrupt cause -> retry tick

    @property
    def agent(self):
        return self.w.agents[VANDAL]

    # -- plumbing ---------------------------------------------------------

    def act(self, action: ActionKind) -> ActionEvent:
        if self.steps >= self.budget:
            raise _Stop(BUDGET_EXHAUSTED)
        ev = apply_action(self.w, VANDAL, action)
        ev.subgoal = self.subgoal
        ev.interrupt = self.interrupt
        self.log.append(ev)
        self.steps += 1
        if not self.agent.alive:
            self.log.death_cause = ev.death_cause
            raise _Stop(DIED)
        if self.interrupt is None:
            self._check_interrupts()
        elif self.interrupt != "sleep" and self.agent.energy == 0:
            # collapsing mid-errand: sleep preempts even another interrupt
            self._with_interrupt("sleep", self._restore_energy)
        return ev

    def run(self) -> None:
        stop = None
        try:
            for sg in self.plan.subgoals:
                self.subgoal = display_name(sg)
                try:
                    self._realize(sg)
                except _Unrealizable:
                    break
        except _Stop as s:
            stop = s
        targets = TASK_DEFS[self.plan.goal].targets or frozenset(self.plan.subgoals)
        if targets <= self.agent.fired:
            self.log.status = COMPLETED
        elif stop is not None and stop.reason == DIED:
            self.log.status = DIED
        else:
            self.log.status = BUDGET_EXHAUSTED

    # -- survival ----------------------------------------------------------

    def _check_interrupts(self) -> None:
        a = self.agent
        threat_adjacent = any(
            c.kind in ("zombie", "skeleton") and self._dist(c.pos, a.pos) == 1 for c in self.w.creatures
        )
        # a stat at zero is actively draining health: deal with it first
        if a.energy == 0:
            self._with_interrupt("sleep", self._restore_energy)
            return
        if a.drink <= DRINK_LOW and self._ready("drink", a.drink):
            self._with_interrupt("drink", self._restore_drink)
        elif a.food <= FOOD_LOW and self._ready("eat", a.food):
            self._with_interrupt("eat", self._restore_food)
        elif (a.health <= HEALTH_LOW or threat_adjacent) and not self.fighting and self._ready("flee", a.health):
            self._with_interrupt("flee", self._flee_or_heal)
        elif a.energy <= ENERGY_LOW and self._ready("sleep", a.energy):
            self._with_interrupt("sleep", self._restore_energy)

    def _ready(self, cause: str, level: int = 9) -> bool:
        if level <= 1:  # critical: ignore the retry snooze
            return True
        return self.w.tick >= self._snooze.get(cause, 0)

    def _with_interrupt(self, cause: str, routine) -> None:
        outer = self.interrupt
        self.interrupt = cause
        try:
            done = routine()
        finally:
            self.interrupt = outer
        if not done:
            self._snooze[cause] = self.w.tick + 50

    def _restore_drink(self) -> bool:
        a = self.agent
        if a.has(Item.water_bucket):
            self.act(ActionKind.drink)
            return True
        path = pathfind(self.w, a.pos, adjacent_to_kinds(self.w, [TileKind.water]))
        if not path.reachable or len(path) > 40:
            return False
        self._walk(path.moves)
        while self.agent.drink < 8:
            ev = self.act(ActionKind.drink)
            if ev.outcome != "succeeded":
                return False
        return True

    def _restore_food(self) -> bool:
        a = self.agent
        for item, eat in _EAT_FOR.items():
            if a.has(item):
                self.act(eat)
                return True
        # nothing held: forage by true path cost (hunger will not wait out a
        # cross-lake cow chase when an apple tree stands next door)
        tree_d = self._path_len(adjacent_to_kinds(self.w, [TileKind.apple_tree]))
        ripe_d = self._path_len(adjacent_to_kinds(self.w, [TileKind.ripe_plant]))
        cows = {c.pos for c in self.w.creatures if c.kind == "cow"}
        cow_d = self._path_len(lambda cell: any(self._dist(cell, p) == 1 for p in cows)) if cows else None
        choices = [(d, name) for d, name in ((tree_d, "apple"), (cow_d, "beef"), (ripe_d, "plant")) if d is not None]
        if not choices:
            return False
        choices.sort()
        if choices[0][0] > 60:
            return False  # nothing worth the trip; retry after the snooze
        pick = choices[0][1]
        if pick == "apple":
            if not self._go_do((TileKind.apple_tree,)):
                return False
            self.act(ActionKind.eat_apple)
        elif pick == "plant":
            if not self._go_do((TileKind.ripe_plant,)):
                return False
        else:
            if not self._hunt("cow", max_attempts=60):
                return False
            self.act(ActionKind.eat_beef)
        return True

    def _path_len(self, pred) -> int | None:
        path = pathfind(self.w, self.agent.pos, pred)
        return len(path.moves) if path.reachable else None

    def _flee_or_heal(self) -> bool:
        a = self.agent
        threats = [c for c in self.w.creatures if c.kind in ("zombie", "skeleton") and self._dist(c.pos, a.pos) <= 6]
        if not threats:
            if a.health <= HEALTH_LOW:
                for item, eat in _EAT_FOR.items():
                    if a.has(item):
                        self.act(eat)
                        return True
            return True
        nearest = min(threats, key=lambda c: self._dist(c.pos, a.pos))
        if a.health >= 7:
            # healthy enough to simply remove the problem
            return self._hunt(nearest.kind)
        if a.health <= HEALTH_LOW:
            for item, eat in _EAT_FOR.items():
                if a.has(item):
                    self.act(eat)
                    break

        def safe(cell: Cell) -> bool:
            return all(self._dist(c.pos, cell) >= 7 for c in self.w.creatures if c.kind != "cow")

        path = pathfind(self.w, a.pos, safe)
        if path.reachable and self._walk(path.moves):
            # hole up while the mend lasts; stop the moment supplies dip so the
            # eat/drink/sleep interrupts can take over
            waited = 0
            while (
                a.health < 7
                and safe(a.pos)
                and a.food >= 6
                and a.drink >= 6
                and a.energy > ENERGY_LOW
                and waited < 150
            ):
                self.act(ActionKind.noop)
                waited += 1
            return True
        # cornered: blind panic steps away from the nearest monster; lava is
        # not checked, which is how a cornered vandal ends up in it
        for _ in range(6):
            live = [c for c in self.w.creatures if c.kind in ("zombie", "skeleton")]
            if not live:
                return True
            nearest = min(live, key=lambda c: self._dist(c.pos, a.pos))
            if self._dist(nearest.pos, a.pos) > 6:
                return True
            best, best_d = None, -1
            for d, (dr, dc) in DELTAS.items():
                cell = (a.pos[0] + dr, a.pos[1] + dc)
                if not self.w.in_bounds(cell) or not walkable(self.w.tile(cell)) or self.w.occupied(cell):
                    continue
                dist = self._dist(nearest.pos, cell)
                if dist > best_d:
                    best, best_d = d, dist
            if best is None:
                break
            self.act(MOVE_FOR_DIRECTION[best])
        # no way out: last stand
        live = [c for c in self.w.creatures if c.kind in ("zombie", "skeleton") and self._dist(c.pos, a.pos) <= 2]
        if live:
            return self._hunt(live[0].kind)
        return True

    def _restore_energy(self) -> bool:
        while self.agent.energy < 8:
            ev = self.act(ActionKind.sleep)
            if ev.outcome != "succeeded":
                return False
            if "woke" in ev.flags:
                break
        return True

    @staticmethod
    def _dist(a: Cell, b: Cell) -> int:
        return abs(a[0] - b[0]) + abs(a[1] - b[1])

    # -- movement ----------------------------------------------------------

    def _walk(self, moves: list[ActionKind]) -> bool:
        """Follow a move list closed-loop; bail out for a re-plan whenever the
        agent is not where the plan expects (an interrupt wandered off with it,
        or a blocker would not clear)."""
        for mv in moves:
            before = self.agent.pos
            expected = self._cell_toward(before, mv)
            ev = self.act(mv)
            if self.agent.pos == expected:
                continue
            if self.agent.pos != before:
                return False  # displaced mid-walk: stale plan
            blocker = self.w.creature_at(expected)
            tries = 0
            while blocker is not None and tries < 6:
                self.act(ActionKind.do)  # clear the way
                if self.agent.pos != before:
                    return False
                blocker = self.w.creature_at(expected)
                tries += 1
            self.act(mv)
            if self.agent.pos != expected:
                return False  # world changed; caller re-plans
        return True

    def _cell_toward(self, pos: Cell, move: ActionKind) -> Cell:
        from .actions import DIRECTION_FOR_MOVE

        dr, dc = DELTAS[DIRECTION_FOR_MOVE[move]]
        return (pos[0] + dr, pos[1] + dc)

    def _danger_zone(self) -> frozenset[Cell]:
        """Cells within 2 of a live monster; routine walks detour around them."""
        cells: set[Cell] = set()
        for cr in self.w.creatures:
            if cr.kind == "cow":
                continue
            r, c = cr.pos
            for dr in range(-3, 4):
                for dc in range(-3, 4):
                    if abs(dr) + abs(dc) <= 3:
                        cells.add((r + dr, c + dc))
        return frozenset(cells)

    def _goto(self, goal_pred, max_replans: int = 8) -> bool:
        for attempt in range(max_replans):
            if goal_pred(self.agent.pos):
                return True
            avoid = self._danger_zone() if not self.fighting and attempt < 4 else frozenset()
            path = pathfind(self.w, self.agent.pos, goal_pred, avoid=avoid)
            if not path.reachable and avoid:
                path = pathfind(self.w, self.agent.pos, goal_pred)
            if not path.reachable:
                return False
            if self._walk(path.moves):
                return True
        return goal_pred(self.agent.pos)

    def _face_and_do(self, kinds: tuple[TileKind, ...], tries: int = 12) -> ActionEvent | None:
        """Aim at an adjacent cell of `kinds` and `do` it.

        Turning uses the move action: blocked targets (ores, trees, stations)
        turn in place; walkable ones (grass, sand) may take a step, so we
        keep adjusting until the faced cell is right.
        """
        for _ in range(tries):
            target = neighbor_of_kind(self.w, self.agent.pos, kinds)
            if target is None:
                return None
            d = facing_direction(self.agent.pos, target)
            if self.agent.facing != d:
                self.act(MOVE_FOR_DIRECTION[d])
                fr, fc = DELTAS[self.agent.facing]
                faced = (self.agent.pos[0] + fr, self.agent.pos[1] + fc)
                if not (self.w.in_bounds(faced) and self.w.tile(faced) in kinds):
                    continue
            ev = self.act(ActionKind.do)
            if ev.outcome == "succeeded":
                return ev
            return None
        return None

    def _go_do(self, kinds: tuple[TileKind, ...]) -> bool:
        for _ in range(6):
            if not self._goto(adjacent_to_kinds(self.w, kinds)):
                return False
            ev = self._face_and_do(kinds)
            if ev is not None:
                return True
        return False

    # -- subgoal realization --------------------------------------------------

    def _realize(self, sg: Achievement) -> None:
        ok = True
        if sg is A.collect_wood:
            # spare apple trees while plain ones stand: they are the pantry
            ok = self._go_do((TileKind.tree,)) or self._go_do((TileKind.apple_tree,))
        elif sg is A.collect_apple:
            ok = self._go_do((TileKind.apple_tree,))
        elif sg in _ORE_FOR:
            ok = self._go_do((_ORE_FOR[sg],))
        elif sg is A.collect_sapling:
            ok = self._go_do((TileKind.grass,))
        elif sg is A.collect_sand:
            ok = self._go_do((TileKind.sand,))
        elif sg is A.collect_water:
            ok = self._collect_liquid(TileKind.water, ActionKind.collect_water)
        elif sg is A.collect_lava:
            ok = self._collect_liquid(TileKind.lava, ActionKind.collect_lava)
        elif sg is A.collect_plant:
            ok = self._harvest_plant()
        elif sg in (A.defeat_cow, A.defeat_zombie, A.defeat_skeleton):
            # a blocker or flee fight may have already claimed the kill;
            # otherwise hunt with breathers, since a retreat is not a failure
            kind = sg.value.split("_")[1]
            ok = sg in self.agent.fired
            for _retry in range(4):
                if ok:
                    break
                ok = self._hunt(kind) or sg in self.agent.fired
                if not ok:
                    for _ in range(15):
                        self.act(ActionKind.noop)
                    ok = sg in self.agent.fired
        elif sg is A.place_table:
            ok = self._place(ActionKind.place_table, near=None, remember="table")
        elif sg is A.place_furnace:
            ok = self._place(ActionKind.place_furnace, near=self.camp.table, remember="furnace")
        elif sg is A.place_bed:
            ok = self._place(ActionKind.place_bed, near=self.camp.table, remember="bed")
        elif sg is A.place_plant:
            ok = self._place(ActionKind.place_plant, near=None, remember="plant", plant=True)
        elif sg is A.make_grilled_apple:
            if not self.agent.has(Item.apple):
                self._go_do((TileKind.apple_tree,))
            ok = self._ensure_camp(table=False, furnace=True)
            ok = ok and self._goto(self._near_pred(table=False, furnace=True))
            ok = ok and self._face_and_do((TileKind.furnace,)) is not None
        elif sg.value.startswith("make_"):
            action = ActionKind[sg.value]
            need_furnace = sg in (A.make_iron_pickaxe, A.make_iron_sword, A.make_steak)
            ok = self._ensure_camp(table=True, furnace=need_furnace)
            if ok:
                self._refetch_ingredients(action)
                ok = self._goto(self._near_pred(table=True, furnace=need_furnace))
                if ok:
                    ev = self.act(action)
                    ok = ev.outcome == "succeeded"
        elif sg is A.eat_apple:
            ok = self.act(ActionKind.eat_apple).outcome == "succeeded"
        elif sg is A.eat_grilled_apple:
            # the eat action prefers a plain apple; chew through to the grilled one
            ok = False
            for _ in range(4):
                ev = self.act(ActionKind.eat_apple)
                if ev.outcome != "succeeded":
                    break
                if ev.item is Item.grilled_apple:
                    ok = True
                    break
        elif sg is A.eat_beef:
            ok = self.act(ActionKind.eat_beef).outcome == "succeeded"
        elif sg is A.eat_steak:
            ok = self.act(ActionKind.eat_steak).outcome == "succeeded"
        elif sg is A.drink_water:
            ok = self._goto(adjacent_to_kinds(self.w, [TileKind.water]))
            if ok:
                ok = self.act(ActionKind.drink).outcome == "succeeded"
        elif sg is A.drink_water_from_bucket:
            ok = self._drink_from_bucket()
        elif sg is A.sleep:
            ok = self._sleep_until_rested(on_bed=False)
        elif sg is A.sleep_on_bed:
            ok = self._sleep_until_rested(on_bed=True)
        else:
            ok = True  # auto-firing aliases never reach here
        if not ok:
            raise _Unrealizable(sg.value)

    def _ensure_camp(self, table: bool, furnace: bool) -> bool:
        """Rebuild stations a zombie wrecked while the vandal was out mining."""
        import numpy as np

        if table:
            if not (self.w.grid == int(TileKind.table)).any():
                from .items import PLACE_RECIPES

                need = PLACE_RECIPES[ActionKind.place_table].consumes[Item.wood]
                while not self.agent.has(Item.wood, need):
                    if not self._go_do((TileKind.tree, TileKind.apple_tree)):
                        return False
                if not self._place(ActionKind.place_table, near=None, remember="table"):
                    return False
            elif self.camp.table is None or self.w.tile(self.camp.table) is not TileKind.table:
                cells = np.argwhere(self.w.grid == int(TileKind.table))
                self.camp.table = tuple(map(int, cells[0]))
        if furnace and not (self.w.grid == int(TileKind.furnace)).any():
            while not self.agent.has(Item.stone, 1):
                if not self._go_do((TileKind.stone,)):
                    return False
            if not self._place(ActionKind.place_furnace, near=self.camp.table, remember="furnace"):
                return False
        return True

    def _refetch_ingredients(self, action: ActionKind) -> None:
        """Survival interrupts may have eaten a planned ingredient (the beef
        meant for a steak, say); restock consumables before crafting."""
        from .items import MAKE_RECIPES

        recipe = MAKE_RECIPES[action]
        for item, n in recipe.consumes.items():
            if self.agent.has(item, n):
                continue
            if item is Item.beef:
                self._hunt("cow")
            elif item is Item.apple:
                self._go_do((TileKind.apple_tree,))

    def _near_pred(self, table: bool, furnace: bool):
        def pred(cell: Cell) -> bool:
            need = []
            if table:
                need.append((TileKind.table,))
            if furnace:
                need.append((TileKind.furnace,))
            for kinds in need:
                found = False
                for rr in range(cell[0] - 1, cell[0] + 2):
                    for cc in range(cell[1] - 1, cell[1] + 2):
                        if 0 <= rr < SIZE and 0 <= cc < SIZE and self.w.tile((rr, cc)) in kinds:
                            found = True
                if not found:
                    return False
            return True

        return pred

    def _place(self, action: ActionKind, near: Cell | None, remember: str, plant: bool = False) -> bool:
        wanted = (TileKind.grass,) if plant else (TileKind.grass, TileKind.sand, TileKind.path)

        def site(cell: Cell) -> bool:
            if near is not None and max(abs(cell[0] - near[0]), abs(cell[1] - near[1])) > 1:
                return False
            for dr, dc in DELTAS.values():
                cand = (cell[0] + dr, cell[1] + dc)
                if self.w.in_bounds(cand) and self.w.tile(cand) in wanted and not self.w.occupied(cand):
                    return True
            return False

        if not self._goto(site):
            if near is None:
                return False
            if not self._goto(site):  # one more try after world drift
                return False
        for _ in range(4):
            ev = self.act(action)
            if ev.outcome == "succeeded":
                setattr(self.camp, remember, ev.cell)
                return True
            if not self._goto(site):
                return False
        return False

    def _collect_liquid(self, kind: TileKind, action: ActionKind) -> bool:
        if not self._goto(adjacent_to_kinds(self.w, [kind])):
            return False
        return self.act(action).outcome == "succeeded"

    def _drink_from_bucket(self) -> bool:
        # the bucket pour only counts away from open water
        a = self.agent

        def away(cell: Cell) -> bool:
            for dr, dc in DELTAS.values():
                cand = (cell[0] + dr, cell[1] + dc)
                if self.w.in_bounds(cand) and self.w.tile(cand) is TileKind.water:
                    return False
            return True

        if not away(a.pos) and not self._goto(away):
            return False
        return self.act(ActionKind.drink).outcome == "succeeded"

    def _harvest_plant(self) -> bool:
        cell = self.camp.plant
        if cell is None:
            return False
        waited = 0
        while self.w.tile(cell) is not TileKind.ripe_plant:
            if self.w.tile(cell) not in (TileKind.sapling, TileKind.young_plant):
                return False  # the planting is gone
            self.act(ActionKind.noop)
            waited += 1
            if waited > 120:
                return False
        # interrupts may have wandered off during the wait; re-approach
        for _ in range(4):
            if not self._goto(adjacent_to_kinds(self.w, [TileKind.ripe_plant])):
                return False
            if self._face_and_do((TileKind.ripe_plant,)) is not None:
                return True
        return False

    def _sleep_until_rested(self, on_bed: bool) -> bool:
        if on_bed:
            def near_bed(cell: Cell) -> bool:
                for dr in range(-1, 2):
                    for dc in range(-1, 2):
                        cand = (cell[0] + dr, cell[1] + dc)
                        if self.w.in_bounds(cand) and self.w.tile(cand) in (TileKind.bed, TileKind.bed_used):
                            return True
                return False

            if not self._goto(near_bed):
                return False
        waited = 0
        while self.agent.energy >= 9:  # cannot fall asleep fully rested; wait out decay
            self.act(ActionKind.noop)
            waited += 1
            if waited > 30:
                return False
        while True:
            ev = self.act(ActionKind.sleep)
            if ev.outcome != "succeeded":
                return False
            if "woke" in ev.flags or self.agent.energy >= 9:
                return True

    def _hunt(self, kind: str, max_attempts: int = 160) -> bool:
        # cows are harmless: leave every survival interrupt armed while
        # chasing one; monster duels suppress flee until the retreat valve
        self.fighting = kind != "cow"
        try:
            if kind != "cow":
                while self.agent.health < 7:  # eat up before a deliberate fight
                    held = next((i for i in _EAT_FOR if self.agent.has(i)), None)
                    if held is None:
                        break
                    self.act(_EAT_FOR[held])
            for _attempt in range(max_attempts):
                if kind != "cow" and self.agent.health <= 2:
                    return False  # retreat; the flee interrupt takes over
                prey = None
                best = None
                for cr in self.w.creatures:
                    if cr.kind != kind:
                        continue
                    d = self._dist(cr.pos, self.agent.pos)
                    if best is None or d < best:
                        prey, best = cr, d
                if prey is None:
                    return False
                if best == 1:
                    d = facing_direction(self.agent.pos, prey.pos)
                    if self.agent.facing != d:
                        self.act(MOVE_FOR_DIRECTION[d])  # blocked by the creature: turns
                    ev = self.act(ActionKind.do)
                    if ev.creature_killed and ev.creature_kind == kind:
                        return True
                    continue
                target = prey.pos
                path = pathfind(self.w, self.agent.pos, lambda c: self._dist(c, target) == 1)
                if not path.reachable:
                    return False
                self._walk(path.moves[: max(1, min(len(path.moves), 4))])
            return False
        finally:
            self.fighting = False
