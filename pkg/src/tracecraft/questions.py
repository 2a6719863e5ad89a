"""Question synthesis from episode logs.

Every question is parsed out of the ground-truth log by a template-specific
extraction rule; `oracle_answer` re-runs the same rule, which is what makes
the corpus answerable by construction. Three categories: Intent questions
anchor on single significant events, Goal questions on the assigned task,
Survival questions on interrupts and deaths.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .achievements import Achievement, achievements_for_event, display_name
from .actions import ActionKind
from .events import SUCCEEDED, ActionEvent, Cell, EpisodeLog
from .items import Item
from .rng import Stream
from .taskgraph import TASK_WEIGHTS, TaskId, goal_event_set, task_display
from .tiles import TileKind
from .world import SIZE, WorldState

A = Achievement

INTENT = "Intent"
GOAL = "Goal"
SURVIVAL = "Survival"


class QuestionGenerationError(Exception):
    pass


class OracleMismatchError(Exception):
    """The provided log does not reproduce the question's answer."""


# ---------------------------------------------------------------------------
# pools and display vocabulary

POOL_TASKS = tuple(task_display(t) for t in TaskId)
POOL_ACHIEVEMENTS = tuple(display_name(a) for a in Achievement)
POOL_PURPOSES = POOL_ACHIEVEMENTS + ("self defense",)
POOL_CRAFTABLES = (
    "wood pickaxe",
    "stone pickaxe",
    "iron pickaxe",
    "wood sword",
    "stone sword",
    "iron sword",
    "bucket",
    "steak",
    "grilled apple",
)
POOL_WEAPONS = (
    "bare hands",
    "wood sword",
    "stone sword",
    "iron sword",
    "wood pickaxe",
    "stone pickaxe",
    "iron pickaxe",
)
POOL_CAUSES = ("lack of food", "lack of water", "lack of energy", "hurt by monster", "hurt by lava")
POOL_REMEDIES = ("get food", "get water", "get sleep", "avoid monsters", "avoid lava")
POOL_SURVIVAL_INTENTS = ("satisfy hunger", "satisfy thirst", "restore energy", "escape danger", "restore health")
POOL_FOODS = ("apple", "grilled apple", "beef", "steak", "plant")

POOLS = {
    "tasks": POOL_TASKS,
    "purposes": POOL_PURPOSES,
    "craftables": POOL_CRAFTABLES,
    "weapons": POOL_WEAPONS,
    "causes": POOL_CAUSES,
    "remedies": POOL_REMEDIES,
    "survival_intents": POOL_SURVIVAL_INTENTS,
    "foods": POOL_FOODS,
}

CAUSE_DISPLAY = {
    "zombie": "hurt by monster",
    "skeleton": "hurt by monster",
    "lava": "hurt by lava",
    "hunger": "lack of food",
    "thirst": "lack of water",
    "exhaustion": "lack of energy",
}

REMEDY_FOR_CAUSE = {
    "hurt by monster": "avoid monsters",
    "hurt by lava": "avoid lava",
    "lack of food": "get food",
    "lack of water": "get water",
    "lack of energy": "get sleep",
}

INTERRUPT_INTENT = {
    "eat": "satisfy hunger",
    "drink": "satisfy thirst",
    "sleep": "restore energy",
    "flee": "escape danger",
}

_ITEM_DISPLAY = {
    Item.wood_pickaxe: "wood pickaxe",
    Item.stone_pickaxe: "stone pickaxe",
    Item.iron_pickaxe: "iron pickaxe",
    Item.wood_sword: "wood sword",
    Item.stone_sword: "stone sword",
    Item.iron_sword: "iron sword",
    Item.bucket: "bucket",
    Item.steak: "steak",
    Item.grilled_apple: "grilled apple",
    Item.apple: "apple",
    Item.beef: "beef",
    Item.wood: "wood",
    Item.stone: "stone",
    Item.coal: "coal",
    Item.iron: "iron",
    Item.diamond: "diamond",
}

# classes a held tool enables, for "what was the X used for"
TOOL_USES: dict[Item, tuple[Achievement, ...]] = {
    Item.wood_pickaxe: (A.collect_stone, A.collect_coal),
    Item.stone_pickaxe: (A.collect_iron,),
    Item.iron_pickaxe: (A.collect_diamond,),
    Item.wood_sword: (A.defeat_zombie, A.defeat_skeleton, A.defeat_cow),
    Item.stone_sword: (A.defeat_zombie, A.defeat_skeleton, A.defeat_cow),
    Item.iron_sword: (A.defeat_zombie, A.defeat_skeleton, A.defeat_cow),
    Item.bucket: (A.collect_water, A.collect_lava),
    Item.steak: (A.eat_steak,),
    Item.grilled_apple: (A.eat_grilled_apple,),
}

_TABLE_MAKES = {
    ActionKind.make_wood_pickaxe,
    ActionKind.make_stone_pickaxe,
    ActionKind.make_wood_sword,
    ActionKind.make_stone_sword,
    ActionKind.make_bucket,
}
_FURNACE_MAKES = {ActionKind.make_iron_pickaxe, ActionKind.make_iron_sword, ActionKind.make_steak}

_MINE_CLASSES = {A.collect_stone, A.collect_coal, A.collect_iron, A.collect_diamond}
_DEFEAT_CLASSES = {A.defeat_cow, A.defeat_zombie, A.defeat_skeleton}


def event_class(ev: ActionEvent) -> Optional[Achievement]:
    """Canonical achievement-level label for a significant event."""
    achs = achievements_for_event(ev)
    if not achs:
        return None
    for preferred in (
        A.defeat_cow,
        A.defeat_zombie,
        A.defeat_skeleton,
        A.make_grilled_apple,
        A.collect_apple,
        A.collect_plant,
        A.sleep_on_bed,
        A.drink_water_from_bucket,
        A.eat_grilled_apple,
    ):
        if preferred in achs:
            return preferred
    return sorted(achs, key=lambda a: a.value)[0]


def _food_display(ev: ActionEvent) -> Optional[str]:
    if ev.action in (ActionKind.eat_apple, ActionKind.eat_beef, ActionKind.eat_steak) and ev.item:
        return _ITEM_DISPLAY.get(ev.item, ev.item.value.replace("_", " "))
    if ev.action is ActionKind.do and ev.target_tile is TileKind.ripe_plant:
        return "plant"
    return None


def _weapon_display(ev: ActionEvent) -> str:
    if ev.item is None:
        return "bare hands"
    return _ITEM_DISPLAY.get(ev.item, ev.item.value.replace("_", " "))


def _first_use_after(log: EpisodeLog, idx: int, item: Item) -> Optional[ActionEvent]:
    uses = TOOL_USES.get(item, ())
    for ev in log.events[idx + 1 :]:
        if ev.outcome != SUCCEEDED:
            continue
        if item in ev.items_spent:
            return ev
        if uses:
            cls = event_class(ev)
            if cls in uses:
                return ev
    return None


def _subgoal_display(ev: ActionEvent) -> Optional[str]:
    if ev.subgoal:
        return ev.subgoal
    cls = event_class(ev)
    return display_name(cls) if cls else None


def _significant_indices(log: EpisodeLog) -> list[int]:
    out = []
    for i, ev in enumerate(log.events):
        if ev.outcome == SUCCEEDED and event_class(ev) is not None:
            out.append(i)
    return out


def _neighbors_of(log: EpisodeLog, idx: int) -> tuple[Optional[int], Optional[int]]:
    sig = _significant_indices(log)
    if idx not in sig:
        return None, None
    k = sig.index(idx)
    prev_i = sig[k - 1] if k > 0 else None
    next_i = sig[k + 1] if k + 1 < len(sig) else None
    return prev_i, next_i


# ---------------------------------------------------------------------------
# templates


@dataclass(frozen=True)
class Template:
    id: str
    category: str
    pool: str
    text: Callable[[EpisodeLog, Optional[int]], Optional[str]]
    answer: Callable[[EpisodeLog, Optional[int]], Optional[str]]


def _t_static(s: str):
    return lambda log, idx: s


def _cls_of(log: EpisodeLog, idx: int) -> Optional[Achievement]:
    return event_class(log.events[idx])


def _ans_subgoal(log, idx):
    return _subgoal_display(log.events[idx])


def _ans_next(log, idx):
    _p, n = _neighbors_of(log, idx)
    return _subgoal_display(log.events[n]) if n is not None else None


def _ans_prev(log, idx):
    p, _n = _neighbors_of(log, idx)
    return _subgoal_display(log.events[p]) if p is not None else None


def _ans_made_item(log, idx):
    ev = log.events[idx]
    return _ITEM_DISPLAY.get(ev.item) if ev.item else None


def _ans_station_purpose(log, idx):
    """First item crafted at the station placed by this event."""
    ev = log.events[idx]
    makes = _TABLE_MAKES if ev.action is ActionKind.place_table else _FURNACE_MAKES
    for later in log.events[idx + 1 :]:
        if later.outcome == SUCCEEDED and later.action in makes:
            return display_name(event_class(later))
        if later.outcome == SUCCEEDED and ev.action is ActionKind.place_furnace and later.item is Item.grilled_apple:
            return "make grilled apple"
    return None


def _ans_item_purpose(log, idx):
    ev = log.events[idx]
    if ev.item is None:
        return None
    use = _first_use_after(log, idx, ev.item)
    if use is None:
        return None
    cls = event_class(use)
    return display_name(cls) if cls else None


def _ans_material_purpose(material: Item):
    def rule(log, idx):
        use = _first_use_after(log, idx, material)
        if use is None:
            return None
        cls = event_class(use)
        return display_name(cls) if cls else None

    return rule


def _ans_mined_purpose(log, idx):
    ev = log.events[idx]
    gained = [i for i in ev.items_gained if i in (Item.stone, Item.coal, Item.iron, Item.diamond)]
    if not gained:
        return None
    return _ans_material_purpose(gained[0])(log, idx)


def _ans_weapon(log, idx):
    return _weapon_display(log.events[idx])


def _ans_defeat_why(log, idx):
    ev = log.events[idx]
    if ev.creature_kind == "cow":
        return "collect beef"
    cls = event_class(ev)
    if log.task and cls in goal_event_set(TaskId(log.task)):
        return task_display(log.task)
    return "self defense"


def _ans_goal(log, idx):
    return task_display(log.task) if log.task else None


def _ans_death_cause(log, idx):
    return CAUSE_DISPLAY.get(log.death_cause or "")


def _ans_death_remedy(log, idx):
    cause = CAUSE_DISPLAY.get(log.death_cause or "")
    return REMEDY_FOR_CAUSE.get(cause) if cause else None


def _ans_death_doing(log, idx):
    for ev in reversed(log.events):
        if ev.subgoal:
            return ev.subgoal
    return None


def _ans_interrupt_intent(log, idx):
    ev = log.events[idx]
    return INTERRUPT_INTENT.get(ev.interrupt or "")


def _ans_food(log, idx):
    return _food_display(log.events[idx])


def _ore_name(log, idx) -> Optional[str]:
    ev = log.events[idx]
    for i in (Item.stone, Item.coal, Item.iron, Item.diamond):
        if i in ev.items_gained:
            return _ITEM_DISPLAY[i]
    return None


def _creature_name(log, idx) -> Optional[str]:
    return log.events[idx].creature_kind


TEMPLATES: dict[str, Template] = {}


def _add(t: Template) -> None:
    TEMPLATES[t.id] = t


# Intent (22)
_add(Template("i_area_objective", INTENT, "purposes", _t_static("What was the vandal's objective in these area?"), _ans_subgoal))
_add(Template("i_current_intent", INTENT, "purposes", _t_static("What was the vandal's current intent?"), _ans_subgoal))
_add(Template("i_after", INTENT, "purposes", _t_static("What did the vandal do after this step?"), _ans_next))
_add(Template("i_before", INTENT, "purposes", _t_static("What did the vandal do before this step?"), _ans_prev))
_add(Template("i_table_make", INTENT, "craftables", _t_static("What did the vandal make on this table?"), _ans_made_item))
_add(Template("i_table_why", INTENT, "purposes", _t_static("Why did the vandal make this table?"), _ans_station_purpose))
_add(
    Template(
        "i_table_craft",
        INTENT,
        "craftables",
        _t_static("What item did the vandal most likely craft using the table?"),
        _ans_made_item,
    )
)
_add(
    Template(
        "i_make_why",
        INTENT,
        "purposes",
        lambda log, idx: f"Why did the vandal make the {_ITEM_DISPLAY.get(log.events[idx].item)}?"
        if log.events[idx].item
        else None,
        _ans_item_purpose,
    )
)
_add(
    Template(
        "i_first_action",
        INTENT,
        "purposes",
        _t_static("What action did the vandal perform immediately?"),
        _ans_subgoal,
    )
)
_add(
    Template(
        "i_item_used_for",
        INTENT,
        "purposes",
        lambda log, idx: f"What was the {_ITEM_DISPLAY.get(log.events[idx].item)} used for?"
        if log.events[idx].item
        else None,
        _ans_item_purpose,
    )
)
_add(Template("i_furnace_make", INTENT, "craftables", _t_static("What did the vandal make on this furnace?"), _ans_made_item))
_add(Template("i_furnace_why", INTENT, "purposes", _t_static("Why did the vandal make this furnace?"), _ans_station_purpose))
_add(
    Template(
        "i_furnace_craft",
        INTENT,
        "craftables",
        _t_static("What item did the vandal most likely craft using the furnace?"),
        _ans_made_item,
    )
)
_add(Template("i_tree_why", INTENT, "purposes", _t_static("Why was tree cut?"), _ans_material_purpose(Item.wood)))
_add(
    Template(
        "i_wood_use", INTENT, "purposes", _t_static("What was the intended use for the wood?"), _ans_material_purpose(Item.wood)
    )
)
_add(Template("i_tree_how", INTENT, "weapons", _t_static("How was the tree cut?"), _ans_weapon))
_add(
    Template(
        "i_mine_purpose",
        INTENT,
        "purposes",
        lambda log, idx: f"What was the purpose of mining {_ore_name(log, idx)}?" if _ore_name(log, idx) else None,
        _ans_mined_purpose,
    )
)
_add(
    Template(
        "i_mine_why",
        INTENT,
        "purposes",
        lambda log, idx: f"Why was the {_ore_name(log, idx)} mined?" if _ore_name(log, idx) else None,
        _ans_mined_purpose,
    )
)
_add(
    Template(
        "i_ore_use",
        INTENT,
        "purposes",
        lambda log, idx: f"What was the intended use for the {_ore_name(log, idx)}?" if _ore_name(log, idx) else None,
        _ans_mined_purpose,
    )
)
_add(
    Template(
        "i_defeat_how",
        INTENT,
        "weapons",
        lambda log, idx: f"How did the vandal defeat the {_creature_name(log, idx)}?" if _creature_name(log, idx) else None,
        _ans_weapon,
    )
)
_add(
    Template(
        "i_defeat_with",
        INTENT,
        "weapons",
        lambda log, idx: f"What did the vandal use to defeat the {_creature_name(log, idx)}?"
        if _creature_name(log, idx)
        else None,
        _ans_weapon,
    )
)
_add(
    Template(
        "i_defeat_why",
        INTENT,
        "purposes",
        lambda log, idx: f"Why did the vandal defeat the {_creature_name(log, idx)}?" if _creature_name(log, idx) else None,
        _ans_defeat_why,
    )
)

# Goal (3)
_add(Template("g_final", GOAL, "tasks", _t_static("What was the vandal's final goal?"), _ans_goal))
_add(Template("g_achieve", GOAL, "tasks", _t_static("What was this vandal trying to achieve?"), _ans_goal))
_add(Template("g_want", GOAL, "tasks", _t_static("What did the vandal want to achieve?"), _ans_goal))

# Survival (10)
_add(
    Template(
        "s_intent_doing",
        SURVIVAL,
        "survival_intents",
        lambda log, idx: f"What was the vandal's survival intent for doing {_subgoal_display(log.events[idx])}?"
        if _subgoal_display(log.events[idx])
        else None,
        _ans_interrupt_intent,
    )
)
_add(
    Template(
        "s_collect_why",
        SURVIVAL,
        "survival_intents",
        lambda log, idx: _collect_make_text(log, idx),
        _ans_interrupt_intent,
    )
)
_add(
    Template(
        "s_current_goal",
        SURVIVAL,
        "survival_intents",
        _t_static("What was the vandal's goal for survival currently?"),
        _ans_interrupt_intent,
    )
)
_add(Template("s_did_die", SURVIVAL, "causes", _t_static("Did the vandal die? Why?"), _ans_death_cause))
_add(Template("s_die_why", SURVIVAL, "causes", _t_static("Why did the vandal die during the task?"), _ans_death_cause))
_add(Template("s_die_how", SURVIVAL, "causes", _t_static("How did the vandal die?"), _ans_death_cause))
_add(
    Template(
        "s_doing_when_died",
        SURVIVAL,
        "purposes",
        _t_static("What was the vandal trying to do when died?"),
        _ans_death_doing,
    )
)
_add(Template("s_avoid_death", SURVIVAL, "remedies", _t_static("What can the vandal do to avoid death?"), _ans_death_remedy))
_add(
    Template(
        "s_kept_from_hungry",
        SURVIVAL,
        "foods",
        _t_static("what helped keep the vandal away from hungry?"),
        _ans_food,
    )
)
_add(Template("s_food_eaten", SURVIVAL, "foods", _t_static("what food did the vandal eat?"), _ans_food))


def _collect_make_text(log: EpisodeLog, idx: int) -> Optional[str]:
    cls = event_class(log.events[idx])
    if cls is None:
        return None
    name = display_name(cls)
    verb = "make" if name.startswith(("make", "place")) else "collect"
    obj = name.split(" ", 1)[1] if " " in name else name
    return f"why did the vandal {verb} {obj}?"


# which Intent templates can anchor on which event classes
def _intent_templates_for(log: EpisodeLog, idx: int) -> list[Template]:
    ev = log.events[idx]
    cls = event_class(ev)
    out: list[str] = ["i_area_objective", "i_current_intent"]
    prev_i, next_i = _neighbors_of(log, idx)
    if next_i is not None:
        out.append("i_after")
    if prev_i is not None:
        out.append("i_before")
    if idx == _significant_indices(log)[0]:
        out.append("i_first_action")
    if ev.action in _TABLE_MAKES:
        out += ["i_table_make", "i_table_craft"]
        if _ans_item_purpose(log, idx):
            out += ["i_make_why", "i_item_used_for"]
    if ev.action in _FURNACE_MAKES:
        out += ["i_furnace_make", "i_furnace_craft"]
        if _ans_item_purpose(log, idx):
            out += ["i_make_why", "i_item_used_for"]
    if ev.action is ActionKind.place_table and _ans_station_purpose(log, idx):
        out.append("i_table_why")
    if ev.action is ActionKind.place_furnace and _ans_station_purpose(log, idx):
        out.append("i_furnace_why")
    if cls in (A.collect_wood, A.collect_apple):
        out.append("i_tree_how")
        if _ans_material_purpose(Item.wood)(log, idx):
            out += ["i_tree_why", "i_wood_use"]
    if cls in _MINE_CLASSES and _ans_mined_purpose(log, idx):
        out += ["i_mine_purpose", "i_mine_why", "i_ore_use"]
    if cls in _DEFEAT_CLASSES:
        out += ["i_defeat_how", "i_defeat_with", "i_defeat_why"]
    return [TEMPLATES[t] for t in out]


# ---------------------------------------------------------------------------
# question assembly


@dataclass
class Question:
    id: str
    scene_id: str
    category: str
    template_id: str
    text: str
    choices: tuple[str, str, str, str]
    answer_index: int
    mask: np.ndarray
    provenance: tuple[int, int]
    anchor_tick: Optional[int] = None
    split: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "id": self.id,
            "scene_id": self.scene_id,
            "category": self.category,
            "template_id": self.template_id,
            "text": self.text,
            "choices": list(self.choices),
            "answer_index": self.answer_index,
            "mask_rle": mask_to_rle(self.mask),
            "provenance": list(self.provenance),
            "anchor_tick": self.anchor_tick,
            "split": self.split,
        }

    @classmethod
    def from_json(cls, d: dict) -> "Question":
        return cls(
            id=d["id"],
            scene_id=d["scene_id"],
            category=d["category"],
            template_id=d["template_id"],
            text=d["text"],
            choices=tuple(d["choices"]),
            answer_index=int(d["answer_index"]),
            mask=mask_from_rle(d["mask_rle"]),
            provenance=tuple(d["provenance"]),
            anchor_tick=d.get("anchor_tick"),
            split=d.get("split"),
        )


def mask_to_rle(mask: np.ndarray) -> list[int]:
    """Run lengths of alternating 0/1 spans over the flattened grid, 0 first."""
    flat = np.asarray(mask, dtype=np.uint8).ravel()
    runs: list[int] = []
    current, count = 0, 0
    for v in flat:
        if int(v) == current:
            count += 1
        else:
            runs.append(count)
            current = int(v)
            count = 1
    runs.append(count)
    return runs


def mask_from_rle(runs: list[int]) -> np.ndarray:
    flat = np.zeros(SIZE * SIZE, dtype=bool)
    pos, val = 0, 0
    for r in runs:
        if val:
            flat[pos : pos + r] = True
        pos += r
        val ^= 1
    return flat.reshape(SIZE, SIZE)


def _plausible_set(pool_name: str, log: EpisodeLog, world: WorldState) -> set[str]:
    """Context-plausible pool members: present in the scene or adjacent to the
    log in the task graph; these get triple weight as distractors."""
    fired = {display_name(a) for ev in log.events for a in achievements_for_event(ev)}
    task_events = {display_name(a) for a in goal_event_set(TaskId(log.task))} if log.task else set()
    if pool_name == "tasks":
        out = set()
        for t in TaskId:
            names = {display_name(a) for a in goal_event_set(t)}
            if names & (fired | task_events):
                out.add(task_display(t))
        return out
    if pool_name in ("purposes",):
        return fired | task_events
    if pool_name == "craftables":
        out = {n for n in POOL_CRAFTABLES if f"make {n}" in (fired | task_events)}
        grid = world.grid
        if (grid == int(TileKind.stone)).any():
            out |= {"stone pickaxe", "stone sword"}
        if (grid == int(TileKind.iron)).any() or (grid == int(TileKind.iron_left)).any():
            out |= {"iron pickaxe", "iron sword"}
        out |= {"wood pickaxe", "wood sword"}
        return out
    if pool_name == "weapons":
        tiers = {"bare hands"}
        for name in fired:
            if name.startswith("make ") and name.split(" ", 1)[1] in POOL_WEAPONS:
                tiers.add(name.split(" ", 1)[1])
        return tiers
    if pool_name == "causes":
        out = {"lack of food", "lack of water"}
        if any(c.kind in ("zombie", "skeleton") for c in world.creatures):
            out.add("hurt by monster")
        if (world.grid == int(TileKind.lava)).any():
            out.add("hurt by lava")
        return out
    # small pools: everything is contextually fair game
    return set(POOLS[pool_name])


def sample_distractors(
    answer: str,
    pool: tuple[str, ...] | list[str],
    plausible: set[str],
    rng: Stream,
) -> list[str]:
    """Three distinct non-answer pool members, plausible ones at triple weight."""
    candidates = [c for c in pool if c != answer]
    if len(candidates) < 3:
        raise QuestionGenerationError(f"distractor pool too small: {len(candidates) + 1} members")
    out: list[str] = []
    pool_left = list(candidates)
    for _ in range(3):
        weights = [3.0 if c in plausible else 1.0 for c in pool_left]
        pick = rng.weighted_choice(pool_left, weights)
        out.append(pick)
        pool_left.remove(pick)
    return out


def distractors_for_event(answer: str, anchor: ActionEvent, world: WorldState, rng: Stream, log: EpisodeLog) -> list[str]:
    """Spec-facing wrapper: infer the pool from the answer, then sample."""
    for name, pool in POOLS.items():
        if answer in pool:
            return sample_distractors(answer, pool, _plausible_set(name, log, world), rng)
    raise QuestionGenerationError(f"answer {answer!r} not in any known pool")


# -- masks --------------------------------------------------------------------


def _neighborhood_mask(cell: Cell) -> np.ndarray:
    mask = np.zeros((SIZE, SIZE), dtype=bool)
    r, c = cell
    mask[max(0, r - 1) : min(SIZE, r + 2), max(0, c - 1) : min(SIZE, c + 2)] = True
    return mask


SURVIVAL_SPAN = 50  # ticks of context behind a survival anchor


def build_mask(question: Question, world: WorldState, log: Optional[EpisodeLog] = None) -> np.ndarray:
    """Relevance mask: the anchor instance plus its 8-neighborhood for Intent,
    all vandal stamps within the provenance span for Goal/Survival. Never empty."""
    t0, t1 = question.provenance
    if question.category == INTENT:
        anchor = _event_at(log, question.anchor_tick) if log else None
        cell = (anchor.cell or anchor.pos) if anchor else None
        if cell is None:
            cell = log.vandal_start if log and log.vandal_start else (SIZE // 2, SIZE // 2)
        return _neighborhood_mask(cell)
    if log is not None:
        cells = log.stamped_cells(t0, t1)
        if cells:
            mask = np.zeros((SIZE, SIZE), dtype=bool)
            for r, c in cells:
                mask[r, c] = True
            return mask
        fallback = _event_at(log, question.anchor_tick) if question.anchor_tick is not None else None
        if fallback is not None:
            return _neighborhood_mask(fallback.pos)
        if log.vandal_start:
            return _neighborhood_mask(log.vandal_start)
    # no log: every trace in the world (exact for Goal over the full span)
    trace = np.isin(world.grid, [int(k) for k in TileKind if 18 <= int(k) < 50])
    if trace.any():
        return trace
    start = world.vandal_start or (SIZE // 2, SIZE // 2)
    return _neighborhood_mask(start)


def _event_at(log: Optional[EpisodeLog], tick: Optional[int]) -> Optional[ActionEvent]:
    if log is None or tick is None:
        return None
    for ev in log.events:
        if ev.tick == tick:
            return ev
    return None


# -- generation ------------------------------------------------------------------


def _qid(scene_id: str, template_id: str, tick: Optional[int]) -> str:
    h = hashlib.sha256(f"{scene_id}/{template_id}/{tick}".encode()).hexdigest()[:12]
    return f"q_{h}"


def _assemble(
    scene_id: str,
    template: Template,
    log: EpisodeLog,
    world: WorldState,
    rng: Stream,
    idx: Optional[int],
    provenance: tuple[int, int],
    anchor_tick: Optional[int],
) -> Optional[Question]:
    text = template.text(log, idx)
    answer = template.answer(log, idx)
    if text is None or answer is None:
        return None
    pool = POOLS[template.pool]
    if answer not in pool:
        return None
    plausible = _plausible_set(template.pool, log, world)
    distractors = sample_distractors(answer, pool, plausible, rng)
    answer_index = rng.randint(0, 4)
    choices = distractors[:answer_index] + [answer] + distractors[answer_index:]
    q = Question(
        id=_qid(scene_id, template.id, anchor_tick),
        scene_id=scene_id,
        category=template.category,
        template_id=template.id,
        text=text,
        choices=tuple(choices),
        answer_index=answer_index,
        mask=np.zeros((SIZE, SIZE), dtype=bool),
        provenance=provenance,
        anchor_tick=anchor_tick,
    )
    q.mask = build_mask(q, world, log)
    return q


def generate_questions(
    log: EpisodeLog,
    world: WorldState,
    rng: Stream,
    scene_id: str = "scene",
    max_intent: int = 14,
    max_survival: int = 3,
) -> list[Question]:
    """All questions for one episode: Intent per anchor (capped), one Goal,
    Survival for interrupts and deaths."""
    out: list[Question] = []
    sig = _significant_indices(log)
    if not log.events:
        return out
    first_tick = log.events[0].tick
    last_tick = log.events[-1].tick

    # Intent: one question per anchor event; interrupt-driven events belong
    # to the Survival category instead
    intent_anchors = [i for i in sig if log.events[i].interrupt is None]
    for i in intent_anchors[:max_intent]:
        ev = log.events[i]
        options = _intent_templates_for(log, i)
        if not options:
            continue
        template = options[rng.randint(0, len(options))]
        q = _assemble(scene_id, template, log, world, rng, i, (ev.tick, ev.tick), ev.tick)
        if q is not None:
            out.append(q)

    # Goal: one per scene
    if log.task and sig:
        template = TEMPLATES[("g_final", "g_achieve", "g_want")[rng.randint(0, 3)]]
        q = _assemble(scene_id, template, log, world, rng, None, (first_tick, last_tick), None)
        if q is not None:
            out.append(q)

    # Survival: death first, then interrupt episodes
    survival = 0
    if log.status == "died" and log.death_cause:
        death_templates = ["s_did_die", "s_die_why", "s_die_how", "s_avoid_death"]
        if _ans_death_doing(log, None):
            death_templates.append("s_doing_when_died")
        template = TEMPLATES[death_templates[rng.randint(0, len(death_templates))]]
        t_death = log.events[-1].tick
        q = _assemble(
            scene_id, template, log, world, rng, None, (max(first_tick, t_death - SURVIVAL_SPAN), t_death), t_death
        )
        if q is not None:
            out.append(q)
            survival += 1

    interrupt_anchors = _interrupt_anchors(log)
    for i in interrupt_anchors:
        if survival >= max_survival:
            break
        ev = log.events[i]
        applicable = ["s_intent_doing", "s_current_goal"]
        cls = event_class(ev)
        if cls is not None and cls.value.split("_")[0] in ("collect", "make", "place"):
            applicable.append("s_collect_why")
        if _food_display(ev) is not None:
            applicable += ["s_food_eaten"]
            if ev.interrupt == "eat":
                applicable += ["s_kept_from_hungry"]
        template = TEMPLATES[applicable[rng.randint(0, len(applicable))]]
        q = _assemble(
            scene_id, template, log, world, rng, i, (max(first_tick, ev.tick - SURVIVAL_SPAN), ev.tick), ev.tick
        )
        if q is not None:
            out.append(q)
            survival += 1
    return out


def _interrupt_anchors(log: EpisodeLog) -> list[int]:
    """First payoff event of each interrupt episode (the eat/drink/sleep act,
    or the first significant action inside a flee)."""
    out = []
    prev_interrupt = None
    for i, ev in enumerate(log.events):
        if ev.interrupt != prev_interrupt and ev.interrupt is not None:
            # scan this interrupt run for its payoff
            j = i
            payoff = None
            while j < len(log.events) and log.events[j].interrupt == ev.interrupt:
                e2 = log.events[j]
                if e2.outcome == SUCCEEDED and (
                    _food_display(e2) is not None
                    or e2.action in (ActionKind.drink, ActionKind.sleep)
                    or event_class(e2) is not None
                ):
                    payoff = j
                    break
                j += 1
            if payoff is not None:
                out.append(payoff)
        prev_interrupt = ev.interrupt
    return out


# -- the oracle -----------------------------------------------------------------


def oracle_answer(question: Question, log: EpisodeLog) -> int:
    """Recompute the answer through the template's extraction rule; the index
    must exist among the stored choices or the log is not this question's."""
    template = TEMPLATES[question.template_id]
    idx: Optional[int] = None
    if question.anchor_tick is not None:
        for i, ev in enumerate(log.events):
            if ev.tick == question.anchor_tick:
                idx = i
                break
        if idx is None and template.category != SURVIVAL:
            raise OracleMismatchError(f"no event at tick {question.anchor_tick}")
    answer = template.answer(log, idx)
    if answer is None or answer not in question.choices:
        raise OracleMismatchError(
            f"extraction rule for {question.template_id} yields {answer!r}, not among choices"
        )
    found = question.choices.index(answer)
    if found != question.answer_index:
        raise OracleMismatchError(
            f"log reproduces {answer!r} at position {found}, question stores {question.answer_index}: foreign log"
        )
    return found
