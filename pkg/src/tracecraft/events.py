"""Action events and episode logs: the ground truth everything else reads."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from .actions import ActionKind
from .items import Item
from .tiles import Direction, TileKind

Cell = tuple[int, int]

SUCCEEDED = "succeeded"
NO_OP = "no_op"


@dataclass
class ActionEvent:
    """One tick of one actor: what was attempted, what changed, what it left behind."""

    tick: int
    actor: str
    action: ActionKind
    outcome: str = NO_OP
    pos: Cell = (0, 0)
    facing: Direction = Direction.down
    cell: Optional[Cell] = None            # cell acted upon, if any
    moved: bool = False
    target_tile: Optional[TileKind] = None
    item: Optional[Item] = None            # headline item (crafted, eaten, weapon used)
    creature_kind: Optional[str] = None
    creature_killed: bool = False
    damage_taken: int = 0
    traces_stamped: list[tuple[Cell, TileKind]] = field(default_factory=list)
    items_gained: dict[Item, int] = field(default_factory=dict)
    items_spent: dict[Item, int] = field(default_factory=dict)
    stat_deltas: dict[str, int] = field(default_factory=dict)
    achievements: list[str] = field(default_factory=list)
    flags: list[str] = field(default_factory=list)  # e.g. "woke", "on_bed", "asleep"
    death_cause: Optional[str] = None
    # annotations added by the vandal executor
    subgoal: Optional[str] = None
    interrupt: Optional[str] = None

    def to_json(self) -> dict:
        return {
            "tick": self.tick,
            "actor": self.actor,
            "action": int(self.action),
            "outcome": self.outcome,
            "pos": list(self.pos),
            "facing": int(self.facing),
            "cell": list(self.cell) if self.cell is not None else None,
            "moved": self.moved,
            "target_tile": int(self.target_tile) if self.target_tile is not None else None,
            "item": self.item.value if self.item is not None else None,
            "creature_kind": self.creature_kind,
            "creature_killed": self.creature_killed,
            "damage_taken": self.damage_taken,
            "traces_stamped": [[list(c), int(k)] for c, k in self.traces_stamped],
            "items_gained": {i.value: n for i, n in self.items_gained.items()},
            "items_spent": {i.value: n for i, n in self.items_spent.items()},
            "stat_deltas": dict(self.stat_deltas),
            "achievements": list(self.achievements),
            "flags": list(self.flags),
            "death_cause": self.death_cause,
            "subgoal": self.subgoal,
            "interrupt": self.interrupt,
        }

    @classmethod
    def from_json(cls, d: dict) -> "ActionEvent":
        return cls(
            tick=int(d["tick"]),
            actor=str(d["actor"]),
            action=ActionKind(d["action"]),
            outcome=str(d["outcome"]),
            pos=tuple(d["pos"]),
            facing=Direction(d["facing"]),
            cell=tuple(d["cell"]) if d.get("cell") is not None else None,
            moved=bool(d["moved"]),
            target_tile=TileKind(d["target_tile"]) if d.get("target_tile") is not None else None,
            item=Item(d["item"]) if d.get("item") else None,
            creature_kind=d.get("creature_kind"),
            creature_killed=bool(d.get("creature_killed", False)),
            damage_taken=int(d.get("damage_taken", 0)),
            traces_stamped=[(tuple(c), TileKind(k)) for c, k in d.get("traces_stamped", [])],
            items_gained={Item(i): int(n) for i, n in d.get("items_gained", {}).items()},
            items_spent={Item(i): int(n) for i, n in d.get("items_spent", {}).items()},
            stat_deltas={k: int(v) for k, v in d.get("stat_deltas", {}).items()},
            achievements=list(d.get("achievements", [])),
            flags=list(d.get("flags", [])),
            death_cause=d.get("death_cause"),
            subgoal=d.get("subgoal"),
            interrupt=d.get("interrupt"),
        )


COMPLETED = "completed"
DIED = "died"
BUDGET_EXHAUSTED = "step_budget_exhausted"


@dataclass
class EpisodeLog:
    """Tick-ordered record of a vandal run."""

    task: Optional[str] = None
    events: list[ActionEvent] = field(default_factory=list)
    status: str = COMPLETED
    death_cause: Optional[str] = None
    vandal_start: Optional[Cell] = None

    def append(self, ev: ActionEvent) -> None:
        if self.events and ev.tick <= self.events[-1].tick:
            raise ValueError("event ticks must be strictly increasing")
        self.events.append(ev)

    def succeeded_events(self) -> list[ActionEvent]:
        return [e for e in self.events if e.outcome == SUCCEEDED]

    def stamped_cells(self, t0: int | None = None, t1: int | None = None) -> set[Cell]:
        """Distinct cells the vandal stamped within [t0, t1] (whole log by default)."""
        out: set[Cell] = set()
        for e in self.events:
            if t0 is not None and e.tick < t0:
                continue
            if t1 is not None and e.tick > t1:
                continue
            out.update(c for c, _k in e.traces_stamped)
        return out

    def to_json(self) -> dict:
        return {
            "task": self.task,
            "status": self.status,
            "death_cause": self.death_cause,
            "vandal_start": list(self.vandal_start) if self.vandal_start else None,
            "events": [e.to_json() for e in self.events],
        }

    @classmethod
    def from_json(cls, d: dict) -> "EpisodeLog":
        log = cls(
            task=d.get("task"),
            status=str(d["status"]),
            death_cause=d.get("death_cause"),
            vandal_start=tuple(d["vandal_start"]) if d.get("vandal_start") else None,
        )
        log.events = [ActionEvent.from_json(e) for e in d.get("events", [])]
        return log
