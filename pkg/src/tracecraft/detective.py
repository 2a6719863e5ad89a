"""Detective episodes: spawning, observation encoding, rewards, explorers.

The detective is dropped at the start of the vandal's trail and explores
under a 500-step cap. Each step is rewarded +1 per newly seen vandal trace
cell (+2 when the cell bears on the question), +100 once every vandal trace
cell has been seen, with a -0.1 time penalty per step and an extra -1 for
operating (non-move) actions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .actions import ActionKind, DIRECTION_FOR_MOVE, MOVE_FOR_DIRECTION, is_operating
from .events import Cell, EpisodeLog
from .pathfind import pathfind
from .questions import Question
from .rng import Stream
from .taskgraph import TaskId
from .tiles import DELTAS, TileKind, is_trace, walkable
from .world import DETECTIVE, SIZE, VIEW_RADIUS, AgentState, WorldState, apply_action, local_view

STEP_CAP = 500
TIME_PENALTY = -0.1
OPERATING_PENALTY = -1.0
TRACE_REWARD = 1.0
ASSOCIATED_REWARD = 2.0
COMPLETION_REWARD = 100.0

_TRACE_VALUES = np.array([int(k) for k in TileKind if is_trace(k)], dtype=np.int16)


@dataclass
class EncodedObservation:
    """The 64x64x2 tensor: channel 0 holds one-plus-tile-index inside the
    agent's absolute 9x9 window (zero elsewhere), channel 1 is the question
    mask. Storing index+1 keeps 'outside the window' distinct from tile 0."""

    channel0: np.ndarray
    mask: np.ndarray
    pos: Cell

    def tensor(self) -> np.ndarray:
        return np.stack([self.channel0, self.mask.astype(np.int16)], axis=-1)


def encode_observation(world: WorldState, role: str, mask: np.ndarray) -> EncodedObservation:
    view = local_view(world, role)
    pos = world.agents[role].pos
    ch0 = np.zeros((SIZE, SIZE), dtype=np.int16)
    r0 = max(0, pos[0] - VIEW_RADIUS)
    r1 = min(SIZE, pos[0] + VIEW_RADIUS + 1)
    c0 = max(0, pos[1] - VIEW_RADIUS)
    c1 = min(SIZE, pos[1] + VIEW_RADIUS + 1)
    vr0 = r0 - (pos[0] - VIEW_RADIUS)
    vc0 = c0 - (pos[1] - VIEW_RADIUS)
    ch0[r0:r1, c0:c1] = view[vr0 : vr0 + (r1 - r0), vc0 : vc0 + (c1 - c0)] + 1
    return EncodedObservation(ch0, mask, pos)


def decode_local_view(obs: EncodedObservation) -> np.ndarray:
    """Inverse of the channel-0 embedding: bit-exact local view at obs.pos."""
    view = np.full((2 * VIEW_RADIUS + 1,) * 2, int(TileKind.out_of_bounds), dtype=np.int16)
    pr, pc = obs.pos
    for dr in range(-VIEW_RADIUS, VIEW_RADIUS + 1):
        for dc in range(-VIEW_RADIUS, VIEW_RADIUS + 1):
            r, c = pr + dr, pc + dc
            if 0 <= r < SIZE and 0 <= c < SIZE:
                view[dr + VIEW_RADIUS, dc + VIEW_RADIUS] = obs.channel0[r, c] - 1
    return view


def _visible_cells(pos: Cell) -> list[Cell]:
    out = []
    for dr in range(-VIEW_RADIUS, VIEW_RADIUS + 1):
        for dc in range(-VIEW_RADIUS, VIEW_RADIUS + 1):
            r, c = pos[0] + dr, pos[1] + dc
            if 0 <= r < SIZE and 0 <= c < SIZE:
                out.append((r, c))
    return out


@dataclass
class FrameTrack:
    frames: list[EncodedObservation] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)
    positions: list[Cell] = field(default_factory=list)
    truncated: bool = False
    question_id: Optional[str] = None

    def __len__(self) -> int:
        return len(self.frames)


@dataclass
class DetectiveEpisode:
    world: WorldState
    question: Question
    log: Optional[EpisodeLog]
    vandal_cells: frozenset[Cell]
    assoc_kinds: frozenset[int]
    discovered: set[Cell]
    steps: int = 0
    cap: int = STEP_CAP
    done: bool = False
    completion_fired: bool = False
    relocated_spawn: bool = False
    track: FrameTrack = field(default_factory=FrameTrack)

    @property
    def detective(self) -> AgentState:
        return self.world.agents[DETECTIVE]


def _nearest_free_walkable(world: WorldState, start: Cell) -> Cell:
    from collections import deque

    def ok(cell: Cell) -> bool:
        t = world.tile(cell)
        return walkable(t) and t is not TileKind.lava and not world.occupied(cell)

    if ok(start):
        return start
    seen = {start}
    q = deque([start])
    while q:
        cur = q.popleft()
        for dr, dc in DELTAS.values():
            nxt = (cur[0] + dr, cur[1] + dc)
            if nxt in seen or not (0 <= nxt[0] < SIZE and 0 <= nxt[1] < SIZE):
                continue
            seen.add(nxt)
            if ok(nxt):
                return nxt
            q.append(nxt)
    raise ValueError("no walkable spawn cell found")


def spawn_detective(world: WorldState, question: Question, log: Optional[EpisodeLog] = None) -> DetectiveEpisode:
    """Place the detective at the start of the traces (the vandal's recorded
    starting cell, or the nearest free cell when that is blocked)."""
    w = world.copy()
    w.phase = "detective"
    start = (log.vandal_start if log and log.vandal_start else None) or w.vandal_start
    if start is None:
        raise ValueError("scene has no recorded vandal start")
    spawn = _nearest_free_walkable(w, start)
    w.agents[DETECTIVE] = AgentState(role=DETECTIVE, pos=spawn)

    vandal_cells = frozenset(log.stamped_cells()) if log is not None else _world_trace_cells(w)
    assoc_kinds: set[int] = set()
    if log is not None:
        t0, t1 = question.provenance
        for ev in log.events:
            if t0 <= ev.tick <= t1:
                assoc_kinds.update(int(k) for _c, k in ev.traces_stamped)

    ep = DetectiveEpisode(
        world=w,
        question=question,
        log=log,
        vandal_cells=vandal_cells,
        assoc_kinds=frozenset(assoc_kinds),
        discovered=set(),
        relocated_spawn=spawn != start,
    )
    obs = encode_observation(w, DETECTIVE, question.mask)
    ep.track.frames.append(obs)
    ep.track.positions.append(spawn)
    ep.track.question_id = question.id
    ep.discovered.update(c for c in _visible_cells(spawn) if c in ep.vandal_cells)
    return ep


def _world_trace_cells(world: WorldState) -> frozenset[Cell]:
    cells = np.argwhere(np.isin(world.grid, _TRACE_VALUES))
    return frozenset((int(r), int(c)) for r, c in cells)


def detective_step(ep: DetectiveEpisode, action: ActionKind | int) -> tuple[EncodedObservation, float, bool]:
    """Advance one detective action; returns (observation, reward, done)."""
    if ep.done:
        raise RuntimeError("episode is finished")
    action = ActionKind(action)
    apply_action(ep.world, DETECTIVE, action)

    pos = ep.detective.pos
    newly = [c for c in _visible_cells(pos) if c in ep.vandal_cells and c not in ep.discovered]
    reward = TIME_PENALTY
    if is_operating(action):
        reward += OPERATING_PENALTY
    for cell in newly:
        reward += ASSOCIATED_REWARD if _associated(ep, cell) else TRACE_REWARD
    ep.discovered.update(newly)
    if not ep.completion_fired and ep.vandal_cells and ep.discovered >= ep.vandal_cells:
        reward += COMPLETION_REWARD
        ep.completion_fired = True
    ep.steps += 1
    if ep.completion_fired or ep.steps >= ep.cap:
        ep.done = True

    obs = encode_observation(ep.world, DETECTIVE, ep.question.mask)
    ep.track.frames.append(obs)
    ep.track.rewards.append(reward)
    ep.track.positions.append(pos)
    return obs, reward, ep.done


def _associated(ep: DetectiveEpisode, cell: Cell) -> bool:
    """A trace cell bears on the question if it lies in the mask or its kind
    was stamped inside the question's provenance span."""
    if ep.question.mask[cell[0], cell[1]]:
        return True
    return int(ep.world.grid[cell[0], cell[1]]) in ep.assoc_kinds


# ---------------------------------------------------------------------------
# explorers


def random_explorer(ep: DetectiveEpisode, rng: Stream, max_steps: Optional[int] = None) -> FrameTrack:
    """Uniform random walk over the four moves."""
    moves = (ActionKind.move_up, ActionKind.move_down, ActionKind.move_left, ActionKind.move_right)
    budget = max_steps if max_steps is not None else ep.cap
    while not ep.done and ep.steps < budget:
        detective_step(ep, moves[rng.randint(0, 4)])
    return ep.track


def _follow(ep: DetectiveEpisode, target: Cell, max_leg: int = 64) -> bool:
    """Walk toward `target`, detouring around creatures; False if stuck."""
    blocked: set[Cell] = set()
    walked = 0
    while not ep.done and ep.detective.pos != target and walked < max_leg:
        path = pathfind(ep.world, ep.detective.pos, lambda c: c == target, avoid=frozenset(blocked))
        if not path.reachable or not path.moves:
            return False
        mv = path.moves[0]
        before = ep.detective.pos
        detective_step(ep, mv)
        walked += 1
        if ep.detective.pos == before:
            dr, dc = DELTAS[DIRECTION_FOR_MOVE[mv]]
            blocked.add((before[0] + dr, before[1] + dc))
    return ep.detective.pos == target


def ideal_explorer(ep: DetectiveEpisode) -> FrameTrack:
    """Replays the vandal's ground-truth trajectory waypoint by waypoint.

    Discovers every vandal trace cell when the cap allows; otherwise the
    track is flagged truncated.
    """
    if ep.log is None:
        raise ValueError("ideal explorer needs the ground-truth episode log")
    waypoints: list[Cell] = []
    for ev in ep.log.events:
        if not waypoints or waypoints[-1] != ev.pos:
            waypoints.append(ev.pos)
    for wp in waypoints:
        if ep.done:
            break
        if ep.world.tile(wp) is TileKind.lava or not walkable(ep.world.tile(wp)):
            # the vandal may have died in hazard; look at it from next door
            for dr, dc in DELTAS.values():
                cand = (wp[0] + dr, wp[1] + dc)
                if ep.world.in_bounds(cand) and walkable(ep.world.tile(cand)) and ep.world.tile(cand) is not TileKind.lava:
                    wp = cand
                    break
            else:
                continue
        _follow(ep, wp)
    if not ep.completion_fired:
        ep.track.truncated = True
    return ep.track


def greedy_trace_explorer(ep: DetectiveEpisode) -> FrameTrack:
    """Chases the nearest undiscovered mask cell, then sweeps the unseen
    frontier until the cap, full discovery, or nothing reachable remains."""
    seen: set[Cell] = set(_visible_cells(ep.detective.pos))
    mask_cells = {(int(r), int(c)) for r, c in np.argwhere(ep.question.mask)}
    written_off: set[Cell] = set()
    while not ep.done:
        pos = ep.detective.pos
        candidates = [c for c in mask_cells if c not in seen and c not in written_off]
        if candidates:
            target = min(candidates, key=lambda c: abs(c[0] - pos[0]) + abs(c[1] - pos[1]))
        else:
            target = _nearest_unseen(pos, seen, written_off)
            if target is None:
                break
        mark = len(ep.track.positions)
        goal_cell = _nearest_viewable(ep.world, pos, target)
        if goal_cell is None or not _follow(ep, goal_cell):
            written_off.add(target)
        for visited in ep.track.positions[mark:]:
            seen.update(_visible_cells(visited))
        seen.update(_visible_cells(ep.detective.pos))
    return ep.track


def _nearest_unseen(pos: Cell, seen: set[Cell], written_off: set[Cell]) -> Optional[Cell]:
    best, best_d = None, None
    for r in range(SIZE):
        for c in range(SIZE):
            if (r, c) in seen or (r, c) in written_off:
                continue
            d = abs(r - pos[0]) + abs(c - pos[1])
            if best_d is None or d < best_d:
                best, best_d = (r, c), d
    return best


def _nearest_viewable(world: WorldState, pos: Cell, target: Cell) -> Optional[Cell]:
    """A walkable cell from which `target` falls inside the 9x9 view."""
    path = pathfind(
        world,
        pos,
        lambda c: max(abs(c[0] - target[0]), abs(c[1] - target[1])) <= VIEW_RADIUS,
    )
    return path.dest if path.reachable else None


# ---------------------------------------------------------------------------
# keyframes


@dataclass(frozen=True)
class KeyframeConfig:
    k: int = 30

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


def frame_has_trace(obs: EncodedObservation) -> bool:
    vals = obs.channel0[obs.channel0 > 0] - 1
    return bool(np.isin(vals, _TRACE_VALUES).any())


def extract_keyframes(track: FrameTrack, cfg: KeyframeConfig | None = None) -> list[int]:
    """Indices of k frames uniformly spanning [first, last] frames with a
    trace in view; the whole window when it is short; empty when no trace
    was ever seen."""
    cfg = cfg or KeyframeConfig()
    flags = [frame_has_trace(f) for f in track.frames]
    if not any(flags):
        return []
    first = flags.index(True)
    last = len(flags) - 1 - flags[::-1].index(True)
    window = last - first + 1
    if window <= cfg.k:
        return list(range(first, last + 1))
    if cfg.k == 1:
        return [first]
    span = (last - first) / (cfg.k - 1)
    return [int(first + i * span + 0.5) for i in range(cfg.k)]
