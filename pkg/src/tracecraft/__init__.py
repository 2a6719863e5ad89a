"""tracecraft: a deterministic detective-game gridworld with abductive QA.

A scripted vandal executes one of 60 tasks and leaves persistent traces; a
question generator turns the episode log into multiple-choice questions; a
detective explores under a reward that values question-relevant evidence;
and a Bayesian reasoner reconstructs the trajectory to infer the goal.
"""

from .achievements import Achievement, detect_achievements
from .actions import ActionKind
from .events import ActionEvent, EpisodeLog
from .items import Item
from .rng import Stream
from .scenegen import SceneConfig, SceneGenerationError, generate_scene
from .taskgraph import PlanningError, SubgoalPlan, TaskId, parse_goal, plan_library
from .tiles import Direction, TileKind, is_trace, walkable
from .vandal import vandal_run
from .world import AgentState, Creature, WorldState, local_view, step

__all__ = [
    "Achievement",
    "ActionEvent",
    "ActionKind",
    "AgentState",
    "Creature",
    "Direction",
    "EpisodeLog",
    "Item",
    "PlanningError",
    "SceneConfig",
    "SceneGenerationError",
    "Stream",
    "SubgoalPlan",
    "TaskId",
    "TileKind",
    "WorldState",
    "detect_achievements",
    "generate_scene",
    "is_trace",
    "local_view",
    "parse_goal",
    "plan_library",
    "step",
    "vandal_run",
    "walkable",
]

__version__ = "0.1.0"
