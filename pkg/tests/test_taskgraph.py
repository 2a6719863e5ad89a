from __future__ import annotations

import collections

import pytest

from tracecraft.achievements import Achievement, GROUPS
from tracecraft.events import ActionEvent
from tracecraft.actions import ActionKind
from tracecraft.rng import Stream
from tracecraft.scenegen import generate_scene
from tracecraft.taskgraph import (
    EPSILON,
    OR_GROUPS,
    TASK_DEFS,
    TASK_WEIGHTS,
    TaskId,
    achievement_depth,
    goal_event_set,
    parse_goal,
    plan_library,
    policy_likelihood,
    serialize_graph,
    task_display,
)


def test_sixty_tasks_and_weighted_subset():
    assert len(TaskId) == 60
    assert len(TASK_DEFS) == 60
    assert len(TASK_WEIGHTS) == 25
    assert abs(sum(TASK_WEIGHTS.values()) - 100.0) < 1e-9


def test_thirty_nine_achievements_grouped():
    assert len(Achievement) == 39
    assert tuple(len(v) for v in GROUPS.values()) == (10, 12, 14, 3)


def test_dependency_graph_is_acyclic():
    # depth computation walks every rule edge and raises on a cycle
    for ach in Achievement:
        if ach is Achievement.make_fence:
            continue  # no rule: nothing in the action space produces a fence
        assert achievement_depth(ach) >= 0


def test_every_task_has_a_complete_expansion(world7):
    for task in TaskId:
        plans = plan_library(task)
        assert plans, task
        for plan in plans:
            assert plan.subgoals


def test_get_diamond_plan_contains_the_canonical_chain(world7):
    plan = parse_goal(TaskId.get_diamond, world7, Stream(1, "t"))
    seq = [s.value for s in plan.subgoals]
    expected = [
        "collect_wood",
        "place_table",
        "make_wood_pickaxe",
        "collect_stone",
        "collect_coal",
        "collect_iron",
        "place_furnace",
        "make_iron_pickaxe",
        "collect_diamond",
    ]
    it = iter(seq)
    assert all(any(x == want for x in it) for want in expected), seq


def test_leaf_task_single_subgoal(world7):
    plan = parse_goal(TaskId.get_wood, world7, Stream(1, "t"))
    assert [s.value for s in plan.subgoals] == ["collect_wood"]


def test_or_group_resolution_uniform_over_3000_draws(world7):
    rng = Stream(5, "draws")
    counts = collections.Counter()
    n = 3000
    for _ in range(n):
        plan = parse_goal(TaskId.have_meal, world7, rng)
        (group, pick, options) = plan.choice_trace[0]
        assert group == "meal" and options == 3
        counts[pick] += 1
    for pick in range(3):
        assert abs(counts[pick] / n - 1 / 3) < 0.03, counts


def test_parse_goal_deterministic_given_rng_state(world7):
    a = parse_goal(TaskId.defeat_zombie, world7, Stream(9, "x"))
    b = parse_goal(TaskId.defeat_zombie, world7, Stream(9, "x"))
    assert a.subgoals == b.subgoals and a.choice_trace == b.choice_trace


def test_serialized_graph_shape():
    doc = serialize_graph()
    assert doc["format"] == "tracecraft-taskgraph/1"
    assert len(doc["achievements"]) == 39
    assert len(doc["tasks"]) == 60
    assert all(e["qty"] > 0 for e in doc["edges"])
    assert set(doc["or_groups"]) == set(OR_GROUPS)
    # recipe spot-check straight against the crafting table
    iron = [e for e in doc["edges"] if e["from"] == "make_iron_pickaxe" and e["kind"] == "consumes"]
    assert {(e["to"], e["qty"]) for e in iron} == {("wood", 1), ("coal", 1), ("iron", 1)}


def _event(action: ActionKind, interrupt=None, **kw) -> ActionEvent:
    ev = ActionEvent(tick=1, actor="vandal", action=action, outcome="succeeded", **kw)
    ev.interrupt = interrupt
    return ev


def test_policy_likelihood_binary_values():
    from tracecraft.items import Item
    make_ip = _event(ActionKind.make_iron_pickaxe, item=Item.iron_pickaxe)
    assert policy_likelihood(TaskId.get_diamond, make_ip) == 1 - EPSILON
    assert policy_likelihood(TaskId.get_wood, make_ip) == EPSILON
    # survival interrupts are admissible under any goal
    snack = _event(ActionKind.eat_apple, interrupt="eat", item=Item.apple)
    assert policy_likelihood(TaskId.make_steak, snack) == 1 - EPSILON
    # navigation is neutral
    assert policy_likelihood(TaskId.get_wood, _event(ActionKind.move_up)) == 1 - EPSILON
    for goal in TaskId:
        assert policy_likelihood(goal, make_ip) in (EPSILON, 1 - EPSILON)


def test_goal_event_sets_monotone_under_consistency():
    # an event consistent with g and inconsistent with g2 never lowers the
    # g : g2 log-likelihood ratio
    import math

    from tracecraft.items import Item

    g, g2 = TaskId.get_diamond, TaskId.get_wood
    events = [
        _event(ActionKind.make_wood_pickaxe, item=Item.wood_pickaxe),
        _event(ActionKind.make_iron_pickaxe, item=Item.iron_pickaxe),
    ]
    ratio = 0.0
    for ev in events:
        delta = math.log(policy_likelihood(g, ev)) - math.log(policy_likelihood(g2, ev))
        assert delta >= 0
        ratio += delta
    assert ratio > 0
