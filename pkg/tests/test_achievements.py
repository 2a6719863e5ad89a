from __future__ import annotations

from tracecraft.achievements import Achievement, GROUPS, detect_achievements
from tracecraft.events import EpisodeLog
from tracecraft.rng import Stream
from tracecraft.taskgraph import TaskId
from tracecraft.vandal import vandal_run


def test_cardinality_and_groups():
    assert len(Achievement) == 39
    assert len(GROUPS["survive"]) == 10
    assert len(GROUPS["collect"]) == 12
    assert len(GROUPS["make"]) == 14
    assert len(GROUPS["defeat"]) == 3


def test_empty_log_yields_empty_set():
    assert detect_achievements(EpisodeLog()) == set()


def test_detect_is_idempotent(diamond_episode):
    _w, log = diamond_episode
    once = detect_achievements(log)
    twice = detect_achievements(log)
    assert once == twice


def test_collect_diamond_detected(diamond_episode):
    _w, log = diamond_episode
    assert Achievement.collect_diamond in detect_achievements(log)


def test_get_diamond_walkthrough_superset(diamond_episode):
    _w, log = diamond_episode
    required = {
        Achievement.collect_wood,
        Achievement.place_table,
        Achievement.make_wood_pickaxe,
        Achievement.collect_stone,
        Achievement.collect_coal,
        Achievement.collect_iron,
        Achievement.place_furnace,
        Achievement.make_iron_pickaxe,
        Achievement.collect_diamond,
    }
    assert required <= detect_achievements(log)


def test_event_tags_match_scan(diamond_episode):
    """First-fire tags on events agree with the independent log scan."""
    _w, log = diamond_episode
    tagged = {Achievement(a) for ev in log.events for a in ev.achievements}
    assert tagged == detect_achievements(log)


def test_achievements_fire_at_most_once_in_tags(world7):
    _w, log = vandal_run(world7, TaskId.lumberjack, Stream(1, "t"))
    seen: list[str] = []
    for ev in log.events:
        for a in ev.achievements:
            assert a not in seen, f"{a} tagged twice"
            seen.append(a)
