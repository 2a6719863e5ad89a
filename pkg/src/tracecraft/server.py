"""Session server speaking wire protocol v1: newline-delimited JSON over TCP.

Each connection is one session with its own isolated world; sessions never
share mutable state, so any interleaving across sessions behaves like
serial execution. Every `act` is answered by exactly one observe + reward
pair. Protocol violations produce an `error` message; malformed framing
closes only the offending session.

Message kinds
    client -> server: hello, new_episode, act, answer, replay, bye
    server -> client: hello, question, observe, reward, result,
                      replay_chunk, error

Example exchange (one line per message):
    C: {"kind":"hello","seq":1}
    S: {"kind":"hello","seq":1,"session":"s1","protocol":"1"}
    C: {"kind":"new_episode","seq":2,"seed":7,"task":"get_diamond"}
    S: {"kind":"question","seq":2,...}
    S: {"kind":"observe","seq":3,...}
    C: {"kind":"act","seq":3,"action":"move_up"}
    S: {"kind":"observe","seq":4,...}
    S: {"kind":"reward","seq":5,"value":-0.1,"total":-0.1,"done":false}
"""

from __future__ import annotations

import asyncio
import json
import os
from dataclasses import dataclass, field
from typing import Optional

from .actions import ActionKind
from .corpus import load_manifest, load_questions
from .detective import DetectiveEpisode, detective_step, extract_keyframes, spawn_detective
from .questions import Question, generate_questions, mask_to_rle
from .rng import Stream
from .scenegen import generate_scene
from .storage import load_log, load_scene, load_track, save_track
from .taskgraph import TASK_WEIGHTS, TaskId
from .vandal import vandal_run
from .world import local_view

PROTOCOL_VERSION = "1"

CLIENT_KINDS = {"hello", "new_episode", "act", "answer", "replay", "bye"}


@dataclass
class ServeConfig:
    corpus_dir: Optional[str] = None
    data_dir: Optional[str] = None
    default_seed: int = 7

    def resolved_data_dir(self) -> str:
        return self.data_dir or os.environ.get("TRACECRAFT_DATA", ".tracecraft")


@dataclass
class _Session:
    sid: str
    writer: asyncio.StreamWriter
    seq_out: int = 0
    last_client_seq: int = 0
    episode: Optional[DetectiveEpisode] = None
    question: Optional[Question] = None
    total_reward: float = 0.0
    answered: bool = False

    async def send(self, kind: str, **payload) -> None:
        self.seq_out += 1
        msg = {"kind": kind, "seq": self.seq_out, "session": self.sid, **payload}
        self.writer.write(json.dumps(msg).encode() + b"\n")
        await self.writer.drain()


class TraceServer:
    def __init__(self, host: str, port: int, config: ServeConfig | None = None):
        self.host = host
        self.port = port
        self.config = config or ServeConfig()
        self._server: Optional[asyncio.AbstractServer] = None
        self._sessions: dict[str, _Session] = {}
        self._next_sid = 0
        self._corpus_cache: Optional[dict] = None

    # -- lifecycle ---------------------------------------------------------

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle, self.host, self.port)

    @property
    def bound_port(self) -> int:
        return self._server.sockets[0].getsockname()[1]

    async def stop(self) -> None:
        self._flush_replays()
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()

    async def serve_forever(self) -> None:
        if self._server is None:
            await self.start()
        async with self._server:
            await self._server.serve_forever()

    def _flush_replays(self) -> None:
        out = self.config.resolved_data_dir()
        for session in self._sessions.values():
            if session.episode is not None and len(session.episode.track) > 1:
                os.makedirs(out, exist_ok=True)
                path = os.path.join(out, f"session_{session.sid}.track.json")
                save_track(session.episode.track, path)

    # -- per-connection loop -------------------------------------------------

    async def _handle(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        self._next_sid += 1
        session = _Session(sid=f"s{self._next_sid}", writer=writer)
        self._sessions[session.sid] = session
        try:
            while True:
                line = await reader.readline()
                if not line:
                    break
                try:
                    msg = json.loads(line.decode())
                except json.JSONDecodeError as exc:
                    await session.send("error", code="malformed", message=f"bad JSON at byte {exc.pos}")
                    break  # framing is broken; close this session only
                if not await self._dispatch(session, msg):
                    break
        finally:
            if session.episode is not None and len(session.episode.track) > 1:
                out = self.config.resolved_data_dir()
                os.makedirs(out, exist_ok=True)
                save_track(session.episode.track, os.path.join(out, f"session_{session.sid}.track.json"))
            self._sessions.pop(session.sid, None)
            writer.close()
            try:
                await writer.wait_closed()
            except Exception:
                pass

    async def _dispatch(self, session: _Session, msg: dict) -> bool:
        kind = msg.get("kind")
        seq = msg.get("seq")
        if not isinstance(seq, int) or seq <= session.last_client_seq:
            await session.send("error", code="bad_seq", message="client seq must strictly increase")
            return False
        session.last_client_seq = seq
        if kind not in CLIENT_KINDS:
            await session.send("error", code="unknown_kind", message=f"no such message kind: {kind!r}")
            return True
        try:
            handler = getattr(self, f"_on_{kind}")
            return await handler(session, msg)
        except Exception as exc:
            await session.send("error", code="internal", message=str(exc))
            return True

    async def _on_hello(self, session: _Session, msg: dict) -> bool:
        await session.send("hello", protocol=PROTOCOL_VERSION)
        return True

    async def _on_bye(self, session: _Session, msg: dict) -> bool:
        return False

    async def _on_new_episode(self, session: _Session, msg: dict) -> bool:
        if "question_id" in msg:
            found = self._find_corpus_question(str(msg["question_id"]))
            if found is None:
                await session.send("error", code="not_found", message=f"question {msg['question_id']!r} not found")
                return True
            question, world, log = found
        else:
            seed = int(msg.get("seed", self.config.default_seed))
            task = msg.get("task")
            question, world, log = _fresh_episode(seed, task)
            if question is None:
                await session.send("error", code="no_questions", message="episode produced no questions")
                return True
        session.question = question
        session.episode = spawn_detective(world, question, log)
        session.total_reward = 0.0
        session.answered = False
        await session.send(
            "question",
            id=question.id,
            category=question.category,
            text=question.text,
            choices=list(question.choices),
            mask_rle=mask_to_rle(question.mask),
        )
        await self._send_observe(session)
        return True

    async def _send_observe(self, session: _Session) -> None:
        ep = session.episode
        view = local_view(ep.world, "detective")
        await session.send(
            "observe",
            view=[[int(v) for v in row] for row in view],
            pos=list(ep.detective.pos),
            facing=int(ep.detective.facing),
            steps=ep.steps,
            discovered=len(ep.discovered),
            trace_total=len(ep.vandal_cells),
        )

    async def _on_act(self, session: _Session, msg: dict) -> bool:
        if session.episode is None:
            await session.send("error", code="no_episode", message="new_episode first")
            return True
        if session.episode.done or session.answered:
            await session.send("error", code="episode_finished", message="episode is finished")
            return True
        action = msg.get("action")
        try:
            act = ActionKind[action] if isinstance(action, str) else ActionKind(int(action))
        except (KeyError, ValueError):
            await session.send("error", code="bad_action", message=f"unknown action {action!r}")
            return True
        _obs, reward, done = detective_step(session.episode, act)
        session.total_reward += reward
        await self._send_observe(session)
        await session.send("reward", value=round(reward, 6), total=round(session.total_reward, 6), done=done)
        return True

    async def _on_answer(self, session: _Session, msg: dict) -> bool:
        if session.episode is None or session.question is None:
            await session.send("error", code="no_episode", message="new_episode first")
            return True
        if session.answered:
            await session.send("error", code="already_answered", message="answer already submitted")
            return True
        try:
            choice = int(msg.get("choice"))
        except (TypeError, ValueError):
            await session.send("error", code="bad_choice", message="choice must be an integer 0..3")
            return True
        if not 0 <= choice < 4:
            await session.send("error", code="bad_choice", message="choice must be an integer 0..3")
            return True
        session.answered = True
        correct = choice == session.question.answer_index
        await session.send("result", correct=correct, answer_index=session.question.answer_index)
        return True

    async def _on_replay(self, session: _Session, msg: dict) -> bool:
        path = str(msg.get("bundle", ""))
        if self.config.corpus_dir and not os.path.isabs(path):
            path = os.path.join(self.config.corpus_dir, path)
        if not os.path.exists(path):
            await session.send("error", code="not_found", message=f"no bundle/track at {path}")
            return True
        track = load_track(path)
        keyframes = extract_keyframes(track)
        for i, frame in enumerate(track.frames):
            await session.send(
                "replay_chunk",
                index=i,
                total=len(track.frames),
                pos=list(frame.pos),
                reward=track.rewards[i - 1] if 0 < i <= len(track.rewards) else 0.0,
                keyframe=i in set(keyframes),
                done=i == len(track.frames) - 1,
            )
        return True

    # -- corpus lookup ---------------------------------------------------------

    def _find_corpus_question(self, qid: str):
        if not self.config.corpus_dir:
            return None
        if self._corpus_cache is None:
            manifest = load_manifest(os.path.join(self.config.corpus_dir, "manifest.json"))
            questions = {q.id: q for q in load_questions(self.config.corpus_dir)}
            self._corpus_cache = {"manifest": manifest, "questions": questions}
        questions = self._corpus_cache["questions"]
        if qid not in questions:
            return None
        q = questions[qid]
        scene = next(s for s in self._corpus_cache["manifest"]["scenes"] if s["scene_id"] == q.scene_id)
        world = load_scene(os.path.join(self.config.corpus_dir, scene["scene_path"]))
        log = load_log(os.path.join(self.config.corpus_dir, scene["log_path"]))
        return q, world, log


def _fresh_episode(seed: int, task: Optional[str]):
    stream = Stream(seed, "serve")
    world = generate_scene(seed)
    chosen = TaskId(task) if task else stream.weighted_choice(list(TASK_WEIGHTS), list(TASK_WEIGHTS.values()))
    world_after, log = vandal_run(world, chosen, stream.child("vandal"))
    questions = generate_questions(log, world_after, stream.child("questions"), scene_id=f"live_{seed}")
    if not questions:
        return None, None, None
    goal_qs = [q for q in questions if q.category == "Goal"]
    question = goal_qs[0] if goal_qs else questions[0]
    return question, world_after, log


async def serve(host: str, port: int, config: ServeConfig | None = None) -> TraceServer:
    server = TraceServer(host, port, config)
    await server.start()
    return server
