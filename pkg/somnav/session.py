"""
One robot in one world, driven cycle by cycle.

`Session` is shared by the headless runner and the live service: operator
messages are applied only at cycle boundaries, then (unless paused) one
perceive-decide-act cycle runs. The live service adds transport, nothing else.
"""
from __future__ import annotations
from dataclasses import dataclass, field
from typing import Any, Dict, Hashable, Iterable, List, Optional, Tuple
import json
import logging

import numpy as np

from .agent import AgentMode, CognitiveAgent, Decision, HelpRequest
from .errors import ProtocolError, SomnavError, UnknownSnapshot
from .som import as_input
from .transitions import Action
from .world import GridWorld, Pose, SensorModel, apply_action, sense

log = logging.getLogger(__name__)

CLIENT_TYPES = ("set_goal", "command", "resume", "pause", "save_snapshot", "freeze")

Message = Dict[str, Any]


class SnapshotStore:
    """Observations the operator kept as candidate goals, ids assigned 1, 2, ..."""

    def __init__(self):
        self._items: Dict[int, np.ndarray] = {}
        self._next_id = 1

    def save(self, observation: np.ndarray) -> int:
        sid = self._next_id
        self._next_id += 1
        self._items[sid] = np.array(observation, dtype=float)
        return sid

    def get(self, snapshot_id: int) -> np.ndarray:
        try:
            return self._items[snapshot_id].copy()
        except (KeyError, TypeError):
            raise UnknownSnapshot(f"no snapshot with id {snapshot_id!r}") from None

    def __contains__(self, snapshot_id) -> bool:
        return snapshot_id in self._items

    def __len__(self) -> int:
        return len(self._items)


def parse_message(text: str | bytes) -> Message:
    """Decode one client frame; raises ProtocolError with the wire code."""
    try:
        message = json.loads(text)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ProtocolError(f"frame is not valid JSON: {e}", code="malformed") from e
    if not isinstance(message, dict) or not isinstance(message.get("type"), str):
        raise ProtocolError("a message must be an object with a string 'type'", code="malformed")
    if message["type"] not in CLIENT_TYPES:
        raise ProtocolError(f"unknown message type {message['type']!r}", code="unknown_type")
    return message


def encode_message(message: Message) -> str:
    return json.dumps(message, separators=(",", ":"))


def help_message(help_request: HelpRequest) -> Message:
    return {"type": "help_request", "reason": help_request.reason.value,
            "at_node": help_request.at_node, "detail": help_request.detail}


def error_message(code: str, text: str) -> Message:
    return {"type": "error", "code": code, "message": text}


def decision_record(tick: int, decision: Decision) -> Dict[str, Any]:
    return {
        "tick": tick,
        "node": decision.node,
        "mode": decision.mode.value,
        "source": decision.source.value,
        "action": decision.action.wire if decision.action is not None else None,
        "help": decision.help.reason.value if decision.help is not None else None,
    }


@dataclass
class BoundaryResult:
    replies: List[Tuple[Hashable, List[Message]]] = field(default_factory=list)
    broadcasts: List[Message] = field(default_factory=list)
    decision: Optional[Decision] = None


class Session:
    def __init__(self, world: GridWorld, agent: CognitiveAgent, sensor: SensorModel,
                 pose: Pose | None = None, allow_vector_goals: bool = False):
        if sensor.dim != agent.som.dim:
            raise SomnavError(f"sensor yields {sensor.dim} values, map expects {agent.som.dim}",
                              code="invalid_config")
        self.world = world
        self.agent = agent
        self.sensor = sensor
        self.pose = pose or world.start
        self.allow_vector_goals = allow_vector_goals
        self.snapshots = SnapshotStore()
        self.paused = False
        self.tick = 0
        self.boundaries = 0
        self.last_observation: Optional[np.ndarray] = None
        self.decisions: List[Dict[str, Any]] = []

    def observe(self) -> np.ndarray:
        return sense(self.world, self.pose, self.sensor)

    def teleport(self, pose: Pose) -> int:
        """Move the robot by hand; the agent re-localizes without learning a transition."""
        self.pose = pose
        self.last_observation = self.observe()
        return self.agent.reset_position(self.last_observation)

    # -- operator messages -------------------------------------------------

    def apply(self, message: Message) -> Tuple[List[Message], List[Message]]:
        """Apply one client message. Returns (replies to the sender, broadcasts)."""
        replies: List[Message] = []
        broadcasts: List[Message] = []
        of_seq = message.get("seq")
        kind = message.get("type")
        try:
            if kind == "command":
                try:
                    action = Action.parse(message.get("action"))
                except ValueError as e:
                    raise ProtocolError(str(e), code="invalid_action") from e
                self.agent.override(action)
            elif kind == "set_goal":
                goal = self._goal_observation(message)
                self.agent.set_goal(goal)
                if self.agent.mode is AgentMode.AWAITING_HELP and self.agent.pending_help:
                    broadcasts.append(help_message(self.agent.pending_help))
            elif kind == "pause":
                self.paused = True
            elif kind == "resume":
                self.paused = False
            elif kind == "save_snapshot":
                if self.last_observation is None:
                    self.last_observation = self.observe()
                sid = self.snapshots.save(self.last_observation)
                replies.append({"type": "snapshot_saved", "snapshot_id": sid})
            elif kind == "freeze":
                self.agent.freeze_memory()
            else:
                raise ProtocolError(f"unknown message type {kind!r}", code="unknown_type")
        except SomnavError as e:
            log.info("rejected %s message: %s", kind, e)
            return [dict(error_message(e.code, str(e)), of_seq=of_seq)], []
        return [{"type": "ack", "of_seq": of_seq}] + replies, broadcasts

    def _goal_observation(self, message: Message) -> np.ndarray:
        if "snapshot_id" in message:
            sid = message["snapshot_id"]
            if isinstance(sid, bool) or not isinstance(sid, int):
                raise UnknownSnapshot(f"no snapshot with id {sid!r}")
            return self.snapshots.get(sid)
        if "vector" in message:
            if not self.allow_vector_goals:
                raise ProtocolError("vector goals are disabled on this server", code="vector_goals_disabled")
            try:
                return as_input(message["vector"], self.agent.som.dim)
            except (TypeError, ValueError) as e:
                raise ProtocolError(f"bad goal vector: {e}", code="invalid_vector") from e
        raise ProtocolError("set_goal needs a snapshot_id", code="missing_field")

    # -- the cycle ---------------------------------------------------------

    def cycle(self) -> Tuple[Decision, List[Message]]:
        observation = self.observe()
        self.last_observation = observation
        decision = self.agent.step(observation)
        if decision.action is not None:
            self.pose = apply_action(self.world, self.pose, decision.action)
        self.tick += 1
        self.decisions.append(decision_record(self.tick, decision))
        out = []
        if decision.help is not None:
            out.append(help_message(decision.help))
        out.append(self.state_message(observation))
        return decision, out

    def boundary(self, inbox: Iterable[Tuple[Hashable, Message]] = ()) -> BoundaryResult:
        """Apply queued messages in arrival order, then run one cycle unless paused."""
        result = BoundaryResult()
        for client, message in inbox:
            replies, broadcasts = self.apply(message)
            result.replies.append((client, replies))
            result.broadcasts.extend(broadcasts)
        if not self.paused:
            result.decision, messages = self.cycle()
            result.broadcasts.extend(messages)
        self.boundaries += 1
        return result

    def state_message(self, observation: np.ndarray | None = None) -> Message:
        state = self.agent.current_state()
        goal = state.goal
        p = state.last_plan
        if observation is None:
            observation = self.last_observation if self.last_observation is not None else self.observe()
        return {
            "type": "state",
            "tick": self.tick,
            "pose": self.pose.to_dict(),
            "mode": state.mode.value,
            "current_node": state.current_node,
            "goal_node": goal.goal_node if goal else None,
            "plan_nodes": list(p.nodes) if p else [],
            "plan_actions": [a.wire for a in p.actions] if p else [],
            "steps_taken": goal.steps_taken if goal else 0,
            "initial_estimate": goal.initial_estimate if goal else 0,
            "observation": [float(v) for v in observation],
        }

    def hello_message(self) -> Message:
        """Static layout a console needs to draw the world and the map grid."""
        c = self.agent.som.config
        return {
            "type": "hello",
            "world": self.world.render_text().split("\n"),
            "som_width": c.width,
            "som_height": c.height,
            "sensor": self.sensor.kind,
        }


def run_script(session: Session, timeline: List[Dict[str, Any]], boundaries: int) -> List[Dict[str, Any]]:
    """Drive a session headlessly: timeline entries {"at": k, "message": {...}}
    are applied at boundary k. Returns the decision records."""
    by_boundary: Dict[int, List[Message]] = {}
    for entry in timeline:
        by_boundary.setdefault(int(entry["at"]), []).append(entry["message"])
    for k in range(boundaries):
        inbox = [("script", m) for m in by_boundary.get(k, [])]
        result = session.boundary(inbox)
        for _, replies in result.replies:
            for reply in replies:
                if reply["type"] == "error":
                    log.warning("scripted message at boundary %d rejected: %s", k, reply["message"])
    return session.decisions
