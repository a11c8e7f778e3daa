"""
The decision cycle: perceive, activate, (train), plan, act.

The agent explores with a seeded random policy while its map is plastic,
freezes the map after `plastic_steps` cycles, and from then on can seek a
goal given as an observation. Each seeking cycle replans from scratch and
executes only the first action. It stops and asks for help when no path
exists or when it has spent more actions than its budget allows. A human
command replaces exactly one cycle's action.
"""
from __future__ import annotations
from dataclasses import dataclass, replace
from enum import Enum
from typing import Optional, Tuple
import copy
import logging
import math
import threading

import numpy as np

from .errors import InvalidConfig, MemoryNotFrozen, NoPath, SomnavError
from .som import NodeId, SomMap, activate, as_input, train_step
from .transitions import MOTION_ACTIONS, Action, Plan, TransitionModel, plan, record_transition

log = logging.getLogger(__name__)


class AgentMode(str, Enum):
    EXPLORING = "exploring"
    SEEKING = "seeking"
    AWAITING_HELP = "awaiting_help"
    OVERRIDDEN = "overridden"
    IDLE = "idle"


class Source(str, Enum):
    AUTONOMOUS = "autonomous"
    HUMAN = "human"


class HelpReason(str, Enum):
    ESTIMATE_EXCEEDED = "estimate_exceeded"
    NO_PATH = "no_path"


@dataclass(frozen=True)
class HelpRequest:
    reason: HelpReason
    at_node: NodeId
    detail: str


@dataclass(frozen=True)
class Goal:
    snapshot: Tuple[float, ...]
    goal_node: NodeId
    initial_estimate: int
    steps_taken: int = 0
    # False until some plan to goal_node has been found
    estimated: bool = True


@dataclass(frozen=True)
class Decision:
    action: Optional[Action]
    source: Source
    node: NodeId
    mode: AgentMode
    plan: Optional[Plan] = None
    help: Optional[HelpRequest] = None


@dataclass(frozen=True)
class AgentConfig:
    budget_factor: float = 1.0
    plastic_steps: int = 1500
    exploration_seed: int = 0

    def validate(self) -> "AgentConfig":
        if not self.budget_factor >= 1.0:
            raise InvalidConfig(f"budget_factor must be >= 1, got {self.budget_factor}")
        if self.plastic_steps < 0:
            raise InvalidConfig(f"plastic_steps must be >= 0, got {self.plastic_steps}")
        return self


@dataclass(frozen=True)
class StateSnapshot:
    mode: AgentMode
    current_node: Optional[NodeId]
    goal: Optional[Goal]
    last_plan: Optional[Plan]
    pending_help: Optional[HelpRequest]
    pending_override: Optional[Action]
    lifetime_steps: int
    frozen: bool
    som_version: int
    chain_observations: int
    distance_evaluations: int


@dataclass
class AgentMemory:
    """Everything future decisions depend on besides the world itself."""
    som: SomMap
    model: TransitionModel
    rng_state: dict
    lifetime_steps: int
    frozen: bool
    current_node: Optional[NodeId]
    prev_node: Optional[NodeId]
    last_action: Optional[Action]


class CognitiveAgent:
    def __init__(self, som: SomMap, model: TransitionModel | None = None,
                 config: AgentConfig | None = None, frozen: bool = False):
        self.config = (config or AgentConfig()).validate()
        if model is None:
            model = TransitionModel(som.node_count, som_version=som.version)
        if model.node_count != som.node_count:
            raise InvalidConfig(
                f"transition model has {model.node_count} nodes, map has {som.node_count}")
        self.som = som
        self.model = model
        self.frozen = frozen
        self.mode = AgentMode.EXPLORING
        self.goal: Optional[Goal] = None
        self.current_node: Optional[NodeId] = None
        self.last_plan: Optional[Plan] = None
        self.pending_help: Optional[HelpRequest] = None
        self.lifetime_steps = 0
        self._rng = np.random.default_rng(self.config.exploration_seed)
        self._prev_node: Optional[NodeId] = None
        self._last_action: Optional[Action] = None
        self._resume_mode = AgentMode.EXPLORING
        self._help_emitted = set()
        self._override: Optional[Action] = None
        self._mailbox = threading.Lock()

    # -- mailbox -----------------------------------------------------------

    def override(self, action: Action | str) -> bool:
        """Replace the next cycle's action. Last writer wins until that cycle runs."""
        action = Action.parse(action)
        with self._mailbox:
            self._override = action
        log.info("override queued: %s", action.wire)
        return True

    def _take_override(self) -> Optional[Action]:
        with self._mailbox:
            action, self._override = self._override, None
        return action

    # -- phase control -----------------------------------------------------

    def freeze_memory(self) -> bool:
        """Stop SOM training and start the chain afresh against stable nodes."""
        if self.frozen:
            return True
        self.frozen = True
        self.model.flush(self.som.version)
        self._prev_node = None
        self._last_action = None
        log.info("memory frozen at som version %d after %d steps",
                 self.som.version, self.lifetime_steps)
        return True

    def set_goal(self, snapshot) -> Goal:
        if not self.frozen:
            raise MemoryNotFrozen("freeze the memory before setting a goal")
        x = as_input(snapshot, self.som.dim)
        if self.current_node is None:
            raise SomnavError("the agent has not observed anything yet", code="no_observation")
        goal_node = activate(self.som, x)
        self._help_emitted.clear()
        self.pending_help = None
        self.mode = AgentMode.SEEKING
        try:
            p = plan(self.model, self.current_node, goal_node)
        except NoPath:
            self.goal = Goal(tuple(float(v) for v in x), goal_node, 0, estimated=False)
            self.last_plan = None
            self._request_help(HelpReason.NO_PATH, self.current_node,
                               f"no remembered route from node {self.current_node} to goal node {goal_node}")
            return self.goal
        self.goal = Goal(tuple(float(v) for v in x), goal_node, p.estimate)
        self.last_plan = p
        log.info("goal set: node %d, estimate %d actions", goal_node, p.estimate)
        return self.goal

    def reset_position(self, observation) -> NodeId:
        """Re-localize after the robot was moved by hand; no transition is recorded."""
        x = as_input(observation, self.som.dim)
        self.current_node = activate(self.som, x)
        self._prev_node = None
        self._last_action = None
        if self.mode is AgentMode.OVERRIDDEN:
            self.mode = self._resume_mode
        return self.current_node

    # -- the decision cycle ------------------------------------------------

    def step(self, observation) -> Decision:
        x = as_input(observation, self.som.dim)
        node = activate(self.som, x)
        if self.mode is AgentMode.OVERRIDDEN:
            self.mode = self._resume_mode
        if self._prev_node is not None and self._last_action is not None:
            record_transition(self.model, self._prev_node, self._last_action, node)
        self.current_node = node
        cycle = self.lifetime_steps
        self.lifetime_steps += 1
        if not self.frozen:
            if cycle < self.config.plastic_steps:
                train_step(self.som, x)
            else:
                self.freeze_memory()

        human = self._take_override()
        if human is not None:
            decision = self._human_cycle(node, human)
        elif self.mode is AgentMode.EXPLORING:
            action = MOTION_ACTIONS[int(self._rng.integers(len(MOTION_ACTIONS)))]
            decision = Decision(action, Source.AUTONOMOUS, node, self.mode)
        elif self.mode is AgentMode.SEEKING:
            decision = self._seek(node)
        else:
            decision = Decision(None, Source.AUTONOMOUS, node, self.mode)
        log.debug("cycle %d: node %d, %s -> %s", cycle, node, decision.mode.value,
                  decision.action.wire if decision.action is not None else "none")
        self._prev_node = node
        self._last_action = decision.action
        return decision

    def _human_cycle(self, node: NodeId, action: Action) -> Decision:
        resume = self.mode
        if resume is AgentMode.AWAITING_HELP:
            resume = AgentMode.SEEKING
            self.pending_help = None
            # the operator stepped in: a fresh budget window, measured against
            # the estimate taken when the goal was set
            self._help_emitted.discard(HelpReason.ESTIMATE_EXCEEDED)
            if self.goal is not None:
                self.goal = replace(self.goal, steps_taken=0)
        self._resume_mode = resume
        self.mode = AgentMode.OVERRIDDEN
        log.info("human action %s executed at node %d", action.wire, node)
        return Decision(action, Source.HUMAN, node, self.mode)

    def _budget(self) -> int:
        return math.ceil(round(self.config.budget_factor * self.goal.initial_estimate, 9))

    def _seek(self, node: NodeId) -> Decision:
        goal = self.goal
        if node == goal.goal_node:
            self.mode = AgentMode.IDLE
            self.last_plan = Plan((node,), ())
            log.info("goal node %d reached after %d actions", node, goal.steps_taken)
            return Decision(None, Source.AUTONOMOUS, node, self.mode, plan=self.last_plan)
        try:
            p = plan(self.model, node, goal.goal_node)
        except NoPath:
            self.last_plan = None
            return self._request_help(
                HelpReason.NO_PATH, node,
                f"no remembered route from node {node} to goal node {goal.goal_node}")
        self._help_emitted.discard(HelpReason.NO_PATH)
        self.last_plan = p
        if not goal.estimated:
            goal = self.goal = replace(goal, initial_estimate=p.estimate, estimated=True)
        if goal.steps_taken > self._budget():
            return self._request_help(
                HelpReason.ESTIMATE_EXCEEDED, node,
                f"{goal.steps_taken} actions taken, estimate was {goal.initial_estimate}")
        self.goal = replace(goal, steps_taken=goal.steps_taken + 1)
        return Decision(p.first_action, Source.AUTONOMOUS, node, self.mode, plan=p)

    def _request_help(self, reason: HelpReason, node: NodeId, detail: str) -> Decision:
        self.mode = AgentMode.AWAITING_HELP
        help_request = None
        if reason not in self._help_emitted:
            self._help_emitted.add(reason)
            help_request = HelpRequest(reason, node, detail)
            self.pending_help = help_request
            log.warning("help requested (%s) at node %d: %s", reason.value, node, detail)
        return Decision(None, Source.AUTONOMOUS, node, self.mode,
                        plan=self.last_plan, help=help_request)

    # -- observability and transplant ------------------------------------

    def current_state(self) -> StateSnapshot:
        with self._mailbox:
            pending = self._override
        return StateSnapshot(
            mode=self.mode,
            current_node=self.current_node,
            goal=self.goal,
            last_plan=self.last_plan,
            pending_help=self.pending_help,
            pending_override=pending,
            lifetime_steps=self.lifetime_steps,
            frozen=self.frozen,
            som_version=self.som.version,
            chain_observations=self.model.total_observations,
            distance_evaluations=self.som.distance_evaluations,
        )

    def memory(self) -> AgentMemory:
        return AgentMemory(
            som=self.som.copy(),
            model=self.model.copy(),
            rng_state=copy.deepcopy(self._rng.bit_generator.state),
            lifetime_steps=self.lifetime_steps,
            frozen=self.frozen,
            current_node=self.current_node,
            prev_node=self._prev_node,
            last_action=self._last_action,
        )

    @classmethod
    def restore(cls, memory: AgentMemory, config: AgentConfig | None = None) -> "CognitiveAgent":
        agent = cls(memory.som.copy(), memory.model.copy(), config, frozen=memory.frozen)
        agent._rng.bit_generator.state = copy.deepcopy(memory.rng_state)
        agent.lifetime_steps = memory.lifetime_steps
        agent.current_node = memory.current_node
        agent._prev_node = memory.prev_node
        agent._last_action = memory.last_action
        return agent

    def __repr__(self) -> str:
        return (f"CognitiveAgent(mode={self.mode.value}, node={self.current_node}, "
                f"frozen={self.frozen}, steps={self.lifetime_steps})")
