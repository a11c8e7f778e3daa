"""
somnav: associative-memory navigation with a human in the loop

Sensory memories live in a Self-Organizing Map, observed transitions between
map nodes form a Markov chain, and actions are selected by shortest-path
planning through that chain in time bounded by the map size. A grid-world
simulator stands in for the robot; operators give goals by snapshot, answer
help requests and override single decision cycles over a websocket service.
"""

__version__ = "1.0.0"
__author__ = "somnav developers"

from .som import (SomConfig, SomMap, new_som, as_input, activate, cardinal_neighbors,
                  train_step, quantization_error, node_index, node_coords)
from .metrics import distance
from .transitions import (Action, Plan, TransitionModel, record_transition, action_probability,
                          best_action, plan, reindex_guard)
from .agent import (AgentConfig, AgentMode, CognitiveAgent, Decision, Goal, HelpReason,
                    HelpRequest, Source, StateSnapshot)
from .world import GridWorld, Heading, Pose, SensorModel, apply_action, load_world, sense
from .io import load_memory, save_memory, load_world_file
from .session import Session, SnapshotStore
from .experiment import run_headless
from .cli import main

__all__ = [
    "SomConfig", "SomMap", "new_som", "as_input", "activate", "cardinal_neighbors",
    "train_step", "quantization_error", "node_index", "node_coords", "distance",
    "Action", "Plan", "TransitionModel", "record_transition", "action_probability",
    "best_action", "plan", "reindex_guard",
    "AgentConfig", "AgentMode", "CognitiveAgent", "Decision", "Goal", "HelpReason",
    "HelpRequest", "Source", "StateSnapshot",
    "GridWorld", "Heading", "Pose", "SensorModel", "apply_action", "load_world", "sense",
    "load_memory", "save_memory", "load_world_file",
    "Session", "SnapshotStore",
    "run_headless",
    "main",
]
