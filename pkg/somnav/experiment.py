"""
Headless experiments: seeded exploration with a quantization-error curve,
then goal-seeking trials from random starts or a scripted operator timeline.
"""
from __future__ import annotations
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np

from .agent import AgentMode, CognitiveAgent
from .config import ExperimentConfig
from .errors import InvalidConfig
from .io import AgentSettings
from .report import summarize_trials
from .session import Session, run_script
from .som import SomMap, new_som, quantization_error
from .transitions import TransitionModel
from .world import GridWorld, sense

log = logging.getLogger(__name__)


def probe_observations(world: GridWorld, config: ExperimentConfig) -> List[np.ndarray]:
    """One observation per free pose; the fixed set the error curve is measured on."""
    return [sense(world, pose, config.sensor) for pose in world.free_poses()]


def build_agent(config: ExperimentConfig,
                memory: Tuple[SomMap, TransitionModel, AgentSettings] | None = None) -> CognitiveAgent:
    if memory is None:
        som = new_som(config.som)
        model = TransitionModel(som.node_count, config.min_edge_count, som.version, config.edge_cost)
        return CognitiveAgent(som, model, config.agent)
    som, model, settings = memory
    if som.dim != config.sensor.dim:
        raise InvalidConfig(f"memory has dim {som.dim}, sensor {config.sensor.kind} yields {config.sensor.dim}")
    return CognitiveAgent(som, model, settings.config, frozen=settings.frozen)


def explore(session: Session, steps: int, probes: List[np.ndarray], qe_every: int) -> List[Dict[str, Any]]:
    som = session.agent.som
    curve = [{"step": 0, "quantization_error": quantization_error(som, probes)}]
    for step in range(1, steps + 1):
        session.cycle()
        if step % qe_every == 0 or step == steps:
            curve.append({"step": step, "quantization_error": quantization_error(som, probes)})
    log.info("explored %d steps; quantization error %.4f -> %.4f",
             steps, curve[0]["quantization_error"], curve[-1]["quantization_error"])
    return curve


def run_trials(session: Session, goal: np.ndarray, trials: int,
               rng: np.random.Generator) -> List[Dict[str, Any]]:
    """Goal-seeking from random starts until the agent stops (goal or help)."""
    agent = session.agent
    rows = []
    for i in range(trials):
        start = session.world.random_pose(rng)
        start_node = session.teleport(start)
        g = agent.set_goal(goal)
        limit = 4 * (g.initial_estimate + 1) * max(1, int(np.ceil(agent.config.budget_factor))) + 8
        for _ in range(limit):
            decision, _ = session.cycle()
            if decision.action is None:
                break
        help_request = agent.pending_help
        rows.append({
            "trial": i,
            "start_row": start.row,
            "start_col": start.col,
            "start_heading": start.heading.name,
            "start_node": start_node,
            "goal_node": g.goal_node,
            "initial_estimate": g.initial_estimate,
            "steps_taken": agent.goal.steps_taken,
            "reached": agent.mode is AgentMode.IDLE,
            "help": help_request.reason.value if help_request and agent.mode is AgentMode.AWAITING_HELP else None,
        })
    return rows


def run_headless(world: GridWorld, config: ExperimentConfig, steps: int,
                 memory: Tuple[SomMap, TransitionModel, AgentSettings] | None = None,
                 goal: Optional[np.ndarray] = None,
                 script: Optional[List[Dict[str, Any]]] = None) -> Tuple[Dict[str, Any], CognitiveAgent]:
    """Explore for `steps` cycles (or play `script` for `steps` boundaries),
    freeze, then run `config.trials` goal-seeking trials when a goal is given."""
    config.validate()
    agent = build_agent(config, memory)
    session = Session(world, agent, config.sensor)
    probes = probe_observations(world, config)
    report: Dict[str, Any] = {
        "seed": config.seed,
        "sensor": config.sensor.kind,
        "quantizer": agent.som.config.quantizer,
        "grid": [config.som.width, config.som.height] if memory is None
                else [agent.som.config.width, agent.som.config.height],
        "steps": steps,
    }
    if script is not None:
        q0 = quantization_error(agent.som, probes)
        report["decisions"] = run_script(session, script, steps)
        report["quantization_error"] = [
            {"step": 0, "quantization_error": q0},
            {"step": session.tick, "quantization_error": quantization_error(agent.som, probes)},
        ]
    else:
        report["quantization_error"] = explore(session, steps, probes, config.qe_every)
    agent.freeze_memory()
    report["chain"] = {
        "observations": agent.model.total_observations,
        "edges": sum(len(v) for v in agent.model.edges().values()),
        "som_version": agent.som.version,
        "min_edge_count": agent.model.min_edge_count,
        "edge_cost": agent.model.edge_cost,
    }
    if goal is not None and script is None and config.trials > 0:
        rng = np.random.default_rng([config.seed, 1])
        rows = run_trials(session, goal, config.trials, rng)
        report["trials"] = rows
        report["summary"] = summarize_trials(rows)
    return report, agent
