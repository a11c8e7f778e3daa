from pathlib import Path

import numpy as np
import pytest

from somnav.agent import AgentConfig, AgentMode, CognitiveAgent, HelpReason, Source
from somnav.errors import DimensionMismatch, InvalidConfig, MemoryNotFrozen, SomnavError
from somnav.session import Session
from somnav.som import SomConfig, SomMap, new_som
from somnav.transitions import Action, TransitionModel, record_transition
from somnav.world import SensorModel, load_world

F, L, R = Action.FORWARD, Action.SPIN_LEFT, Action.SPIN_RIGHT
WORLDS = Path(__file__).resolve().parent.parent / "worlds"


def _line_agent(n, edges=(), budget=1.0, frozen=True, plastic=1500):
    """n nodes on a 1-D map; observation k/(n-1) activates node k exactly."""
    som = SomMap(SomConfig(n, 1, 1), np.array([[k / (n - 1)] for k in range(n)]))
    model = TransitionModel(n)
    for src, action, dst in edges:
        record_transition(model, src, action, dst)
    config = AgentConfig(budget_factor=budget, plastic_steps=plastic)
    return CognitiveAgent(som, model, config, frozen=frozen)


def _obs(k, n):
    return np.array([k / (n - 1)])


def _chain(n):
    return [(k, F, k + 1) for k in range(n - 1)]


def test_fresh_agent_state():
    agent = _line_agent(3, frozen=False)
    state = agent.current_state()
    assert state.mode is AgentMode.EXPLORING
    assert state.goal is None
    assert state.current_node is None
    assert state == agent.current_state()


def test_config_validation():
    with pytest.raises(InvalidConfig):
        AgentConfig(budget_factor=0.5).validate()
    with pytest.raises(InvalidConfig):
        AgentConfig(plastic_steps=-1).validate()
    som = new_som(SomConfig(2, 2, 3))
    with pytest.raises(InvalidConfig):
        CognitiveAgent(som, TransitionModel(5))


def test_step_rejects_wrong_dimension():
    agent = _line_agent(3)
    with pytest.raises(DimensionMismatch):
        agent.step(np.array([0.1, 0.2]))


def test_set_goal_needs_frozen_memory_and_an_observation():
    agent = _line_agent(3, frozen=False)
    with pytest.raises(MemoryNotFrozen):
        agent.set_goal(_obs(1, 3))
    agent = _line_agent(3)
    with pytest.raises(SomnavError) as e:
        agent.set_goal(_obs(1, 3))
    assert e.value.code == "no_observation"


def test_goal_at_current_node_is_reached_at_once():
    agent = _line_agent(3, _chain(3))
    agent.reset_position(_obs(2, 3))
    goal = agent.set_goal(_obs(2, 3))
    assert goal.initial_estimate == 0
    d = agent.step(_obs(2, 3))
    assert d.action is None
    assert d.source is Source.AUTONOMOUS
    assert agent.mode is AgentMode.IDLE


def test_seeking_executes_only_the_first_action():
    agent = _line_agent(3, [(0, F, 1), (1, L, 2)])
    agent.reset_position(_obs(0, 3))
    assert agent.set_goal(_obs(2, 3)).initial_estimate == 2
    d = agent.step(_obs(0, 3))
    assert d.action is F
    assert d.plan.actions == (F, L)
    assert agent.goal.steps_taken == 1
    d = agent.step(_obs(1, 3))
    assert d.action is L
    assert d.plan.nodes == (1, 2)
    d = agent.step(_obs(2, 3))
    assert d.action is None
    assert agent.mode is AgentMode.IDLE
    assert agent.goal.steps_taken == 2


def test_initial_estimate_is_shortest_path_length():
    agent = _line_agent(6, _chain(6) + [(5, F, 0)])
    agent.reset_position(_obs(0, 6))
    assert agent.set_goal(_obs(3, 6)).initial_estimate == 3


def test_goal_determinism():
    agent = _line_agent(4, _chain(4))
    agent.reset_position(_obs(0, 4))
    first = agent.set_goal(_obs(3, 4))
    second = agent.set_goal(_obs(3, 4))
    assert first.goal_node == second.goal_node == 3


def test_budget_exceeded_requests_help_once():
    agent = _line_agent(5, _chain(5))
    agent.reset_position(_obs(0, 5))
    assert agent.set_goal(_obs(4, 5)).initial_estimate == 4
    # the robot is stuck: every cycle it still perceives node 0
    for taken in range(5):
        assert agent.goal.steps_taken == taken
        d = agent.step(_obs(0, 5))
        assert d.action is F
    assert agent.goal.steps_taken == 5
    d = agent.step(_obs(0, 5))
    assert d.action is None
    assert d.help.reason is HelpReason.ESTIMATE_EXCEEDED
    assert agent.mode is AgentMode.AWAITING_HELP
    for _ in range(3):
        d = agent.step(_obs(0, 5))
        assert d.action is None
        assert d.help is None
    assert agent.current_state().pending_help.reason is HelpReason.ESTIMATE_EXCEEDED


def test_budget_factor_rounds_up():
    agent = _line_agent(4, _chain(4), budget=1.5)
    agent.reset_position(_obs(0, 4))
    agent.set_goal(_obs(3, 4))
    actions = 0
    while True:
        d = agent.step(_obs(0, 4))
        if d.action is None:
            break
        actions += 1
    # ceil(1.5 * 3) = 5, help fires once 6 actions were spent
    assert actions == 6
    assert d.help.reason is HelpReason.ESTIMATE_EXCEEDED


def test_unreachable_goal_requests_help_immediately():
    agent = _line_agent(4, [(0, F, 1)])
    agent.reset_position(_obs(0, 4))
    goal = agent.set_goal(_obs(3, 4))
    assert goal.goal_node == 3
    assert agent.mode is AgentMode.AWAITING_HELP
    assert agent.pending_help.reason is HelpReason.NO_PATH
    d = agent.step(_obs(0, 4))
    assert d.action is None


def test_no_path_while_seeking():
    agent = _line_agent(4, [(0, F, 1), (1, F, 3)])
    agent.reset_position(_obs(0, 4))
    agent.set_goal(_obs(3, 4))
    # the robot slips onto node 2, from which nothing is known
    d = agent.step(_obs(2, 4))
    assert d.action is None
    assert d.help.reason is HelpReason.NO_PATH
    assert agent.mode is AgentMode.AWAITING_HELP


def test_override_replaces_exactly_one_cycle():
    agent = _line_agent(3, frozen=False)
    assert agent.override("forward")
    d = agent.step(_obs(0, 3))
    assert d.action is F
    assert d.source is Source.HUMAN
    assert d.mode is AgentMode.OVERRIDDEN
    d = agent.step(_obs(1, 3))
    assert d.source is Source.AUTONOMOUS
    assert agent.mode is AgentMode.EXPLORING


def test_override_last_writer_wins():
    agent = _line_agent(3, frozen=False)
    agent.override(L)
    agent.override(R)
    assert agent.current_state().pending_override is R
    decisions = [agent.step(_obs(0, 3)) for _ in range(3)]
    assert [d.source for d in decisions] == [Source.HUMAN, Source.AUTONOMOUS, Source.AUTONOMOUS]
    assert decisions[0].action is R


def test_override_rejects_unknown_actions():
    agent = _line_agent(3)
    with pytest.raises(ValueError):
        agent.override("jump")


def test_human_actions_are_recorded():
    agent = _line_agent(3)
    agent.override(F)
    agent.step(_obs(0, 3))
    agent.step(_obs(1, 3))
    assert agent.model.count(0, F, 1) == 1


def test_override_during_help_resumes_seeking():
    agent = _line_agent(3, [(0, F, 1)])
    agent.reset_position(_obs(0, 3))
    agent.set_goal(_obs(2, 3))
    assert agent.mode is AgentMode.AWAITING_HELP
    agent.override(F)
    d = agent.step(_obs(0, 3))
    assert d.source is Source.HUMAN
    assert agent.current_state().pending_help is None
    # a route onward from node 1 becomes known
    record_transition(agent.model, 1, F, 2)
    d = agent.step(_obs(1, 3))
    assert agent.mode is AgentMode.SEEKING
    assert agent.goal.initial_estimate == 1
    assert d.action is F
    assert d.source is Source.AUTONOMOUS


def test_override_during_budget_help_opens_a_new_window():
    agent = _line_agent(3, _chain(3))
    agent.reset_position(_obs(0, 3))
    agent.set_goal(_obs(2, 3))
    while agent.step(_obs(0, 3)).action is not None:
        pass
    assert agent.mode is AgentMode.AWAITING_HELP
    agent.override(R)
    agent.step(_obs(0, 3))
    assert agent.goal.steps_taken == 0
    d = agent.step(_obs(0, 3))
    assert d.action is F
    assert agent.goal.steps_taken == 1


def test_human_decision_count_matches_override_windows():
    rng = np.random.default_rng(4)
    agent = _line_agent(4, frozen=False)
    windows = human = 0
    pending = False
    for _ in range(300):
        for _ in range(int(rng.integers(0, 3))):
            agent.override(Action(int(rng.integers(4))))
            pending = True
        windows += pending
        pending = False
        if agent.step(_obs(int(rng.integers(4)), 4)).source is Source.HUMAN:
            human += 1
    assert human == windows


def test_freeze_memory():
    agent = _line_agent(3, frozen=False)
    for k in (0, 1, 2, 1):
        agent.step(_obs(k, 3))
    assert agent.som.version == 4
    assert agent.model.total_observations == 3
    assert agent.freeze_memory()
    assert agent.model.total_observations == 0
    assert agent.model.som_version == 4
    assert agent.freeze_memory()
    agent.step(_obs(0, 3))
    assert agent.som.version == 4


def test_memory_freezes_itself_after_plastic_steps():
    agent = _line_agent(3, frozen=False, plastic=3)
    for _ in range(3):
        agent.step(_obs(1, 3))
    assert not agent.frozen
    agent.step(_obs(1, 3))
    assert agent.frozen
    assert agent.som.version == 3


def test_dropping_cached_plans_changes_nothing():
    edges = _chain(5) + [(4, L, 0), (2, R, 0)]
    a = _line_agent(5, edges)
    b = _line_agent(5, edges)
    for agent in (a, b):
        agent.reset_position(_obs(0, 5))
        agent.set_goal(_obs(4, 5))
    for k in (0, 1, 2, 2, 3, 4):
        da = a.step(_obs(k, 5))
        b.last_plan = None
        db = b.step(_obs(k, 5))
        assert da == db


def test_transplanted_memory_continues_identically():
    world = load_world((WORLDS / "reference10.txt").read_text())
    sensor = SensorModel("ring16")
    config = AgentConfig(plastic_steps=60, exploration_seed=3)
    agent = CognitiveAgent(new_som(SomConfig(4, 4, 16, seed=3)), config=config)
    session = Session(world, agent, sensor)
    for _ in range(40):
        session.cycle()
    agent.override("spin_left")
    session.cycle()

    twin = CognitiveAgent.restore(agent.memory(), config)
    twin_session = Session(world, twin, sensor, pose=session.pose)
    for _ in range(50):
        d, _ = session.cycle()
        e, _ = twin_session.cycle()
        assert d == e
        assert session.pose == twin_session.pose
    assert np.array_equal(agent.som.weights, twin.som.weights)
    assert agent.model == twin.model


def test_snapshot_is_a_copy():
    agent = _line_agent(3, _chain(3))
    agent.reset_position(_obs(0, 3))
    agent.set_goal(_obs(2, 3))
    before = agent.current_state()
    assert before.goal.goal_node == 2
    agent.step(_obs(0, 3))
    assert before.goal.steps_taken == 0
    assert agent.current_state().goal.steps_taken == 1
