import math

import numpy as np
import pytest
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from somnav.errors import InvalidConfig, InvalidNode, NoEdge, NoPath
from somnav.transitions import (Action, TransitionModel, action_probability, best_action, plan,
                                record_transition, reindex_guard)

F, L, R = Action.FORWARD, Action.SPIN_LEFT, Action.SPIN_RIGHT


def _chain(n, edges, min_edge_count=1, edge_cost="unit"):
    m = TransitionModel(n, min_edge_count=min_edge_count, edge_cost=edge_cost)
    for src, action, dst, *times in edges:
        record_transition(m, src, action, dst, times=times[0] if times else 1)
    return m


def test_action_parse():
    assert Action.parse("forward") is F
    assert Action.parse("SPIN_LEFT") is L
    assert Action.parse(2) is R
    assert Action.STOP.wire == "stop"
    for bad in ("jump", 7, None, True):
        with pytest.raises(ValueError):
            Action.parse(bad)


def test_record_and_count():
    m = _chain(4, [(0, F, 1), (0, F, 1), (0, L, 2)])
    assert m.count(0, F, 1) == 2
    assert m.count(0, L, 2) == 1
    assert m.count(1, F, 0) == 0
    assert m.total_observations == 3
    with pytest.raises(InvalidNode):
        record_transition(m, 0, F, 4)
    with pytest.raises(InvalidNode):
        record_transition(m, -1, F, 0)


def test_bad_model_config():
    with pytest.raises(InvalidConfig):
        TransitionModel(0)
    with pytest.raises(InvalidConfig):
        TransitionModel(3, min_edge_count=0)
    with pytest.raises(InvalidConfig):
        TransitionModel(3, edge_cost="cheap")


def test_action_probability():
    m = _chain(3, [(0, F, 1), (0, F, 1), (0, F, 1), (0, F, 2)])
    assert action_probability(m, 0, F, 1) == pytest.approx(0.75)
    assert action_probability(m, 0, F, 2) == pytest.approx(0.25)
    assert action_probability(m, 0, L, 1) == 0.0
    assert action_probability(m, 2, F, 0) == 0.0
    total = sum(action_probability(m, 0, F, d) for d in range(3))
    assert total == pytest.approx(1.0)


def test_best_action():
    m = _chain(3, [(0, L, 1), (0, R, 1, 3), (0, F, 2)])
    assert best_action(m, 0, 1) is R
    tie = _chain(2, [(0, R, 1), (0, L, 1)])
    assert best_action(tie, 0, 1) is L
    with pytest.raises(NoEdge):
        best_action(m, 1, 0)


def test_plan_linear_chain():
    m = _chain(3, [(0, F, 1), (1, F, 2)])
    p = plan(m, 0, 2)
    assert p.nodes == (0, 1, 2)
    assert p.actions == (F, F)
    assert p.estimate == 2
    assert p.first_action is F


def test_plan_prefers_shorter_route():
    m = _chain(4, [(0, F, 1), (1, F, 2), (2, F, 3), (0, L, 3)])
    p = plan(m, 0, 3)
    assert p.nodes == (0, 3)
    assert p.actions == (L,)


def test_plan_to_self_is_empty():
    m = _chain(2, [(0, F, 1)])
    p = plan(m, 1, 1)
    assert p.nodes == (1,)
    assert p.actions == ()
    assert p.first_action is None


def test_plan_unreachable():
    m = _chain(3, [(0, F, 1)])
    with pytest.raises(NoPath):
        plan(m, 1, 0)
    with pytest.raises(NoPath):
        plan(m, 0, 2)
    with pytest.raises(InvalidNode):
        plan(m, 0, 3)


def test_self_loops_never_planned():
    m = _chain(2, [(0, F, 0, 50), (0, F, 1)])
    assert m.edges() == {0: [1]}
    assert plan(m, 0, 1).nodes == (0, 1)
    with pytest.raises(NoEdge):
        best_action(m, 0, 0)


def test_equal_routes_break_toward_smaller_predecessor():
    # 0 -> {1, 2} -> 3: both hops cost 2; node 1 is the smaller predecessor
    m = _chain(4, [(0, F, 2), (2, F, 3), (0, L, 1), (1, R, 3)])
    assert plan(m, 0, 3).nodes == (0, 1, 3)


def test_min_edge_count_hides_rare_edges():
    m = _chain(3, [(0, F, 1), (1, F, 2), (0, L, 2, 2)], min_edge_count=2)
    p = plan(m, 0, 2)
    assert p.nodes == (0, 2)
    with pytest.raises(NoPath):
        plan(m, 0, 1)


def test_neglog_prefers_reliable_edges():
    # direct 0 -> 2 under F happens 1 time in 10; the two-hop route is certain
    m = _chain(3, [(0, F, 2), (0, F, 1, 9), (1, L, 2, 5)], edge_cost="neglog")
    p = plan(m, 0, 2)
    assert p.nodes == (0, 1, 2)
    unit = _chain(3, [(0, F, 2), (0, F, 1, 9), (1, L, 2, 5)])
    assert plan(unit, 0, 2).nodes == (0, 2)
    assert -math.log(action_probability(m, 0, F, 1)) < -math.log(action_probability(m, 0, F, 2))


def _random_chain(rng, n):
    m = TransitionModel(n)
    for _ in range(int(rng.integers(0, 4 * n))):
        src, dst = int(rng.integers(n)), int(rng.integers(n))
        record_transition(m, src, Action(int(rng.integers(3))), dst)
    return m


def _oracle(m):
    n = m.node_count
    rows, cols = [], []
    for src, succ in m.edges().items():
        for dst in succ:
            rows.append(src)
            cols.append(dst)
    adj = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(n, n))
    return shortest_path(adj, directed=True, unweighted=True)


def test_plan_matches_breadth_first_oracle():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n = int(rng.integers(1, 26))
        m = _random_chain(rng, n)
        dist = _oracle(m)
        edges = m.edges()
        pairs = [(s, g) for s in range(n) for g in range(n)]
        if len(pairs) > 60:
            pairs = [pairs[i] for i in rng.choice(len(pairs), 60, replace=False)]
        for start, goal in pairs:
            if np.isinf(dist[start, goal]):
                with pytest.raises(NoPath):
                    plan(m, start, goal)
                continue
            p = plan(m, start, goal)
            assert p.estimate == int(dist[start, goal])
            assert p.nodes[0] == start and p.nodes[-1] == goal
            for a, b, action in zip(p.nodes, p.nodes[1:], p.actions):
                assert b in edges[a]
                assert action is best_action(m, a, b)


def test_plan_is_deterministic():
    rng = np.random.default_rng(7)
    m = _random_chain(rng, 10)
    twin = m.copy()
    for start in range(10):
        for goal in range(10):
            try:
                assert plan(m, start, goal) == plan(twin, start, goal)
            except NoPath:
                with pytest.raises(NoPath):
                    plan(twin, start, goal)


def test_recording_never_lengthens_plans():
    rng = np.random.default_rng(99)
    for _ in range(50):
        m = _random_chain(rng, 8)
        before = _oracle(m)
        record_transition(m, int(rng.integers(8)), F, int(rng.integers(8)))
        after = _oracle(m)
        assert np.all(after <= before)


def test_flush_and_reindex_guard():
    m = _chain(3, [(0, F, 1)])
    assert reindex_guard(m, 0)
    m.flush(som_version=12)
    assert m.total_observations == 0
    assert m.count(0, F, 1) == 0
    assert m.som_version == 12
    assert reindex_guard(m, 12)
    assert not reindex_guard(m, 13)


def test_counts_view_and_equality():
    a = _chain(3, [(0, F, 1), (1, L, 2, 2)])
    b = _chain(3, [(1, L, 2), (0, F, 1), (1, L, 2)])
    assert a == b
    assert a.counts == {(0, F, 1): 1, (1, L, 2): 2}
    record_transition(b, 2, R, 0)
    assert a != b


def test_two_shortest_routes_pick_the_smaller_neighbour():
    m = _chain(4, [(0, F, 1), (1, F, 2), (0, L, 3), (3, F, 2)])
    p = plan(m, 0, 2)
    assert p.nodes == (0, 1, 2)
    assert p.actions == (F, F)


def test_edge_cost_is_part_of_equality():
    a = _chain(3, [(0, F, 1), (1, L, 2)])
    b = _chain(3, [(0, F, 1), (1, L, 2)], edge_cost="neglog")
    assert a != b
    assert a.copy().configure_planning(edge_cost="neglog") == b


def test_configure_planning_keeps_counts():
    m = _chain(3, [(0, F, 1), (1, F, 2), (0, L, 2, 2)])
    assert plan(m, 0, 1).nodes == (0, 1)
    m.configure_planning(min_edge_count=2)
    assert m.counts[(0, F, 1)] == 1
    with pytest.raises(NoPath):
        plan(m, 0, 1)
    m.configure_planning()
    assert (m.min_edge_count, m.edge_cost) == (2, "unit")
    with pytest.raises(InvalidConfig):
        m.configure_planning(min_edge_count=0)
    with pytest.raises(InvalidConfig):
        m.configure_planning(edge_cost="cheap")
    assert (m.min_edge_count, m.edge_cost) == (2, "unit")
