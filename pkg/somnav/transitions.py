"""
Markov chain over SOM nodes and shortest-path planning through it.

Transitions are counted per (from, action, to). Planning runs Dijkstra on the
directed graph whose edges are node pairs with at least `min_edge_count`
observations under some action; self-loops are kept in the counts but never
become edges.
"""
from __future__ import annotations
from collections import defaultdict
from dataclasses import dataclass
from enum import IntEnum
from typing import Dict, Iterator, List, Tuple
import heapq
import numbers
import math

from .errors import InvalidConfig, InvalidNode, NoEdge, NoPath

NodeId = int


class Action(IntEnum):
    FORWARD = 0
    SPIN_LEFT = 1
    SPIN_RIGHT = 2
    STOP = 3

    @property
    def wire(self) -> str:
        return self.name.lower()

    @classmethod
    def parse(cls, value) -> "Action":
        if isinstance(value, cls):
            return value
        if isinstance(value, str):
            try:
                return cls[value.upper()]
            except KeyError:
                pass
        elif isinstance(value, int) and not isinstance(value, bool):
            try:
                return cls(value)
            except ValueError:
                pass
        raise ValueError(f"unknown action {value!r}; expected one of "
                         f"{', '.join(a.wire for a in cls)}")


MOTION_ACTIONS = (Action.FORWARD, Action.SPIN_LEFT, Action.SPIN_RIGHT)
EDGE_COSTS = ("unit", "neglog")


@dataclass(frozen=True)
class Plan:
    nodes: Tuple[NodeId, ...]
    actions: Tuple[Action, ...]

    @property
    def estimate(self) -> int:
        return len(self.actions)

    @property
    def first_action(self) -> Action | None:
        return self.actions[0] if self.actions else None


class TransitionModel:
    def __init__(self, node_count: int, min_edge_count: int = 1,
                 som_version: int = 0, edge_cost: str = "unit"):
        if node_count < 1:
            raise InvalidConfig(f"node_count must be positive, got {node_count}")
        self.node_count = node_count
        self.som_version = som_version
        self.min_edge_count = 1
        self.edge_cost = "unit"
        self.configure_planning(min_edge_count, edge_cost)
        # from -> to -> per-action counts
        self._table: Dict[int, Dict[int, List[int]]] = defaultdict(dict)
        self.total_observations = 0

    def configure_planning(self, min_edge_count: int | None = None,
                           edge_cost: str | None = None) -> "TransitionModel":
        """Change how the counts are turned into a graph; the counts stay."""
        if min_edge_count is not None:
            if isinstance(min_edge_count, bool) or not isinstance(min_edge_count, numbers.Integral) \
                    or min_edge_count < 1:
                raise InvalidConfig(f"min_edge_count must be >= 1, got {min_edge_count!r}")
            self.min_edge_count = int(min_edge_count)
        if edge_cost is not None:
            if edge_cost not in EDGE_COSTS:
                raise InvalidConfig(f"edge_cost must be one of {', '.join(EDGE_COSTS)}, got {edge_cost!r}")
            self.edge_cost = edge_cost
        return self

    def _check(self, *nodes: int):
        for n in nodes:
            if isinstance(n, bool) or not isinstance(n, numbers.Integral) or not (0 <= n < self.node_count):
                raise InvalidNode(f"node {n!r} is not in [0, {self.node_count})")

    def count(self, src: NodeId, action: Action, dst: NodeId) -> int:
        row = self._table.get(src)
        if not row or dst not in row:
            return 0
        return row[dst][int(action)]

    @property
    def counts(self) -> Dict[Tuple[int, Action, int], int]:
        """Sparse (from, action, to) -> count view."""
        return {(src, Action(a), dst): c for src, a, dst, c in self.records()}

    def records(self) -> Iterator[Tuple[int, int, int, int]]:
        """Nonzero counts in (from, action, to) order."""
        for src in sorted(self._table):
            row = self._table[src]
            for dst in sorted(row):
                for a, c in enumerate(row[dst]):
                    if c:
                        yield src, a, dst, c

    def edges(self) -> Dict[NodeId, List[NodeId]]:
        """Planning edges: from -> sorted successors, self-loops excluded."""
        out = {}
        for src, row in self._table.items():
            succ = [dst for dst, per in row.items()
                    if dst != src and max(per) >= self.min_edge_count]
            if succ:
                out[src] = sorted(succ)
        return out

    def copy(self) -> "TransitionModel":
        twin = TransitionModel(self.node_count, self.min_edge_count, self.som_version, self.edge_cost)
        for src, row in self._table.items():
            twin._table[src] = {dst: list(per) for dst, per in row.items()}
        twin.total_observations = self.total_observations
        return twin

    def flush(self, som_version: int):
        """Discard every count; the chain now belongs to `som_version`."""
        self._table.clear()
        self.total_observations = 0
        self.som_version = som_version

    def __eq__(self, other) -> bool:
        if not isinstance(other, TransitionModel):
            return NotImplemented
        return (self.node_count == other.node_count
                and self.min_edge_count == other.min_edge_count
                and self.edge_cost == other.edge_cost
                and self.som_version == other.som_version
                and list(self.records()) == list(other.records()))

    def __repr__(self) -> str:
        return (f"TransitionModel(nodes={self.node_count}, "
                f"observations={self.total_observations}, som_version={self.som_version})")


def record_transition(model: TransitionModel, src: NodeId, action: Action, dst: NodeId,
                      times: int = 1) -> TransitionModel:
    model._check(src, dst)
    src, dst = int(src), int(dst)
    action = Action.parse(action)
    per = model._table[src].setdefault(dst, [0] * len(Action))
    per[int(action)] += times
    model.total_observations += times
    return model


def action_probability(model: TransitionModel, src: NodeId, action: Action, dst: NodeId) -> float:
    """Maximum-likelihood P(dst | src, action); 0 when (src, action) was never seen."""
    action = Action(action)
    row = model._table.get(src)
    if not row:
        return 0.0
    total = sum(per[int(action)] for per in row.values())
    if total == 0:
        return 0.0
    return model.count(src, action, dst) / total


def best_action(model: TransitionModel, src: NodeId, dst: NodeId) -> Action:
    """Action most often observed to take src to dst; lowest encoding on ties."""
    model._check(src, dst)
    per = model._table.get(src, {}).get(dst)
    if src == dst or per is None or max(per) < model.min_edge_count:
        raise NoEdge(f"no recorded transition from node {src} to node {dst}")
    return Action(per.index(max(per)))


def _edge_weight(model: TransitionModel, src: NodeId, dst: NodeId) -> float:
    if model.edge_cost == "unit":
        return 1.0
    p = action_probability(model, src, best_action(model, src, dst), dst)
    return -math.log(p)


def plan(model: TransitionModel, start: NodeId, goal: NodeId) -> Plan:
    """Dijkstra from start to goal. Among equally short routes the predecessor
    with the smaller node index is kept at every hop."""
    model._check(start, goal)
    start, goal = int(start), int(goal)
    if start == goal:
        return Plan((start,), ())
    edges = model.edges()
    dist = {start: 0.0}
    pred: Dict[int, int] = {}
    done = set()
    heap = [(0.0, start)]
    while heap:
        d, u = heapq.heappop(heap)
        if u in done:
            continue
        done.add(u)
        if u == goal:
            break
        for v in edges.get(u, ()):
            if v in done:
                continue
            nd = d + _edge_weight(model, u, v)
            old = dist.get(v)
            if old is None or nd < old:
                dist[v] = nd
                pred[v] = u
                heapq.heappush(heap, (nd, v))
            elif nd == old and u < pred[v]:
                pred[v] = u
    if goal not in done:
        raise NoPath(f"node {goal} is unreachable from node {start}")
    nodes = [goal]
    while nodes[-1] != start:
        nodes.append(pred[nodes[-1]])
    nodes.reverse()
    actions = tuple(best_action(model, a, b) for a, b in zip(nodes, nodes[1:]))
    return Plan(tuple(nodes), actions)


def reindex_guard(model: TransitionModel, som_version: int) -> bool:
    """True iff the chain was recorded against this SOM version."""
    return model.som_version == som_version
