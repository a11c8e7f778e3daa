"""
Self-organizing map of sensory memories.

Each output node on a width x height Cartesian grid stores an "ideal input"
vector. Presenting an input activates the node with the nearest vector; a
training step pulls the winner (alpha_winner) and its four cardinal grid
neighbors (alpha_neighbor) toward the input. Both operations touch every
node exactly once, so their cost is bounded by the grid size alone.

The "kmeans" quantizer keeps the same grid, activation and error measure but
trains as online k-means: only the winner moves, at the fixed alpha_winner
rate, and alpha_neighbor is ignored.
"""
from __future__ import annotations
from dataclasses import dataclass
from typing import List, Sequence, Tuple
import numpy as np

from .errors import DimensionMismatch, EmptyInputSet, InvalidConfig, InvalidInput, InvalidNode
from .metrics import distance, distances_to

NodeId = int
QUANTIZERS = ("som", "kmeans")


@dataclass(frozen=True)
class SomConfig:
    width: int
    height: int
    dim: int
    alpha_winner: float = 0.9
    alpha_neighbor: float = 0.4
    seed: int = 0
    quantizer: str = "som"

    @property
    def node_count(self) -> int:
        return self.width * self.height

    def validate(self) -> "SomConfig":
        for name in ("width", "height", "dim"):
            value = getattr(self, name)
            if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value < 1:
                raise InvalidConfig(f"{name} must be a positive integer, got {value!r}")
        if not (0.0 < self.alpha_neighbor <= self.alpha_winner <= 1.0):
            raise InvalidConfig(
                f"need 0 < alpha_neighbor <= alpha_winner <= 1, got "
                f"{self.alpha_neighbor} / {self.alpha_winner}")
        if isinstance(self.seed, bool) or not isinstance(self.seed, (int, np.integer)) \
                or not (0 <= self.seed < 2 ** 64):
            raise InvalidConfig(f"seed must be a 64-bit unsigned integer, got {self.seed!r}")
        if self.quantizer not in QUANTIZERS:
            raise InvalidConfig(f"quantizer must be one of {', '.join(QUANTIZERS)}, got {self.quantizer!r}")
        return self


class SomMap:
    """Weight storage plus the two counters the rest of the system relies on.

    `version` increases on every training step; the transition model is only
    meaningful against the version it was recorded under. `distance_evaluations`
    counts every input-to-node distance computed by `activate`.
    """

    def __init__(self, config: SomConfig, weights: np.ndarray, version: int = 0):
        self.config = config
        self.weights = weights
        self.version = version
        self.distance_evaluations = 0

    @property
    def node_count(self) -> int:
        return self.config.node_count

    @property
    def dim(self) -> int:
        return self.config.dim

    def copy(self) -> "SomMap":
        return SomMap(self.config, self.weights.copy(), self.version)

    def __repr__(self) -> str:
        c = self.config
        return f"SomMap({c.width}x{c.height}, dim={c.dim}, version={self.version})"


def new_som(config: SomConfig) -> SomMap:
    """Uniform [0,1] weights from a generator seeded by config.seed."""
    config.validate()
    rng = np.random.default_rng(config.seed)
    weights = rng.random((config.node_count, config.dim))
    return SomMap(config, weights)


def as_input(values: Sequence[float] | np.ndarray, dim: int | None = None) -> np.ndarray:
    """Validate an input vector: finite, in [0,1], and of the expected length."""
    x = np.asarray(values, dtype=float)
    if x.ndim != 1:
        raise InvalidInput(f"input must be a flat vector, got shape {x.shape}")
    if dim is not None and x.shape[0] != dim:
        raise DimensionMismatch(f"input has length {x.shape[0]}, expected {dim}")
    if not np.all(np.isfinite(x)) or np.any(x < 0.0) or np.any(x > 1.0):
        raise InvalidInput("input components must lie in [0, 1]")
    return x


def node_index(som: SomMap, row: int, col: int) -> NodeId:
    if not (0 <= row < som.config.height and 0 <= col < som.config.width):
        raise InvalidNode(f"({row}, {col}) is outside the {som.config.height}x{som.config.width} grid")
    return row * som.config.width + col


def node_coords(som: SomMap, n: NodeId) -> Tuple[int, int]:
    _check_node(som, n)
    return divmod(int(n), som.config.width)


def _check_node(som: SomMap, n: NodeId):
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)) or not (0 <= n < som.node_count):
        raise InvalidNode(f"node {n!r} is not in [0, {som.node_count})")


def activate(som: SomMap, x: np.ndarray) -> NodeId:
    """Index of the node nearest to x; the lowest index wins ties."""
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != som.dim:
        raise DimensionMismatch(f"input has length {x.size}, map expects {som.dim}")
    d = distances_to(som.weights, x)
    som.distance_evaluations += d.shape[0]
    # argmin returns the first occurrence of the minimum
    return int(np.argmin(d))


def cardinal_neighbors(som: SomMap, n: NodeId) -> List[NodeId]:
    """Up/down/left/right nodes that exist on the grid, in row-major order. No wraparound."""
    r, c = node_coords(som, n)
    w, h = som.config.width, som.config.height
    out = []
    if r > 0:
        out.append((r - 1) * w + c)
    if c > 0:
        out.append(r * w + c - 1)
    if c < w - 1:
        out.append(r * w + c + 1)
    if r < h - 1:
        out.append((r + 1) * w + c)
    return out


def train_step(som: SomMap, x: np.ndarray) -> Tuple[SomMap, NodeId]:
    """One presentation: the winner is chosen on the pre-update weights, then
    w <- w + alpha * (x - w) for the winner and, for the "som" quantizer, each
    cardinal neighbor."""
    winner = activate(som, x)
    x = np.asarray(x, dtype=float)
    cfg = som.config
    w = som.weights
    w[winner] += cfg.alpha_winner * (x - w[winner])
    np.clip(w[winner], 0.0, 1.0, out=w[winner])  # alpha=1 can overshoot by one ulp
    neighbors = cardinal_neighbors(som, winner) if cfg.quantizer == "som" else []
    for n in neighbors:
        w[n] += cfg.alpha_neighbor * (x - w[n])
        np.clip(w[n], 0.0, 1.0, out=w[n])
    som.version += 1
    return som, winner


def quantization_error(som: SomMap, inputs: Sequence[np.ndarray]) -> float:
    """Mean distance from each input to its winner's weight vector."""
    if len(inputs) == 0:
        raise EmptyInputSet("quantization error needs at least one input")
    total = 0.0
    for x in inputs:
        total += distance(x, som.weights[activate(som, x)])
    return total / len(inputs)
