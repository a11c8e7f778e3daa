from __future__ import annotations
from dataclasses import dataclass, field
import argparse

from .agent import AgentConfig
from .errors import InvalidConfig
from .som import SomConfig
from .world import SensorModel

DEFAULT_GRID = (10, 10)
DEFAULT_TICK_MS = 100
DEFAULT_PORT = 8765


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything a headless or live run needs besides the world itself."""
    som: SomConfig
    agent: AgentConfig = field(default_factory=AgentConfig)
    sensor: SensorModel = field(default_factory=SensorModel)
    max_range: float = 8.0
    min_edge_count: int = 1
    edge_cost: str = "unit"
    seed: int = 0
    trials: int = 20
    qe_every: int = 100

    def validate(self) -> "ExperimentConfig":
        self.som.validate()
        self.agent.validate()
        if self.som.dim != self.sensor.dim:
            raise InvalidConfig(f"sensor {self.sensor.kind} yields {self.sensor.dim} values, "
                                f"map dim is {self.som.dim}")
        if self.min_edge_count < 1:
            raise InvalidConfig("min_edge_count must be >= 1")
        if self.qe_every < 1:
            raise InvalidConfig("qe_every must be >= 1")
        if self.trials < 0:
            raise InvalidConfig("trials must be >= 0")
        return self

    @classmethod
    def default(cls, sensor: str = "ring16", width: int = DEFAULT_GRID[0],
                height: int = DEFAULT_GRID[1], seed: int = 0, quantizer: str = "som",
                **kwargs) -> "ExperimentConfig":
        model = SensorModel(sensor)
        agent = kwargs.pop("agent", AgentConfig(exploration_seed=seed))
        som = SomConfig(width, height, model.dim, seed=seed, quantizer=quantizer)
        return cls(som=som, agent=agent,
                   sensor=model, seed=seed, **kwargs).validate()


def parse_grid(text: str):
    """'WxH' -> (W, H)."""
    try:
        w, h = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like WxH, got {text!r}")
    if w < 1 or h < 1:
        raise argparse.ArgumentTypeError("grid dimensions must be positive")
    return w, h


def from_args(args: argparse.Namespace) -> ExperimentConfig:
    sensor = SensorModel(args.sensor)
    w, h = args.grid
    som = SomConfig(w, h, sensor.dim, alpha_winner=args.alpha_winner,
                    alpha_neighbor=args.alpha_neighbor, seed=args.seed, quantizer=args.quantizer)
    budget = args.budget_factor if args.budget_factor is not None else 1.0
    min_edge = args.min_edge_count if args.min_edge_count is not None else 1
    agent = AgentConfig(budget_factor=budget, plastic_steps=args.plastic_steps,
                        exploration_seed=args.seed)
    return ExperimentConfig(som=som, agent=agent, sensor=sensor, max_range=args.max_range,
                            min_edge_count=min_edge, edge_cost=args.edge_cost or "unit",
                            seed=args.seed, trials=args.trials, qe_every=args.qe_every).validate()
