from __future__ import annotations
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, IO, Tuple, Union
import json
import math

import numpy as np
import pandas as pd

from .agent import AgentConfig
from .errors import (InvariantViolation, ParseError, SinkUnwritable, SomnavError,
                     VersionUnsupported)
from .som import QUANTIZERS, SomConfig, SomMap, as_input
from .transitions import EDGE_COSTS, Action, TransitionModel, record_transition
from .world import GridWorld, load_world

FORMAT_VERSION = 1
MEMORY_SUFFIX = ".somnav.json"

PathOrFile = Union[str, Path, IO[str]]


@dataclass(frozen=True)
class AgentSettings:
    """The agent half of a memory file."""
    config: AgentConfig
    frozen: bool
    som_version: int
    chain_version: int


# -- writing ---------------------------------------------------------------

def _write_text(text: str, sink: PathOrFile):
    try:
        if hasattr(sink, "write"):
            sink.write(text)
        else:
            Path(sink).write_text(text, encoding="utf-8")
    except OSError as e:
        raise SinkUnwritable(f"cannot write to {sink}: {e}") from e


def _read_text(source: PathOrFile) -> str:
    try:
        if hasattr(source, "read"):
            text = source.read()
            return text.decode("utf-8") if isinstance(text, bytes) else text
        return Path(source).read_text(encoding="utf-8")
    except UnicodeDecodeError as e:
        raise ParseError(f"{source} is not valid UTF-8: {e}") from e


def canonical_json(doc: Any) -> str:
    """Sorted keys and fixed indentation so equal states give equal bytes."""
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False) + "\n"


def memory_document(som: SomMap, model: TransitionModel, agent_config: AgentConfig,
                    frozen: bool = False) -> Dict[str, Any]:
    if model.node_count != som.node_count:
        raise InvariantViolation(
            f"transitions.node_count: {model.node_count} does not match the map's {som.node_count} nodes")
    c = som.config
    return {
        "version": FORMAT_VERSION,
        "som": {
            "width": int(c.width),
            "height": int(c.height),
            "dim": int(c.dim),
            "alpha_winner": float(c.alpha_winner),
            "alpha_neighbor": float(c.alpha_neighbor),
            "seed": int(c.seed),
            "quantizer": c.quantizer,
            "weights": som.weights.tolist(),
        },
        "transitions": [
            {"from": src, "action": Action(a).wire, "to": dst, "count": n}
            for src, a, dst, n in model.records()
        ],
        "agent": {
            "budget_factor": float(agent_config.budget_factor),
            "plastic_steps": int(agent_config.plastic_steps),
            "exploration_seed": int(agent_config.exploration_seed),
            "frozen": bool(frozen),
            "som_version": int(som.version),
            "chain_version": int(model.som_version),
            "min_edge_count": int(model.min_edge_count),
            "edge_cost": model.edge_cost,
        },
    }


def save_memory(som: SomMap, model: TransitionModel, agent_config: AgentConfig,
                sink: PathOrFile, frozen: bool = False) -> bool:
    # serialize fully before touching the sink
    text = canonical_json(memory_document(som, model, agent_config, frozen))
    _write_text(text, sink)
    return True


# -- reading ---------------------------------------------------------------

def _get(obj: dict, key: str, path: str):
    if not isinstance(obj, dict):
        raise InvariantViolation(f"{path}: expected an object")
    if key not in obj:
        raise InvariantViolation(f"{path}.{key}: missing")
    return obj[key]


def _int(value, path: str, minimum: int | None = None, maximum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvariantViolation(f"{path}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise InvariantViolation(f"{path}: {value} is below {minimum}")
    if maximum is not None and value > maximum:
        raise InvariantViolation(f"{path}: {value} is above {maximum}")
    return value


def _real(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or not math.isfinite(value):
        raise InvariantViolation(f"{path}: expected a finite number, got {value!r}")
    return float(value)


def _bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise InvariantViolation(f"{path}: expected true or false, got {value!r}")
    return value


def _choice(value, path: str, allowed) -> str:
    if value not in allowed:
        raise InvariantViolation(f"{path}: expected one of {', '.join(allowed)}, got {value!r}")
    return value


def _som_from(doc: dict) -> SomMap:
    som = _get(doc, "som", "$")
    width = _int(_get(som, "width", "som"), "som.width", 1)
    height = _int(_get(som, "height", "som"), "som.height", 1)
    dim = _int(_get(som, "dim", "som"), "som.dim", 1)
    aw = _real(_get(som, "alpha_winner", "som"), "som.alpha_winner")
    an = _real(_get(som, "alpha_neighbor", "som"), "som.alpha_neighbor")
    if not (0.0 < an <= aw <= 1.0):
        raise InvariantViolation(
            f"som.alpha_neighbor/som.alpha_winner: need 0 < {an} <= {aw} <= 1")
    seed = _int(_get(som, "seed", "som"), "som.seed", 0, 2 ** 64 - 1)
    quantizer = _choice(som.get("quantizer", "som"), "som.quantizer", QUANTIZERS)
    rows = _get(som, "weights", "som")
    if not isinstance(rows, list) or len(rows) != width * height:
        raise InvariantViolation(f"som.weights: expected {width * height} vectors")
    weights = np.empty((width * height, dim))
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise InvariantViolation(f"som.weights[{i}]: expected a vector of length {dim}")
        for j, v in enumerate(row):
            v = _real(v, f"som.weights[{i}][{j}]")
            if not 0.0 <= v <= 1.0:
                raise InvariantViolation(f"som.weights[{i}][{j}]: {v} outside [0, 1]")
            weights[i, j] = v
    config = SomConfig(width, height, dim, aw, an, seed, quantizer)
    return SomMap(config, weights)


def _settings_from(doc: dict) -> Tuple[AgentSettings, int, str]:
    agent = _get(doc, "agent", "$")
    bf = _real(_get(agent, "budget_factor", "agent"), "agent.budget_factor")
    if bf < 1.0:
        raise InvariantViolation(f"agent.budget_factor: {bf} is below 1")
    plastic = _int(_get(agent, "plastic_steps", "agent"), "agent.plastic_steps", 0)
    frozen = _bool(_get(agent, "frozen", "agent"), "agent.frozen")
    som_version = _int(_get(agent, "som_version", "agent"), "agent.som_version", 0)
    chain_version = _int(agent.get("chain_version", som_version), "agent.chain_version", 0)
    min_edge = _int(agent.get("min_edge_count", 1), "agent.min_edge_count", 1)
    edge_cost = _choice(agent.get("edge_cost", "unit"), "agent.edge_cost", EDGE_COSTS)
    seed = _int(agent.get("exploration_seed", 0), "agent.exploration_seed", 0)
    config = AgentConfig(budget_factor=bf, plastic_steps=plastic, exploration_seed=seed)
    return AgentSettings(config, frozen, som_version, chain_version), min_edge, edge_cost


def _model_from(doc: dict, node_count: int, min_edge: int, chain_version: int,
                edge_cost: str = "unit") -> TransitionModel:
    records = _get(doc, "transitions", "$")
    if not isinstance(records, list):
        raise InvariantViolation("transitions: expected an array")
    model = TransitionModel(node_count, min_edge_count=min_edge, som_version=chain_version,
                            edge_cost=edge_cost)
    seen = set()
    for i, rec in enumerate(records):
        path = f"transitions[{i}]"
        src = _int(_get(rec, "from", path), f"{path}.from", 0, node_count - 1)
        dst = _int(_get(rec, "to", path), f"{path}.to", 0, node_count - 1)
        try:
            action = Action.parse(_get(rec, "action", path))
        except ValueError as e:
            raise InvariantViolation(f"{path}.action: {e}") from e
        n = _int(_get(rec, "count", path), f"{path}.count", 1)
        if (src, action, dst) in seen:
            raise InvariantViolation(f"{path}: duplicate entry for ({src}, {action.wire}, {dst})")
        seen.add((src, action, dst))
        record_transition(model, src, action, dst, times=n)
    return model


def memory_from_document(doc: Any) -> Tuple[SomMap, TransitionModel, AgentSettings]:
    if not isinstance(doc, dict):
        raise ParseError("memory file must contain a JSON object")
    version = _get(doc, "version", "$")
    if isinstance(version, bool) or version != FORMAT_VERSION:
        raise VersionUnsupported(f"memory format version {version!r} is not supported "
                                 f"(expected {FORMAT_VERSION})")
    som = _som_from(doc)
    settings, min_edge, edge_cost = _settings_from(doc)
    som.version = settings.som_version
    model = _model_from(doc, som.node_count, min_edge, settings.chain_version, edge_cost)
    return som, model, settings


def load_memory(source: PathOrFile) -> Tuple[SomMap, TransitionModel, AgentSettings]:
    text = _read_text(source)
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as e:
        raise ParseError(f"memory file is not valid JSON: {e}") from e
    return memory_from_document(doc)


# -- goal snapshots ----------------------------------------------------------

def save_snapshot(observation: np.ndarray, sink: PathOrFile) -> bool:
    doc = {"version": FORMAT_VERSION, "observation": [float(v) for v in observation]}
    _write_text(canonical_json(doc), sink)
    return True


def load_snapshot(source: PathOrFile, dim: int | None = None) -> np.ndarray:
    try:
        doc = json.loads(_read_text(source))
    except json.JSONDecodeError as e:
        raise ParseError(f"snapshot file is not valid JSON: {e}") from e
    if not isinstance(doc, dict):
        raise ParseError("snapshot file must contain a JSON object")
    if doc.get("version") != FORMAT_VERSION:
        raise VersionUnsupported(f"snapshot version {doc.get('version')!r} is not supported")
    values = _get(doc, "observation", "$")
    if not isinstance(values, list):
        raise InvariantViolation("observation: expected an array")
    try:
        return as_input([_real(v, f"observation[{i}]") for i, v in enumerate(values)], dim)
    except SomnavError as e:
        if isinstance(e, InvariantViolation):
            raise
        raise InvariantViolation(f"observation: {e}") from e


# -- worlds ----------------------------------------------------------------

def load_world_file(path: str | Path, max_range: float = 8.0) -> GridWorld:
    return load_world(Path(path).read_text(encoding="utf-8"), max_range=max_range)


# -- CSV export / import -----------------------------------------------------

def export_memory_csv(som: SomMap, model: TransitionModel, agent_config: AgentConfig,
                      out_dir: str | Path, frozen: bool = False) -> Path:
    """weights.csv (one row per node), transitions.csv and settings.json."""
    doc = memory_document(som, model, agent_config, frozen)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    c = som.config
    weights = pd.DataFrame(som.weights, columns=[f"w{j}" for j in range(c.dim)])
    weights.insert(0, "col", np.arange(som.node_count) % c.width)
    weights.insert(0, "row", np.arange(som.node_count) // c.width)
    weights.insert(0, "node", np.arange(som.node_count))
    weights.to_csv(out_dir / "weights.csv", index=False)
    transitions = pd.DataFrame(doc["transitions"], columns=["from", "action", "to", "count"])
    transitions.to_csv(out_dir / "transitions.csv", index=False)
    settings = {"version": doc["version"], "agent": doc["agent"],
                "som": {k: v for k, v in doc["som"].items() if k != "weights"}}
    (out_dir / "settings.json").write_text(canonical_json(settings), encoding="utf-8")
    return out_dir


def import_memory_csv(in_dir: str | Path) -> Tuple[SomMap, TransitionModel, AgentSettings]:
    in_dir = Path(in_dir)
    try:
        settings = json.loads((in_dir / "settings.json").read_text(encoding="utf-8"))
        weights = pd.read_csv(in_dir / "weights.csv", float_precision="round_trip")
        transitions = pd.read_csv(in_dir / "transitions.csv")
    except (json.JSONDecodeError, UnicodeDecodeError, pd.errors.ParserError,
            pd.errors.EmptyDataError) as e:
        raise ParseError(f"cannot read exported memory in {in_dir}: {e}") from e
    if not isinstance(settings, dict) or not isinstance(settings.get("som"), dict):
        raise ParseError("settings.json must contain an object with a 'som' section")
    columns = sorted((c for c in weights.columns if c.startswith("w")), key=lambda c: int(c[1:]))
    weights = weights.sort_values("node")
    doc = dict(settings)
    doc["som"] = dict(settings["som"], weights=weights[columns].to_numpy(dtype=float).tolist())
    doc["transitions"] = [
        {"from": int(r["from"]), "action": str(r["action"]), "to": int(r["to"]), "count": int(r["count"])}
        for r in transitions.to_dict("records")
    ]
    return memory_from_document(doc)
