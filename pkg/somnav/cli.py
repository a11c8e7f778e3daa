from __future__ import annotations
import argparse
import json
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import List, Optional

from .config import DEFAULT_GRID, DEFAULT_PORT, DEFAULT_TICK_MS, from_args, parse_grid
from .errors import SomnavError
from .experiment import build_agent, run_headless
from .io import (export_memory_csv, import_memory_csv, load_memory, load_snapshot,
                 load_world_file, save_memory)
from .report import write_report
from .service import serve
from .session import Session
from .som import QUANTIZERS
from .transitions import EDGE_COSTS
from .world import Pose, sense

log = logging.getLogger("somnav")


def _common(ap: argparse.ArgumentParser):
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--grid", type=parse_grid, default=DEFAULT_GRID, help="SOM grid as WxH")
    ap.add_argument("--sensor", choices=["ring16", "image8x8"], default="ring16")
    ap.add_argument("--alpha-winner", type=float, default=0.9)
    ap.add_argument("--alpha-neighbor", type=float, default=0.4)
    ap.add_argument("--budget-factor", type=float, default=None,
                    help="help once actions exceed this multiple of the plan estimate (default 1.0)")
    ap.add_argument("--min-edge-count", type=int, default=None,
                    help="observations before a node pair becomes a planning edge (default 1, or the memory's)")
    ap.add_argument("--edge-cost", choices=list(EDGE_COSTS), default=None,
                    help="planning cost per edge (default unit, or the memory's)")
    ap.add_argument("--quantizer", choices=list(QUANTIZERS), default="som",
                    help="update rule for a fresh map; a loaded memory keeps its own")
    ap.add_argument("--plastic-steps", type=int, default=1500,
                    help="cycles of SOM training before the memory freezes itself")
    ap.add_argument("--max-range", type=float, default=8.0, help="range sensor saturation, in cells")
    ap.add_argument("--trials", type=int, default=20)
    ap.add_argument("--qe-every", type=int, default=100)
    ap.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="somnav",
                                 description="SOM + Markov-chain navigation with operator overrides")
    sub = ap.add_subparsers(dest="command", required=True)

    train = sub.add_parser("train", help="headless exploration; saves the memory")
    _common(train)
    train.add_argument("--world", required=True)
    train.add_argument("--memory", required=True)
    train.add_argument("--steps", type=int, default=3000)
    train.add_argument("--out", default=None, help="report directory")
    train.add_argument("--plot", action="store_true")

    run = sub.add_parser("run", help="headless goal-seeking from a saved memory")
    _common(run)
    run.add_argument("--world", required=True)
    run.add_argument("--memory", required=True)
    goal = run.add_mutually_exclusive_group()
    goal.add_argument("--goal", help="goal snapshot file")
    goal.add_argument("--goal-pose", type=Pose.parse, help="sense the goal at ROW,COL,HEADING")
    goal.add_argument("--script", help="scripted operator timeline (JSON)")
    run.add_argument("--steps", type=int, default=0,
                     help="cycles before the trials, or boundaries to play with --script")
    run.add_argument("--save-memory", default=None)
    run.add_argument("--out", default=None)
    run.add_argument("--plot", action="store_true")

    srv = sub.add_parser("serve", help="live operator service")
    _common(srv)
    srv.add_argument("--world", required=True)
    srv.add_argument("--memory", default=None)
    srv.add_argument("--port", type=int, default=DEFAULT_PORT)
    srv.add_argument("--host", default="127.0.0.1")
    srv.add_argument("--tick-ms", type=int, default=DEFAULT_TICK_MS)
    srv.add_argument("--allow-vector-goals", action="store_true",
                     help="accept set_goal{vector} in addition to snapshot ids")

    exp = sub.add_parser("export", help="write a memory file as CSV tables")
    exp.add_argument("--memory", required=True)
    exp.add_argument("--out", required=True)
    exp.add_argument("-v", "--verbose", action="store_true")

    imp = sub.add_parser("import", help="rebuild a memory file from exported CSV tables")
    imp.add_argument("--from", dest="source", required=True)
    imp.add_argument("--memory", required=True)
    imp.add_argument("-v", "--verbose", action="store_true")
    return ap


def _train(args) -> int:
    config = from_args(args)
    world = load_world_file(args.world, config.max_range)
    report, agent = run_headless(world, config, args.steps)
    save_memory(agent.som, agent.model, agent.config, args.memory, frozen=agent.frozen)
    report["memory"] = str(args.memory)
    if args.out:
        write_report(report, Path(args.out), plot=args.plot)
    log.info("memory written to %s", args.memory)
    return 0


def _load_for(args):
    """Load a memory; flags given explicitly win over the values it was saved with."""
    som, model, settings = load_memory(args.memory)
    if args.budget_factor is not None:
        settings = replace(settings, config=replace(settings.config, budget_factor=args.budget_factor))
    model.configure_planning(args.min_edge_count, args.edge_cost)
    if args.min_edge_count is not None or args.edge_cost is not None:
        log.info("planning with min_edge_count=%d edge_cost=%s", model.min_edge_count, model.edge_cost)
    return som, model, settings


def _run(args) -> int:
    config = from_args(args)
    world = load_world_file(args.world, config.max_range)
    memory = _load_for(args)
    goal = script = None
    if args.goal:
        goal = load_snapshot(args.goal, config.sensor.dim)
    elif args.goal_pose:
        goal = sense(world, args.goal_pose, config.sensor)
    elif args.script:
        script = json.loads(Path(args.script).read_text(encoding="utf-8"))
    else:
        log.error("run needs one of --goal, --goal-pose or --script")
        return 2
    report, agent = run_headless(world, config, args.steps, memory=memory, goal=goal, script=script)
    if args.save_memory:
        save_memory(agent.som, agent.model, agent.config, args.save_memory, frozen=agent.frozen)
        report["memory"] = str(args.save_memory)
    if args.out:
        write_report(report, Path(args.out), plot=args.plot)
    else:
        print(json.dumps(report.get("summary") or report.get("decisions"), indent=2))
    return 0


def _serve(args) -> int:
    config = from_args(args)
    world = load_world_file(args.world, config.max_range)
    memory = _load_for(args) if args.memory else None
    agent = build_agent(config, memory)
    session = Session(world, agent, config.sensor, allow_vector_goals=args.allow_vector_goals)
    serve(session, args.port, host=args.host, tick_ms=args.tick_ms)
    return 0


def _export(args) -> int:
    som, model, settings = load_memory(args.memory)
    out = export_memory_csv(som, model, settings.config, args.out, frozen=settings.frozen)
    log.info("exported %s to %s", args.memory, out)
    return 0


def _import(args) -> int:
    som, model, settings = import_memory_csv(args.source)
    save_memory(som, model, settings.config, args.memory, frozen=settings.frozen)
    log.info("imported %s into %s", args.source, args.memory)
    return 0


COMMANDS = {"train": _train, "run": _run, "serve": _serve, "export": _export, "import": _import}


def main(argv: Optional[List[str]] = None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (SomnavError, OSError, ValueError) as e:
        log.error("%s failed: %s", args.command, e)
        return 1


if __name__ == "__main__":
    sys.exit(main())
