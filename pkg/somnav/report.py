from __future__ import annotations
from typing import Any, Dict, List
from pathlib import Path
import json

import pandas as pd


def ensure_dir(p: Path):
    p.mkdir(parents=True, exist_ok=True)


def plot_quantization_curve(out_dir: Path, curve: List[Dict[str, float]], title: str = "") -> str:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    ensure_dir(out_dir)
    steps = [p["step"] for p in curve]
    errors = [p["quantization_error"] for p in curve]
    plt.figure()
    plt.plot(steps, errors, marker="o", markersize=3)
    plt.title(title or "quantization error during exploration")
    plt.xlabel("decision cycle")
    plt.ylabel("mean distance to winner")
    fpath = out_dir / "quantization_error.png"
    plt.savefig(fpath, dpi=150, bbox_inches="tight")
    plt.close()
    return str(fpath)


def write_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def write_markdown(text: str, path: Path):
    path.write_text(text)


def summarize_trials(rows: List[Dict[str, Any]]) -> Dict[str, Any]:
    if not rows:
        return {"trials": 0, "reached": 0, "success_rate": 0.0, "help_requests": {},
                "unreached_without_help": 0, "mean_steps_reached": None}
    df = pd.DataFrame(rows)
    reached = df[df["reached"]]
    missed = df[~df["reached"]]
    helps = missed["help"].dropna().value_counts().sort_index()
    return {
        "trials": int(len(df)),
        "reached": int(len(reached)),
        "success_rate": float(len(reached) / len(df)),
        "help_requests": {str(k): int(v) for k, v in helps.items()},
        "unreached_without_help": int(missed["help"].isna().sum()),
        "mean_steps_reached": float(reached["steps_taken"].mean()) if len(reached) else None,
    }


def write_trials_csv(rows: List[Dict[str, Any]], path: Path):
    pd.DataFrame(rows).to_csv(path, index=False)


def write_report(report: Dict[str, Any], out_dir: Path, plot: bool = False) -> Path:
    """report.json, SUMMARY.md, trials.csv when trials ran, and optionally the curve plot."""
    out_dir = Path(out_dir)
    ensure_dir(out_dir)
    write_json(report, out_dir / "report.json")
    if report.get("trials"):
        write_trials_csv(report["trials"], out_dir / "trials.csv")
    curve = report.get("quantization_error", [])
    md = ["# Run Summary",
          f"- sensor: **{report.get('sensor')}**, grid **{'x'.join(str(v) for v in report.get('grid', []))}**, seed **{report.get('seed')}**",
          f"- decision cycles: **{report.get('steps')}**"]
    if curve:
        md.append(f"- quantization error: **{curve[0]['quantization_error']:.4f}** -> "
                  f"**{curve[-1]['quantization_error']:.4f}**")
    chain = report.get("chain")
    if chain:
        md.append(f"- chain: {chain['observations']} transitions, {chain['edges']} planning edges")
    summary = report.get("summary")
    if summary:
        md.append(f"- goal trials: {summary['reached']}/{summary['trials']} reached "
                  f"({summary['success_rate']:.0%}); help requests: {summary['help_requests'] or 'none'}")
    if report.get("memory"):
        md.append(f"- memory saved to `{report['memory']}`")
    if plot and len(curve) > 1:
        md.append(f"- curve plot: `{plot_quantization_curve(out_dir, curve)}`")
    write_markdown("\n".join(md) + "\n", out_dir / "SUMMARY.md")
    return out_dir
