#!/usr/bin/env python3
"""
Easy-to-use script for running the somnav experiment pipeline:
explore a world headlessly, save the memory, then run goal-seeking trials.
This script handles the PYTHONPATH setup automatically.
"""

import sys
import os
import subprocess
from pathlib import Path


def main():
    """Run the train -> run pipeline with proper environment setup"""

    current_dir = Path(__file__).parent.absolute()
    python_path = os.environ.get('PYTHONPATH', '')
    if python_path:
        os.environ['PYTHONPATH'] = f"{current_dir}:{python_path}"
    else:
        os.environ['PYTHONPATH'] = str(current_dir)

    import argparse
    parser = argparse.ArgumentParser(description='Run the somnav navigation experiment')
    parser.add_argument('--world', type=str, default='worlds/reference10.txt',
                        help='World file (default: worlds/reference10.txt)')
    parser.add_argument('--out_dir', type=str, default='reports',
                        help='Output directory for results (default: reports)')
    parser.add_argument('--sensor', type=str, choices=['ring16', 'image8x8'],
                        default='ring16', help='Sensor model')
    parser.add_argument('--steps', type=int, default=3000,
                        help='Exploration cycles (default: 3000)')
    parser.add_argument('--trials', type=int, default=20,
                        help='Goal-seeking trials (default: 20)')
    parser.add_argument('--goal_pose', type=str, default='1,1,N',
                        help='Goal pose ROW,COL,HEADING (default: 1,1,N)')
    parser.add_argument('--budget_factor', type=float, default=2.0,
                        help='Help threshold as a multiple of the plan estimate (default: 2.0)')
    parser.add_argument('--seed', type=int, default=7)
    parser.add_argument('--verify', action='store_true',
                        help='Run algorithm verification first')

    args = parser.parse_args()

    print("somnav Navigation Experiment")
    print("=" * 50)

    if args.verify:
        print("Running algorithm verification...")
        subprocess.run([sys.executable, 'verify_algorithms.py'], cwd=current_dir)
        print("Verification complete!")
        print()

    out_dir = Path(args.out_dir)
    memory = out_dir / "memory.json"
    common = ['--seed', str(args.seed), '--sensor', args.sensor,
              '--budget-factor', str(args.budget_factor), '--trials', str(args.trials)]

    print(f"Running experiment with parameters:")
    print(f"  - World: {args.world}")
    print(f"  - Sensor: {args.sensor}")
    print(f"  - Exploration steps: {args.steps}")
    print(f"  - Trials: {args.trials} toward {args.goal_pose}")
    print()

    train = [sys.executable, '-m', 'somnav.cli', 'train', '--world', args.world,
             '--memory', str(memory), '--steps', str(args.steps),
             '--out', str(out_dir / 'train'), '--plot'] + common
    run = [sys.executable, '-m', 'somnav.cli', 'run', '--world', args.world,
           '--memory', str(memory), '--goal-pose', args.goal_pose,
           '--out', str(out_dir / 'run')] + common

    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        subprocess.run(train, cwd=current_dir, check=True)
        subprocess.run(run, cwd=current_dir, check=True)
        print("Experiment completed successfully!")
        print(f"Results saved to: {out_dir}/")
        print(f"Check {out_dir}/run/SUMMARY.md for a quick overview")
    except subprocess.CalledProcessError as e:
        print(f"Error running experiment: {e}")
        sys.exit(1)
    except FileNotFoundError:
        print("Error: Could not find the somnav package. Make sure you're in the project directory.")
        sys.exit(1)


if __name__ == "__main__":
    main()
