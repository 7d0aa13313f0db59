"""Reproduce the per-class accuracy table on the seeded synthetic dataset.

    python scripts/run_table.py --seed 42 --out runs/seed42

Runs synth -> enroll -> eval in-process and leaves the dataset, registry and
CSV report under --out.
"""
import argparse
import time
from pathlib import Path

from handncc.cli import main


def run(out: Path, classes: int, per_class: int, seed: int) -> float:
    start = time.perf_counter()
    steps = [
        ["synth", "--classes", str(classes), "--per-class", str(per_class), "--seed", str(seed),
         "--out", str(out / "data")],
        ["enroll", str(out / "data"), str(out / "registry")],
        ["eval", str(out / "data"), str(out / "registry"), "--csv", str(out / "report.csv")],
    ]
    for argv in steps:
        code = main(argv)
        if code != 0:
            raise SystemExit(f"step {argv[0]} failed with exit code {code}")
    return time.perf_counter() - start


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--classes", type=int, default=24)
    parser.add_argument("--per-class", type=int, default=21)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--out", type=Path, default=Path("runs/table"))
    args = parser.parse_args()
    if (args.out / "registry").exists():
        raise SystemExit(f"{args.out} already holds a run; pick another --out")
    seconds = run(args.out, args.classes, args.per_class, args.seed)
    print(f"# {seconds:.1f} s end to end; CSV at {args.out / 'report.csv'}")
