"""Accuracy versus synthetic frame size, the experiment behind synthgest.FRAME.

    python scripts/frame_sweep.py --frames 160 192 256 --seeds 1 2 3

Perturbations (rotation, translation, noise, specks) are fixed in pixels, so
smaller frames make the same perturbation relatively larger after the
canonical resize. Prints one row per (frame, seed).
"""
import argparse
import time

from handncc.classifier import TemplateRegistry, enroll
from handncc.evalkit import evaluate
from handncc.synthgest import generate_dataset


def accuracy(frame: int, seed: int, classes: int, per_class: int):
    dataset = generate_dataset(classes, per_class, seed, frame=frame)
    registry = TemplateRegistry()
    for sample in dataset.enrollment():
        enroll(sample.label, sample.image, registry)
    report = evaluate(registry, dataset.samples)
    worst = min(report.per_class, key=lambda r: r.accuracy)
    return report.total.accuracy, worst


if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--frames", type=int, nargs="+", default=[160, 192, 256])
    parser.add_argument("--seeds", type=int, nargs="+", default=[1, 2, 3])
    parser.add_argument("--classes", type=int, default=24)
    parser.add_argument("--per-class", type=int, default=21)
    args = parser.parse_args()
    print("frame\tseed\ttotal_pct\tworst_class\tworst_pct\tseconds")
    for frame in args.frames:
        for seed in args.seeds:
            start = time.perf_counter()
            total, worst = accuracy(frame, seed, args.classes, args.per_class)
            print(f"{frame}\t{seed}\t{total}\t{worst.label}\t{worst.accuracy}\t{time.perf_counter() - start:.1f}",
                  flush=True)
