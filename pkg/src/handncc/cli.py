"""Command-line front end: ``handncc {synth,enroll,recognize,eval,bench}``.

Exit codes: 0 success, 2 usage or configuration error, 3 recognition impossible
(empty foreground). Results go to stdout, diagnostics to stderr.
"""
from __future__ import annotations

import argparse
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .classifier import (
    DEFAULT_CANONICAL_SIZE,
    DEFAULT_KERNEL_FRACTION,
    MANIFEST,
    EmptyForegroundError,
    RegistryConflictError,
    RegistryLoadError,
    TemplateRegistry,
    enroll,
    load_registry,
    recognize,
    save_registry,
)
from .correlation import (
    make_kernel,
    ncc_map_fast,
    ncc_map_reference,
    summed_area_table,
    window_sums,
)
from .evalkit import LabelMismatchError, evaluate, render_report
from .morphology import StructuringElement
from .raster import PgmError, read_pgm
from .synthgest import DATASET_MANIFEST, PerturbationRanges, generate_dataset, load_dataset, save_dataset

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NO_FOREGROUND = 3


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    canonical_size: int = DEFAULT_CANONICAL_SIZE
    kernel_fraction: float = DEFAULT_KERNEL_FRACTION
    se_size: int = 3
    seed: int = 42
    ranges: PerturbationRanges = field(default_factory=PerturbationRanges)

    def __post_init__(self):
        if self.se_size < 1 or self.se_size % 2 == 0:
            raise UsageError(f"--se must be a positive odd number, got {self.se_size}")
        if not 0.0 < self.kernel_fraction <= 1.0:
            raise UsageError(f"--kernel-fraction must lie in (0, 1], got {self.kernel_fraction}")
        crop = int(self.canonical_size * self.kernel_fraction)
        if crop < 1 or self.canonical_size < 2 * crop:
            raise UsageError(
                f"canonical size {self.canonical_size} must be at least twice the kernel crop "
                f"({crop}) and the crop must be non-empty")

    @property
    def se(self) -> StructuringElement:
        return StructuringElement.square(self.se_size)

    @classmethod
    def from_args(cls, args) -> "RunConfig":
        return cls(
            canonical_size=getattr(args, "canonical_size", DEFAULT_CANONICAL_SIZE),
            kernel_fraction=getattr(args, "kernel_fraction", DEFAULT_KERNEL_FRACTION),
            se_size=getattr(args, "se", 3),
            seed=getattr(args, "seed", 42),
        )


def _err(msg: str) -> None:
    print(f"handncc: {msg}", file=sys.stderr)


def cmd_synth(args) -> int:
    cfg = RunConfig.from_args(args)
    if args.classes < 2 or args.per_class < 1:
        raise UsageError("need --classes >= 2 and --per-class >= 1")
    out = Path(args.out)
    dataset = generate_dataset(args.classes, args.per_class, cfg.seed, cfg.ranges)
    try:
        save_dataset(dataset, out)
    except OSError as exc:
        raise UsageError(f"cannot write dataset to {out}: {exc}") from exc
    print(f"wrote {len(dataset)} samples ({args.classes} classes x {args.per_class}) to {out}")
    return EXIT_OK


def _load_dataset(path) -> "object":
    root = Path(path)
    if not (root / DATASET_MANIFEST).is_file():
        raise UsageError(f"no dataset manifest in {root}")
    try:
        return load_dataset(root)
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read dataset {root}: {exc}") from exc


def _load_registry(path) -> TemplateRegistry:
    try:
        return load_registry(path)
    except RegistryLoadError as exc:
        raise UsageError(str(exc)) from exc


def cmd_enroll(args) -> int:
    cfg = RunConfig.from_args(args)
    dataset = _load_dataset(args.dataset)
    enrollment = dataset.enrollment()
    if not enrollment:
        raise UsageError(f"dataset {args.dataset} has no enrollment samples")
    out = Path(args.registry)
    if (out / MANIFEST).exists():
        raise UsageError(f"registry already exists at {out}; refusing to enroll over it")
    registry = TemplateRegistry(cfg.canonical_size, cfg.kernel_fraction)
    for sample in enrollment:
        try:
            enroll(sample.label, sample.image, registry, cfg.se)
        except RegistryConflictError as exc:
            raise UsageError(f"sample {sample.label}/{sample.index}: {exc}") from exc
        except EmptyForegroundError as exc:
            raise UsageError(f"sample {sample.label}/{sample.index}: {exc}") from exc
    try:
        save_registry(registry, out)
    except OSError as exc:
        raise UsageError(f"cannot write registry to {out}: {exc}") from exc
    print(f"enrolled {len(registry)} templates into {out}")
    return EXIT_OK


def cmd_recognize(args) -> int:
    cfg = RunConfig.from_args(args)
    registry = _load_registry(args.registry)
    try:
        image = read_pgm(args.image)
    except (OSError, PgmError) as exc:
        raise UsageError(f"cannot read {args.image}: {exc}") from exc
    try:
        result = recognize(image, registry, cfg.se)
    except EmptyForegroundError as exc:
        _err(f"{args.image}: {exc}")
        return EXIT_NO_FOREGROUND
    print(f"{result.label}\t{result.mse:.9f}")
    if args.scores:
        for label, value in result.per_class_scores.items():
            print(f"score\t{label}\t{value:.9f}")
    return EXIT_OK


def cmd_eval(args) -> int:
    cfg = RunConfig.from_args(args)
    dataset = _load_dataset(args.dataset)
    registry = _load_registry(args.registry)
    try:
        report = evaluate(registry, dataset.samples, cfg.se)
    except LabelMismatchError as exc:
        raise UsageError(str(exc)) from exc
    sys.stdout.write(render_report(report, "text").decode("utf-8"))
    if args.csv:
        try:
            Path(args.csv).write_bytes(render_report(report, "csv"))
        except OSError as exc:
            raise UsageError(f"cannot write {args.csv}: {exc}") from exc
    return EXIT_OK


def _time_per_call(fn, iters: int) -> float:
    best = math.inf
    for _ in range(iters):
        start = time.perf_counter_ns()
        fn()
        best = min(best, time.perf_counter_ns() - start)
    return best


def _direct_window_energy(img: np.ndarray, q: int, p: int) -> np.ndarray:
    out = np.empty((img.shape[0] - q + 1, img.shape[1] - p + 1))
    for y in range(out.shape[0]):
        for x in range(out.shape[1]):
            w = img[y:y + q, x:x + p]
            d = w - w.mean()
            out[y, x] = np.sum(d * d)
    return out


def _sat_window_energy(img: np.ndarray, q: int, p: int) -> np.ndarray:
    sums = window_sums(summed_area_table(img), q, p)
    sumsq = window_sums(summed_area_table(img * img), q, p)
    return sumsq - sums * sums / (p * q)


def cmd_bench(args) -> int:
    if args.iters < 1:
        raise UsageError("--iters must be at least 1")
    if args.kernel < 1 or args.size < 1:
        raise UsageError("--size and --kernel must be positive")
    if args.kernel > args.size:
        raise UsageError(f"kernel {args.kernel} larger than image {args.size}")
    rng = np.random.default_rng(args.seed)
    image = rng.integers(0, 256, size=(args.size, args.size)).astype(np.float64)
    kernel = make_kernel(rng.integers(0, 256, size=(args.kernel, args.kernel)))
    windows = (args.size - args.kernel + 1) ** 2

    ref = ncc_map_reference(image, kernel).data
    fast = ncc_map_fast(image, kernel).data
    gap = float(np.max(np.abs(ref - fast)))
    if not gap <= 1e-9:
        _err(f"fast and reference maps disagree by {gap:.3e}")
        return 1

    q = p = args.kernel
    rows = [
        ("map", _time_per_call(lambda: ncc_map_reference(image, kernel), args.iters),
         _time_per_call(lambda: ncc_map_fast(image, kernel), args.iters)),
        ("denominator", _time_per_call(lambda: _direct_window_energy(image, q, p), args.iters),
         _time_per_call(lambda: _sat_window_energy(image, q, p), args.iters)),
    ]
    print(f"size\t{args.size}\tkernel\t{args.kernel}\twindows\t{windows}\tmax_abs_diff\t{gap:.3e}")
    print("stage\treference_ns_per_window\tfast_ns_per_window\tspeedup")
    for stage, t_ref, t_fast in rows:
        print(f"{stage}\t{t_ref / windows:.1f}\t{t_fast / windows:.1f}\t{t_ref / t_fast:.2f}")
    return EXIT_OK


def _common(parser: argparse.ArgumentParser, seed: bool = False) -> None:
    parser.add_argument("--canonical-size", type=int, default=DEFAULT_CANONICAL_SIZE,
                        help="side of the canonical silhouette (default %(default)s)")
    parser.add_argument("--kernel-fraction", type=float, default=DEFAULT_KERNEL_FRACTION,
                        help="side fraction of the central kernel crop (default %(default)s)")
    parser.add_argument("--se", type=int, default=3, help="odd side of the square structuring element")
    if seed:
        parser.add_argument("--seed", type=int, default=42)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="handncc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic gesture dataset")
    p.add_argument("--classes", type=int, default=24)
    p.add_argument("--per-class", type=int, default=21)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("enroll", help="enroll each class's clean sample into a registry")
    p.add_argument("dataset")
    p.add_argument("registry")
    _common(p)
    p.set_defaults(func=cmd_enroll)

    p = sub.add_parser("recognize", help="classify one PGM image")
    p.add_argument("image")
    p.add_argument("registry")
    p.add_argument("--scores", action="store_true", help="also print every class's MSE")
    _common(p)
    p.set_defaults(func=cmd_recognize)

    p = sub.add_parser("eval", help="accuracy table and confusion matrix over a dataset")
    p.add_argument("dataset")
    p.add_argument("registry")
    p.add_argument("--csv", help="write the CSV report here")
    _common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="time reference vs summed-area NCC")
    p.add_argument("--size", type=int, default=128)
    p.add_argument("--kernel", type=int, default=64)
    p.add_argument("--iters", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
