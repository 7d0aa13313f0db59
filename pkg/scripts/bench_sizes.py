"""Reference vs summed-area NCC timings over a grid of image/kernel sizes.

    python scripts/bench_sizes.py --sizes 64 128 256 --fraction 0.5
"""
import argparse

from handncc.cli import main

if __name__ == "__main__":
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--fraction", type=float, default=0.5)
    parser.add_argument("--iters", type=int, default=3)
    args = parser.parse_args()
    for size in args.sizes:
        kernel = max(1, int(size * args.fraction))
        code = main(["bench", "--size", str(size), "--kernel", str(kernel), "--iters", str(args.iters)])
        if code != 0:
            raise SystemExit(code)
        print()
