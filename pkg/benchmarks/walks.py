#!/usr/bin/env python3
"""
Walk-on-spheres throughput benchmark for frozenflake.

Measures walks per second on the unit disk for several worker counts and
checks that the pooled runs reproduce the serial one.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any

import numpy as np

from frozenflake.fixtures import disk
from frozenflake.harmonic import WosBoundary, WosConfig, run_walks


def measure_throughput(workers: int, walks: int, chunk_size: int, sides: int) -> dict[str, Any]:
    """Time one interior run from the center of a polygonal disk."""
    cfg = WosConfig(walks=walks, workers=workers, chunk_size=chunk_size, seed=0)
    boundary = WosBoundary.from_curve(disk(1.0, sides), cfg)

    start = time.perf_counter()
    result = run_walks(boundary, (0.0, 0.0), "interior", cfg)
    elapsed = time.perf_counter() - start

    return {
        "workers": workers,
        "walks": walks,
        "sides": sides,
        "elapsed_s": elapsed,
        "walks_per_s": walks / elapsed if elapsed > 0 else 0.0,
        "mean_steps": float(np.mean(result.steps)),
        "timeouts": result.timeouts,
        "points": result.points,
    }


def main() -> int:
    parser = argparse.ArgumentParser(description="Measure walk-on-spheres throughput")
    parser.add_argument(
        "--workers",
        type=int,
        nargs="+",
        default=[1, 2, 4],
        help="Worker counts to test",
    )
    parser.add_argument("--walks", type=int, default=50_000, help="Walks per run")
    parser.add_argument("--chunk-size", type=int, default=5_000, help="Walks per task")
    parser.add_argument("--sides", type=int, default=1024, help="Sides of the disk polygon")
    parser.add_argument("--json", action="store_true", help="Output as JSON")
    args = parser.parse_args()

    print(f"Walk-on-spheres throughput, {args.walks} walks on a {args.sides}-gon")
    print("-" * 60)

    results = []
    for workers in args.workers:
        print(f"Testing {workers} workers...", end=" ", flush=True)
        r = measure_throughput(workers, args.walks, args.chunk_size, args.sides)
        results.append(r)
        print(f"{r['walks_per_s']:.0f} walks/s, {r['mean_steps']:.1f} steps per walk")

    reproducible = all(np.array_equal(results[0]["points"], r["points"]) for r in results[1:])
    print(f"Identical across worker counts: {reproducible}")

    if args.json:
        for r in results:
            del r["points"]
        print(json.dumps({"throughput": results, "reproducible": reproducible}, indent=2))
    return 0 if reproducible else 1


if __name__ == "__main__":
    sys.exit(main())
