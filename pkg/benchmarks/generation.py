#!/usr/bin/env python3
"""
Generation benchmark for frozenflake.

Times one refinement step per stage (assemble, smooth, inscribe) and the
whole windowed pipeline.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from typing import Any

from frozenflake.config import RunConfig
from frozenflake.pipeline import build_generations
from frozenflake.refine import assemble_G, initial_polygon, inscribe, smooth


def measure_stages(sides: int, M: int, depth: int) -> dict[str, Any]:
    """Time each stage of one global step on the initial polygon."""
    omega = initial_polygon(sides)

    start = time.perf_counter()
    assembled = assemble_G(omega, M, depth=depth)
    assemble_time = time.perf_counter() - start

    start = time.perf_counter()
    smoothed = smooth(assembled, assembled.min_length)
    smooth_time = time.perf_counter() - start

    start = time.perf_counter()
    inscribed = inscribe(smoothed, 1, assembled.min_length)
    inscribe_time = time.perf_counter() - start

    return {
        "sides": sides,
        "M": M,
        "depth": depth,
        "segments": len(assembled),
        "chords": inscribed.chords,
        "assemble_s": assemble_time,
        "smooth_s": smooth_time,
        "inscribe_s": inscribe_time,
        "leaves_per_s": len(assembled) / assemble_time if assemble_time > 0 else 0.0,
        "chords_per_s": inscribed.chords / inscribe_time if inscribe_time > 0 else 0.0,
    }


def measure_pipeline(generations: int, depth: int | None) -> dict[str, Any]:
    """Time a windowed run of several generations."""
    config = RunConfig(m0=2, generations=generations, depth=depth)
    start = time.perf_counter()
    run = build_generations(config)
    elapsed = time.perf_counter() - start
    return {
        "generations": generations,
        "depth": depth,
        "edges": [len(c) for c in run.curves],
        "elapsed_s": elapsed,
    }


def main() -> int:
    parser = argparse.ArgumentParser(description="Time frozenflake curve generation")
    parser.add_argument("--sides", type=int, default=12, help="initial polygon sides")
    parser.add_argument("--M", type=int, nargs="+", default=[2, 3], help="M values to test")
    parser.add_argument("--depth", type=int, default=3, help="Gamma depth of the stage test")
    parser.add_argument("--generations", type=int, default=2, help="pipeline generations")
    parser.add_argument("--json", action="store_true", help="Output as JSON")
    args = parser.parse_args()

    results: dict[str, Any] = {"stages": [], "pipeline": None}
    for M in args.M:
        print(f"Stages for M={M}, depth={args.depth}...", end=" ", flush=True)
        r = measure_stages(args.sides, M, args.depth)
        results["stages"].append(r)
        print(
            f"{r['segments']} segments: assemble {r['assemble_s']:.3f}s, "
            f"smooth {r['smooth_s']:.3f}s, inscribe {r['inscribe_s']:.3f}s"
        )

    print(f"Windowed pipeline, {args.generations} generations...", end=" ", flush=True)
    results["pipeline"] = measure_pipeline(args.generations, args.depth)
    print(f"{results['pipeline']['elapsed_s']:.2f}s")

    if args.json:
        print(json.dumps(results, indent=2))
    return 0


if __name__ == "__main__":
    sys.exit(main())
