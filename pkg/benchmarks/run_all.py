#!/usr/bin/env python3
"""
Run all frozenflake benchmarks and generate a report.

Usage:
    python benchmarks/run_all.py
    python benchmarks/run_all.py --output results.json
"""

from __future__ import annotations

import argparse
import json
import os
import platform
import sys
import time
from datetime import datetime
from pathlib import Path


def get_system_info() -> dict:
    """Collect system information."""
    return {
        "python_version": sys.version,
        "platform": platform.platform(),
        "processor": platform.processor(),
        "cpu_count": os.cpu_count(),
        "timestamp": datetime.now().isoformat(),
    }


def run_generation_benchmark(quick: bool) -> dict:
    """Run curve generation benchmark."""
    print("\n" + "=" * 60)
    print("Generation Benchmark")
    print("=" * 60)

    from benchmarks.generation import measure_pipeline, measure_stages

    stages = []
    for M in [2] if quick else [2, 3]:
        print(f"  Stages for M={M}...", end=" ", flush=True)
        result = measure_stages(sides=12, M=M, depth=3)
        stages.append(result)
        total = result["assemble_s"] + result["smooth_s"] + result["inscribe_s"]
        print(f"{result['segments']} segments in {total:.3f}s")

    print("  Windowed pipeline...", end=" ", flush=True)
    pipeline = measure_pipeline(generations=1 if quick else 2, depth=3)
    print(f"{pipeline['elapsed_s']:.2f}s")

    return {"stages": stages, "pipeline": pipeline}


def run_walks_benchmark(quick: bool) -> dict:
    """Run walk-on-spheres throughput benchmark."""
    print("\n" + "=" * 60)
    print("Walk-on-Spheres Benchmark")
    print("=" * 60)

    import numpy as np

    from benchmarks.walks import measure_throughput

    results = []
    for workers in [1, 2] if quick else [1, 2, 4]:
        print(f"  Testing {workers} workers...", end=" ", flush=True)
        result = measure_throughput(workers, walks=20_000, chunk_size=5_000, sides=1024)
        results.append(result)
        print(f"{result['walks_per_s']:.0f} walks/s")

    reproducible = all(np.array_equal(results[0]["points"], r["points"]) for r in results[1:])
    for r in results:
        del r["points"]
    return {"walks": results, "reproducible": reproducible}


def check_targets(results: dict) -> dict:
    """Check if benchmarks meet target thresholds."""
    checks = {}

    # Windowed generations must stay interactive
    pipeline = results.get("generation", {}).get("pipeline")
    if pipeline:
        checks["pipeline_time"] = {
            "target": "<60 s",
            "actual": f"{pipeline['elapsed_s']:.1f} s",
            "passed": pipeline["elapsed_s"] < 60,
        }

    walks = results.get("walks", {})
    if walks:
        checks["walks_reproducible"] = {
            "target": "identical across workers",
            "actual": str(walks["reproducible"]),
            "passed": walks["reproducible"],
        }
        timeouts = sum(r["timeouts"] for r in walks["walks"])
        checks["walk_timeouts"] = {
            "target": "0",
            "actual": str(timeouts),
            "passed": timeouts == 0,
        }

    return checks


def main():
    parser = argparse.ArgumentParser(description="Run all frozenflake benchmarks")
    parser.add_argument(
        "--output",
        type=Path,
        help="Output file for JSON results",
    )
    parser.add_argument(
        "--quick",
        action="store_true",
        help="Run quick benchmarks only",
    )

    args = parser.parse_args()

    print("=" * 60)
    print("frozenflake Benchmark Suite")
    print("=" * 60)
    print(f"Python: {sys.version}")
    print(f"Platform: {platform.platform()}")

    start_time = time.perf_counter()
    all_results = {"system": get_system_info()}

    try:
        all_results["generation"] = run_generation_benchmark(args.quick)
    except Exception as e:
        print(f"  ✗ Generation benchmark failed: {e}")
        all_results["generation_error"] = str(e)

    try:
        all_results["walks"] = run_walks_benchmark(args.quick)
    except Exception as e:
        print(f"  ✗ Walk benchmark failed: {e}")
        all_results["walks_error"] = str(e)

    elapsed = time.perf_counter() - start_time

    checks = check_targets(all_results)
    all_results["checks"] = checks

    # Summary
    print("\n" + "=" * 60)
    print("Summary")
    print("=" * 60)
    print(f"Total time: {elapsed:.1f}s")
    print()

    all_passed = True
    for name, check in checks.items():
        status = "✓" if check["passed"] else "✗"
        all_passed = all_passed and check["passed"]
        print(f"  {status} {name}: {check['actual']} (target: {check['target']})")

    print()
    if all_passed:
        print("All benchmarks PASSED ✓")
    else:
        print("Some benchmarks FAILED ✗")

    if args.output:
        args.output.write_text(json.dumps(all_results, indent=2))
        print(f"\nResults saved to: {args.output}")

    return 0 if all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
