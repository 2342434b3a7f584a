"""
frozenflake benchmarks - Performance measurement suite.

Run all benchmarks:
    python -m benchmarks.run_all

Run individual benchmarks:
    python benchmarks/generation.py
    python benchmarks/walks.py
"""
