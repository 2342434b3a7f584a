"""frozenflake test suite."""
