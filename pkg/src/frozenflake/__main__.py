"""Allow ``python -m frozenflake``."""

from __future__ import annotations

import sys

from frozenflake.cli import main


if __name__ == "__main__":
    sys.exit(main())
