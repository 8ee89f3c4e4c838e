"""
Command line entry point: `python -m src.main <verb> ...`

Verbs: simulate, meanfield, regulate, fixed-points, scan, profile (optionally with a scenario
file), run <scenario>, figure <id>, plot <csv>. Exit status: 0 success, 2 configuration error,
3 numerical failure, 4 failed acceptance check (`figure --check`).
"""

import sys

from src.cli.commands import main


if __name__ == "__main__":
    sys.exit(main())
