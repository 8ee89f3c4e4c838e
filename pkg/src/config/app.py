import enum
import os
from pathlib import Path

from dotenv import load_dotenv


class SystemVariant(enum.StrEnum):
    FULL = "full"
    REDUCED = "reduced"


class Population(enum.StrEnum):
    E = "E"
    I = "I"  # noqa: E741


class ScenarioKind(enum.StrEnum):
    SIMULATE = "simulate"
    MEANFIELD = "meanfield"
    REGULATE = "regulate"
    FIXED_POINTS = "fixed-points"
    SCAN = "scan"
    PROFILE = "profile"


class FigureId(enum.StrEnum):
    FIG_1 = "1"
    FIG_2A = "2a"
    FIG_2B = "2b"
    FIG_2C = "2c"
    FIG_3A = "3a"
    FIG_3B = "3b"
    FIG_4A = "4a"
    FIG_4B = "4b"
    FIG_4C = "4c"
    FIG_5 = "5"
    FIG_6A = "6a"
    FIG_6B = "6b"
    FIG_6C = "6c"
    FIG_7 = "7"
    FIG_8A = "8a"
    FIG_8B = "8b"
    FIG_8C = "8c"


PROJECT_PATH = Path(__file__).parent.parent.absolute()
ROOT_PATH = PROJECT_PATH.parent
DATA_PATH = ROOT_PATH / ".data"

ENV_FILE_PATH = ROOT_PATH / ".env"
if ENV_FILE_PATH.exists():
    load_dotenv(ENV_FILE_PATH)  # read env variables from .env

OUTPUT_PATH = Path(os.getenv("OUTPUT_PATH", str(DATA_PATH / "runs")))

# process pool size for region scans; 1 keeps everything in-process
WORKERS = int(os.getenv("WORKERS", "0")) or (os.cpu_count() or 1)

DEBUG_CHECKS = os.getenv("DEBUG_CHECKS", "false").lower() == "true"

DEFAULT_DT = float(os.getenv("DEFAULT_DT", "0.01"))
DEFAULT_BETA = 1.0

TOOL_VERSION = "0.1.0"
