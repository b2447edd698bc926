import os
import logging
from pathlib import Path
from dotenv import load_dotenv

from app.logic.syntax import Alphabet

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

# Constants
PROJECT_ROOT = Path(__file__).parent.parent.parent
DEFAULT_FIXTURES_PATH = PROJECT_ROOT / 'data' / 'fixtures'
DEFAULT_LOG_FILE = "cathoristic.log"
DEFAULT_KB_LOG = PROJECT_ROOT / 'data' / 'kb' / 'commands.log'


def alphabet_from_env():
    """
    Read the ambient alphabet from CL_ALPHABET.

    Returns:
        Alphabet: Closed alphabet when the variable lists actions, Open otherwise
    """
    raw = os.getenv("CL_ALPHABET", "").strip()
    if not raw:
        return Alphabet.open()
    actions = [a.strip() for a in raw.split(",") if a.strip()]
    return Alphabet.closed(actions)


def log_file():
    return os.getenv("CL_LOG_FILE") or DEFAULT_LOG_FILE


def log_level(default="WARNING"):
    name = os.getenv("CL_LOG_LEVEL", default).upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        logger.warning(f"Unknown CL_LOG_LEVEL {name}, using {default}")
        level = getattr(logging, default)
    return level


def n_jobs():
    raw = os.getenv("CL_JOBS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        logger.warning(f"CL_JOBS must be an integer, got {raw}")
        return 1


def height_bound_mode():
    mode = os.getenv("CL_HEIGHT_BOUND", "depth").lower()
    if mode not in ("depth", "length"):
        logger.warning(f"CL_HEIGHT_BOUND must be depth or length, got {mode}")
        return "depth"
    return mode


def fixtures_path():
    return Path(os.getenv("CL_DATA_DIR") or DEFAULT_FIXTURES_PATH)


def kb_log_path():
    return Path(os.getenv("CL_KB_LOG") or DEFAULT_KB_LOG)


def kb_snapshot_every():
    """Mutations between model-file snapshots of the KB; 0 turns snapshots off."""
    raw = os.getenv("CL_KB_SNAPSHOT_EVERY") or "50"
    try:
        return max(0, int(raw))
    except ValueError:
        logger.warning(f"CL_KB_SNAPSHOT_EVERY must be an integer, got {raw}")
        return 50
