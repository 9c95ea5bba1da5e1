"""
Configuration loader for splat-edit
Loads runtime settings from environment variables
"""
import os
from dotenv import load_dotenv

load_dotenv()


def get_optional(key: str, default: str = None) -> str:
    """Get optional environment variable with default"""
    return os.getenv(key, default)


def get_int(key: str, default: int) -> int:
    """Get integer environment variable or raise error on garbage"""
    value = get_optional(key)
    if value is None or not value.strip():
        return default
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"Environment variable {key} must be an integer, got {value!r}")


# Configuration dictionary
config = {
    # Logging level for the CLI (DEBUG, INFO, WARNING, ERROR)
    "log_level": get_optional("LOG_LEVEL", "INFO").upper(),

    # Default seed when --seed is not given
    "seed": get_int("SPLAT_EDIT_SEED", 0),

    # Worker threads for per-view work (rendering, prototypes, transport)
    "threads": get_int("SPLAT_EDIT_THREADS", 4),

    # Where CLI commands put their files when --out is not given
    "output_dir": get_optional("SPLAT_EDIT_OUTPUT_DIR", "./data"),
}
