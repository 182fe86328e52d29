"""
Runtime Settings
================
Thread count resolution shared by the CLI and the sweep/evaluation loops.
"""

import os
from typing import Optional

from dotenv import load_dotenv

from src.utils.errors import ConfigError

THREADS_ENV_VAR = 'URM_THREADS'


def resolve_threads(requested: Optional[int] = None) -> int:
    """
    Number of workers for parallel loops

    Order: explicit value (e.g. --threads), then URM_THREADS from the
    environment or a .env file, then 1.
    """
    if requested is not None:
        threads = int(requested)
    else:
        load_dotenv()
        raw = os.getenv(THREADS_ENV_VAR)
        if raw is None or raw.strip() == '':
            return 1
        try:
            threads = int(raw)
        except ValueError:
            raise ConfigError(f"{THREADS_ENV_VAR} must be an integer, got {raw!r}")

    if threads < 1:
        raise ConfigError(f"thread count must be >= 1, got {threads}")
    return threads
