"""
Terminal-style stage logging

Every line looks like `[HH:MM:SS] [Stage] -> message` and goes to stderr so
that JSON written to stdout stays parseable.
"""
import sys
from datetime import datetime
from typing import List, Optional

from freysieve import config


def log_stage(stage: str, message: str, history: Optional[List[dict]] = None) -> Optional[List[dict]]:
    """Print one stage line and append it to `history` when one is given"""
    timestamp = datetime.now().strftime("%H:%M:%S")
    if not config.settings.quiet:
        print(f"[{timestamp}] [{stage}] -> {message}", file=sys.stderr)

    if history is not None:
        history.append({
            "timestamp": timestamp,
            "stage": stage,
            "message": message,
        })
    return history


def log_debug(stage: str, message: str) -> None:
    """Detail lines, only with FREYSIEVE_DEBUG=1"""
    if config.settings.debug:
        log_stage(stage, message)
