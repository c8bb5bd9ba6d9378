"""Event callbacks for solver and experiment runs.

Solvers and the experiment harness emit ``(event, data)`` pairs through an
:class:`~normalkit.protocols.EventCallback`. These factories turn the stream
into a JSON-lines run log or into ordinary log records.
"""

import json
import logging
import sys
from dataclasses import asdict, is_dataclass
from enum import Enum
from pathlib import Path
from typing import IO, Any

import numpy as np

from .protocols import EventCallback

logger = logging.getLogger(__name__)


def serialize_value(obj: Any) -> Any:
    """Recursively serialize objects for JSON output."""
    # Handle Pydantic models
    if hasattr(obj, "model_dump"):
        return serialize_value(obj.model_dump(mode="json"))
    # Handle dataclasses
    if is_dataclass(obj) and not isinstance(obj, type):
        return serialize_value(asdict(obj))
    if isinstance(obj, Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, dict):
        return {str(k): serialize_value(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [serialize_value(item) for item in obj]
    return obj


def create_jsonl_event_callback(target: str | Path | IO[str] | None = None) -> EventCallback:
    """
    Create an event callback that writes JSONL.

    Args:
        target: File path (appended to), an open text stream, or None for stdout
    """
    if target is None or hasattr(target, "write"):
        stream: IO[str] = target if target is not None else sys.stdout  # type: ignore[assignment]

        def callback(event: str, data: dict[str, Any]) -> None:
            line = json.dumps({"event": event, "data": serialize_value(data)}, ensure_ascii=False)
            print(line, file=stream, flush=True)

        return callback

    path = Path(target)  # type: ignore[arg-type]
    path.parent.mkdir(parents=True, exist_ok=True)
    logger.info(f"Writing run log to {path}")

    def file_callback(event: str, data: dict[str, Any]) -> None:
        line = json.dumps({"event": event, "data": serialize_value(data)}, ensure_ascii=False)
        with open(path, "a", encoding="utf-8") as f:
            f.write(line + "\n")

    return file_callback


def create_logging_event_callback(logger_name: str = "normalkit.events") -> EventCallback:
    """
    Create an event callback that logs events.

    For debugging or when JSONL output isn't needed.
    """
    event_logger = logging.getLogger(logger_name)

    def callback(event: str, data: dict[str, Any]) -> None:
        event_logger.debug(f"Event: {event}", extra={"event_data": data})

    return callback


def chain_callbacks(*callbacks: EventCallback | None) -> EventCallback | None:
    """Fan one event stream out to several callbacks, skipping None entries."""
    active = [cb for cb in callbacks if cb is not None]
    if not active:
        return None
    if len(active) == 1:
        return active[0]

    def callback(event: str, data: dict[str, Any]) -> None:
        for cb in active:
            cb(event, data)

    return callback
