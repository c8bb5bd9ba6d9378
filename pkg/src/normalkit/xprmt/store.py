"""
Saved experiment results: one JSON file per run in a plain directory.

Listing reads the files back; there is no index or database.
"""

import json
import logging
import re
import uuid
from dataclasses import asdict, dataclass
from datetime import datetime
from pathlib import Path
from typing import Any

from .models import TableResult

logger = logging.getLogger(__name__)

DEFAULT_RESULTS_DIR = Path.home() / ".normalkit" / "results"


@dataclass
class StoredResult:
    """A saved table with its storage metadata."""

    id: str
    experiment: str
    created_at: str
    result: dict[str, Any]

    def to_dict(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "StoredResult":
        return cls(**data)

    @property
    def table(self) -> TableResult:
        return TableResult.model_validate(self.result)


class ResultStore:
    """
    Experiment results as JSON files.

    Storage: <results_dir>/{result_id}.json
    """

    def __init__(self, results_dir: Path | None = None):
        self.results_dir = results_dir or DEFAULT_RESULTS_DIR
        self.results_dir.mkdir(parents=True, exist_ok=True)

    def _path(self, result_id: str) -> Path:
        safe_id = re.sub(r"[^a-zA-Z0-9_-]", "_", result_id)
        return self.results_dir / f"{safe_id}.json"

    def _generate_id(self, experiment: str) -> str:
        base_id = re.sub(r"[^a-zA-Z0-9_-]", "-", experiment.lower())
        base_id = re.sub(r"-+", "-", base_id).strip("-") or "result"
        if not self._path(base_id).exists():
            return base_id
        for i in range(1, 100):
            candidate = f"{base_id}-{i}"
            if not self._path(candidate).exists():
                return candidate
        return f"{base_id}-{uuid.uuid4().hex[:8]}"

    def save(self, result: TableResult, result_id: str | None = None) -> StoredResult:
        """
        Store ``result`` under a fresh id derived from the experiment name.

        Raises:
            ValueError: if an explicit ``result_id`` is already taken
        """
        if result_id is None:
            result_id = self._generate_id(result.experiment)
        elif self._path(result_id).exists():
            raise ValueError(f"Result with ID '{result_id}' already exists")
        stored = StoredResult(
            id=result_id,
            experiment=result.experiment,
            created_at=datetime.now().isoformat(),
            result=result.model_dump(mode="json"),
        )
        with open(self._path(result_id), "w", encoding="utf-8") as f:
            json.dump(stored.to_dict(), f, indent=2)
        logger.info(f"Saved result: {result_id}")
        return stored

    def get(self, result_id: str) -> StoredResult | None:
        path = self._path(result_id)
        if not path.exists():
            return None
        try:
            with open(path, encoding="utf-8") as f:
                return StoredResult.from_dict(json.load(f))
        except Exception as e:
            logger.error(f"Failed to load result {result_id}: {e}")
            return None

    def delete(self, result_id: str) -> bool:
        path = self._path(result_id)
        if not path.exists():
            return False
        path.unlink()
        logger.info(f"Deleted result: {result_id}")
        return True

    def list_all(self) -> list[StoredResult]:
        """All stored results, newest first."""
        stored = []
        for path in self.results_dir.glob("*.json"):
            try:
                with open(path, encoding="utf-8") as f:
                    stored.append(StoredResult.from_dict(json.load(f)))
            except Exception as e:
                logger.warning(f"Failed to load result {path.name}: {e}")
        return sorted(stored, key=lambda s: s.created_at, reverse=True)

    def list_by_experiment(self, experiment: str) -> list[StoredResult]:
        return [s for s in self.list_all() if s.experiment == experiment]
