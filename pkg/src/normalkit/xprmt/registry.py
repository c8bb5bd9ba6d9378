"""Registry of named experiments."""

import logging
from dataclasses import dataclass, field
from typing import Any

from ..errors import ConfigError
from ..protocols import EventCallback
from .fem import (
    HISTORY,
    TABLE4,
    TABLE5,
    TABLE6_DIRECT,
    TABLE6_GMG,
    TABLE7_DIRECT,
    TABLE7_GMG,
    TABLE8,
    run_fem_experiment,
)
from .models import ExperimentFamily, ExperimentSpec, TableResult
from .tables import TABLE1, TABLE2, TABLE3, run_table1, run_table_fd

logger = logging.getLogger(__name__)


@dataclass
class ExperimentRegistry:
    """
    Registry of runnable experiments.

    Combines the built-in catalog (one entry per published table plus the
    direct / multigrid substitutes for the AMG tables) with experiments
    registered at runtime.
    """

    _known: dict[str, ExperimentSpec] = field(default_factory=dict)
    _custom: dict[str, ExperimentSpec] = field(default_factory=dict)

    def __post_init__(self):
        for spec in (
            TABLE1,
            TABLE2,
            TABLE3,
            TABLE4,
            TABLE5,
            TABLE6_DIRECT,
            TABLE6_GMG,
            TABLE7_DIRECT,
            TABLE7_GMG,
            TABLE8,
            HISTORY,
        ):
            self._known[spec.name] = spec

    def register(self, spec: ExperimentSpec) -> ExperimentSpec:
        """
        Add a custom experiment.

        Raises:
            ConfigError: if the name is already taken
        """
        if spec.name in self._known or spec.name in self._custom:
            raise ConfigError(f"experiment '{spec.name}' already registered")
        self._custom[spec.name] = spec
        logger.info(f"Registered experiment: {spec.name}")
        return spec

    def unregister(self, name: str) -> bool:
        return self._custom.pop(name, None) is not None

    def list_all(self) -> list[ExperimentSpec]:
        """Built-in experiments in catalog order, then custom ones."""
        return [*self._known.values(), *self._custom.values()]

    def list_by_family(self, family: ExperimentFamily | str) -> list[ExperimentSpec]:
        family = ExperimentFamily(family)
        return [s for s in self.list_all() if s.family == family]

    def get_info(self, name: str) -> ExperimentSpec | None:
        return self._custom.get(name) or self._known.get(name)

    def resolve(self, name: str, **overrides: Any) -> ExperimentSpec:
        """
        Look up ``name`` and apply field overrides (None values are ignored).

        Raises:
            ConfigError: unknown experiment or invalid override
        """
        spec = self.get_info(name)
        if spec is None:
            known = ", ".join(s.name for s in self.list_all())
            raise ConfigError(f"unknown experiment '{name}' (known: {known})")
        updates = {k: v for k, v in overrides.items() if v is not None}
        if not updates:
            return spec
        unknown = set(updates) - set(ExperimentSpec.model_fields)
        if unknown:
            raise ConfigError(f"unknown experiment fields: {sorted(unknown)}")
        # validate through the model rather than model_copy, which skips validation
        return ExperimentSpec.model_validate({**spec.model_dump(), **updates})

    def run(
        self, spec: ExperimentSpec, *, threads: int = 1, event_callback: EventCallback | None = None
    ) -> TableResult:
        """Run a table experiment. History runs write files and go through ``run_history``."""
        match spec.family:
            case ExperimentFamily.TABLE1:
                return run_table1(spec, threads=threads, event_callback=event_callback)
            case ExperimentFamily.FD:
                return run_table_fd(spec.scheme or "upwind", spec, threads=threads, event_callback=event_callback)
            case ExperimentFamily.FEM:
                return run_fem_experiment(spec, threads=threads, event_callback=event_callback)
        raise ConfigError(f"'{spec.name}' writes histories; use run_history")
