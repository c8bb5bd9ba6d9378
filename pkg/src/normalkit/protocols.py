"""Protocol definitions for normalkit."""

from typing import Any, Protocol

import numpy as np


class EventCallback(Protocol):
    """Callback for solver and experiment events."""

    def __call__(self, event: str, data: dict[str, Any]) -> None:
        """
        Called when a run event occurs.

        Args:
            event: Event name (e.g., "solve:start", "solve:step", "experiment:cell")
            data: Event data payload
        """
        ...


class InverseApplier(Protocol):
    """Anything that can apply an approximate inverse: r -> M^{-1} r."""

    def apply_inverse(self, r: np.ndarray) -> np.ndarray: ...


class WeightOperator(Protocol):
    """SPD weight T used in the weighted normal equations A^T T A x = A^T T b."""

    def apply(self, r: np.ndarray) -> np.ndarray: ...

    def apply_inverse(self, r: np.ndarray) -> np.ndarray: ...


class RightFactor(Protocol):
    """Nonsingular P with forward and transpose solves, used as A P^{-1}."""

    def solve(self, r: np.ndarray) -> np.ndarray: ...

    def solve_transpose(self, r: np.ndarray) -> np.ndarray: ...
