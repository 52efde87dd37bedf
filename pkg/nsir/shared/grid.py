"""Uniform 1-D grid with trapezoid weights."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvalidGrid


@dataclass(frozen=True)
class Grid1D:
    left: float
    right: float
    n: int

    def __post_init__(self):
        if not (np.isfinite(self.left) and np.isfinite(self.right)):
            raise InvalidGrid("grid bounds must be finite", "grid")
        if not self.left < self.right:
            raise InvalidGrid(f"left={self.left} must be < right={self.right}", "grid")
        if int(self.n) != self.n or self.n < 3:
            raise InvalidGrid(f"n={self.n} must be an integer >= 3", "grid.n")

    @classmethod
    def centered(cls, length: float, n: int) -> "Grid1D":
        return cls(-0.5 * length, 0.5 * length, n)

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def spacing(self) -> float:
        return (self.right - self.left) / (self.n - 1)

    @cached_property
    def nodes(self) -> np.ndarray:
        return np.linspace(self.left, self.right, self.n)

    @cached_property
    def weights(self) -> np.ndarray:
        w = np.full(self.n, self.spacing)
        w[0] = w[-1] = 0.5 * self.spacing
        return w

    def integrate(self, u: np.ndarray) -> float:
        """Trapezoid integral of a grid function"""
        return float(np.dot(self.weights, u))

    def same_as(self, other: "Grid1D") -> bool:
        return self.n == other.n and self.left == other.left and self.right == other.right
