"""Space objects mirroring the de-facto agent-environment API surface.

Only the pieces DRL tooling actually touches are implemented: bounds,
shape/dtype, seeded sampling, and containment checks.
"""

from __future__ import annotations

import numpy as np


class Box:
    """Continuous box with per-dimension bounds."""

    def __init__(self, low, high, names=None, seed: int | None = None):
        self.low = np.asarray(low, dtype=np.float64)
        self.high = np.asarray(high, dtype=np.float64)
        if self.low.shape != self.high.shape:
            raise ValueError("low/high shape mismatch")
        if np.any(self.low > self.high):
            raise ValueError("low must be <= high")
        self.names = tuple(names) if names is not None else None
        self.shape = self.low.shape
        self.dtype = np.float64
        self._rng = np.random.default_rng(seed)

    def seed(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)

    def sample(self) -> np.ndarray:
        return self.low + self._rng.random(self.shape) * (self.high - self.low)

    def contains(self, x) -> bool:
        arr = np.asarray(x, dtype=np.float64)
        return (
            arr.shape == self.shape
            and bool(np.all(arr >= self.low))
            and bool(np.all(arr <= self.high))
        )

    def __repr__(self):
        return f"Box(low={self.low.tolist()}, high={self.high.tolist()})"


class Discrete:
    """Integer index space 0..n-1."""

    def __init__(self, n: int, seed: int | None = None):
        if n < 1:
            raise ValueError("n must be >= 1")
        self.n = int(n)
        self.shape = ()
        self.dtype = np.int64
        self._rng = np.random.default_rng(seed)

    def seed(self, seed: int) -> None:
        self._rng = np.random.default_rng(seed)

    def sample(self) -> int:
        return int(self._rng.integers(self.n))

    def contains(self, x) -> bool:
        try:
            xi = int(x)
        except (TypeError, ValueError):
            return False
        return xi == x and 0 <= xi < self.n

    def __repr__(self):
        return f"Discrete({self.n})"
