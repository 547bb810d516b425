from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from fthms.errors import ParameterDomainError
from fthms.geometry.windows import eta


def box_window(s: np.ndarray | float, half_width: float) -> np.ndarray:
    """⊓(s): η(s/H; 1/2, 1) on [−H/2, H], 1 − η(s/H + 3/2; 1/2, 1) on (−H, −H/2), 0 outside."""
    s = np.atleast_1d(np.asarray(s, dtype=float))
    u = s / half_width
    out = np.zeros_like(u)
    rising = (u > -1.0) & (u < -0.5)
    falling = (u >= -0.5) & (u < 1.0)
    out[falling] = eta(u[falling], 0.5, 1.0)
    out[rising] = 1.0 - eta(u[rising] + 1.5, 0.5, 1.0)
    return out


@dataclass(frozen=True, slots=True)
class TimeWindowPartition:
    half_width: float  # H
    count: int  # Q

    def __post_init__(self) -> None:
        if self.half_width <= 0.0:
            raise ParameterDomainError(f"Window half-width H must be positive, got {self.half_width}")
        if self.count < 1:
            raise ParameterDomainError(f"Window count Q must be at least 1, got {self.count}")

    def center(self, q: int) -> float:
        """s_q = (3/2)(q − 1)H for q = 1..Q."""
        if not 1 <= q <= self.count:
            raise IndexError(f"Window index {q} outside [1, {self.count}]")
        return 1.5 * (q - 1) * self.half_width

    @property
    def centers(self) -> np.ndarray:
        return 1.5 * np.arange(self.count) * self.half_width

    @property
    def last_center(self) -> float:
        return self.center(self.count)

    @property
    def end(self) -> float:
        """s_Q + H: right end of the time grid."""
        return self.last_center + self.half_width

    @property
    def horizon(self) -> float:
        """The windows sum to one on [0, s_Q + H/2]."""
        return self.last_center + 0.5 * self.half_width

    def support(self, q: int) -> tuple[float, float]:
        s = self.center(q)
        return (s - self.half_width, s + self.half_width)

    def window(self, q: int, t: np.ndarray | float) -> np.ndarray:
        return box_window(np.asarray(t, dtype=float) - self.center(q), self.half_width)

    def total(self, t: np.ndarray | float) -> np.ndarray:
        return sum(self.window(q, t) for q in range(1, self.count + 1))
