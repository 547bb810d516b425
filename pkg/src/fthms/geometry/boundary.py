from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

import numpy as np

from fthms.errors import DecompositionError
from fthms.geometry.curves import distance_to_curve, point_in_curve
from fthms.geometry.patches import (
    PatchDecomposition,
    arc_set_distance,
    complement_intervals,
    patch_distance,
)


@dataclass(frozen=True, slots=True)
class GlobalPatch:
    index: int
    component: int
    local: int


@dataclass(slots=True)
class ScatteringBoundary:
    """Union of connected components, each with its own decomposition, in one patch index space."""

    components: Sequence[PatchDecomposition]
    patches: List[GlobalPatch] = field(default_factory=list)
    delta_min: float = math.inf

    def __post_init__(self) -> None:
        if not self.components:
            raise DecompositionError("Scattering boundary needs at least one component")
        self.patches = []
        for c, decomp in enumerate(self.components):
            for j in range(decomp.count):
                self.patches.append(GlobalPatch(len(self.patches), c, j))
        self.delta_min = min(self._truncated_distance(g.index) for g in self.patches)
        if not self.delta_min > 0.0:
            raise DecompositionError(f"Scattering boundary has invalid δ_min = {self.delta_min}")

    @property
    def count(self) -> int:
        return len(self.patches)

    def locate(self, g: int) -> Tuple[PatchDecomposition, int]:
        if not 0 <= g < self.count:
            raise IndexError(f"Global patch index {g} outside [0, {self.count - 1}]")
        patch = self.patches[g]
        return self.components[patch.component], patch.local

    def global_index(self, component: int, local: int) -> int:
        offset = sum(self.components[c].count for c in range(component))
        return offset + local

    def neighbors(self, g: int) -> List[int]:
        decomp, local = self.locate(g)
        component = self.patches[g].component
        return [self.global_index(component, k) for k in decomp.neighbors(local)]

    def same_component(self, g: int, h: int) -> bool:
        return self.patches[g].component == self.patches[h].component

    def chi(self, g: int, theta: np.ndarray) -> np.ndarray:
        decomp, local = self.locate(g)
        return decomp.chi(local, theta)

    def patch_distance(self, g: int, h: int) -> float:
        if self.same_component(g, h):
            decomp, local_g = self.locate(g)
            return patch_distance(decomp, local_g, self.patches[h].local)
        decomp_g, local_g = self.locate(g)
        decomp_h, local_h = self.locate(h)
        pg, ph = decomp_g.patch(local_g), decomp_h.patch(local_h)
        return arc_set_distance(decomp_g.curve, pg.truncated, decomp_h.curve, (ph.start, ph.end))

    def contains_point(self, points: np.ndarray) -> np.ndarray:
        """True where a point lies inside any closed component."""
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        inside = np.zeros(len(pts), dtype=bool)
        for decomp in self.components:
            if decomp.curve.closed:
                inside |= point_in_curve(decomp.curve, pts)
        return inside

    def distance(self, points: np.ndarray) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.min([distance_to_curve(d.curve, pts) for d in self.components], axis=0)

    def _truncated_distance(self, g: int) -> float:
        decomp, local = self.locate(g)
        truncated = decomp.patch(local).truncated
        best = min(
            (arc_set_distance(decomp.curve, truncated, decomp.curve, piece)
             for piece in complement_intervals(decomp, local)),
            default=math.inf,
        )
        for c, other in enumerate(self.components):
            if c == self.patches[g].component:
                continue
            best = min(best, arc_set_distance(decomp.curve, truncated, other.curve, other.curve.interval))
        return best
