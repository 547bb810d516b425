from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np

from fthms.bie.closed import ClosedCurveDiscretization, cfie_coupling
from fthms.bie.open_arc import OpenArcDiscretization
from fthms.bie.potentials import TransferOperator, transfer_operator
from fthms.errors import DecompositionError
from fthms.geometry.boundary import ScatteringBoundary
from fthms.multiscatter.models import DiscretizationSettings


@dataclass(slots=True)
class PatchNodes:
    index: int
    component: int
    local: int
    disc: ClosedCurveDiscretization | OpenArcDiscretization
    chi: np.ndarray

    @property
    def params(self) -> np.ndarray:
        return self.disc.params

    @property
    def points(self) -> np.ndarray:
        return self.disc.points

    @property
    def size(self) -> int:
        return self.disc.size

    @property
    def closed(self) -> bool:
        return isinstance(self.disc, ClosedCurveDiscretization)


class PatchSystem:
    """Discretized patches of a scattering boundary and the receiver layout between them.

    Every patch k sends its field to the nodes of every other patch and to the observation
    points. Receiving nodes that lie on Γ_k itself go through the on-arc trace path.
    """

    def __init__(
        self,
        boundary: ScatteringBoundary,
        settings: DiscretizationSettings,
        observation_points: np.ndarray,
    ) -> None:
        self.boundary = boundary
        self.settings = settings
        self.observation_points = np.asarray(observation_points, dtype=float).reshape(-1, 2)
        self.patches: List[PatchNodes] = [self._build(g) for g in range(boundary.count)]
        self._layout: Dict[int, List[Tuple[int, slice]]] = {}
        self._targets: Dict[int, np.ndarray] = {}
        self._target_params: Dict[int, np.ndarray] = {}
        self._operators: Dict[int, TransferOperator] = {}
        for k in range(self.count):
            self._plan_receivers(k)

    @property
    def count(self) -> int:
        return len(self.patches)

    def _build(self, g: int) -> PatchNodes:
        decomp, local = self.boundary.locate(g)
        curve = decomp.curve
        s = self.settings
        if decomp.whole and curve.closed:
            disc = ClosedCurveDiscretization(curve, s.closed_half_count)
        elif decomp.whole:
            disc = OpenArcDiscretization.whole_arc(
                curve, s.nodes_per_piece, s.max_piece_length, s.weighted_whole_arcs, s.near_factor
            )
        else:
            disc = OpenArcDiscretization.from_patch(
                curve, decomp.patch(local), s.nodes_per_piece, s.max_piece_length, False, s.near_factor
            )
        chi = decomp.chi(local, disc.params)
        return PatchNodes(g, self.boundary.patches[g].component, local, disc, chi)

    def _plan_receivers(self, k: int) -> None:
        source = self.patches[k]
        decomp, local_k = self.boundary.locate(k)
        layout, points, params = [], [], []
        offset = 0
        for receiver in self.patches:
            if receiver.index == k:
                continue
            on_source = np.full(receiver.size, np.nan)
            if receiver.component == source.component and not decomp.whole:
                inside = decomp.contains(local_k, receiver.params)
                on_source[inside] = receiver.params[inside]
            layout.append((receiver.index, slice(offset, offset + receiver.size)))
            points.append(receiver.points)
            params.append(on_source)
            offset += receiver.size
        points.append(self.observation_points)
        params.append(np.full(len(self.observation_points), np.nan))
        self._layout[k] = layout
        self._targets[k] = np.vstack(points) if points else np.zeros((0, 2))
        self._target_params[k] = np.concatenate(params)

    def receivers(self, k: int) -> List[Tuple[int, slice]]:
        return self._layout[k]

    def observation_slice(self, k: int) -> slice:
        start = sum(self.patches[j].size for j, _ in self._layout[k])
        return slice(start, start + len(self.observation_points))

    def targets(self, k: int) -> np.ndarray:
        return self._targets[k]

    def transfer(self, k: int) -> TransferOperator:
        if k not in self._operators:
            source = self.patches[k]
            if source.closed:
                if np.any(np.isfinite(self._target_params[k])):
                    raise DecompositionError("A whole closed component cannot share nodes with other patches")
                self._operators[k] = transfer_operator(source.disc, self._targets[k], "combined")
            else:
                self._operators[k] = transfer_operator(
                    source.disc, self._targets[k], "S", target_params=self._target_params[k]
                )
        return self._operators[k]

    def system_matrix(self, k: int, kappa: float) -> np.ndarray:
        disc = self.patches[k].disc
        if isinstance(disc, ClosedCurveDiscretization):
            return disc.cfie(kappa, cfie_coupling(kappa))
        return disc.single_layer(kappa)

    def transfer_matrix(self, k: int, kappa: float) -> np.ndarray:
        return self.transfer(k).matrix(kappa)

    def overlap_nodes(self, receiver: int, source: int) -> np.ndarray:
        """Nodes of ``receiver`` lying on Γ_source (empty across components)."""
        r, s = self.patches[receiver], self.patches[source]
        if r.component != s.component:
            return np.zeros(r.size, dtype=bool)
        decomp, local = self.boundary.locate(source)
        if decomp.whole:
            return np.ones(r.size, dtype=bool)
        return decomp.contains(local, r.params)

    def is_neighbor(self, j: int, k: int) -> bool:
        return k in self.boundary.neighbors(j)

    def point_operator(self, k: int, points: np.ndarray) -> TransferOperator:
        source = self.patches[k]
        return transfer_operator(source.disc, points, "combined" if source.closed else "S")
