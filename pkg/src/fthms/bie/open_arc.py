from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, List, Sequence

import numpy as np
from scipy.optimize import minimize_scalar

from fthms.bie.linsolve import SolverSettings, linear_solve
from fthms.bie.models import DensitySolution, FrequencyDomainProblem
from fthms.bie.quadrature import (
    chebyshev_nodes,
    cov_inverse,
    cov_theta,
    fejer_weights,
    interpolation_matrix,
    singular_rule,
)
from fthms.errors import ParameterDomainError, SingularEvaluationError
from fthms.geometry.curves import ParametricCurve
from fthms.geometry.patches import Patch
from fthms.special.kernels import phi_of_distance, wavenumber

ON_ARC_TOL = 1e-12
_SCAN = np.cos(np.linspace(math.pi, 0.0, 65))
_BREAK_TOL = 1e-12


@dataclass(frozen=True, slots=True)
class IntegrationPiece:
    """Γ_{jk}: one Chebyshev-discretized sub-interval [start, end] of the parent parameter."""

    start: float
    end: float
    selector: str  # none | both | left | right

    @property
    def mid(self) -> float:
        return 0.5 * (self.start + self.end)

    @property
    def half(self) -> float:
        return 0.5 * (self.end - self.start)

    def param(self, s: np.ndarray) -> np.ndarray:
        return self.mid + self.half * cov_theta(s, self.selector)[0]

    def local_s(self, param: np.ndarray) -> np.ndarray:
        return cov_inverse((np.asarray(param, dtype=float) - self.mid) / self.half, self.selector)


def _selector(left: bool, right: bool) -> str:
    if left and right:
        return "both"
    if left:
        return "left"
    if right:
        return "right"
    return "none"


@dataclass(slots=True)
class OpenArcDiscretization:
    """Rectangular-polar discretization of an open arc [start, end] of a parent curve.

    The working unknown on piece k is ψ̃(s) = Ψ(y(θ(s)))·θ′(s); with ``weighted`` it is
    α = w·ψ̃ where w vanishes like a square root at the arc endpoints.
    """

    curve: ParametricCurve
    start: float
    end: float
    breakpoints: Sequence[float]
    singular: Sequence[float]
    nodes_per_piece: int = 24
    weighted: bool = False
    near_factor: float = 1.0
    fine_order: int = 12
    bulk_order: int = 16
    kind: str = field(default="open", init=False)
    pieces: List[IntegrationPiece] = field(init=False)
    params: np.ndarray = field(init=False)
    points: np.ndarray = field(init=False)
    s_nodes: np.ndarray = field(init=False)
    dtheta: np.ndarray = field(init=False)
    jacobian: np.ndarray = field(init=False)
    quad_weights: np.ndarray = field(init=False)
    endpoint_weight: np.ndarray = field(init=False)
    piece_index: np.ndarray = field(init=False)
    _self_operator: "ArcPotential | None" = field(init=False, default=None, repr=False)

    def __post_init__(self) -> None:
        if self.end <= self.start:
            raise ParameterDomainError(f"Arc needs start < end, got [{self.start}, {self.end}]")
        if self.nodes_per_piece < 4:
            raise ParameterDomainError(f"nodes_per_piece must be at least 4, got {self.nodes_per_piece}")
        breaks = sorted({float(b) for b in self.breakpoints} | {self.start, self.end})
        if breaks[0] < self.start - _BREAK_TOL or breaks[-1] > self.end + _BREAK_TOL:
            raise ParameterDomainError("Integration breakpoints must lie inside the arc")
        flagged = [float(s) for s in self.singular]

        def is_flagged(value: float) -> bool:
            return any(abs(value - f) < 1e-10 for f in flagged)

        self.pieces = [
            IntegrationPiece(a, b, _selector(is_flagged(a), is_flagged(b)))
            for a, b in zip(breaks[:-1], breaks[1:])
            if b - a > _BREAK_TOL
        ]
        n = self.nodes_per_piece
        s = chebyshev_nodes(n)
        params, thetas, dthetas, pieces = [], [], [], []
        for k, piece in enumerate(self.pieces):
            theta, dtheta = cov_theta(s, piece.selector)
            params.append(piece.mid + piece.half * theta)
            dthetas.append(dtheta)
            pieces.append(np.full(n, k))
        self.params = np.concatenate(params)
        self.points = self.curve.position(self.params)
        self.s_nodes = np.tile(s, len(self.pieces))
        self.dtheta = np.concatenate(dthetas)
        self.piece_index = np.concatenate(pieces)
        halves = np.array([p.half for p in self.pieces])[self.piece_index]
        self.jacobian = self.curve.speed(self.params) * halves
        self.quad_weights = np.tile(fejer_weights(n), len(self.pieces))
        self.endpoint_weight = self.weight_function(self.params)

    @property
    def size(self) -> int:
        return len(self.params)

    @property
    def endpoints(self) -> np.ndarray:
        return self.curve.position(np.array([self.start, self.end]))

    def weight_function(self, params: np.ndarray) -> np.ndarray:
        pts = self.curve.position(np.asarray(params, dtype=float))
        ends = self.endpoints
        return np.sqrt(np.linalg.norm(pts - ends[0], axis=-1) * np.linalg.norm(pts - ends[1], axis=-1))

    def to_frame(self, params: np.ndarray) -> np.ndarray:
        params = np.asarray(params, dtype=float)
        if not self.curve.closed:
            return params
        return self.start + np.mod(params - self.start + 1e-12, self.curve.length) - 1e-12

    def piece_geometry(self, k: int, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Points y(s) and Jacobians speed·half on piece k."""
        piece = self.pieces[k]
        params = piece.param(s)
        return self.curve.position(params), self.curve.speed(params) * piece.half

    def physical_density(self, values: np.ndarray, weighted: bool | None = None) -> np.ndarray:
        weighted = self.weighted if weighted is None else weighted
        values = np.asarray(values)
        psi_tilde = values / self.endpoint_weight if weighted else values
        return psi_tilde / self.dtheta

    def self_operator(self) -> "ArcPotential":
        if self._self_operator is None:
            self._self_operator = ArcPotential(self, self.points, target_params=self.params)
        return self._self_operator

    def single_layer(self, kappa: float) -> np.ndarray:
        return self.self_operator().matrix(kappa)

    def potential(self, targets: np.ndarray, target_params: np.ndarray | None = None) -> "ArcPotential":
        return ArcPotential(self, targets, target_params=target_params)

    @classmethod
    def from_patch(
        cls,
        curve: ParametricCurve,
        patch: Patch,
        nodes_per_piece: int = 24,
        max_piece_length: float = math.inf,
        weighted: bool = False,
        near_factor: float = 1.0,
    ) -> "OpenArcDiscretization":
        """Pieces split at the core endpoints, all of which (and the arc ends) are flagged singular."""
        corners = [patch.start, patch.core[0], patch.core[1], patch.end]
        flagged = sorted({c for c in corners})
        breaks: List[float] = []
        for a, b in zip(flagged[:-1], flagged[1:]):
            if b - a <= _BREAK_TOL:
                continue
            pieces = _piece_count(curve, a, b, max_piece_length)
            breaks.extend(np.linspace(a, b, pieces + 1).tolist())
        return cls(
            curve=curve,
            start=patch.start,
            end=patch.end,
            breakpoints=breaks,
            singular=flagged,
            nodes_per_piece=nodes_per_piece,
            weighted=weighted,
            near_factor=near_factor,
        )

    @classmethod
    def whole_arc(
        cls,
        curve: ParametricCurve,
        nodes_per_piece: int = 24,
        max_piece_length: float = math.inf,
        weighted: bool = True,
        near_factor: float = 1.0,
    ) -> "OpenArcDiscretization":
        a, b = curve.interval
        pieces = _piece_count(curve, a, b, max_piece_length)
        return cls(
            curve=curve,
            start=a,
            end=b,
            breakpoints=np.linspace(a, b, pieces + 1).tolist(),
            singular=[a, b],
            nodes_per_piece=nodes_per_piece,
            weighted=weighted,
            near_factor=near_factor,
        )


def _piece_count(curve: ParametricCurve, a: float, b: float, max_length: float) -> int:
    if not math.isfinite(max_length):
        return 1
    theta = np.linspace(a, b, 257)
    length = float(np.sum(np.linalg.norm(np.diff(curve.position(theta), axis=0), axis=1)))
    return max(1, int(math.ceil(length / max_length)))


class ArcPotential:
    """Single-layer evaluation operator from an arc's unknowns to a fixed target set.

    Geometry (closest points, graded rules, Chebyshev interpolation rows) is computed once;
    ``matrix(κ)`` only re-evaluates Hankel values.
    """

    def __init__(
        self,
        disc: OpenArcDiscretization,
        targets: np.ndarray,
        target_params: np.ndarray | None = None,
    ) -> None:
        self.disc = disc
        self.targets = np.atleast_2d(np.asarray(targets, dtype=float))
        count = len(self.targets)
        if target_params is None:
            on_arc = np.full(count, np.nan)
        else:
            on_arc = disc.to_frame(np.asarray(target_params, dtype=float))
        n = disc.nodes_per_piece
        pieces = disc.pieces

        diff = self.targets[:, None, :] - disc.points[None, :, :]
        self._r_nodes = np.linalg.norm(diff, axis=-1)
        self._far_weights = disc.quad_weights * disc.jacobian
        near = np.zeros((count, len(pieces)), dtype=bool)
        pair_rows, pair_pieces, r_parts, jw_parts, interp_parts, lengths = [], [], [], [], [], []

        for k, piece in enumerate(pieces):
            scan_pts, _ = disc.piece_geometry(k, _SCAN)
            chord = float(np.sum(np.linalg.norm(np.diff(scan_pts, axis=0), axis=1)))
            dist = np.linalg.norm(self.targets[:, None, :] - scan_pts[None, :, :], axis=-1)
            nearest = np.argmin(dist, axis=1)
            dmin = dist[np.arange(count), nearest]
            inside = (on_arc >= piece.start - ON_ARC_TOL) & (on_arc <= piece.end + ON_ARC_TOL)
            for i in np.flatnonzero(inside | (dmin < disc.near_factor * chord)):
                if inside[i]:
                    s_star = float(piece.local_s(on_arc[i]))
                else:
                    s_star, gap = self._closest(k, self.targets[i], int(nearest[i]))
                    if gap < ON_ARC_TOL:
                        raise SingularEvaluationError(
                            "Target lies on the source arc; pass its parameter to use the boundary-trace path"
                        )
                s_q, w_q = singular_rule(s_star, disc.fine_order, disc.bulk_order)
                y_q, jac_q = disc.piece_geometry(k, s_q)
                r_parts.append(np.linalg.norm(self.targets[i] - y_q, axis=-1))
                jw_parts.append(w_q * jac_q)
                interp_parts.append(interpolation_matrix(n, s_q))
                lengths.append(len(s_q))
                pair_rows.append(i)
                pair_pieces.append(k)
                near[i, k] = True

        self._far = ~near[:, disc.piece_index]
        self._pair_rows = np.asarray(pair_rows, dtype=int)
        self._pair_cols = (np.asarray(pair_pieces, dtype=int)[:, None] * n + np.arange(n)[None, :])
        self._offsets = np.concatenate([[0], np.cumsum(lengths)[:-1]]).astype(int) if lengths else np.zeros(0, int)
        self._r_near = np.concatenate(r_parts) if r_parts else np.zeros(0)
        self._jw_near = np.concatenate(jw_parts) if jw_parts else np.zeros(0)
        self._interp_near = np.vstack(interp_parts) if interp_parts else np.zeros((0, n))

    def _closest(self, k: int, target: np.ndarray, seed: int) -> tuple[float, float]:
        lo = _SCAN[max(seed - 1, 0)]
        hi = _SCAN[min(seed + 1, len(_SCAN) - 1)]
        piece = self.disc.pieces[k]

        def gap(s: float) -> float:
            return float(np.linalg.norm(self.disc.curve.position(piece.param(np.array([s])))[0] - target))

        result = minimize_scalar(gap, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best_s, best_gap = float(result.x), float(result.fun)
        for edge in (lo, hi):
            value = gap(edge)
            if value < best_gap:
                best_s, best_gap = edge, value
        return best_s, best_gap

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.targets), self.disc.size)

    def matrix(self, kappa: float) -> np.ndarray:
        if kappa == 0.0:
            raise ParameterDomainError("κ = 0 is excluded")
        out = np.zeros(self.shape, dtype=complex)
        far = self._far
        out[far] = phi_of_distance(kappa, self._r_nodes[far]) * np.broadcast_to(self._far_weights, far.shape)[far]
        if len(self._pair_rows):
            values = phi_of_distance(kappa, self._r_near) * self._jw_near
            blocks = np.add.reduceat(values[:, None] * self._interp_near, self._offsets, axis=0)
            out[self._pair_rows[:, None], self._pair_cols] = blocks
        if self.disc.weighted:
            out /= self.disc.endpoint_weight[None, :]
        return out


def assemble_open_arc_V(disc: OpenArcDiscretization, omega: float, c: float) -> np.ndarray:
    return disc.single_layer(wavenumber(omega, c))


def solve_open_arc(
    problem: FrequencyDomainProblem,
    disc: OpenArcDiscretization | None = None,
    settings: SolverSettings | None = None,
) -> DensitySolution:
    disc = disc or problem.discretization
    rhs = np.asarray(problem.rhs, dtype=complex)
    if not np.any(rhs):
        return DensitySolution(problem.omega, np.zeros(disc.size, dtype=complex), disc.weighted, disc)
    matrix = assemble_open_arc_V(disc, problem.omega, problem.c)
    result = linear_solve(matrix, rhs, settings)
    return DensitySolution(problem.omega, result.solution, disc.weighted, disc, result.iterations)


def boundary_trace(solution: DensitySolution, params: Iterable[float], c: float = 1.0) -> np.ndarray:
    """S[Ψ] at points of the source arc given by their parent parameters."""
    disc = solution.discretization
    params = np.asarray(list(params), dtype=float)
    operator = ArcPotential(disc, disc.curve.position(disc.to_frame(params)), target_params=params)
    return operator.matrix(wavenumber(solution.omega, c)) @ solution.values
