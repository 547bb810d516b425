from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar
from scipy.spatial import cKDTree

from fthms.errors import DecompositionError
from fthms.geometry.curves import ParametricCurve
from fthms.geometry.windows import eta

DENSE_SAMPLES = 2048
_CHUNK = 512
_REFINE_ROUNDS = 4
_PARAM_TOL = 1e-12

Interval = Tuple[float, float]


@dataclass(frozen=True, slots=True)
class OverlapBlend:
    """Overlap Γ_{j,j+1}^ov seen from patch j, with the chordal sub-arc diameters it needs."""

    left_patch: int
    right_patch: int
    start: float  # parameter in the left patch's frame
    end: float
    samples: np.ndarray
    points: np.ndarray
    tail_diameter: np.ndarray  # diameter of points[i:]

    @property
    def diameter(self) -> float:
        return float(self.tail_diameter[0])

    def chord_diameter(self, curve: ParametricCurve, theta: np.ndarray) -> np.ndarray:
        """Diameter of the sub-arc from x(θ) to the overlap end, θ in [start, end]."""
        theta = np.clip(np.atleast_1d(np.asarray(theta, dtype=float)), self.start, self.end)
        out = np.empty_like(theta)
        count = len(self.samples)
        index = np.arange(count)
        for lo in range(0, len(theta), _CHUNK):
            block = theta[lo : lo + _CHUNK]
            first = np.minimum(np.searchsorted(self.samples, block, side="left"), count - 1)
            pts = curve.position(block)
            dist = np.linalg.norm(pts[:, None, :] - self.points[None, :, :], axis=-1)
            dist = np.where(index[None, :] >= first[:, None], dist, 0.0)
            out[lo : lo + _CHUNK] = np.maximum(dist.max(axis=1), self.tail_diameter[first])
        return out

    def blend(self, curve: ParametricCurve, theta: np.ndarray, c0: float, c1: float) -> np.ndarray:
        """Window value of the left patch on this overlap: η(A − d(θ); c0·A, c1·A)."""
        a_ov = self.diameter
        return eta(a_ov - self.chord_diameter(curve, theta), c0 * a_ov, c1 * a_ov)


@dataclass(frozen=True, slots=True)
class Patch:
    index: int
    start: float
    end: float
    core: Interval  # Γ_j^tov
    truncated: Interval  # Γ_j^tr
    left_neighbor: int | None
    right_neighbor: int | None

    @property
    def width(self) -> float:
        return self.end - self.start


@dataclass(frozen=True, slots=True)
class PatchDecomposition:
    curve: ParametricCurve
    patches: Tuple[Patch, ...]
    blends: Tuple[OverlapBlend | None, ...]  # blends[j]: overlap of patch j with its right neighbor
    c0: float
    c1: float
    overlap_fraction: float
    delta_min: float

    @property
    def count(self) -> int:
        return len(self.patches)

    @property
    def whole(self) -> bool:
        return self.count == 1

    def patch(self, j: int) -> Patch:
        if not 0 <= j < self.count:
            raise IndexError(f"Patch index {j} outside [0, {self.count - 1}]")
        return self.patches[j]

    def neighbors(self, j: int) -> List[int]:
        patch = self.patch(j)
        return sorted({k for k in (patch.left_neighbor, patch.right_neighbor) if k is not None and k != j})

    def local_parameter(self, j: int, theta: np.ndarray) -> np.ndarray:
        """Express θ in patch j's frame (closed curves wrap so that θ ≥ start_j)."""
        patch = self.patch(j)
        theta = np.asarray(theta, dtype=float)
        if not self.curve.closed:
            return theta
        return patch.start + np.mod(theta - patch.start + _PARAM_TOL, self.curve.length) - _PARAM_TOL

    def contains(self, j: int, theta: np.ndarray, tol: float = _PARAM_TOL) -> np.ndarray:
        patch = self.patch(j)
        local = self.local_parameter(j, theta)
        return (local >= patch.start - tol) & (local <= patch.end + tol)

    def in_core(self, j: int, theta: np.ndarray) -> np.ndarray:
        patch = self.patch(j)
        local = self.local_parameter(j, theta)
        return (local >= patch.core[0]) & (local <= patch.core[1])

    def in_overlap(self, j: int, k: int, theta: np.ndarray) -> np.ndarray:
        return self.contains(j, theta) & self.contains(k, theta)

    def chi(self, j: int, theta: np.ndarray) -> np.ndarray:
        patch = self.patch(j)
        theta = np.atleast_1d(np.asarray(theta, dtype=float))
        if self.whole:
            return np.ones_like(theta)
        local = self.local_parameter(j, theta)
        out = np.where((local >= patch.start) & (local <= patch.end), 1.0, 0.0)
        right = self.blends[j]
        if right is not None:
            mask = (local > patch.core[1]) & (local <= patch.end)
            if np.any(mask):
                out[mask] = right.blend(self.curve, local[mask], self.c0, self.c1)
        if patch.left_neighbor is not None:
            left = self.blends[patch.left_neighbor]
            mask = (local >= patch.start) & (local < patch.core[0])
            if left is not None and np.any(mask):
                other = self.local_parameter(patch.left_neighbor, theta[mask])
                out[mask] = 1.0 - left.blend(self.curve, other, self.c0, self.c1)
        return out


def build_patch_decomposition(
    curve: ParametricCurve,
    count: int,
    overlap_fraction: float = 1.0 / 3.0,
    c0: float = 1.0 / 3.0,
    c1: float = 2.0 / 3.0,
    start: float | None = None,
) -> PatchDecomposition:
    """Equi-sized overlapping patches on a closed curve or an open parent arc.

    Closed curves: patch j covers [start + jL/N, start + jL/N + w] with w = (L/N)/(1 − f),
    so neighbors share f·w. Open arcs: the chain is not cyclic and the end patches reach the
    free endpoints.
    """
    if not 0.0 < c0 < 0.5 < c1 < 1.0:
        raise DecompositionError(f"Window thresholds need 0 < c0 < 1/2 < c1 < 1, got ({c0}, {c1})")
    if count < 1:
        raise DecompositionError(f"Patch count must be at least 1, got {count}")
    lo, hi = curve.interval
    length = hi - lo
    if count == 1:
        whole = Patch(0, lo, hi, (lo, hi), (lo, hi), None, None)
        decomposition = PatchDecomposition(curve, (whole,), (None,), c0, c1, 0.0, math.inf)
        return decomposition
    if not 0.0 < overlap_fraction < 0.5:
        raise DecompositionError(
            f"overlap_fraction must lie in (0, 1/2) for nonempty overlaps and cores, got {overlap_fraction}"
        )
    if curve.closed:
        step = length / count
        width = step / (1.0 - overlap_fraction)
        origin = lo if start is None else float(start)
    else:
        width = length / (count - (count - 1) * overlap_fraction)
        step = width * (1.0 - overlap_fraction)
        origin = lo
    overlap = overlap_fraction * width

    starts = [origin + j * step for j in range(count)]
    blends: List[OverlapBlend | None] = []
    for j in range(count):
        has_right = curve.closed or j < count - 1
        if not has_right:
            blends.append(None)
            continue
        end = starts[j] + width
        blends.append(
            _build_blend(curve, j, (j + 1) % count, end - overlap, end)
        )

    patches: List[Patch] = []
    for j in range(count):
        left = (j - 1) % count if (curve.closed or j > 0) else None
        right = (j + 1) % count if (curve.closed or j < count - 1) else None
        a, b = starts[j], starts[j] + width
        core = (a + overlap if left is not None else a, b - overlap if right is not None else b)
        if core[1] <= core[0]:
            raise DecompositionError(f"Patch {j} has an empty truncated core {core}")
        tr_hi = b
        if right is not None:
            blend = blends[j]
            target = (1.0 - c1) * blend.diameter
            tr_hi = brentq(
                lambda th: float(blend.chord_diameter(curve, th)[0]) - target,
                blend.start, blend.end, xtol=1e-14,
            )
        tr_lo = a
        if left is not None:
            blend = blends[left]
            target = (1.0 - c0) * blend.diameter
            # Left overlap in patch j's frame is shifted from the left patch's frame by one step.
            shift = a - blend.start
            tr_lo = shift + brentq(
                lambda th: float(blend.chord_diameter(curve, th)[0]) - target,
                blend.start, blend.end, xtol=1e-14,
            )
        patches.append(Patch(j, a, b, core, (tr_lo, tr_hi), left, right))

    provisional = PatchDecomposition(curve, tuple(patches), tuple(blends), c0, c1, overlap_fraction, math.inf)
    delta = min(_truncated_to_complement(provisional, j) for j in range(count))
    if not delta > 0.0:
        raise DecompositionError(f"Degenerate decomposition on '{curve.name}': δ_min = {delta}")
    return PatchDecomposition(curve, tuple(patches), tuple(blends), c0, c1, overlap_fraction, delta)


def chi_window(decomp: PatchDecomposition, j: int, theta: np.ndarray | float) -> np.ndarray:
    """χ_j at boundary points given by their parent-curve parameters."""
    return decomp.chi(j, theta)


def patch_distance(decomp: PatchDecomposition, j: int, k: int) -> float:
    """dist(Γ_j^tr, Γ_k)."""
    if j == k:
        raise DecompositionError("patch_distance needs two distinct patches")
    pj, pk = decomp.patch(j), decomp.patch(k)
    if _intervals_intersect(decomp.curve, pj.truncated, (pk.start, pk.end)):
        return 0.0
    return arc_set_distance(decomp.curve, pj.truncated, decomp.curve, (pk.start, pk.end))


def complement_intervals(decomp: PatchDecomposition, j: int) -> List[Interval]:
    """Parameter intervals covering Γ ∖ Γ_j on the parent curve."""
    patch = decomp.patch(j)
    lo, hi = decomp.curve.interval
    if decomp.curve.closed:
        if decomp.whole:
            return []
        return [(patch.end, patch.start + decomp.curve.length)]
    pieces = []
    if patch.start > lo + _PARAM_TOL:
        pieces.append((lo, patch.start))
    if patch.end < hi - _PARAM_TOL:
        pieces.append((patch.end, hi))
    return pieces


def arc_set_distance(
    curve_a: ParametricCurve,
    interval_a: Interval,
    curve_b: ParametricCurve,
    interval_b: Interval,
    samples: int = DENSE_SAMPLES,
) -> float:
    """Distance between two parameter ranges: dense sampling, then alternating bounded refinement."""
    ta = np.linspace(interval_a[0], interval_a[1], samples)
    tb = np.linspace(interval_b[0], interval_b[1], samples)
    pa, pb = curve_a.position(ta), curve_b.position(tb)
    dist, idx = cKDTree(pb).query(pa)
    ia = int(np.argmin(dist))
    ib = int(idx[ia])
    best = float(dist[ia])
    sa, sb = float(ta[ia]), float(tb[ib])
    ha = (interval_a[1] - interval_a[0]) / (samples - 1)
    hb = (interval_b[1] - interval_b[0]) / (samples - 1)
    for _ in range(_REFINE_ROUNDS):
        fixed_b = curve_b.position(np.array([sb]))[0]
        res_a = minimize_scalar(
            lambda s: float(np.linalg.norm(curve_a.position(np.array([s]))[0] - fixed_b)),
            bounds=(max(interval_a[0], sa - ha), min(interval_a[1], sa + ha)),
            method="bounded",
            options={"xatol": 1e-13},
        )
        sa = float(res_a.x)
        fixed_a = curve_a.position(np.array([sa]))[0]
        res_b = minimize_scalar(
            lambda s: float(np.linalg.norm(curve_b.position(np.array([s]))[0] - fixed_a)),
            bounds=(max(interval_b[0], sb - hb), min(interval_b[1], sb + hb)),
            method="bounded",
            options={"xatol": 1e-13},
        )
        sb = float(res_b.x)
        best = min(best, float(res_b.fun))
    return best


def _truncated_to_complement(decomp: PatchDecomposition, j: int) -> float:
    pieces = complement_intervals(decomp, j)
    if not pieces:
        return math.inf
    truncated = decomp.patch(j).truncated
    return min(arc_set_distance(decomp.curve, truncated, decomp.curve, piece) for piece in pieces)


def _intervals_intersect(curve: ParametricCurve, a: Interval, b: Interval) -> bool:
    if not curve.closed:
        return a[0] <= b[1] and b[0] <= a[1]
    length = curve.length
    shifted = a[0] + math.fmod(math.fmod(b[0] - a[0], length) + length, length)
    return shifted <= a[1] or shifted + (b[1] - b[0]) >= a[0] + length


def _build_blend(curve: ParametricCurve, left: int, right: int, start: float, end: float) -> OverlapBlend:
    samples = np.linspace(start, end, DENSE_SAMPLES)
    points = curve.position(samples)
    tail = np.zeros(DENSE_SAMPLES)
    running = 0.0
    for i in range(DENSE_SAMPLES - 2, -1, -1):
        reach = float(np.max(np.linalg.norm(points[i + 1 :] - points[i], axis=1)))
        running = max(running, reach)
        tail[i] = running
    return OverlapBlend(left, right, start, end, samples, points, tail)


def circle_overlap_fraction(radius: float, count: int, delta_min: float, c0: float = 1.0 / 3.0, c1: float = 2.0 / 3.0) -> float:
    """Overlap fraction that gives `count` equi-sized patches on a circle the separation `delta_min`.

    The truncated support ends where the tail chord is (1 − c1)·A, A = 2R sin(o/2) the overlap
    chord, so δ_min = (1 − c1)·2R sin(o/2) while that side is the closer one.
    """
    if radius <= 0.0 or count < 2:
        raise DecompositionError(f"Circle overlap needs R > 0 and N ≥ 2, got R={radius}, N={count}")
    ratio = delta_min / (2.0 * radius * (1.0 - c1))
    if not 0.0 < ratio < 1.0:
        raise DecompositionError(f"δ_min = {delta_min} is out of reach on a circle of radius {radius}")
    overlap = 2.0 * math.asin(ratio)
    spread = overlap / (2.0 * math.pi / count)
    fraction = spread / (1.0 + spread)
    if not 0.0 < fraction < 0.5:
        raise DecompositionError(f"δ_min = {delta_min} needs overlap fraction {fraction:.4g}, outside (0, 1/2)")
    # the left truncation sits at chord (1 − c0)·A from the overlap end
    left = 2.0 * radius * math.sin(0.5 * (overlap - 2.0 * math.asin((1.0 - c0) * ratio)))
    if left < delta_min:
        raise DecompositionError(f"Window thresholds ({c0}, {c1}) put the closer truncation on the left side")
    return fraction
