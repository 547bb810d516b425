from __future__ import annotations

import math

import numpy as np
import pytest

from fthms.errors import DecompositionError, ParameterDomainError
from fthms.geometry.boundary import ScatteringBoundary
from fthms.geometry.catalog import build_curve, circle, circular_cavity, segment
from fthms.geometry.patches import (
    build_patch_decomposition,
    circle_overlap_fraction,
    complement_intervals,
    patch_distance,
)
from fthms.geometry.windows import WindowProfile, eta
from fthms.harness.checks import partition_of_unity_error


def test_eta_plateau_support_and_symmetry():
    t = np.array([-2.0, -1.0, -0.75, 0.0, 0.5, 0.75, 1.0, 2.0])
    values = eta(t, 0.5, 1.0)
    assert values[3] == 1.0 and values[4] == 1.0
    assert values[0] == 0.0 and values[6] == 0.0 and values[7] == 0.0
    assert 0.0 < values[5] < 1.0
    assert values[2] == values[5]


def test_eta_is_monotone_on_the_ramp():
    values = eta(np.linspace(0.5, 1.0, 201), 0.5, 1.0)
    assert np.all(np.diff(values) <= 0.0)


def test_window_profile_validates_thresholds():
    with pytest.raises(ParameterDomainError):
        WindowProfile(0.8, 0.4)


def test_three_patch_disc_partition_of_unity(three_patch_disc):
    decomp = three_patch_disc
    assert decomp.count == 3
    theta = np.linspace(0.0, 2.0 * math.pi, 3001, endpoint=False)
    total = sum(decomp.chi(j, theta) for j in range(decomp.count))
    np.testing.assert_allclose(total, 1.0, atol=1e-14)


def test_chi_is_one_on_core_and_zero_outside_patch(three_patch_disc):
    decomp = three_patch_disc
    patch = decomp.patch(0)
    core = np.linspace(patch.core[0], patch.core[1], 50)
    np.testing.assert_allclose(decomp.chi(0, core), 1.0)
    outside = np.linspace(patch.end + 1e-3, patch.start + 2.0 * math.pi - 1e-3, 50)
    np.testing.assert_allclose(decomp.chi(0, outside), 0.0)


def test_neighbors_are_cyclic_on_closed_curves(three_patch_disc):
    assert three_patch_disc.neighbors(0) == [1, 2]


def test_open_arc_chain_reaches_endpoints():
    cavity = circular_cavity()
    decomp = build_patch_decomposition(cavity, 6)
    assert decomp.patch(0).start == pytest.approx(cavity.interval[0])
    assert decomp.patch(5).end == pytest.approx(cavity.interval[1])
    assert decomp.neighbors(0) == [1]
    assert decomp.neighbors(5) == [4]
    assert partition_of_unity_error(ScatteringBoundary([decomp])) < 1e-14


def test_truncated_patch_keeps_positive_distance(three_patch_disc):
    assert three_patch_disc.delta_min > 0.0
    assert patch_distance(three_patch_disc, 0, 1) == 0.0
    for j in range(3):
        patch = three_patch_disc.patch(j)
        assert patch.truncated[0] > patch.start
        assert patch.truncated[1] < patch.end


def test_whole_component_has_no_complement():
    decomp = build_patch_decomposition(circle(), 1)
    assert decomp.whole
    assert complement_intervals(decomp, 0) == []
    np.testing.assert_allclose(decomp.chi(0, np.linspace(0.0, 1.0, 5)), 1.0)


def test_decomposition_parameter_errors(unit_circle):
    with pytest.raises(DecompositionError):
        build_patch_decomposition(unit_circle, 0)
    with pytest.raises(DecompositionError):
        build_patch_decomposition(unit_circle, 3, overlap_fraction=0.6)
    with pytest.raises(DecompositionError):
        build_patch_decomposition(unit_circle, 3, c0=0.6, c1=0.7)


def test_boundary_global_indexing_and_points():
    boundary = ScatteringBoundary(
        [
            build_patch_decomposition(circle(), 3),
            build_patch_decomposition(build_curve("circle", {"radius": 0.5, "center": [3.0, 0.0]}), 1),
        ]
    )
    assert boundary.count == 4
    decomp, local = boundary.locate(3)
    assert local == 0 and decomp.whole
    assert boundary.neighbors(0) == [1, 2]
    assert boundary.contains_point(np.array([[0.0, 0.0], [3.0, 0.0], [1.8, 0.0]])).tolist() == [True, True, False]
    assert 0.0 < boundary.delta_min < math.inf


def test_boundary_of_two_segments_uses_their_gap():
    boundary = ScatteringBoundary(
        [
            build_patch_decomposition(segment((-1.0, 0.0), (1.0, 0.0)), 1),
            build_patch_decomposition(segment((-1.0, 1.0), (1.0, 1.0)), 1),
        ]
    )
    assert boundary.delta_min == pytest.approx(1.0, abs=1e-10)


def test_default_overlap_truncates_at_a_third_of_the_overlap_chord(three_patch_disc):
    # 60° overlaps of the unit circle have chord 1
    assert three_patch_disc.delta_min == pytest.approx(1.0 / 3.0, abs=2e-3)


@pytest.mark.parametrize("radius, count, target", [(1.0, 3, 0.35), (2.0, 6, 0.42)])
def test_disc_layouts_reach_their_separation(radius, count, target):
    fraction = circle_overlap_fraction(radius, count, target)
    decomposition = build_patch_decomposition(circle(radius=radius), count, overlap_fraction=fraction)
    assert decomposition.delta_min == pytest.approx(target, abs=2e-3)


def test_circle_overlap_fraction_rejects_unreachable_separations():
    with pytest.raises(DecompositionError):
        circle_overlap_fraction(1.0, 3, 0.7)
    with pytest.raises(DecompositionError):
        circle_overlap_fraction(1.0, 3, 0.6)
