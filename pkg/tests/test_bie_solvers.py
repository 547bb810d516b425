from __future__ import annotations

import math

import numpy as np
import pytest
from scipy import special as sp

from fthms.bie.closed import ClosedCurveDiscretization, cfie_coupling, solve_cfie
from fthms.bie.linsolve import SolverSettings, linear_solve
from fthms.bie.models import FrequencyDomainProblem
from fthms.bie.open_arc import OpenArcDiscretization, boundary_trace, solve_open_arc
from fthms.bie.potentials import ClosedPotential, eval_potential
from fthms.errors import ParameterDomainError, SingularEvaluationError, SolverConvergenceError
from fthms.geometry.catalog import circle, kite, segment
from fthms.special.kernels import phi_of_distance


@pytest.mark.parametrize("kappa", [1.0, 2.0, 5.0])
def test_single_layer_circle_eigenvalues(kappa):
    disc = ClosedCurveDiscretization(circle(), 64)
    matrix = disc.single_layer(kappa)
    for n in range(9):
        mode = np.exp(1j * n * disc.params)
        symbol = 0.5j * math.pi * sp.jv(n, kappa) * sp.hankel1(n, kappa)
        np.testing.assert_allclose(matrix @ mode, symbol * mode, atol=1e-10)


@pytest.mark.parametrize("curve", [circle(), kite()], ids=["circle", "kite"])
def test_cfie_reproduces_interior_point_source(curve):
    kappa = 3.0
    source = np.array([0.1, 0.2])
    disc = ClosedCurveDiscretization(curve, 128)
    rhs = phi_of_distance(kappa, np.linalg.norm(disc.points - source, axis=1))
    solution = solve_cfie(FrequencyDomainProblem(disc, kappa, 1.0, rhs))
    angles = np.linspace(0.0, 2.0 * math.pi, 20, endpoint=False)
    probes = 3.0 * np.column_stack([np.cos(angles), np.sin(angles)])
    field = eval_potential("combined", solution, probes)
    exact = phi_of_distance(kappa, np.linalg.norm(probes - source, axis=1))
    np.testing.assert_allclose(field, exact, atol=1e-8)


def test_cfie_coupling_is_odd():
    assert cfie_coupling(0.5) == 1.0
    assert cfie_coupling(-0.5) == -1.0
    assert cfie_coupling(-7.0) == -7.0


def test_closed_discretization_guards():
    with pytest.raises(ParameterDomainError):
        ClosedCurveDiscretization(segment(), 16)
    disc = ClosedCurveDiscretization(circle(), 16)
    with pytest.raises(SingularEvaluationError):
        ClosedPotential(disc, np.array([[1.0, 0.0]]), "S")


def test_open_arc_density_reproduces_data_between_nodes():
    kappa = 4.0
    arc = segment((-1.0, 0.0), (1.0, 0.0))
    disc = OpenArcDiscretization.whole_arc(arc, nodes_per_piece=32, weighted=True)
    rhs = np.exp(1j * kappa * 0.3 * disc.points[:, 0])
    solution = solve_open_arc(FrequencyDomainProblem(disc, kappa, 1.0, rhs))
    params = np.linspace(-0.9, 0.9, 13)
    trace = boundary_trace(solution, params)
    np.testing.assert_allclose(trace, np.exp(1j * kappa * 0.3 * params), atol=1e-5)


def _arc_field(nodes_per_piece, kappa, source, targets):
    arc = segment((-1.0, 0.0), (1.0, 0.0))
    disc = OpenArcDiscretization.whole_arc(arc, nodes_per_piece=nodes_per_piece, weighted=True)
    rhs = -phi_of_distance(kappa, np.linalg.norm(disc.points - np.asarray(source), axis=-1))
    solution = solve_open_arc(FrequencyDomainProblem(disc, kappa, 1.0, rhs))
    return disc.potential(np.atleast_2d(targets)).matrix(kappa) @ solution.values


def test_open_arc_field_converges_with_nodes():
    kappa = 4.0
    source = (0.3, 0.8)
    targets = np.array([[0.1, 0.4], [-0.6, -0.5], [1.4, 0.2]])
    coarse, medium, fine = (_arc_field(n, kappa, source, targets) for n in (8, 16, 40))
    assert np.max(np.abs(medium - fine)) < 1e-4 * np.max(np.abs(fine))
    assert np.max(np.abs(medium - fine)) < np.max(np.abs(coarse - fine))


def test_open_arc_scattering_is_reciprocal():
    kappa = 3.0
    a, b = (0.3, 0.8), (-0.5, -0.6)
    a_to_b = _arc_field(32, kappa, a, b)[0]
    b_to_a = _arc_field(32, kappa, b, a)[0]
    assert abs(a_to_b - b_to_a) < 1e-5 * abs(a_to_b)


def test_from_patch_flags_every_corner(three_patch_disc, unit_circle):
    disc = OpenArcDiscretization.from_patch(unit_circle, three_patch_disc.patch(0), nodes_per_piece=16)
    assert len(disc.pieces) == 3
    assert all(piece.selector == "both" for piece in disc.pieces)
    assert disc.size == 48
    assert disc.dtheta.min() > 0.0


def test_linear_solve_paths_agree():
    matrix = np.eye(40) + 0.1 * np.outer(np.linspace(0.0, 1.0, 40), np.linspace(1.0, 0.0, 40))
    rhs = np.linspace(1.0, 2.0, 40).astype(complex)
    direct = linear_solve(matrix, rhs).solution
    iterative = linear_solve(matrix, rhs, SolverSettings("iterative", tol=1e-12)).solution
    np.testing.assert_allclose(iterative, direct, atol=1e-9)


def test_linear_solve_reports_non_convergence():
    matrix = np.diag(np.linspace(1e-6, 1.0, 200)) + 0.0j
    rhs = np.ones(200, dtype=complex)
    with pytest.raises(SolverConvergenceError) as info:
        linear_solve(matrix, rhs, SolverSettings("iterative", tol=1e-14, restart=5, cap=2))
    assert info.value.iterations > 0
