"""Discrete operator stencils, exact identities, and truncation orders.

Hand oracles use the d=2, n=2 grid (h = 1/2) with flat ordering
r = [r(0,0), r(1,0), r(0,1), r(1,1)].
"""

import numpy as np
import pytest

from macns import (
    CellField,
    FaceField,
    build_grid,
    div_cells,
    grad_bidual,
    grad_edges,
    identity_residuals,
    laplace_cells,
    laplace_faces,
    project_cells,
    project_faces,
    upwind_divergence,
    upwind_flux,
)
from macns.operators import edge_derivative, upwind_flux_axis


@pytest.fixture
def g22():
    return build_grid(2, 2)


@pytest.fixture
def r1234(g22):
    return CellField(g22, np.array([1.0, 2.0, 3.0, 4.0]))


def test_edge_derivative_hand_values(g22, r1234):
    np.testing.assert_allclose(edge_derivative(r1234, 0), [2.0, -2.0, 2.0, -2.0], atol=0)
    np.testing.assert_allclose(edge_derivative(r1234, 1), [4.0, 4.0, -4.0, -4.0], atol=0)
    grad = grad_edges(r1234)
    np.testing.assert_allclose(grad.values[0], [2.0, -2.0, 2.0, -2.0], atol=0)
    np.testing.assert_allclose(grad.values[1], [4.0, 4.0, -4.0, -4.0], atol=0)


def test_laplace_cells_hand_values(g22, r1234):
    np.testing.assert_allclose(
        laplace_cells(r1234).values, [24.0, 8.0, -8.0, -24.0], atol=0
    )


def test_laplacian_of_delta():
    g = build_grid(2, 4)
    r = np.zeros(g.ncells)
    j = g.cell_to_flat((1, 2))
    r[j] = 1.0
    lap = laplace_cells(CellField(g, r)).values
    inv_h2 = g.n**2
    assert lap[j] == -4 * inv_h2
    for axis in range(2):
        for direction in (-1, 1):
            assert lap[g.cell_to_flat(g.neighbor_cell((1, 2), axis, direction))] == inv_h2
    assert np.count_nonzero(lap) == 5


def test_laplace_faces_same_stencil_per_family(rng):
    g = build_grid(3, 3)
    v = FaceField(g, rng.standard_normal((3, g.ncells)))
    lap = laplace_faces(v)
    for i in range(g.d):
        np.testing.assert_allclose(
            lap.values[i], laplace_cells(CellField(g, v.values[i])).values, atol=0
        )


def test_grad_bidual_hand_values(g22):
    v = FaceField(g22, np.arange(8.0).reshape(2, 4))
    grad = grad_bidual(v)
    assert grad.shape == (2, 2, 4)
    kij = g22.cell_to_flat
    assert grad[0, 0, kij((0, 0))] == (v.values[0, kij((1, 0))] - v.values[0, kij((0, 0))]) * 2
    assert grad[0, 1, kij((0, 0))] == (v.values[0, kij((0, 1))] - v.values[0, kij((0, 0))]) * 2
    assert grad[1, 0, kij((1, 1))] == (v.values[1, kij((0, 1))] - v.values[1, kij((1, 1))]) * 2


def test_div_cells_of_affine_interior():
    # div(x0, x1) = 2 exactly away from the periodic seam rows
    g = build_grid(2, 4)
    v = project_faces(g, lambda p: p.copy())
    div = div_cells(v).values
    centers = g.cell_centers()
    interior = np.all(centers > g.h, axis=1)
    np.testing.assert_allclose(div[interior], 2.0, atol=1e-13)


def test_div_cells_total_is_zero(rng):
    for d, n in ((2, 5), (3, 3)):
        g = build_grid(d, n)
        v = FaceField(g, rng.standard_normal((d, g.ncells)))
        assert abs(np.sum(div_cells(v).values)) < 1e-12 * g.ncells


def test_upwind_flux_donor_cell(g22, r1234):
    v = FaceField(g22, np.stack([np.array([1.0, -1.0, 1.0, -1.0]), np.zeros(4)]))
    flux = upwind_flux_axis(r1234, v, 0)
    np.testing.assert_allclose(flux, [1.0, -1.0, 3.0, -3.0], atol=0)
    # zero velocity carries nothing
    np.testing.assert_allclose(upwind_flux_axis(r1234, FaceField(g22, np.zeros((2, 4))), 0), 0.0, atol=0)
    full = upwind_flux(r1234, v)
    np.testing.assert_allclose(full.values[0], flux, atol=0)
    np.testing.assert_allclose(full.values[1], 0.0, atol=0)


def test_upwind_divergence_is_div_of_flux(rng):
    g = build_grid(2, 6)
    r = CellField(g, rng.uniform(0.2, 2.0, g.ncells))
    v = FaceField(g, rng.standard_normal((2, g.ncells)))
    np.testing.assert_allclose(
        upwind_divergence(r, v).values, div_cells(upwind_flux(r, v)).values, atol=1e-14
    )
    assert abs(np.sum(upwind_divergence(r, v).values)) < 1e-12 * g.ncells


def test_identity_suite_tight():
    for d, n in ((2, 4), (2, 8), (2, 16), (3, 4), (3, 8)):
        g = build_grid(d, n)
        res = identity_residuals(g, np.random.default_rng(7))
        assert set(res) == {
            "laplacian_cells_sbp",
            "laplacian_faces_sbp",
            "divergence_sbp",
            "upwind_sbp",
            "upwind_average_form",
            "upwind_conservation",
            "laplacian_composition",
        }
        for name, value in res.items():
            assert value <= 1e-12, f"({d},{n}) {name} = {value:.3e}"


def test_identity_suite_deterministic():
    g = build_grid(2, 8)
    a = identity_residuals(g, np.random.default_rng(3))
    b = identity_residuals(g, np.random.default_rng(3))
    assert a == b


def _eoc(errors):
    return [np.log2(c / f) for c, f in zip(errors, errors[1:])]


def test_edge_derivative_second_order():
    errs = []
    for n in (8, 16, 32):
        g = build_grid(2, n)
        r = project_cells(g, lambda p: np.sin(2 * np.pi * p[:, 0]) * np.cos(2 * np.pi * p[:, 1]))
        exact = project_faces(
            g,
            lambda p: np.stack(
                [
                    2 * np.pi * np.cos(2 * np.pi * p[:, 0]) * np.cos(2 * np.pi * p[:, 1]),
                    np.zeros(len(p)),
                ],
                axis=1,
            ),
        )
        errs.append(np.max(np.abs(edge_derivative(r, 0) - exact.values[0])))
    for e in _eoc(errs):
        assert 1.8 <= e <= 2.2


def test_laplacian_second_order():
    errs = []
    for n in (16, 32, 64):
        g = build_grid(2, n)
        f = lambda p: np.sin(2 * np.pi * p[:, 0]) * np.sin(2 * np.pi * p[:, 1])
        r = project_cells(g, f)
        exact = project_cells(g, lambda p: -8 * np.pi**2 * f(p))
        errs.append(np.max(np.abs(laplace_cells(r).values - exact.values)))
    for e in _eoc(errs):
        assert 1.8 <= e <= 2.2


def test_upwind_divergence_first_order():
    # with a sign-definite velocity the upwind error is a smooth one-sided
    # difference: first order, no kink pollution
    def vel(p):
        return np.stack(
            [1.5 + 0.5 * np.sin(2 * np.pi * p[:, 0]), 1.0 + 0.5 * np.cos(2 * np.pi * p[:, 1])],
            axis=1,
        )

    def dens(p):
        return 1.0 + 0.3 * np.sin(2 * np.pi * (p[:, 0] + p[:, 1]))

    def div_rv(p):
        x, y = p[:, 0], p[:, 1]
        two_pi = 2 * np.pi
        r = 1.0 + 0.3 * np.sin(two_pi * (x + y))
        rx = 0.3 * two_pi * np.cos(two_pi * (x + y))
        v1 = 1.5 + 0.5 * np.sin(two_pi * x)
        v2 = 1.0 + 0.5 * np.cos(two_pi * y)
        v1x = 0.5 * two_pi * np.cos(two_pi * x)
        v2y = -0.5 * two_pi * np.sin(two_pi * y)
        return rx * v1 + r * v1x + rx * v2 + r * v2y

    errs = []
    for n in (16, 32, 64):
        g = build_grid(2, n)
        r = project_cells(g, dens)
        v = project_faces(g, vel)
        exact = project_cells(g, div_rv)
        errs.append(np.max(np.abs(upwind_divergence(r, v).values - exact.values)))
    for e in _eoc(errs):
        assert 0.8 <= e <= 1.2
