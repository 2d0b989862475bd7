"""Field containers, quadrature-backed projections, and averaging kernels."""

import numpy as np
import pytest

from macns import (
    CellField,
    FaceField,
    GridMismatchError,
    State,
    build_grid,
    cell_average_velocity,
    face_average,
    integrate_cells,
    integrate_faces,
    project_cells,
    project_faces,
)
from macns.fields import face_average_axis, same_grid


def make_state(grid, rng):
    return State(
        density=CellField(grid, rng.uniform(0.5, 1.5, grid.ncells)),
        velocity=FaceField(grid, rng.standard_normal((grid.d, grid.ncells))),
    )


def test_shape_validation():
    g = build_grid(2, 4)
    with pytest.raises(ValueError):
        CellField(g, np.zeros(15))
    with pytest.raises(ValueError):
        FaceField(g, np.zeros((3, 16)))
    with pytest.raises(ValueError):
        FaceField(g, np.zeros(16))


def test_same_grid_mismatch(rng):
    a = make_state(build_grid(2, 4), rng)
    b = make_state(build_grid(2, 8), rng)
    assert same_grid(a.density, a.velocity) == a.grid
    with pytest.raises(GridMismatchError):
        same_grid(a.density, b.density)
    with pytest.raises(GridMismatchError):
        State(density=a.density, velocity=b.velocity)


def test_copy_is_deep(rng):
    s = make_state(build_grid(2, 4), rng)
    c = s.copy()
    c.density.values[0] += 1.0
    c.velocity.values[0, 0] += 1.0
    assert s.density.values[0] != c.density.values[0]
    assert s.velocity.values[0, 0] != c.velocity.values[0, 0]


def test_project_cells_coordinate():
    g = build_grid(2, 2)
    r = project_cells(g, lambda p: p[:, 0])
    np.testing.assert_allclose(r.values, [0.25, 0.75, 0.25, 0.75], atol=1e-15)


def test_project_cells_affine_exact():
    g = build_grid(2, 4)
    r = project_cells(g, lambda p: 3.0 * p[:, 0] - 2.0 * p[:, 1] + 1.0)
    centers = g.cell_centers()
    expected = 3.0 * centers[:, 0] - 2.0 * centers[:, 1] + 1.0
    np.testing.assert_allclose(r.values, expected, atol=1e-14)


def test_project_cells_quadratic_exact():
    # two-point Gauss per axis integrates cubics exactly, so the cell mean of
    # x^2 must equal the analytic mean h^-1 * int x^2 dx = (3c^2+3c+1)/3 * h^2
    g = build_grid(2, 4)
    r = project_cells(g, lambda p: p[:, 0] ** 2)
    idx = (np.arange(g.ncells) // g.n**0) % g.n
    expected = (3.0 * idx**2 + 3.0 * idx + 1.0) / 3.0 * g.h**2
    np.testing.assert_allclose(r.values, expected, atol=1e-15)


def test_project_faces_transverse_mean():
    # component 0 of (x1, 0) on x-faces: mean over the face's x1 extent
    g = build_grid(2, 2)
    v = project_faces(g, lambda p: np.stack([p[:, 1], np.zeros(len(p))], axis=1))
    np.testing.assert_allclose(v.values[0], [0.25, 0.25, 0.75, 0.75], atol=1e-15)
    np.testing.assert_allclose(v.values[1], 0.0, atol=0)


def test_project_faces_normal_coordinate_no_wrap():
    g = build_grid(2, 2)
    v = project_faces(g, lambda p: np.stack([p[:, 0], np.zeros(len(p))], axis=1))
    # face at c0 = n-1 evaluates x0 = 1.0, not 0.0
    np.testing.assert_allclose(v.values[0], [0.5, 1.0, 0.5, 1.0], atol=1e-15)


def test_project_faces_3d_transverse_plane():
    g = build_grid(3, 2)
    v = project_faces(
        g, lambda p: np.stack([p[:, 1] * p[:, 2], np.zeros(len(p)), np.zeros(len(p))], axis=1)
    )
    # 2x2 Gauss over the transverse plane integrates the bilinear x1*x2 exactly:
    # mean = x1_center * x2_center
    centers = g.face_centers(0)
    np.testing.assert_allclose(v.values[0], centers[:, 1] * centers[:, 2], atol=1e-15)


def test_face_average_arithmetic_mean():
    g = build_grid(2, 2)
    r = CellField(g, np.array([1.0, 2.0, 3.0, 4.0]))
    avg = face_average(r)
    # axis 0: mean of r_K and r_{K+e0}
    np.testing.assert_allclose(avg.values[0], [1.5, 1.5, 3.5, 3.5], atol=0)
    np.testing.assert_allclose(avg.values[1], [2.0, 3.0, 2.0, 3.0], atol=0)
    np.testing.assert_allclose(face_average_axis(r, 1), avg.values[1], atol=0)


def test_cell_average_velocity_recovers_centers():
    # velocity_i = x_i on faces averages back to the cell center coordinate,
    # except across the periodic seam (K_i = 0) where the coordinate function
    # itself is discontinuous on the torus
    g = build_grid(2, 4)
    v = project_faces(g, lambda p: p.copy())
    bars = cell_average_velocity(v)
    centers = g.cell_centers()
    for i in range(g.d):
        away_from_seam = centers[:, i] > g.h
        np.testing.assert_allclose(
            bars[i].values[away_from_seam], centers[away_from_seam, i], atol=1e-14
        )


def test_cell_average_velocity_definition(rng):
    # bar(v)_i at cell K is the mean of the two family-i faces of K:
    # the one keyed by K and the one keyed by K - e_i
    g = build_grid(3, 3)
    v = FaceField(g, rng.standard_normal((3, g.ncells)))
    bars = cell_average_velocity(v)
    for i in range(g.d):
        expected = 0.5 * (v.values[i] + g.roll(v.values[i], i, -1))
        np.testing.assert_allclose(bars[i].values, expected, atol=0)


def test_integrals():
    g = build_grid(2, 2)
    r = CellField(g, np.array([1.0, 2.0, 3.0, 4.0]))
    assert integrate_cells(r) == pytest.approx(2.5)
    v = FaceField(g, np.stack([np.full(4, 2.0), np.full(4, -1.0)]))
    assert integrate_faces(v, 0) == pytest.approx(2.0)
    assert integrate_faces(v, 1) == pytest.approx(-1.0)


def test_projection_partition_of_unity():
    for d, n in ((2, 5), (3, 3)):
        g = build_grid(d, n)
        r = project_cells(g, lambda p: np.ones(len(p)))
        assert integrate_cells(r) == pytest.approx(1.0, abs=1e-14)
