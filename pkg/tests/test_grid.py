"""Grid indexing, geometry, and the periodic shift kernel.

Flat ordering contract: flat = sum_k c_k * n^k, so axis 0 varies fastest.
Face family i is keyed by the cell on its negative side; the face keyed by
cell K sits at x_i = (K_i + 1) h, taken in (0, 1] without wrapping.
"""

import numpy as np
import pytest

from macns import ConfigurationError, build_grid
from macns.grid import shift_matrix


def test_basic_metrics():
    g = build_grid(2, 4)
    assert g.d == 2 and g.n == 4
    assert g.h == 0.25
    assert g.ncells == 16
    assert g.shape == (4, 4)
    g3 = build_grid(3, 3)
    assert g3.ncells == 27
    assert g3.shape == (3, 3, 3)


def test_build_grid_validation():
    with pytest.raises(ConfigurationError):
        build_grid(1, 4)
    with pytest.raises(ConfigurationError):
        build_grid(4, 4)
    with pytest.raises(ConfigurationError):
        build_grid(2, 1)
    with pytest.raises(ConfigurationError):
        build_grid(2, 2.5)


def test_flat_ordering_axis0_fastest():
    g = build_grid(2, 4)
    assert g.cell_to_flat((0, 0)) == 0
    assert g.cell_to_flat((1, 0)) == 1
    assert g.cell_to_flat((0, 1)) == 4
    assert g.cell_to_flat((3, 2)) == 3 + 2 * 4
    g3 = build_grid(3, 3)
    assert g3.cell_to_flat((1, 2, 1)) == 1 + 2 * 3 + 1 * 9


def test_flat_cell_round_trip():
    for d, n in ((2, 4), (3, 3)):
        g = build_grid(d, n)
        for flat in range(g.ncells):
            cell = g.flat_to_cell(flat)
            assert g.cell_to_flat(cell) == flat
        cells = list(g.iter_cells())
        assert len(cells) == g.ncells
        assert [g.cell_to_flat(c) for c in cells] == list(range(g.ncells))


def test_index_range_checks():
    g = build_grid(2, 4)
    with pytest.raises(IndexError):
        g.cell_to_flat((4, 0))
    with pytest.raises(IndexError):
        g.flat_to_cell(16)


def test_neighbor_cell_periodic():
    g = build_grid(2, 4)
    assert g.neighbor_cell((3, 0), 0, +1) == (0, 0)
    assert g.neighbor_cell((0, 2), 0, -1) == (3, 2)
    assert g.neighbor_cell((1, 3), 1, +1) == (1, 0)
    with pytest.raises(ValueError):
        g.neighbor_cell((0, 0), 0, 2)


def test_face_cells_orientation():
    g = build_grid(2, 4)
    K, L = g.face_cells(0, (1, 2))
    assert K == (1, 2) and L == (2, 2)
    K, L = g.face_cells(1, (0, 3))
    assert K == (0, 3) and L == (0, 0)


def test_dual_neighbors_count_and_family():
    g = build_grid(3, 3)
    out = g.dual_neighbors(1, (0, 0, 0))
    assert len(out) == 2 * g.d
    assert all(axis == 1 for axis, _ in out)
    cells = {cell for _, cell in out}
    assert (2, 0, 0) in cells and (1, 0, 0) in cells
    assert (0, 2, 0) in cells and (0, 1, 0) in cells


def test_cell_centers():
    g = build_grid(2, 2)
    centers = g.cell_centers()
    expected = np.array([[0.25, 0.25], [0.75, 0.25], [0.25, 0.75], [0.75, 0.75]])
    np.testing.assert_allclose(centers, expected, rtol=0, atol=0)


def test_face_centers_no_wrap():
    g = build_grid(2, 2)
    fx = g.face_centers(0)
    # x-coordinate of an x-face is (c0 + 1) h, reaching 1.0 instead of 0.0
    np.testing.assert_allclose(fx[:, 0], [0.5, 1.0, 0.5, 1.0], atol=0)
    np.testing.assert_allclose(fx[:, 1], [0.25, 0.25, 0.75, 0.75], atol=0)
    fy = g.face_centers(1)
    np.testing.assert_allclose(fy[:, 0], [0.25, 0.75, 0.25, 0.75], atol=0)
    np.testing.assert_allclose(fy[:, 1], [0.5, 0.5, 1.0, 1.0], atol=0)


def test_roll_semantics():
    g = build_grid(2, 4)
    values = np.arange(16.0)
    rolled = g.roll(values, 0, +1)
    # out[K] = f[K + e0]
    assert rolled[g.cell_to_flat((0, 0))] == values[g.cell_to_flat((1, 0))]
    assert rolled[g.cell_to_flat((3, 1))] == values[g.cell_to_flat((0, 1))]
    rolled = g.roll(values, 1, -1)
    assert rolled[g.cell_to_flat((2, 0))] == values[g.cell_to_flat((2, 3))]


def test_roll_inverse_and_composition(rng):
    for d, n in ((2, 4), (3, 3)):
        g = build_grid(d, n)
        v = rng.standard_normal(g.ncells)
        for axis in range(d):
            np.testing.assert_array_equal(g.roll(g.roll(v, axis, +1), axis, -1), v)
            np.testing.assert_array_equal(
                g.roll(v, axis, n), v
            )  # full revolution is the identity


def test_shift_matrix_matches_roll(rng):
    for d, n in ((2, 4), (3, 3)):
        g = build_grid(d, n)
        v = rng.standard_normal(g.ncells)
        for axis in range(d):
            for shift in (-1, 1, 2):
                S = shift_matrix(g, axis, shift)
                np.testing.assert_allclose(S @ v, g.roll(v, axis, shift), atol=0)
