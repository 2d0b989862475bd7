"""Topology of the staggered periodic grid.

The torus [0,1)^d is divided into n^d cubic cells of edge h = 1/n.  A cell
is addressed by a d-tuple c = (c_0, ..., c_{d-1}) with 0 <= c_k < n, or by
the flat index

    flat(c) = sum_k c_k * n**k

so axis 0 varies fastest.  Velocity component k lives on the faces
orthogonal to axis k.  The face between cell K and its +1 neighbour along
axis k is keyed by K itself, which makes every face family (and every
family of dual cells) a flat array of length n^d in the same ordering as
the cells.

Cell centers sit at (c + 1/2) h componentwise.  The face keyed by (k, K)
has its center at x_k = (K_k + 1) h; coordinates are reported in (0, 1]
along the face normal and are never wrapped, so affine integrands remain
single-valued across the periodic seam.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError


@dataclass(frozen=True)
class StaggeredGrid:
    """Periodic MAC grid on [0,1)^d with n cells per axis."""

    d: int
    n: int

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def ncells(self) -> int:
        return self.n**self.d

    @property
    def shape(self) -> tuple:
        return (self.n,) * self.d

    # -- index bookkeeping -------------------------------------------------

    def cell_to_flat(self, cell) -> int:
        n = self.n
        flat = 0
        for k in reversed(range(self.d)):
            c = cell[k]
            if not 0 <= c < n:
                raise IndexError(f"cell coordinate {cell} out of range for n={n}")
            flat = flat * n + c
        return flat

    def flat_to_cell(self, flat: int) -> tuple:
        if not 0 <= flat < self.ncells:
            raise IndexError(f"flat index {flat} out of range")
        n = self.n
        cell = []
        for _ in range(self.d):
            cell.append(flat % n)
            flat //= n
        return tuple(cell)

    def iter_cells(self):
        """Yield all cell tuples in flat order."""
        for flat in range(self.ncells):
            yield self.flat_to_cell(flat)

    def neighbor_cell(self, cell, axis: int, direction: int) -> tuple:
        """Periodic neighbour of `cell` one step along `axis` (0-based)."""
        if direction not in (-1, 1):
            raise ValueError("direction must be +1 or -1")
        c = list(cell)
        c[axis] = (c[axis] + direction) % self.n
        return tuple(c)

    def face_cells(self, axis: int, cell) -> tuple:
        """The (K, L) cell pair of the face keyed by `cell` on `axis`.

        Orientation: x_L - x_K = h * e_axis (modulo the torus).
        """
        return tuple(cell), self.neighbor_cell(cell, axis, +1)

    def dual_neighbors(self, axis: int, cell):
        """Face keys of the 2d dual-cell neighbours of face (axis, cell)."""
        out = []
        for j in range(self.d):
            for direction in (-1, 1):
                out.append((axis, self.neighbor_cell(cell, j, direction)))
        return out

    # -- geometry ----------------------------------------------------------

    def cell_centers(self) -> np.ndarray:
        """(ncells, d) array of cell centers in flat order."""
        coords = self._coord_grids()
        return (coords + 0.5) * self.h

    def face_centers(self, axis: int) -> np.ndarray:
        """(ncells, d) array of face centers for the faces normal to `axis`."""
        coords = (self._coord_grids() + 0.5) * self.h
        coords[:, axis] += 0.5 * self.h
        return coords

    def _coord_grids(self) -> np.ndarray:
        idx = np.arange(self.ncells)
        out = np.empty((self.ncells, self.d), dtype=float)
        for k in range(self.d):
            out[:, k] = (idx // self.n**k) % self.n
        return out

    # -- array kernels -----------------------------------------------------

    def roll(self, values: np.ndarray, axis: int, shift: int) -> np.ndarray:
        """Value at the cell/face `shift` steps along `axis`: out[K] = f[K + shift e_axis]."""
        a = np.asarray(values).reshape(self.shape)
        # flat ordering puts grid axis k on numpy axis d-1-k
        return np.roll(a, -shift, axis=self.d - 1 - axis).reshape(-1)


def build_grid(d: int, n: int) -> StaggeredGrid:
    """Construct a grid, rejecting unsupported dimensions and resolutions."""
    if d not in (2, 3):
        raise ConfigurationError(f"dimension must be 2 or 3, got {d}")
    if not isinstance(n, (int, np.integer)) or n < 2:
        raise ConfigurationError(f"resolution must be an integer >= 2, got {n!r}")
    return StaggeredGrid(d=int(d), n=int(n))


@lru_cache(maxsize=128)
def shift_matrix(grid: StaggeredGrid, axis: int, shift: int) -> sp.csr_matrix:
    """Sparse matrix S with (S f)[K] = f[K + shift e_axis], matching `grid.roll`."""
    n = grid.n
    rows = np.arange(n)
    cols = (rows + shift) % n
    c1 = sp.csr_matrix((np.ones(n), (rows, cols)), shape=(n, n))
    mat = c1
    for _ in range(axis):
        mat = sp.kron(mat, sp.identity(n, format="csr"), format="csr")
    for _ in range(grid.d - 1 - axis):
        mat = sp.kron(sp.identity(n, format="csr"), mat, format="csr")
    return mat.tocsr()
