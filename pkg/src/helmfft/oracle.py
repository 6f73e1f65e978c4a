"""Dense reference assembly and solves for small grids.

Everything here is written as plain nested loops over the stencil so it shares
no code path with the matrix-free application, the sine transform, or the
Thomas sweeps it is used to verify. Intended for grids up to ~8^3 (the full
matrix is (n_x n_y n_z)^2).
"""

import numpy as np

from .grid import CoefficientProfile, Grid3D
from .stencil import SchemeKind, StencilCoefficients, coefficients_for

_NEIGHBORS = (
    # (di, dj, weight picker)
    (-1, -1, "a"), (1, -1, "a"), (-1, 1, "a"), (1, 1, "a"),
    (-1, 0, "b"), (1, 0, "b"),
    (0, -1, "c"), (0, 1, "c"),
    (0, 0, "d"),
)


def _weight(cf: StencilCoefficients, name: str, offset: int) -> complex:
    return {"a": cf.a, "b": cf.b, "c": cf.c, "d": cf.d}[name][offset + 1]


def row_index(i: int, j: int, l: int, grid: Grid3D) -> int:
    """Linear row of interior node (i, j, l), all 1-based."""
    return (i - 1) + grid.n_x * (j - 1) + grid.n_x * grid.n_y * (l - 1)


def dense_matrix(scheme: SchemeKind, profile: CoefficientProfile,
                 grid: Grid3D) -> np.ndarray:
    """Full interior operator matrix, rows/columns in x-fastest order."""
    n = grid.n_x * grid.n_y * grid.n_z
    A = np.zeros((n, n), dtype=complex)
    for l in range(1, grid.n_z + 1):
        cf = coefficients_for(scheme, profile, grid, l)
        for j in range(1, grid.n_y + 1):
            for i in range(1, grid.n_x + 1):
                row = row_index(i, j, l, grid)
                for dl in (-1, 0, 1):
                    ll = l + dl
                    if not 1 <= ll <= grid.n_z:
                        continue
                    for di, dj, name in _NEIGHBORS:
                        ii, jj = i + di, j + dj
                        if 1 <= ii <= grid.n_x and 1 <= jj <= grid.n_y:
                            A[row, row_index(ii, jj, ll, grid)] += _weight(cf, name, dl)
    return A


def dense_boundary_fold(boundary_ext: np.ndarray, scheme: SchemeKind,
                        profile: CoefficientProfile, grid: Grid3D) -> np.ndarray:
    """Per-row sum of stencil weight x boundary value, as a flat vector.

    boundary_ext is a closed-box array (n_z+2, n_y+2, n_x+2); only entries on
    the boundary lattice are read.
    """
    n = grid.n_x * grid.n_y * grid.n_z
    out = np.zeros(n, dtype=complex)
    for l in range(1, grid.n_z + 1):
        cf = coefficients_for(scheme, profile, grid, l)
        for j in range(1, grid.n_y + 1):
            for i in range(1, grid.n_x + 1):
                row = row_index(i, j, l, grid)
                acc = 0.0 + 0.0j
                for dl in (-1, 0, 1):
                    ll = l + dl
                    for di, dj, name in _NEIGHBORS:
                        ii, jj = i + di, j + dj
                        on_boundary = (ii in (0, grid.n_x + 1) or jj in (0, grid.n_y + 1)
                                       or ll in (0, grid.n_z + 1))
                        if on_boundary:
                            acc += _weight(cf, name, dl) * boundary_ext[ll, jj, ii]
                out[row] = acc
    return out


def dense_solve(rhs_interior: np.ndarray, boundary_ext: np.ndarray,
                scheme: SchemeKind, profile: CoefficientProfile,
                grid: Grid3D) -> np.ndarray:
    """LAPACK solve of the dense system with the boundary folded; flat result."""
    A = dense_matrix(scheme, profile, grid)
    f = np.asarray(rhs_interior, dtype=complex).reshape(-1).copy()
    f -= dense_boundary_fold(boundary_ext, scheme, profile, grid)
    return np.linalg.solve(A, f)


def dense_plane_matrix(a: complex, b: complex, c: complex, d: complex,
                       n_x: int, n_y: int) -> np.ndarray:
    """One level's in-plane operator as a dense (n_x n_y) x (n_x n_y) matrix."""
    n = n_x * n_y
    C = np.zeros((n, n), dtype=complex)
    for j in range(1, n_y + 1):
        for i in range(1, n_x + 1):
            row = (i - 1) + n_x * (j - 1)
            for di, dj, name in _NEIGHBORS:
                ii, jj = i + di, j + dj
                if 1 <= ii <= n_x and 1 <= jj <= n_y:
                    w = {"a": a, "b": b, "c": c, "d": d}[name]
                    C[row, (ii - 1) + n_x * (jj - 1)] += w
    return C


def dense_sine_matrix(n: int) -> np.ndarray:
    """Orthonormal 1D sine kernel, built here independently of the fast path."""
    idx = np.arange(1, n + 1)
    return np.sqrt(2.0 / (n + 1)) * np.sin(np.pi * np.outer(idx, idx) / (n + 1))


def dense_sine_matrix_2d(n_x: int, n_y: int) -> np.ndarray:
    """2D eigenvector matrix in x-fastest vector order (kron of 1D kernels)."""
    return np.kron(dense_sine_matrix(n_y), dense_sine_matrix(n_x))
