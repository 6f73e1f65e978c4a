"""Assembly and solution of the decoupled spectral tridiagonal systems.

After the 2D sine transform, each mode pair (n, m) obeys an n_z x n_z
tridiagonal system whose row l couples the transformed values at levels
l-1, l, l+1 with the eigenvalues of that row's three level operators.
Systems for different (n, m) are fully independent, so the batched solver
sweeps all modes of a y-range at once with vectorized Thomas elimination
(LU without pivoting, O(n_z) per line).
"""

from dataclasses import dataclass

import numpy as np

from .errors import SingularSystemError
from .grid import CoefficientProfile, Grid3D
from .stencil import (SchemeKind, coefficient_table, coefficients_for,
                      eigenvalue, eigenvalue_plane, mode_cosines)

# pivot smaller than this multiple of the system's band scale is treated as
# a resonant (singular) spectral system
PIVOT_RTOL = 1e-14


@dataclass(frozen=True)
class SpectralSystem:
    """Tridiagonal system for one sine-mode pair (n, m), rows l = 1..n_z.

    sub[l-1] couples to level l-1 (unused in the first row), diag[l-1] to
    level l, sup[l-1] to level l+1 (unused in the last row). Each entry comes
    from the coefficients generated at its own row, so the bands are not
    constant when the coefficient varies with z.
    """

    n: int
    m: int
    sub: np.ndarray
    diag: np.ndarray
    sup: np.ndarray


def assemble_system(n: int, m: int, scheme: SchemeKind, profile: CoefficientProfile,
                    grid: Grid3D) -> SpectralSystem:
    """Spectral system for mode (n, m), both 1-based."""
    n_z = grid.n_z
    sub = np.zeros(n_z, dtype=complex)
    diag = np.zeros(n_z, dtype=complex)
    sup = np.zeros(n_z, dtype=complex)
    for l in range(1, n_z + 1):
        cf = coefficients_for(scheme, profile, grid, l)
        if l > 1:
            sub[l - 1] = eigenvalue(cf, -1, n, m, grid)
        diag[l - 1] = eigenvalue(cf, 0, n, m, grid)
        if l < n_z:
            sup[l - 1] = eigenvalue(cf, +1, n, m, grid)
    return SpectralSystem(n=n, m=m, sub=sub, diag=diag, sup=sup)


def solve_system(system: SpectralSystem, rhs: np.ndarray) -> np.ndarray:
    """Thomas forward elimination / back substitution for one system."""
    n_z = len(system.diag)
    rhs = np.asarray(rhs, dtype=complex)
    if rhs.shape != (n_z,):
        raise ValueError(f"rhs length {rhs.shape} != system size {n_z}")

    scale = max(
        np.abs(system.sub).max(), np.abs(system.diag).max(), np.abs(system.sup).max()
    )
    if scale == 0.0:
        raise SingularSystemError("all-zero system", n=system.n, m=system.m)
    cp = np.zeros(n_z, dtype=complex)
    x = rhs.copy()
    denom = system.diag[0]
    for l in range(n_z):
        if l > 0:
            denom = system.diag[l] - system.sub[l] * cp[l - 1]
        if abs(denom) < PIVOT_RTOL * scale:
            raise SingularSystemError(
                f"vanishing pivot at row {l + 1} (|pivot|={abs(denom):.3e})",
                n=system.n, m=system.m,
            )
        if l < n_z - 1:
            cp[l] = system.sup[l] / denom
        if l > 0:
            x[l] = (x[l] - system.sub[l] * x[l - 1]) / denom
        else:
            x[l] = x[l] / denom
    for l in range(n_z - 2, -1, -1):
        x[l] -= cp[l] * x[l + 1]
    return x


def solve_all(transformed_rhs, scheme: SchemeKind, profile: CoefficientProfile,
              grid: Grid3D, pencil_range=None) -> None:
    """Solve the spectral systems for a y-range of modes, in place.

    transformed_rhs holds the 2D-transformed right-hand side, shape
    (n_z, n_y, n_x); on return the range's z-lines contain the transformed
    solution. pencil_range is a 0-based half-open (start, stop) over the
    m-mode index (None = all). Disjoint ranges may run concurrently.
    """
    values = transformed_rhs.values if hasattr(transformed_rhs, "values") else transformed_rhs
    n_z, n_y, n_x = values.shape
    start, stop = (0, n_y) if pencil_range is None else pencil_range
    if not 0 <= start <= stop <= n_y:
        raise IndexError(f"pencil range ({start}, {stop}) outside 0..{n_y}")
    if start == stop:
        return
    solve_slab(values[:, start:stop, :], scheme, profile, grid, m_start=start)


def solve_slab(values: np.ndarray, scheme: SchemeKind, profile: CoefficientProfile,
               grid: Grid3D, m_start: int = 0) -> None:
    """Sweep a (n_z, M, n_x) slab in place; local row j is global mode m_start + j.

    This is the entry point for partitioned execution, where a part holds a
    private y-slab rather than a view into the full field.
    """
    if values.shape[1] == 0:
        return
    table = coefficient_table(scheme, profile, grid)
    cx, cy = mode_cosines(grid)
    _sweep(values, table, cx, cy[m_start:m_start + values.shape[1]], m_offset=m_start)


def _sweep(w, table, cx, cy, m_offset=0):
    """Vectorized Thomas sweep over every (n, m) line of a (n_z, M, n_x) slab.

    Pivots are screened against the magnitude of the generating stencil
    weights (one scalar per sweep); eigenvalue magnitudes are bounded by a
    small multiple of it, so a pivot far below that scale marks a resonant
    system. Only on failure is the offending mode located.
    """
    A, B, C, D = table
    n_z = w.shape[0]
    scale = max(float(np.abs(t).max()) for t in (A, B, C, D))
    threshold = PIVOT_RTOL * scale

    def lam(l, k):
        return eigenvalue_plane(A[l, k], B[l, k], C[l, k], D[l, k], cx, cy)

    def check(denom, l):
        if float(np.abs(denom).min()) >= threshold:
            return
        bad = np.abs(denom) < threshold
        mi, ni = np.argwhere(bad)[0]
        raise SingularSystemError(
            f"vanishing pivot at row {l + 1} for mode "
            f"(n={ni + 1}, m={m_offset + mi + 1})",
            n=int(ni + 1), m=int(m_offset + mi + 1),
        )

    cp = np.empty_like(w)
    denom = lam(0, 1)
    check(denom, 0)
    cp[0] = lam(0, 2) / denom
    w[0] = w[0] / denom
    for l in range(1, n_z):
        low = lam(l, 0)
        mid = lam(l, 1)
        denom = mid - low * cp[l - 1]
        check(denom, l)
        if l < n_z - 1:
            cp[l] = lam(l, 2) / denom
        w[l] = (w[l] - low * w[l - 1]) / denom
    for l in range(n_z - 2, -1, -1):
        w[l] -= cp[l] * w[l + 1]
