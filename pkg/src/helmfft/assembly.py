"""Right-hand sides, Dirichlet folding, and matrix-free application of the operator.

Fields live on interior nodes only, stored as (n_z, n_y, n_x) complex arrays
so the x index varies fastest in memory; the flattened order matches the row
ordering of the assembled linear system. Boundary values never enter the
unknown vector: they are folded into the right-hand side once, and the solver
works with homogeneous data from then on.
"""

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import UnsupportedSchemeError
from .grid import CoefficientProfile, Grid3D
from .stencil import SchemeKind, coefficient_table

# (di, dj) -> which weight of the level multiplies that neighbor
_PLANE_OFFSETS = (
    ((-1, -1), "a"), ((1, -1), "a"), ((-1, 1), "a"), ((1, 1), "a"),
    ((-1, 0), "b"), ((1, 0), "b"),
    ((0, -1), "c"), ((0, 1), "c"),
    ((0, 0), "d"),
)


@dataclass
class Field3D:
    """Complex scalar field on the interior nodes.

    values has shape (n_z, n_y, n_x); the linear index of interior node
    (i, j, l), all 1-based, is (i-1) + n_x*(j-1) + n_x*n_y*(l-1).
    """

    values: np.ndarray

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.ndim != 3:
            raise ValueError(f"Field3D needs a 3D array, got ndim={self.values.ndim}")

    @classmethod
    def zeros(cls, grid: Grid3D) -> "Field3D":
        return cls(np.zeros(grid.shape, dtype=complex))

    @property
    def extents(self):
        """(n_x, n_y, n_z)."""
        n_z, n_y, n_x = self.values.shape
        return (n_x, n_y, n_z)

    def copy(self) -> "Field3D":
        return Field3D(self.values.copy())

    def ravel(self) -> np.ndarray:
        """Flattened values in system row order (x fastest)."""
        return self.values.reshape(-1)


class BoundaryData:
    """Dirichlet values on every node of the closed-box boundary lattice.

    Constructed either from a callable u(x, y, z) (must broadcast over numpy
    arrays) or from an explicit closed-box array of shape
    (n_z+2, n_y+2, n_x+2) whose interior entries are ignored.
    """

    def __init__(self, fn: Optional[Callable] = None, array: Optional[np.ndarray] = None,
                 known_zero: bool = False):
        if (fn is None) == (array is None):
            raise ValueError("provide exactly one of fn or array")
        self._fn = fn
        self._array = None if array is None else np.asarray(array, dtype=complex)
        self.known_zero = known_zero

    @classmethod
    def zero(cls) -> "BoundaryData":
        return cls(fn=lambda x, y, z: np.zeros(np.broadcast(x, y, z).shape, dtype=complex),
                   known_zero=True)

    @classmethod
    def from_function(cls, fn) -> "BoundaryData":
        return cls(fn=fn)

    @classmethod
    def from_array(cls, array) -> "BoundaryData":
        return cls(array=array)

    def closed_box(self, grid: Grid3D) -> np.ndarray:
        """(n_z+2, n_y+2, n_x+2) array: boundary values set, interior zero."""
        shape = (grid.n_z + 2, grid.n_y + 2, grid.n_x + 2)
        ext = np.zeros(shape, dtype=complex)
        if self._array is not None:
            if self._array.shape != shape:
                raise ValueError(
                    f"boundary array shape {self._array.shape} != closed box {shape}"
                )
            ext[:] = self._array
            ext[1:-1, 1:-1, 1:-1] = 0.0
            return ext
        x = grid.x_nodes(closed=True)
        y = grid.y_nodes(closed=True)
        z = grid.z_nodes(closed=True)
        # six faces; edges/corners get written more than once with equal values
        ext[0, :, :] = self._fn(x[None, :], y[:, None], z[0])
        ext[-1, :, :] = self._fn(x[None, :], y[:, None], z[-1])
        ext[:, 0, :] = self._fn(x[None, :], y[0], z[:, None])
        ext[:, -1, :] = self._fn(x[None, :], y[-1], z[:, None])
        ext[:, :, 0] = self._fn(x[0], y[None, :], z[:, None])
        ext[:, :, -1] = self._fn(x[-1], y[None, :], z[:, None])
        return ext


@dataclass
class SourceSpec:
    """Source f and the analytic derivatives each scheme's RHS may need.

    All callables take (x, y, z) and must broadcast over numpy arrays. The
    fourth-order RHS needs none of the derivatives (a discrete operator is
    applied to f sampled on the closed grid). The sixth-order RHS needs f_z,
    lap_f, d4_f and the three mixed fourth derivatives; convection-diffusion
    needs f_z, f_xx, f_yy, f_zz.
    """

    f: Callable
    f_z: Optional[Callable] = None
    f_xx: Optional[Callable] = None
    f_yy: Optional[Callable] = None
    f_zz: Optional[Callable] = None
    lap_f: Optional[Callable] = None          # f_xx + f_yy + f_zz
    d4_f: Optional[Callable] = None           # f_xxxx + f_yyyy + f_zzzz (pure, no mixed)
    f_xxyy: Optional[Callable] = None
    f_xxzz: Optional[Callable] = None
    f_yyzz: Optional[Callable] = None

    @classmethod
    def zero(cls) -> "SourceSpec":
        z = lambda x, y, zz: np.zeros(np.broadcast(x, y, zz).shape, dtype=complex)
        return cls(f=z, f_z=z, f_xx=z, f_yy=z, f_zz=z,
                   lap_f=z, d4_f=z, f_xxyy=z, f_xxzz=z, f_yyzz=z)

    def require(self, names):
        missing = [n for n in names if getattr(self, n) is None]
        if missing:
            raise ValueError(f"source is missing required derivatives: {missing}")


def _interior_coords(grid):
    """Open-grid coordinate arrays broadcastable to (n_z, n_y, n_x)."""
    x = grid.x_nodes()[None, None, :]
    y = grid.y_nodes()[None, :, None]
    z = grid.z_nodes()[:, None, None]
    return x, y, z


def _sample_interior(fn, grid):
    x, y, z = _interior_coords(grid)
    return np.broadcast_to(np.asarray(fn(x, y, z), dtype=complex), grid.shape).copy()


def build_rhs(scheme: SchemeKind, source: SourceSpec, profile: CoefficientProfile,
              grid: Grid3D) -> Field3D:
    """Scheme-specific right-hand side F on the interior nodes.

    Second order:   F = h_z^2 f.
    Fourth order:   F = h_z^2 (f + (1/12) * sum of undivided second differences
                    of f), with f sampled on the closed grid so boundary-adjacent
                    rows see the ring values.
    Sixth order:    F = h^2 (f + h^2/12 lap f + h^4/360 d4 f
                    + h^4/90 (f_xxyy + f_xxzz + f_yyzz))
                    - (h^4/20) k^2 f + (h^6/60) (k^2)_z f_z,
                    where d4 is the pure fourth-derivative sum; the last two
                    terms are the source parts of the variable-coefficient
                    correction operator, carried over to the right-hand side.
    Convection-diffusion: F = h_z^2 (f + h_x^2/12 f_xx + h_y^2/12 f_yy
                    + h_z^2/12 (gamma f_z + f_zz)).
    """
    hz2 = grid.h_z**2
    if scheme is SchemeKind.SECOND_ORDER:
        return Field3D(hz2 * _sample_interior(source.f, grid))

    if scheme is SchemeKind.FOURTH_ORDER:
        x = grid.x_nodes(closed=True)[None, None, :]
        y = grid.y_nodes(closed=True)[None, :, None]
        z = grid.z_nodes(closed=True)[:, None, None]
        shape = (grid.n_z + 2, grid.n_y + 2, grid.n_x + 2)
        fc = np.broadcast_to(np.asarray(source.f(x, y, z), dtype=complex), shape)
        core = fc[1:-1, 1:-1, 1:-1]
        neighbors = (fc[1:-1, 1:-1, :-2] + fc[1:-1, 1:-1, 2:]
                     + fc[1:-1, :-2, 1:-1] + fc[1:-1, 2:, 1:-1]
                     + fc[:-2, 1:-1, 1:-1] + fc[2:, 1:-1, 1:-1])
        return Field3D(hz2 * (0.5 * core + neighbors / 12.0))

    if scheme is SchemeKind.SIXTH_ORDER:
        if not grid.uniform:
            raise UnsupportedSchemeError("sixth-order RHS needs a uniform grid step")
        source.require(["f_z", "lap_f", "d4_f", "f_xxyy", "f_xxzz", "f_yyzz"])
        h2 = hz2
        h4 = h2 * h2
        f = _sample_interior(source.f, grid)
        lap = _sample_interior(source.lap_f, grid)
        d4 = _sample_interior(source.d4_f, grid)
        mixed = (_sample_interior(source.f_xxyy, grid)
                 + _sample_interior(source.f_xxzz, grid)
                 + _sample_interior(source.f_yyzz, grid))
        fz = _sample_interior(source.f_z, grid)
        k2_col = profile.k2[1:-1][:, None, None]
        k2z_col = profile.k2_z[1:-1][:, None, None]
        rhs = h2 * (f + (h2 / 12.0) * lap + (h4 / 360.0) * d4 + (h4 / 90.0) * mixed)
        rhs -= (h4 / 20.0) * k2_col * f
        rhs += (h2 * h4 / 60.0) * k2z_col * fz
        return Field3D(rhs)

    if scheme is SchemeKind.CONVECTION_DIFFUSION_4:
        source.require(["f_z", "f_xx", "f_yy", "f_zz"])
        f = _sample_interior(source.f, grid)
        fxx = _sample_interior(source.f_xx, grid)
        fyy = _sample_interior(source.f_yy, grid)
        fz = _sample_interior(source.f_z, grid)
        fzz = _sample_interior(source.f_zz, grid)
        rhs = hz2 * (f + (grid.h_x**2 / 12.0) * fxx + (grid.h_y**2 / 12.0) * fyy
                     + (hz2 / 12.0) * (profile.gamma * fz + fzz))
        return Field3D(rhs)

    raise ValueError(f"unknown scheme {scheme}")


def _accumulate(ext: np.ndarray, table, grid: Grid3D) -> np.ndarray:
    """Apply the 27-point operator to a closed-box array; returns interior result."""
    A, B, C, D = table
    n_z, n_y, n_x = grid.shape
    out = np.zeros(grid.shape, dtype=complex)
    weights = {"a": A, "b": B, "c": C, "d": D}
    for dl in (-1, 0, 1):
        k = dl + 1
        zs = slice(1 + dl, 1 + dl + n_z)
        for (di, dj), name in _PLANE_OFFSETS:
            w = weights[name][:, k]
            if not np.any(w):
                continue
            block = ext[zs, 1 + dj:1 + dj + n_y, 1 + di:1 + di + n_x]
            out += w[:, None, None] * block
    return out


def apply_stencil(u: Field3D, boundary: BoundaryData, scheme: SchemeKind,
                  profile: CoefficientProfile, grid: Grid3D) -> Field3D:
    """Matrix-free A*u, including contributions from the boundary lattice."""
    if u.values.shape != grid.shape:
        raise ValueError(f"field shape {u.values.shape} != grid {grid.shape}")
    ext = boundary.closed_box(grid)
    ext[1:-1, 1:-1, 1:-1] = u.values
    table = coefficient_table(scheme, profile, grid)
    return Field3D(_accumulate(ext, table, grid))


def fold_dirichlet(rhs: Field3D, boundary: BoundaryData, scheme: SchemeKind,
                   profile: CoefficientProfile, grid: Grid3D) -> Field3D:
    """Move known boundary values to the right-hand side.

    Every interior row loses the sum of (stencil weight x boundary value) over
    its neighbors on the boundary lattice; rows without boundary neighbors are
    returned unchanged.
    """
    if rhs.values.shape != grid.shape:
        raise ValueError(f"rhs shape {rhs.values.shape} != grid {grid.shape}")
    if boundary.known_zero:
        return rhs.copy()
    ext = boundary.closed_box(grid)
    if not np.any(ext):
        return rhs.copy()
    table = coefficient_table(scheme, profile, grid)
    return Field3D(rhs.values - _accumulate(ext, table, grid))


def residual_l2(u: Field3D, rhs_folded: Field3D, scheme: SchemeKind,
                profile: CoefficientProfile, grid: Grid3D) -> float:
    """Absolute Euclidean norm of A*u - F with boundary data already folded.

    Because rhs_folded carries the boundary contribution, the operator is
    applied here with homogeneous boundary values.
    """
    if u.values.shape != rhs_folded.values.shape:
        raise ValueError(
            f"extent mismatch: {u.values.shape} vs {rhs_folded.values.shape}"
        )
    au = apply_stencil(u, BoundaryData.zero(), scheme, profile, grid)
    return float(np.linalg.norm((au.values - rhs_folded.values).ravel()))
