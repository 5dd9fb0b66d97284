"""Regular-grid containers and the small SPD linear-algebra kernel.

Conventions used across the package:
  * fields store values row-major as numpy arrays of shape (height, width),
    indexed [y, x] with x = column, y = row, origin at the top-left pixel;
  * grid spacing is 1 pixel, all lengths are in pixel units;
  * 2x2 symmetric tensors are stored as the triple (m11, m12, m22).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class DegenerateTensorError(ValueError):
    """Raised when a 2x2 tensor is numerically singular or not SPD."""


@dataclass(frozen=True)
class Grid2D:
    width: int
    height: int
    spacing: float = 1.0

    def __post_init__(self):
        if self.width < 2 or self.height < 2:
            raise ValueError(f"grid must be at least 2x2, got {self.width}x{self.height}")

    @property
    def shape(self):
        # numpy shape: (rows, cols)
        return (self.height, self.width)

    @property
    def size(self):
        return self.width * self.height

    def contains(self, x, y):
        return 0 <= x < self.width and 0 <= y < self.height


def _check_shape(grid, values, trailing=()):
    expected = grid.shape + trailing
    if values.shape != expected:
        raise ValueError(f"field shape {values.shape} does not match grid {expected}")


@dataclass
class ScalarField:
    grid: Grid2D
    values: np.ndarray  # (h, w) float64

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        _check_shape(self.grid, self.values)

    @classmethod
    def full(cls, grid, fill):
        return cls(grid, np.full(grid.shape, fill, dtype=np.float64))

    def copy(self):
        return ScalarField(self.grid, self.values.copy())

    def max_abs(self):
        return float(np.max(np.abs(self.values)))


@dataclass
class VectorField2:
    grid: Grid2D
    values: np.ndarray  # (h, w, 2), components (vx, vy)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        _check_shape(self.grid, self.values, (2,))

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.shape + (2,), dtype=np.float64))

    def norms(self):
        return np.hypot(self.values[..., 0], self.values[..., 1])

    def copy(self):
        return VectorField2(self.grid, self.values.copy())


@dataclass
class SpdTensorField:
    """Per-pixel 2x2 SPD tensor, stored as (m11, m12, m22); m12 held once."""

    grid: Grid2D
    values: np.ndarray  # (h, w, 3)
    _validated: bool = field(default=False, repr=False)

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        _check_shape(self.grid, self.values, (3,))
        if not self._validated:
            m11 = self.values[..., 0]
            det = self.dets()
            if np.any(m11 <= 0.0) or np.any(det <= 0.0):
                raise DegenerateTensorError("tensor field is not positive definite everywhere")
            self._validated = True

    @classmethod
    def identity(cls, grid):
        vals = np.zeros(grid.shape + (3,), dtype=np.float64)
        vals[..., 0] = 1.0
        vals[..., 2] = 1.0
        return cls(grid, vals)

    def dets(self):
        m11, m12, m22 = self.values[..., 0], self.values[..., 1], self.values[..., 2]
        return m11 * m22 - m12 * m12

    def eigenvalues(self):
        """Both eigenvalue fields, ascending; positive for a valid SPD field."""
        m11, m12, m22 = self.values[..., 0], self.values[..., 1], self.values[..., 2]
        tr = 0.5 * (m11 + m22)
        disc = np.sqrt(np.maximum(0.25 * (m11 - m22) ** 2 + m12 * m12, 0.0))
        return tr - disc, tr + disc

    def copy(self):
        return SpdTensorField(self.grid, self.values.copy(), _validated=True)


def spd_norm(m, u):
    """Norm sqrt(<u, M u>) of vector(s) u under SPD tensor(s) m.

    m is (..., 3) as (m11, m12, m22) and u is (..., 2); both broadcast.
    Returns 0 iff u = 0.
    """
    m = np.asarray(m, dtype=np.float64)
    u = np.asarray(u, dtype=np.float64)
    ux, uy = u[..., 0], u[..., 1]
    q = m[..., 0] * ux * ux + 2.0 * m[..., 1] * ux * uy + m[..., 2] * uy * uy
    # q >= 0 for SPD m; clip guards roundoff at u ~ 0
    return np.sqrt(np.maximum(q, 0.0))


def spd_inverse(m):
    """Closed-form inverse of 2x2 SPD tensor(s) stored as (m11, m12, m22)."""
    m = np.asarray(m, dtype=np.float64)
    det = m[..., 0] * m[..., 2] - m[..., 1] ** 2
    if np.any(det <= 1e-300):
        raise DegenerateTensorError("tensor determinant under 1e-300")
    inv = np.empty_like(m)
    inv[..., 0] = m[..., 2] / det
    inv[..., 1] = -m[..., 1] / det
    inv[..., 2] = m[..., 0] / det
    return inv


def central_gradient(f: ScalarField) -> VectorField2:
    """Gradient by central differences, one-sided at the borders.

    Exact for affine fields away from the borders; the x component is the
    derivative along columns, y along rows.
    """
    v = f.values
    out = np.empty(v.shape + (2,), dtype=np.float64)
    # np.gradient uses central differences interior, one-sided at the ends
    gy, gx = np.gradient(v)
    out[..., 0] = gx
    out[..., 1] = gy
    return VectorField2(f.grid, out)
