"""Edge saliency and gradient-vector-flow features driving the metric.

The edge saliency rho is the Frobenius norm of the Gaussian-smoothed image
Jacobian (plain gradient magnitude for gray images). The orientation field g
is the pixelwise-normalized gradient vector flow of rho.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from scipy import ndimage

from .grid import Grid2D, ScalarField, VectorField2, central_gradient


@dataclass
class ImageBuffer:
    """Image samples in [0,1], shape (h, w) gray or (h, w, 3) color."""

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        self.values = np.ascontiguousarray(self.values, dtype=np.float64)
        if self.values.ndim == 2:
            shape_ok = self.values.shape == self.grid.shape
        else:
            shape_ok = self.values.ndim == 3 and self.values.shape == self.grid.shape + (3,)
        if not shape_ok:
            raise ValueError(f"image shape {self.values.shape} does not match grid")
        if self.values.min() < -1e-12 or self.values.max() > 1.0 + 1e-12:
            raise ValueError("image samples must lie in [0,1]")

    @property
    def channels(self):
        return 1 if self.values.ndim == 2 else 3

    def channel(self, i):
        return self.values if self.values.ndim == 2 else self.values[..., i]

    def gray(self):
        """Rec.601 luma for color input, identity for gray; values stay in [0,1]."""
        if self.values.ndim == 2:
            return self.values.copy()
        return (0.299 * self.values[..., 0]
                + 0.587 * self.values[..., 1]
                + 0.114 * self.values[..., 2])

    def feature_stack(self):
        """Per-pixel feature vectors, shape (h, w, c): color vector or gray level."""
        if self.values.ndim == 2:
            return self.values[..., None].copy()
        return self.values.copy()


@dataclass
class GvfParams:
    epsilon: float = 0.1
    max_iters: int = 10000
    tol: float = 1e-4

    def __post_init__(self):
        if self.epsilon <= 0 or self.tol <= 0:
            raise ValueError("epsilon and tol must be positive")


@dataclass
class GvfResult:
    field: VectorField2
    iterations: int
    converged: bool
    last_update: float


def gaussian_kernel(sigma):
    """Normalized discrete Gaussian, truncated at radius ceil(3*sigma)."""
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    r = math.ceil(3.0 * sigma)
    x = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_smooth(f: ScalarField, sigma) -> ScalarField:
    """Separable convolution with the truncated Gaussian, replicate boundary."""
    k = gaussian_kernel(sigma)
    out = ndimage.correlate1d(f.values, k, axis=0, mode="nearest")
    out = ndimage.correlate1d(out, k, axis=1, mode="nearest")
    return ScalarField(f.grid, out)


def edge_saliency(img: ImageBuffer, sigma=1.0) -> ScalarField:
    """Frobenius norm of the Gaussian-smoothed Jacobian across channels."""
    acc = np.zeros(img.grid.shape, dtype=np.float64)
    for c in range(img.channels):
        smoothed = gaussian_smooth(ScalarField(img.grid, img.channel(c)), sigma)
        grad = central_gradient(smoothed).values
        acc += grad[..., 0] ** 2 + grad[..., 1] ** 2
    return ScalarField(img.grid, np.sqrt(acc))


@njit(cache=True)
def _gvf_descent(hx, hy, gx, gy, sq, eps, dt, tol, max_iters):
    """Explicit descent on eps*lap(h) - sq*(h - grad_rho) = 0, Neumann border.

    Returns (iterations, last_max_update). Mutates hx, hy in place.
    """
    h, w = hx.shape
    nx = np.empty_like(hx)
    ny = np.empty_like(hy)
    it = 0
    upd = np.inf
    while it < max_iters and upd > tol:
        upd = 0.0
        for i in range(h):
            im = i - 1 if i > 0 else 1
            ip = i + 1 if i < h - 1 else h - 2
            for j in range(w):
                jm = j - 1 if j > 0 else 1
                jp = j + 1 if j < w - 1 else w - 2
                lapx = hx[im, j] + hx[ip, j] + hx[i, jm] + hx[i, jp] - 4.0 * hx[i, j]
                lapy = hy[im, j] + hy[ip, j] + hy[i, jm] + hy[i, jp] - 4.0 * hy[i, j]
                dx = dt * (eps * lapx - sq[i, j] * (hx[i, j] - gx[i, j]))
                dy = dt * (eps * lapy - sq[i, j] * (hy[i, j] - gy[i, j]))
                nx[i, j] = hx[i, j] + dx
                ny[i, j] = hy[i, j] + dy
                a = abs(dx)
                if a > upd:
                    upd = a
                a = abs(dy)
                if a > upd:
                    upd = a
        hx[:, :] = nx
        hy[:, :] = ny
        it += 1
    return it, upd


def gvf(rho: ScalarField, params: GvfParams | None = None) -> GvfResult:
    """Gradient vector flow of rho by explicit Euler-Lagrange descent.

    Initialized at grad(rho); the step size 1/(8*eps + max|grad rho|^2) is the
    explicit-scheme stability bound for the 5-point Laplacian plus reaction
    term, which also makes the energy descent monotone.
    """
    if params is None:
        params = GvfParams()
    grad = central_gradient(rho).values
    gx = np.ascontiguousarray(grad[..., 0])
    gy = np.ascontiguousarray(grad[..., 1])
    sq = gx * gx + gy * gy
    dt = 1.0 / (8.0 * params.epsilon + float(sq.max()))
    hx = gx.copy()
    hy = gy.copy()
    iters, upd = _gvf_descent(hx, hy, gx, gy, sq, params.epsilon, dt,
                              params.tol, params.max_iters)
    out = np.stack([hx, hy], axis=-1)
    return GvfResult(VectorField2(rho.grid, out), iters, upd <= params.tol, float(upd))


def gvf_energy(h: VectorField2, rho: ScalarField, epsilon) -> float:
    """Discrete GVF energy eps*E_reg + E_data (forward-difference E_reg)."""
    grad = central_gradient(rho).values
    sq = grad[..., 0] ** 2 + grad[..., 1] ** 2
    e_reg = 0.0
    for c in range(2):
        comp = h.values[..., c]
        e_reg += np.sum(np.diff(comp, axis=0) ** 2) + np.sum(np.diff(comp, axis=1) ** 2)
    e_data = float(np.sum(sq * ((h.values[..., 0] - grad[..., 0]) ** 2
                                + (h.values[..., 1] - grad[..., 1]) ** 2)))
    return epsilon * e_reg + e_data


def gvf_residual(h: VectorField2, rho: ScalarField, epsilon) -> np.ndarray:
    """Pointwise ||eps*lap(h) - sq*(h - grad rho)|| with the solver's Neumann border."""
    grad = central_gradient(rho).values
    sq = grad[..., 0] ** 2 + grad[..., 1] ** 2
    comps = []
    for c in range(2):
        comp = h.values[..., c]
        padded = np.pad(comp, 1, mode="reflect")
        lap = (padded[:-2, 1:-1] + padded[2:, 1:-1] + padded[1:-1, :-2]
               + padded[1:-1, 2:] - 4.0 * comp)
        comps.append(epsilon * lap - sq * (comp - grad[..., c]))
    return np.hypot(comps[0], comps[1])


def unit_vector_field(h: VectorField2, min_norm=1e-12):
    """Pixelwise normalization of h; degenerate pixels get (1,0) and a mask flag."""
    norms = h.norms()
    degenerate = norms < min_norm
    safe = np.where(degenerate, 1.0, norms)
    g = h.values / safe[..., None]
    g[degenerate, 0] = 1.0
    g[degenerate, 1] = 0.0
    return VectorField2(h.grid, g), degenerate
