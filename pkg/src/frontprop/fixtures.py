"""Deterministic synthetic inputs used by tests, docs and the demo CLI.

Images are generated procedurally (no binary fixtures in the repo); every
generator is pure given its arguments, so outputs are bit-stable across runs.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from .features import ImageBuffer, gaussian_smooth
from .grid import Grid2D, ScalarField, VectorField2
from .metric import (MODE_FB, RandersMetricField, build_omega, build_tensor,
                     cost_functions, static_potential)


def disk_image(size=128, radius=40.0, center=None, weak_arc=None) -> ImageBuffer:
    """White disk on black with a one-pixel soft edge.

    weak_arc = (center_angle, half_angle, ramp_width) turns the boundary into
    a wide linear ramp inside that angular sector: a low-saliency edge segment
    that leak-prone metrics cross (the classic failure the asymmetric metric
    is built to resist).
    """
    grid = Grid2D(size, size)
    cx, cy = center if center is not None else (size / 2.0, size / 2.0)
    ys, xs = np.mgrid[0:size, 0:size]
    r = np.hypot(xs - cx, ys - cy)
    width = np.ones_like(r)
    if weak_arc is not None:
        angle0, half, ramp = weak_arc
        ang = np.arctan2(ys - cy, xs - cx)
        diff = np.angle(np.exp(1j * (ang - angle0)))
        width = np.where(np.abs(diff) <= half, ramp, 1.0)
    vals = np.clip((radius - r) / width + 0.5, 0.0, 1.0)
    return ImageBuffer(grid, vals)


def disk_mask(size=128, radius=40.0, center=None) -> np.ndarray:
    cx, cy = center if center is not None else (size / 2.0, size / 2.0)
    ys, xs = np.mgrid[0:size, 0:size]
    return np.hypot(xs - cx, ys - cy) <= radius


def disk_seeds(size=128, center=None):
    """Five seed pixels at the disk center (label 1), five in a corner (label 2)."""
    cx, cy = center if center is not None else (size // 2, size // 2)
    cx, cy = int(cx), int(cy)
    fg = np.array([[cx, cy], [cx + 2, cy], [cx - 2, cy], [cx, cy + 2], [cx, cy - 2]])
    bg = np.array([[3, 3], [6, 3], [3, 6], [8, 8], [5, 5]])
    return fg, bg


def bar_image(width=96, height=48, bar_width=6, y_center=None) -> ImageBuffer:
    """Bright horizontal bar on a dark background, soft one-pixel edge."""
    grid = Grid2D(width, height)
    yc = height / 2.0 if y_center is None else y_center
    ys = np.mgrid[0:height, 0:width][0]
    d = np.abs(ys + 0.0 - yc)
    vals = np.clip(bar_width / 2.0 - d + 0.5, 0.0, 1.0)
    return ImageBuffer(grid, vals)


def bar_mask(width=96, height=48, bar_width=6, y_center=None) -> np.ndarray:
    yc = height / 2.0 if y_center is None else y_center
    ys = np.mgrid[0:height, 0:width][0]
    return np.abs(ys - yc) <= bar_width / 2.0


def _spiral_polyline(size, turns, margin):
    # Archimedean spiral r = b * theta around the image center
    cx = cy = size / 2.0
    theta_max = 2.0 * np.pi * turns
    b = (size / 2.0 - margin) / theta_max
    t = np.linspace(0.35 * np.pi, theta_max, int(80 * turns * np.pi))
    xs = cx + b * t * np.cos(t)
    ys = cy + b * t * np.sin(t)
    return np.stack([xs, ys], axis=-1)


def spiral_image(size=128, turns=2.5, width=6.0, margin=8.0) -> ImageBuffer:
    """Bright Archimedean spiral tube of the given width on black."""
    grid = Grid2D(size, size)
    pts = _spiral_polyline(size, turns, margin)
    tree = cKDTree(pts)
    ys, xs = np.mgrid[0:size, 0:size]
    d, _ = tree.query(np.stack([xs.ravel(), ys.ravel()], axis=-1))
    d = d.reshape(size, size)
    vals = np.clip(width / 2.0 - d + 0.5, 0.0, 1.0)
    return ImageBuffer(grid, vals)


def spiral_mask(size=128, turns=2.5, width=6.0, margin=8.0) -> np.ndarray:
    pts = _spiral_polyline(size, turns, margin)
    tree = cKDTree(pts)
    ys, xs = np.mgrid[0:size, 0:size]
    d, _ = tree.query(np.stack([xs.ravel(), ys.ravel()], axis=-1))
    return d.reshape(size, size) <= width / 2.0


def spiral_seed(size=128, turns=2.5, margin=8.0):
    """One seed pixel at the inner end of the spiral."""
    pts = _spiral_polyline(size, turns, margin)
    return np.array([[int(round(pts[0, 0])), int(round(pts[0, 1]))]])


def step_image(size=32, at=None, axis="x") -> ImageBuffer:
    """Hard 0/1 step edge, vertical by default."""
    grid = Grid2D(size, size)
    pos = size // 2 if at is None else at
    ys, xs = np.mgrid[0:size, 0:size]
    vals = ((xs if axis == "x" else ys) >= pos).astype(np.float64)
    return ImageBuffer(grid, vals)


def smooth_random_metric(seed, size=50, alpha=(0.5, 0.45), beta_s=1.2,
                         rho_sigma=6.0, angle_sigma=10.0) -> RandersMetricField:
    """Smooth random Randers field with mild anisotropy (kappa well under 4)."""
    rng = np.random.RandomState(seed)
    grid = Grid2D(size, size)
    rho = gaussian_smooth(ScalarField(grid, rng.rand(size, size)), rho_sigma)
    rho = ScalarField(grid, rho.values - rho.values.min())
    psi_f, psi_b = cost_functions(rho, alpha[0], alpha[1])
    ang = gaussian_smooth(ScalarField(grid, rng.rand(size, size) * 2.0 * np.pi),
                          angle_sigma).values
    g = VectorField2(grid, np.stack([np.cos(ang), np.sin(ang)], axis=-1))
    return RandersMetricField(build_tensor(g, psi_f, psi_b),
                              build_omega(g, psi_f, psi_b),
                              static_potential(MODE_FB, rho, beta_s))
