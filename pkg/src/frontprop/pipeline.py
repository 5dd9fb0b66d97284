"""End-to-end segmentation pipelines built on the fronts-propagation solver.

Foreground/background segmentation partitions the image into the Voronoi
regions of the seed sets under the edge-driven Randers metric. Tubularity
segmentation truncates the propagation after a prescribed number of accepted
pixels and takes the accepted set (with the distance level line as contour).
"""

from __future__ import annotations

import time
import warnings
from dataclasses import dataclass, field

import numpy as np
from skimage import measure

from .features import GvfParams, ImageBuffer, edge_saliency, gvf, unit_vector_field
from .fmm import FmmConfig, FrontState, SeedSets, run_fast_marching
from .grid import ScalarField
from .metric import (MODE_FB, MODE_TUBE, CostParams, RandersMetricField,
                     anisotropy_ratio, build_omega, build_tensor,
                     build_tubular_tensor, cost_functions, resolve_mu,
                     static_potential)


@dataclass
class SegmentationResult:
    label_map: np.ndarray              # voronoi labels (FB) or 0/1 mask (Tube)
    contours: list                     # [(label, (n,2) float array, closed)]
    distance_map: ScalarField
    stats: dict = field(default_factory=dict)
    front: FrontState = None


def region_iou(mask_a, mask_b) -> float:
    """Intersection over union of two boolean masks; both empty counts as 1."""
    a = np.asarray(mask_a, dtype=bool)
    b = np.asarray(mask_b, dtype=bool)
    if a.shape != b.shape:
        raise ValueError("masks must share a grid")
    union = np.logical_or(a, b).sum()
    if union == 0:
        return 1.0
    return float(np.logical_and(a, b).sum() / union)


def extract_contours(label_map) -> list:
    """Marching-squares boundaries per label, as (label, points(x,y), closed).

    Contour vertices sit on the 0.5-crossings of each label's indicator, i.e.
    within half a pixel of a label change. Uniform maps give no contours.
    """
    labels = np.unique(label_map)
    if labels.size <= 1:
        return []
    out = []
    for k in labels:
        mask = (label_map == k).astype(np.float64)
        for poly in measure.find_contours(mask, 0.5):
            closed = bool(np.allclose(poly[0], poly[-1]))
            # find_contours returns (row, col); flip to (x, y)
            out.append((int(k), poly[:, ::-1].copy(), closed))
    return out


def _metric_from_image(img: ImageBuffer, params: CostParams, mode,
                       zeta=None, colorspace="rgb"):
    """Shared metric construction: saliency -> GVF -> g -> (M, omega, c)."""
    t0 = time.perf_counter()
    saliency_img = img
    if colorspace == "lab" and img.channels == 3:
        from skimage import color
        lab = color.rgb2lab(img.values)
        lab = lab / np.array([100.0, 255.0, 255.0]) + np.array([0.0, 0.5, 0.5])
        saliency_img = ImageBuffer(img.grid, np.clip(lab, 0.0, 1.0))
    rho = edge_saliency(saliency_img, params.sigma)
    gres = gvf(rho, GvfParams(epsilon=params.epsilon))
    if not gres.converged:
        warnings.warn("GVF did not converge within max_iters", RuntimeWarning)
    g, _ = unit_vector_field(gres.field)
    psi_f, psi_b = cost_functions(rho, params.alpha_f, params.alpha_b)
    m = build_tensor(g, psi_f, psi_b)
    omega = build_omega(g, psi_f, psi_b)
    if mode == MODE_TUBE:
        m = build_tubular_tensor(m, g, resolve_mu(params.mu, psi_f))
        pot = static_potential(MODE_TUBE, zeta, params.beta_s)
    else:
        pot = static_potential(MODE_FB, rho, params.beta_s)
    metric = RandersMetricField(m, omega, pot, mode=mode)
    build_time = time.perf_counter() - t0
    return metric, rho, {"metric_build_s": build_time, "gvf_iterations": gres.iterations}


def _leak_diagnostic(label_map, rho_values):
    """Fraction of region-boundary adjacencies that cross weak-edge pixels.

    Boundaries through strong edges are the expected outcome; boundary pixels
    sitting where rho is low hint that a front leaked through a gap.
    """
    top = float(rho_values.max())
    if top == 0.0:
        return 1.0
    weak = 0
    total = 0
    for axis in (0, 1):
        a = np.swapaxes(label_map, 0, axis)
        r = np.swapaxes(rho_values, 0, axis)
        change = a[1:, :] != a[:-1, :]
        mid = np.maximum(r[1:, :], r[:-1, :])
        total += int(change.sum())
        weak += int(np.sum(change & (mid < 0.25 * top)))
    return weak / total if total else 0.0


def segment_fb(img: ImageBuffer, seeds: SeedSets, params: CostParams | None = None,
               colorspace="rgb", feature_map=None, progress_out=None,
               compute_kappa=True) -> SegmentationResult:
    """Foreground/background segmentation via geodesic Voronoi regions.

    Runs the full-domain propagation with repair and returns the Voronoi
    partition, region boundary contours, the distance map and run statistics.
    The dynamic-potential feature map defaults to the image color vector.
    """
    if params is None:
        params = CostParams()
    if len(seeds.labels) < 2:
        raise ValueError("FB segmentation needs at least 2 seed sets")
    seeds.validate_grid(img.grid)
    metric, rho, stats = _metric_from_image(img, params, MODE_FB, colorspace=colorspace)
    features = img.feature_stack() if feature_map is None else np.asarray(feature_map)
    config = FmmConfig(mode=MODE_FB, beta_d=params.beta_d, features=features)
    state = run_fast_marching(metric, seeds, config, progress_out=progress_out)
    # boundaries are only reported for computed regions; an all-seed cover
    # leaves nothing to contour
    contours = [] if bool(state.seed_mask.all()) else extract_contours(state.voronoi)
    stats.update(state.stats)
    stats["accepted_count"] = state.accepted_count
    if compute_kappa:
        stats["kappa"] = anisotropy_ratio(metric)
    stats["leak_weak_boundary_fraction"] = _leak_diagnostic(state.voronoi, rho.values)
    return SegmentationResult(state.voronoi.copy(), contours, state.distance, stats, state)


def segment_tube(img: ImageBuffer, seeds: SeedSets, params: CostParams | None = None,
                 n_th=None, t_h=None, progress_out=None,
                 compute_kappa=True) -> SegmentationResult:
    """Tubular-structure segmentation by n_th-truncated fronts propagation.

    zeta is the normalized image gray level; the accepted set is the mask and
    the t_h level line of the distance map (default: max accepted distance)
    is traced as the contour.
    """
    if params is None:
        params = CostParams()
    if len(seeds.labels) != 1:
        raise ValueError("tubular segmentation expects a single seed set")
    seeds.validate_grid(img.grid)
    if n_th is None:
        raise ValueError("n_th is required for tubular segmentation")
    if n_th < seeds.total():
        raise ValueError("n_th must be at least the seed count")
    if n_th > img.grid.size:
        warnings.warn("n_th exceeds the grid size; clamped", RuntimeWarning)
        n_th = img.grid.size
    zeta = ScalarField(img.grid, img.gray())
    metric, rho, stats = _metric_from_image(img, params, MODE_TUBE, zeta=zeta)
    config = FmmConfig(mode=MODE_TUBE, n_th=int(n_th), beta_d=params.beta_d,
                       features=zeta.values, repair=False)
    state = run_fast_marching(metric, seeds, config, progress_out=progress_out)
    mask = state.accepted_mask()
    finite = state.distance.values[mask]
    level = float(finite.max()) if t_h is None else float(t_h)
    u_for_trace = np.where(np.isfinite(state.distance.values),
                           state.distance.values, 2.0 * level + 1.0)
    contours = [(1, poly[:, ::-1].copy(), bool(np.allclose(poly[0], poly[-1])))
                for poly in measure.find_contours(u_for_trace, level)]
    stats.update(state.stats)
    stats["accepted_count"] = state.accepted_count
    stats["threshold"] = level
    if compute_kappa:
        stats["kappa"] = anisotropy_ratio(metric)
    stats["leak_weak_boundary_fraction"] = _leak_diagnostic(
        mask.astype(np.int32), rho.values)
    return SegmentationResult(mask.astype(np.uint8), contours, state.distance,
                              stats, state)
