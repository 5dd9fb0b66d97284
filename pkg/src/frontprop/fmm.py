"""Fast-marching fronts propagation for Randers metrics on pixel grids.

One pass of the solver produces the geodesic distance map U and the Voronoi
index map simultaneously. Local updates use the Hopf-Lax operator over a fixed
8-neighbor stencil fan (8 one-dimensional simplexes of consecutive ring
vertices); the per-simplex problem (segment cost plus interpolated value,
convex in the interpolation weight) is solved in closed form with mandatory
endpoint comparison. A Gauss-Seidel repair pass
restores the Hopf-Lax fixed point where strong anisotropy breaks the causality
of the fixed stencil.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from numba import njit

from .grid import Grid2D, ScalarField
from .metric import MODE_FB, MODE_TUBE, RandersMetricField

FAR = np.uint8(0)
TRIAL = np.uint8(1)
ACCEPTED = np.uint8(2)

# neighbor ring in counterclockwise order; simplex k joins ring[k], ring[k+1 mod 8]
RING_DX = np.array([1, 1, 0, -1, -1, -1, 0, 1], dtype=np.int64)
RING_DY = np.array([0, 1, 1, 1, 0, -1, -1, -1], dtype=np.int64)

DYN_OFF = 0
DYN_FB = 1
DYN_TUBE = 2


@dataclass(frozen=True)
class StencilFan:
    """The fixed 8-offset ring and its simplex decomposition."""

    offsets: tuple = tuple(zip(RING_DX.tolist(), RING_DY.tolist()))

    @property
    def simplexes(self):
        return tuple((self.offsets[k], self.offsets[(k + 1) % 8]) for k in range(8))


class SeedError(ValueError):
    pass


@dataclass
class SeedSets:
    """Indexed seed point sets; points are (n_k, 2) int arrays of (x, y)."""

    labels: list
    points: list

    def __post_init__(self):
        if len(self.labels) == 0 or len(self.labels) != len(self.points):
            raise SeedError("need at least one labeled seed set")
        if len(set(self.labels)) != len(self.labels):
            raise SeedError("seed set labels must be distinct")
        if any(int(l) < 1 for l in self.labels):
            raise SeedError("seed labels must be >= 1")
        self.points = [np.asarray(p, dtype=np.int64).reshape(-1, 2) for p in self.points]
        if any(len(p) == 0 for p in self.points):
            raise SeedError("seed sets must be nonempty")
        seen = set()
        for pts in self.points:
            for x, y in pts:
                if (x, y) in seen:
                    raise SeedError(f"seed point ({x},{y}) appears in more than one set")
                seen.add((int(x), int(y)))

    def validate_grid(self, grid: Grid2D):
        for label, pts in zip(self.labels, self.points):
            for i, (x, y) in enumerate(pts):
                if not grid.contains(x, y):
                    raise SeedError(f"seed {i} of set {label} at ({x},{y}) is outside the grid")

    def total(self):
        return sum(len(p) for p in self.points)


@dataclass
class FmmConfig:
    mode: str = MODE_FB
    n_th: int | None = None          # None = run to full coverage
    beta_d: float = 0.0
    features: np.ndarray | None = None  # (h, w, c) for FB, (h, w) zeta for Tube
    dynamic_enabled: bool = True
    repair: bool | None = None       # default: on for full runs, off when truncated
    repair_tol: float = 1e-10
    max_sweeps: int = 200


@dataclass
class FrontState:
    grid: Grid2D
    distance: ScalarField
    voronoi: np.ndarray        # int32 labels, 0 = unassigned
    labels: np.ndarray         # uint8 in {FAR, TRIAL, ACCEPTED}
    accepted_count: int
    dynamic_potential: ScalarField
    seed_mask: np.ndarray
    stats: dict = field(default_factory=dict)

    def accepted_mask(self):
        return self.labels == ACCEPTED


# ---------------------------------------------------------------------------
# numba core


@njit(cache=True, inline="always")
def _vertex_cost(ex, ey, m11, m12, m22, wx, wy, c):
    q = m11 * ex * ex + 2.0 * m12 * ex * ey + m22 * ey * ey
    if q < 0.0:
        q = 0.0
    return c * (math.sqrt(q) - (wx * ex + wy * ey))


@njit(cache=True, inline="always")
def _segment_min(ax, ay, dx, dy, m11, m12, m22, wx, wy, c, u1, u2):
    """Min over lam in [0,1] of F(a - lam*d) + lam*u1 + (1-lam)*u2.

    a = p - z2, d = z1 - z2, lam is the weight of z1. Convex objective:
    interior stationary point in closed form, endpoints always compared.
    """
    A = m11 * dx * dx + 2.0 * m12 * dx * dy + m22 * dy * dy
    B = m11 * ax * dx + m12 * (ax * dy + ay * dx) + m22 * ay * dy
    C = m11 * ax * ax + 2.0 * m12 * ax * ay + m22 * ay * ay
    beta = c * (wx * dx + wy * dy) + u1 - u2
    gamma = u2 - c * (wx * ax + wy * ay)
    best = c * math.sqrt(C if C > 0.0 else 0.0) + gamma
    lam = 0.0
    q1 = A - 2.0 * B + C
    f1 = c * math.sqrt(q1 if q1 > 0.0 else 0.0) + beta + gamma
    if f1 < best:
        best = f1
        lam = 1.0
    denom = c * c * A - beta * beta
    if denom > 0.0:
        delta = A * C - B * B
        if delta < 0.0:
            delta = 0.0
        t = -beta * math.sqrt(delta / denom)
        li = (B + t) / A
        if 0.0 < li < 1.0:
            q = A * li * li - 2.0 * B * li + C
            if q < 0.0:
                q = 0.0
            fi = c * math.sqrt(q) + beta * li + gamma
            if fi < best:
                best = fi
                lam = li
    return best, lam


@njit(cache=True)
def _hopf_lax(px, py, U, b, L, m11, m12, m22, wx, wy, cs, cd, accepted_only):
    """Min over the 8 simplexes at pixel p; returns (value, voronoi label).

    Vertices outside the grid, Far vertices, and (when accepted_only) Trial
    vertices count as +inf, reducing the simplex to its available vertex.
    """
    h, w = U.shape
    a11 = m11[py, px]
    a12 = m12[py, px]
    a22 = m22[py, px]
    ox = wx[py, px]
    oy = wy[py, px]
    c = cs[py, px] * cd[py, px]
    best = np.inf
    best_label = np.int32(0)
    for k in range(8):
        k2 = (k + 1) % 8
        x1 = px + RING_DX[k]
        y1 = py + RING_DY[k]
        x2 = px + RING_DX[k2]
        y2 = py + RING_DY[k2]
        u1 = np.inf
        u2 = np.inf
        if 0 <= x1 < w and 0 <= y1 < h:
            if b[y1, x1] == 2 or (not accepted_only and b[y1, x1] != 0):
                u1 = U[y1, x1]
        if 0 <= x2 < w and 0 <= y2 < h:
            if b[y2, x2] == 2 or (not accepted_only and b[y2, x2] != 0):
                u2 = U[y2, x2]
        if u1 == np.inf and u2 == np.inf:
            continue
        if u1 < np.inf and u2 < np.inf:
            val, lam = _segment_min(float(px - x2), float(py - y2),
                                    float(x1 - x2), float(y1 - y2),
                                    a11, a12, a22, ox, oy, c, u1, u2)
            lab = L[y1, x1] if lam >= 0.5 else L[y2, x2]
        elif u1 < np.inf:
            val = _vertex_cost(float(px - x1), float(py - y1),
                               a11, a12, a22, ox, oy, c) + u1
            lab = L[y1, x1]
        else:
            val = _vertex_cost(float(px - x2), float(py - y2),
                               a11, a12, a22, ox, oy, c) + u2
            lab = L[y2, x2]
        if val < best:
            best = val
            best_label = lab
    return best, best_label


@njit(cache=True, inline="always")
def _heap_push(hv, hp, size, val, idx):
    i = size
    hv[i] = val
    hp[i] = idx
    while i > 0:
        parent = (i - 1) >> 1
        if hv[parent] > hv[i] or (hv[parent] == hv[i] and hp[parent] > hp[i]):
            hv[parent], hv[i] = hv[i], hv[parent]
            hp[parent], hp[i] = hp[i], hp[parent]
            i = parent
        else:
            break
    return size + 1


@njit(cache=True, inline="always")
def _heap_pop(hv, hp, size):
    val = hv[0]
    idx = hp[0]
    size -= 1
    if size > 0:
        hv[0] = hv[size]
        hp[0] = hp[size]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            right = left + 1
            child = left
            if right < size and (hv[right] < hv[left]
                                 or (hv[right] == hv[left] and hp[right] < hp[left])):
                child = right
            if hv[child] < hv[i] or (hv[child] == hv[i] and hp[child] < hp[i]):
                hv[child], hv[i] = hv[i], hv[child]
                hp[child], hp[i] = hp[i], hp[child]
                i = child
            else:
                break
    return val, idx, size


@njit(cache=True, nogil=True)
def _run_kernel(U, b, L, pending, seed, m11, m12, m22, wx, wy, cs, cd,
                features, beta_d, dyn_mode, n_th, progress):
    """Algorithm main loop. Mutates U, b, L, pending, cd; returns counters.

    The heap stores (value, flat index) with lexicographic ties on the index;
    stale entries are skipped on pop (lazy deletion).
    """
    h, w = U.shape
    n = h * w
    # pushes are bounded by one per (accepted neighbor, pixel) pair plus seeds
    cap = 9 * n + 16
    hv = np.empty(cap, dtype=np.float64)
    hp = np.empty(cap, dtype=np.int64)
    size = 0
    for py in range(h):
        for px in range(w):
            if b[py, px] == 1:
                size = _heap_push(hv, hp, size, U[py, px], py * w + px)
    pops = 0
    relaxations = 0
    accepted = 0
    nf = features.shape[2]
    while size > 0:
        val, idx, size = _heap_pop(hv, hp, size)
        pops += 1
        py = idx // w
        px = idx % w
        if b[py, px] == 2 or val != U[py, px]:
            continue  # stale entry
        b[py, px] = 2
        accepted += 1
        progress[0] = accepted
        if not seed[py, px]:
            L[py, px] = pending[py, px]
        if accepted >= n_th:
            break
        for k in range(8):
            zx = px + RING_DX[k]
            zy = py + RING_DY[k]
            if zx < 0 or zx >= w or zy < 0 or zy >= h:
                continue
            if b[zy, zx] == 2 or seed[zy, zx]:
                continue
            if dyn_mode == 1:
                acc = 0.0
                for f in range(nf):
                    dfeat = features[zy, zx, f] - features[py, px, f]
                    acc += dfeat * dfeat
                cd[zy, zx] = math.exp(beta_d * math.sqrt(acc))
            elif dyn_mode == 2:
                dz = features[zy, zx, 0] - features[py, px, 0]
                if dz < 0.0:
                    cd[zy, zx] = math.exp(-beta_d * dz)
                else:
                    cd[zy, zx] = 1.0
            relaxations += 1
            cand, lab = _hopf_lax(zx, zy, U, b, L,
                                  m11, m12, m22, wx, wy, cs, cd, True)
            if cand < U[zy, zx]:
                U[zy, zx] = cand
                pending[zy, zx] = lab
                size = _heap_push(hv, hp, size, cand, zy * w + zx)
            b[zy, zx] = 1
    return accepted, pops, relaxations


@njit(cache=True, nogil=True)
def _repair_kernel(U, b, L, seed, m11, m12, m22, wx, wy, cs, cd, tol, max_sweeps):
    """Gauss-Seidel sweeps in 4 alternating pixel orders; min-only updates.

    Converged only when a full cycle of all 4 orders stays below tol: a quiet
    sweep in one direction can still hide updates that flow against it.
    """
    h, w = U.shape
    sweeps = 0
    cycle_change = np.inf
    while sweeps < max_sweeps and cycle_change > tol:
        cycle_change = 0.0
        for order in range(4):
            change = 0.0
            for i in range(h):
                py = i if order < 2 else h - 1 - i
                for j in range(w):
                    px = j if order % 2 == 0 else w - 1 - j
                    if seed[py, px]:
                        continue
                    val, lab = _hopf_lax(px, py, U, b, L,
                                         m11, m12, m22, wx, wy, cs, cd, True)
                    if val < U[py, px]:
                        d = U[py, px] - val
                        if d > change:
                            change = d
                        U[py, px] = val
                        L[py, px] = lab
            sweeps += 1
            if change > cycle_change:
                cycle_change = change
            if sweeps >= max_sweeps:
                break
    return sweeps, cycle_change


# ---------------------------------------------------------------------------
# python-level operations


def _metric_arrays(metric: RandersMetricField, dynamic: np.ndarray):
    mv = metric.m.values
    return (np.ascontiguousarray(mv[..., 0]), np.ascontiguousarray(mv[..., 1]),
            np.ascontiguousarray(mv[..., 2]),
            np.ascontiguousarray(metric.omega.values[..., 0]),
            np.ascontiguousarray(metric.omega.values[..., 1]),
            metric.static_potential.values, dynamic)


def simplex_minimize(x, z1, z2, u1, u2, metric: RandersMetricField,
                     dynamic: np.ndarray | None = None):
    """Local update minimization on the simplex (z1, z2) seen from pixel x.

    Returns (value, (lam1, lam2)); an infinite vertex value restricts the
    minimization to the other vertex, two infinite vertices give +inf.
    """
    px, py = x
    mv = metric.m.values[py, px]
    wv = metric.omega.values[py, px]
    c = metric.static_potential.values[py, px]
    c *= metric.dynamic_potential.values[py, px] if dynamic is None else dynamic[py, px]
    u1 = float(u1)
    u2 = float(u2)
    if math.isinf(u1) and math.isinf(u2):
        return np.inf, (0.0, 0.0)
    if math.isinf(u2):
        val = _vertex_cost(px - float(z1[0]), py - float(z1[1]),
                           mv[0], mv[1], mv[2], wv[0], wv[1], c) + u1
        return float(val), (1.0, 0.0)
    if math.isinf(u1):
        val = _vertex_cost(px - float(z2[0]), py - float(z2[1]),
                           mv[0], mv[1], mv[2], wv[0], wv[1], c) + u2
        return float(val), (0.0, 1.0)
    val, lam = _segment_min(px - float(z2[0]), py - float(z2[1]),
                            float(z1[0] - z2[0]), float(z1[1] - z2[1]),
                            mv[0], mv[1], mv[2], wv[0], wv[1], c, u1, u2)
    return float(val), (float(lam), float(1.0 - lam))


def voronoi_index_update(lambda_star, label_z1, label_z2):
    """Label propagation rule: z1 wins on lam1 >= lam2, including ties."""
    lam1, lam2 = lambda_star
    if lam2 == 0.0:
        return label_z1
    if lam1 == 0.0:
        return label_z2
    return label_z1 if lam1 >= lam2 else label_z2


def dynamic_update_fb(z, x_min, features, beta_d):
    """exp(beta_d * ||feature(z) - feature(x_min)||), the FB consistency factor."""
    fz = features[z[1], z[0]]
    fm = features[x_min[1], x_min[0]]
    return float(np.exp(beta_d * np.linalg.norm(np.atleast_1d(fz - fm))))


def dynamic_update_tube(z, x_min, zeta, beta_d):
    """exp(beta_d * |min(zeta(z) - zeta(x_min), 0)|); 1 when z looks more tubular."""
    dz = float(zeta[z[1], z[0]] - zeta[x_min[1], x_min[0]])
    return float(np.exp(beta_d * abs(min(dz, 0.0))))


def hopf_lax_update(x, state: FrontState, metric: RandersMetricField,
                    accepted_only=True):
    """Hopf-Lax value at x from the current front state (min over 8 simplexes)."""
    m11, m12, m22, wx, wy, cs, cd = _metric_arrays(metric, state.dynamic_potential.values)
    val, _ = _hopf_lax(int(x[0]), int(x[1]), state.distance.values, state.labels,
                       state.voronoi, m11, m12, m22, wx, wy, cs, cd, accepted_only)
    return float(val)


def init_front_state(metric: RandersMetricField, seeds: SeedSets) -> FrontState:
    grid = metric.grid
    seeds.validate_grid(grid)
    U = np.full(grid.shape, np.inf, dtype=np.float64)
    b = np.zeros(grid.shape, dtype=np.uint8)
    L = np.zeros(grid.shape, dtype=np.int32)
    seed_mask = np.zeros(grid.shape, dtype=np.bool_)
    for label, pts in zip(seeds.labels, seeds.points):
        U[pts[:, 1], pts[:, 0]] = 0.0
        b[pts[:, 1], pts[:, 0]] = TRIAL
        L[pts[:, 1], pts[:, 0]] = label
        seed_mask[pts[:, 1], pts[:, 0]] = True
    # per-run clone of the dynamic potential; the metric's own copy stays intact
    dyn = metric.dynamic_potential.copy()
    return FrontState(grid, ScalarField(grid, U), L, b, 0, dyn, seed_mask)


def run_fast_marching(metric: RandersMetricField, seeds: SeedSets,
                      config: FmmConfig | None = None,
                      progress_out: np.ndarray | None = None) -> FrontState:
    """Propagate fronts from the seed sets until exhaustion or n_th acceptances.

    Full-domain runs finish with a Gauss-Seidel repair pass (unless disabled);
    truncated runs skip it. The returned state owns its dynamic-potential clone.
    """
    if config is None:
        config = FmmConfig()
    if config.mode not in (MODE_FB, MODE_TUBE):
        raise ValueError(f"unknown mode {config.mode!r}")
    state = init_front_state(metric, seeds)
    grid = metric.grid
    n = grid.size
    n_th = n if config.n_th is None else int(config.n_th)
    if n_th < seeds.total():
        raise ValueError("n_th must be at least the number of seed points")
    truncated = n_th < n

    if not config.dynamic_enabled or config.features is None:
        dyn_mode = DYN_OFF
        features = np.zeros(grid.shape + (1,), dtype=np.float64)
    else:
        dyn_mode = DYN_FB if config.mode == MODE_FB else DYN_TUBE
        features = np.ascontiguousarray(config.features, dtype=np.float64)
        if features.ndim == 2:
            features = features[..., None]

    if progress_out is None:
        progress_out = np.zeros(2, dtype=np.int64)
    pending = state.voronoi.copy()
    m11, m12, m22, wx, wy, cs, cd = _metric_arrays(metric, state.dynamic_potential.values)
    t0 = time.perf_counter()
    accepted, pops, relaxations = _run_kernel(
        state.distance.values, state.labels, state.voronoi, pending,
        state.seed_mask, m11, m12, m22, wx, wy, cs, cd,
        features, float(config.beta_d), dyn_mode, n_th, progress_out)
    runtime = time.perf_counter() - t0
    state.accepted_count = int(accepted)
    state.stats = {"runtime_s": runtime, "pops": int(pops),
                   "relaxations": int(relaxations), "n_th": n_th,
                   "truncated": truncated, "repair_sweeps": 0}
    do_repair = config.repair if config.repair is not None else not truncated
    if do_repair:
        if truncated:
            raise ValueError("fixed_point_repair requires a completed full-domain run")
        fixed_point_repair(state, metric, config.max_sweeps, config.repair_tol)
    return state


def fixed_point_repair(state: FrontState, metric: RandersMetricField,
                       max_sweeps=200, tol=1e-10) -> FrontState:
    """Sweep Hopf-Lax updates until U is a fixed point; U never increases.

    Voronoi labels of changed pixels are refreshed with the same lam rule the
    marching loop uses. Only valid after full-domain coverage.
    """
    if not bool(np.all(state.labels == ACCEPTED)):
        raise ValueError("repair needs every pixel Accepted (full-domain run)")
    m11, m12, m22, wx, wy, cs, cd = _metric_arrays(metric, state.dynamic_potential.values)
    t0 = time.perf_counter()
    sweeps, change = _repair_kernel(state.distance.values, state.labels,
                                    state.voronoi, state.seed_mask,
                                    m11, m12, m22, wx, wy, cs, cd,
                                    float(tol), int(max_sweeps))
    state.stats["repair_sweeps"] = int(sweeps)
    state.stats["repair_last_change"] = float(change)
    state.stats["repair_runtime_s"] = time.perf_counter() - t0
    return state


def hopf_lax_residual(state: FrontState, metric: RandersMetricField) -> np.ndarray:
    """|U - hopf_lax_update| at every non-seed pixel of a completed run."""
    res = np.zeros(state.grid.shape, dtype=np.float64)
    h, w = state.grid.shape
    for py in range(h):
        for px in range(w):
            if state.seed_mask[py, px]:
                continue
            res[py, px] = abs(state.distance.values[py, px]
                              - hopf_lax_update((px, py), state, metric))
    return res
