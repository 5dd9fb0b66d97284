"""Data-driven Randers metric assembly, evaluation and diagnostics.

The local cost is F(x,u) = c(x) * (||u||_M(x) - <omega(x), u>) with
  M     = 1/4 (psi_f + psi_b)^2 g (x) g  +  g_perp (x) g_perp,
  omega = 1/2 (psi_b - psi_f) g,
where g is the unit edge-orientation field and c the product of a static and a
dynamic potential. psi_f/psi_b >= 1 keep the drift term subcritical, so F is
positive for every nonzero direction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Grid2D, ScalarField, SpdTensorField, VectorField2, spd_inverse, spd_norm

MODE_FB = "fb"
MODE_TUBE = "tube"


@dataclass
class CostParams:
    alpha_f: float = 2.0
    alpha_b: float = 3.0
    beta_s: float = 10.0
    beta_d: float = 10.0
    sigma: float = 1.0
    epsilon: float = 0.1
    mu: float | str = "auto"  # "auto" resolves to max(psi_f)^2

    def __post_init__(self):
        if self.alpha_f < 0 or self.alpha_b < 0:
            raise ValueError("alpha_f and alpha_b must be nonnegative")
        if self.beta_s <= 0 or self.sigma <= 0 or self.epsilon <= 0:
            raise ValueError("beta_s, sigma, epsilon must be positive")
        if self.beta_d < 0:
            raise ValueError("beta_d must be nonnegative")
        if self.mu != "auto" and float(self.mu) < 0:
            raise ValueError("mu must be nonnegative or 'auto'")


def _normalized(rho_values):
    # rho / max(rho), with the constant-image case defined as 0
    top = float(np.max(np.abs(rho_values)))
    if top == 0.0:
        return np.zeros_like(rho_values)
    return rho_values / top


def cost_functions(rho: ScalarField, alpha_f, alpha_b):
    """psi_f = exp(a_f * rho/|rho|_inf), psi_b = exp(a_b * rho/|rho|_inf) * psi_f."""
    r = _normalized(rho.values)
    psi_f = np.exp(alpha_f * r)
    psi_b = np.exp(alpha_b * r) * psi_f
    return ScalarField(rho.grid, psi_f), ScalarField(rho.grid, psi_b)


def perp(values):
    """Counterclockwise perpendicular of a (..., 2) vector array."""
    out = np.empty_like(values)
    out[..., 0] = -values[..., 1]
    out[..., 1] = values[..., 0]
    return out


def build_tensor(g: VectorField2, psi_f: ScalarField, psi_b: ScalarField) -> SpdTensorField:
    """M = 1/4 (psi_f+psi_b)^2 g(x)g + g_perp(x)g_perp; requires |g| = 1 pixelwise."""
    gx = g.values[..., 0]
    gy = g.values[..., 1]
    lam = 0.25 * (psi_f.values + psi_b.values) ** 2
    vals = np.empty(g.grid.shape + (3,), dtype=np.float64)
    # g_perp (x) g_perp = [[gy^2, -gx gy], [-gx gy, gx^2]]
    vals[..., 0] = lam * gx * gx + gy * gy
    vals[..., 1] = lam * gx * gy - gx * gy
    vals[..., 2] = lam * gy * gy + gx * gx
    return SpdTensorField(g.grid, vals)


def build_omega(g: VectorField2, psi_f: ScalarField, psi_b: ScalarField) -> VectorField2:
    """omega = 1/2 (psi_b - psi_f) g; vanishes wherever psi_f = psi_b."""
    tau = 0.5 * (psi_b.values - psi_f.values)
    return VectorField2(g.grid, tau[..., None] * g.values)


def build_tubular_tensor(m: SpdTensorField, g: VectorField2, mu) -> SpdTensorField:
    """M~ = M + mu * g(x)g, raising the cost of motion across the tube."""
    if mu < 0:
        raise ValueError("mu must be nonnegative")
    gx = g.values[..., 0]
    gy = g.values[..., 1]
    vals = m.values.copy()
    vals[..., 0] += mu * gx * gx
    vals[..., 1] += mu * gx * gy
    vals[..., 2] += mu * gy * gy
    return SpdTensorField(m.grid, vals)


def resolve_mu(mu, psi_f: ScalarField):
    return float(np.max(psi_f.values)) ** 2 if mu == "auto" else float(mu)


def static_potential(mode, feature: ScalarField, beta_s) -> ScalarField:
    """FB: exp(beta_s * rho/|rho|_inf). Tube: exp(beta_s * (|zeta|_inf - zeta))."""
    if beta_s <= 0:
        raise ValueError("beta_s must be positive")
    if mode == MODE_FB:
        vals = np.exp(beta_s * _normalized(feature.values))
    elif mode == MODE_TUBE:
        z = feature.values
        if z.min() < -1e-12 or z.max() > 1.0 + 1e-12:
            raise ValueError("tubularity map zeta must lie in [0,1]")
        vals = np.exp(beta_s * (float(z.max()) - z))
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return ScalarField(feature.grid, vals)


@dataclass
class RandersMetricField:
    """Bundle (M, omega, static potential, dynamic potential) defining F."""

    m: SpdTensorField
    omega: VectorField2
    static_potential: ScalarField
    dynamic_potential: ScalarField = None
    mode: str = MODE_FB

    def __post_init__(self):
        if self.dynamic_potential is None:
            self.dynamic_potential = ScalarField.full(self.grid, 1.0)
        if np.any(self.static_potential.values <= 0):
            raise ValueError("static potential must be strictly positive")
        if np.any(self.dynamic_potential.values <= 0):
            raise ValueError("dynamic potential must be strictly positive")

    @property
    def grid(self) -> Grid2D:
        return self.m.grid

    def potential(self):
        """Effective scalar factor c = static * dynamic."""
        return self.static_potential.values * self.dynamic_potential.values

    @classmethod
    def isotropic(cls, grid, potential=None, mode=MODE_FB):
        pot = ScalarField.full(grid, 1.0) if potential is None else potential
        return cls(SpdTensorField.identity(grid), VectorField2.zeros(grid), pot, mode=mode)

    @classmethod
    def constant(cls, grid, psi_f, psi_b, angle, potential=1.0, mode=MODE_FB):
        """Constant-coefficient field with g at the given angle (radians)."""
        g = VectorField2(grid, np.broadcast_to(
            np.array([np.cos(angle), np.sin(angle)]), grid.shape + (2,)).copy())
        pf = ScalarField.full(grid, psi_f)
        pb = ScalarField.full(grid, psi_b)
        return cls(build_tensor(g, pf, pb), build_omega(g, pf, pb),
                   ScalarField.full(grid, potential), mode=mode)


def eval_metric_grid(metric: RandersMetricField, u):
    """F(x, u(x)) for a per-pixel direction array u of shape (h, w, 2) or (2,)."""
    u = np.asarray(u, dtype=np.float64)
    if u.shape == (2,):
        u = np.broadcast_to(u, metric.grid.shape + (2,))
    drift = metric.omega.values[..., 0] * u[..., 0] + metric.omega.values[..., 1] * u[..., 1]
    return metric.potential() * (spd_norm(metric.m.values, u) - drift)


def eval_metric(metric: RandersMetricField, x, u):
    """Local cost F(x, u) at a pixel x = (col, row); 1-homogeneous in u."""
    ux, uy = float(u[0]), float(u[1])
    if ux == 0.0 and uy == 0.0:
        raise ValueError("direction u must be nonzero")
    col, row = x
    m = metric.m.values[row, col]
    w = metric.omega.values[row, col]
    c = metric.static_potential.values[row, col] * metric.dynamic_potential.values[row, col]
    q = m[0] * ux * ux + 2.0 * m[1] * ux * uy + m[2] * uy * uy
    return c * (np.sqrt(q) - (w[0] * ux + w[1] * uy))


@dataclass
class PositivityReport:
    max_ratio: float
    passed: bool
    closed_form_max: float = None
    max_gap: float = None  # |quadratic form - closed form|, when comparable


def positivity_check(metric: RandersMetricField, psi_f: ScalarField = None,
                     psi_b: ScalarField = None) -> PositivityReport:
    """Max over pixels of ||omega||_{M^-1}, checked against 1.

    When the generating cost functions are supplied, the closed form
    (psi_b - psi_f)/(psi_b + psi_f) is evaluated as well and must agree with
    the quadratic-form value pixelwise.
    """
    minv = spd_inverse(metric.m.values)
    ratio = spd_norm(minv, metric.omega.values)
    report = PositivityReport(float(ratio.max()), bool(ratio.max() < 1.0))
    if psi_f is not None and psi_b is not None:
        closed = (psi_b.values - psi_f.values) / (psi_b.values + psi_f.values)
        report.closed_form_max = float(closed.max())
        report.max_gap = float(np.max(np.abs(ratio - closed)))
    return report


def _dir_costs(metric, angles, chunk=64):
    """Cost array (h, w, len(angles)) for unit directions, row-chunked."""
    ca = np.cos(angles)
    sa = np.sin(angles)
    h, w = metric.grid.shape
    out = np.empty((h, w, angles.size), dtype=np.float64)
    mv = metric.m.values
    wv = metric.omega.values
    pot = metric.potential()
    for r0 in range(0, h, chunk):
        r1 = min(r0 + chunk, h)
        m11 = mv[r0:r1, :, 0, None]
        m12 = mv[r0:r1, :, 1, None]
        m22 = mv[r0:r1, :, 2, None]
        q = m11 * ca * ca + 2.0 * m12 * ca * sa + m22 * sa * sa
        drift = wv[r0:r1, :, 0, None] * ca + wv[r0:r1, :, 1, None] * sa
        out[r0:r1] = pot[r0:r1, :, None] * (np.sqrt(np.maximum(q, 0.0)) - drift)
    return out


def _newton_refine(metric, px, py, theta0, step=1e-4):
    """One Newton step on theta -> F(x, (cos,sin)); falls back to theta0."""
    def f(t):
        return eval_metric(metric, (px, py), (np.cos(t), np.sin(t)))

    f0 = f(theta0)
    d1 = (f(theta0 + step) - f(theta0 - step)) / (2.0 * step)
    d2 = (f(theta0 + step) - 2.0 * f0 + f(theta0 - step)) / (step * step)
    if d2 == 0.0 or not np.isfinite(d2):
        return theta0, f0
    t = theta0 - d1 / d2
    # refinement only trusted inside the sampling cell
    if abs(t - theta0) > np.pi / 180.0:
        return theta0, f0
    return t, f(t)


def anisotropy_ratio(metric: RandersMetricField) -> float:
    """kappa = max over pixels of max_u F(x,u) / min_v F(x,v) over unit u, v.

    Dense pi/180 angular sampling with one Newton refinement of both extrema
    at the worst pixel; equals 1 for isotropic fields.
    """
    angles = np.arange(360) * (np.pi / 180.0)
    costs = _dir_costs(metric, angles)
    ratios = costs.max(axis=-1) / costs.min(axis=-1)
    row, col = np.unravel_index(np.argmax(ratios), ratios.shape)
    here = costs[row, col]
    _, top = _newton_refine(metric, col, row, angles[int(np.argmax(here))])
    _, bot = _newton_refine(metric, col, row, angles[int(np.argmin(here))])
    top = max(top, float(here.max()))
    bot = min(bot, float(here.min()))
    return float(top / bot)


def control_set(metric: RandersMetricField, x, n_samples=64):
    """Tissot control-set boundary at pixel x: points u_j / F(x, u_j).

    Returns a closed polygon (n_samples, 2); every vertex satisfies F = 1 by
    1-homogeneity of the metric.
    """
    if n_samples < 8:
        raise ValueError("n_samples must be at least 8")
    angles = 2.0 * np.pi * np.arange(n_samples) / n_samples
    pts = np.empty((n_samples, 2), dtype=np.float64)
    for j, t in enumerate(angles):
        u = (np.cos(t), np.sin(t))
        f = eval_metric(metric, x, u)
        pts[j, 0] = u[0] / f
        pts[j, 1] = u[1] / f
    return pts


def directional_costs(metric: RandersMetricField, x, base_dir=None, n=72):
    """Cost profile along rotated directions u_j = R(j * 2pi/n) g(x), j = 1..n.

    Returns a list of (angle, cost, ball_point) records; the default base
    direction is g(x) recovered from omega, falling back to (1, 0).
    """
    col, row = x
    if base_dir is None:
        w = metric.omega.values[row, col]
        nw = float(np.hypot(w[0], w[1]))
        base_dir = (w[0] / nw, w[1] / nw) if nw > 1e-12 else (1.0, 0.0)
    base = np.arctan2(base_dir[1], base_dir[0])
    recs = []
    for j in range(1, n + 1):
        t = base + 2.0 * np.pi * j / n
        u = (np.cos(t), np.sin(t))
        f = eval_metric(metric, x, u)
        recs.append({"angle": float(2.0 * np.pi * j / n), "cost": float(f),
                     "ball_point": [float(u[0] / f), float(u[1] / f)]})
    return recs
