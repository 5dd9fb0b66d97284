import numpy as np
import pytest

from frontprop.fixtures import smooth_random_metric
from frontprop.grid import Grid2D, ScalarField, VectorField2, spd_inverse, spd_norm
from frontprop.metric import (CostParams, MODE_FB, MODE_TUBE,
                              RandersMetricField, anisotropy_ratio,
                              build_omega, build_tensor, build_tubular_tensor,
                              control_set, cost_functions, directional_costs,
                              eval_metric, eval_metric_grid, perp,
                              positivity_check, resolve_mu, static_potential)
from oracles import dense_angle_extrema

G45 = (np.sqrt(2) / 2, np.sqrt(2) / 2)
OMEGA_COMPONENT = 1.7677669529663689  # 0.5 * (8-3) * sqrt(2)/2


def _flat_rho(grid, value=1.0):
    return ScalarField.full(grid, value)


def _const_g(grid, angle=np.pi / 4):
    vec = np.array([np.cos(angle), np.sin(angle)])
    return VectorField2(grid, np.broadcast_to(vec, grid.shape + (2,)).copy())


def test_cost_functions_zero_rho():
    g = Grid2D(4, 4)
    pf, pb = cost_functions(ScalarField.full(g, 0.0), 2.0, 3.0)
    assert np.all(pf.values == 1.0) and np.all(pb.values == 1.0)


def test_cost_functions_at_max_rho():
    g = Grid2D(4, 4)
    rho = ScalarField.full(g, 0.7)  # rho == |rho|_inf everywhere
    pf, pb = cost_functions(rho, 2.0, 3.0)
    assert np.allclose(pf.values, np.exp(2.0))
    assert np.allclose(pb.values, np.exp(5.0))


def test_cost_functions_symmetric_when_alpha_b_zero(rng):
    g = Grid2D(6, 6)
    rho = ScalarField(g, rng.rand(6, 6))
    pf, pb = cost_functions(rho, 2.0, 0.0)
    assert np.array_equal(pf.values, pb.values)


def test_build_tensor_identity_for_unit_costs():
    g = Grid2D(3, 3)
    gv = _const_g(g)
    m = build_tensor(gv, _flat_rho(g), _flat_rho(g))
    assert np.allclose(m.values[..., 0], 1.0, atol=1e-12)
    assert np.allclose(m.values[..., 1], 0.0, atol=1e-12)
    assert np.allclose(m.values[..., 2], 1.0, atol=1e-12)


def test_build_tensor_fig4_values():
    g = Grid2D(3, 3)
    m = build_tensor(_const_g(g), _flat_rho(g, 3.0), _flat_rho(g, 8.0))
    assert np.allclose(m.values[..., 0], 15.625, atol=1e-10)
    assert np.allclose(m.values[..., 1], 14.625, atol=1e-10)
    assert np.allclose(m.values[..., 2], 15.625, atol=1e-10)


def test_build_tensor_spectral_structure(rng):
    g = Grid2D(5, 5)
    angle = rng.rand() * 2 * np.pi
    gv = _const_g(g, angle)
    pf = ScalarField(g, rng.rand(5, 5) + 1.0)
    pb = ScalarField(g, pf.values + rng.rand(5, 5))
    m = build_tensor(gv, pf, pb)
    lam = 0.25 * (pf.values + pb.values) ** 2
    gvec = gv.values
    mg_x = m.values[..., 0] * gvec[..., 0] + m.values[..., 1] * gvec[..., 1]
    mg_y = m.values[..., 1] * gvec[..., 0] + m.values[..., 2] * gvec[..., 1]
    assert np.max(np.abs(mg_x - lam * gvec[..., 0])) < 1e-10
    assert np.max(np.abs(mg_y - lam * gvec[..., 1])) < 1e-10
    # unit eigenvalue along g-perp, exactly
    p = perp(gvec)
    mp_x = m.values[..., 0] * p[..., 0] + m.values[..., 1] * p[..., 1]
    mp_y = m.values[..., 1] * p[..., 0] + m.values[..., 2] * p[..., 1]
    assert np.max(np.abs(mp_x - p[..., 0])) < 1e-12
    assert np.max(np.abs(mp_y - p[..., 1])) < 1e-12


def test_build_omega_vanishes_when_symmetric():
    g = Grid2D(3, 3)
    om = build_omega(_const_g(g), _flat_rho(g, 2.0), _flat_rho(g, 2.0))
    assert np.all(om.values == 0.0)


def test_build_omega_fig4_value():
    g = Grid2D(3, 3)
    om = build_omega(_const_g(g), _flat_rho(g, 3.0), _flat_rho(g, 8.0))
    assert np.allclose(om.values, OMEGA_COMPONENT, atol=1e-12)


def test_positivity_ratio_closed_form():
    g = Grid2D(3, 3)
    m = build_tensor(_const_g(g), _flat_rho(g, 3.0), _flat_rho(g, 8.0))
    om = build_omega(_const_g(g), _flat_rho(g, 3.0), _flat_rho(g, 8.0))
    ratio = spd_norm(spd_inverse(m.values), om.values)
    assert np.allclose(ratio, 5.0 / 11.0, atol=1e-9)


def test_build_tubular_tensor_mu_zero_noop():
    g = Grid2D(3, 3)
    m = build_tensor(_const_g(g), _flat_rho(g, 2.0), _flat_rho(g, 3.0))
    mt = build_tubular_tensor(m, _const_g(g), 0.0)
    assert np.array_equal(m.values, mt.values)


def test_build_tubular_tensor_axis_aligned():
    g = Grid2D(3, 3)
    gv = _const_g(g, 0.0)
    m = build_tensor(gv, _flat_rho(g), _flat_rho(g))
    mt = build_tubular_tensor(m, gv, 4.0)
    assert np.allclose(mt.values[..., 0], 5.0)
    assert np.allclose(mt.values[..., 1], 0.0)
    assert np.allclose(mt.values[..., 2], 1.0)


def test_tubular_tensor_preserves_positivity(rng):
    for _ in range(10):
        g = Grid2D(6, 6)
        angle = rng.rand() * 2 * np.pi
        gv = _const_g(g, angle)
        rho = ScalarField(g, rng.rand(6, 6))
        pf, pb = cost_functions(rho, rng.rand() * 3, rng.rand() * 3)
        m = build_tensor(gv, pf, pb)
        om = build_omega(gv, pf, pb)
        mt = build_tubular_tensor(m, gv, rng.rand() * 20)
        base = spd_norm(spd_inverse(m.values), om.values)
        enhanced = spd_norm(spd_inverse(mt.values), om.values)
        assert np.all(enhanced <= base + 1e-12)
        assert np.all(enhanced < 1.0)


def test_resolve_mu_auto():
    g = Grid2D(3, 3)
    pf = ScalarField(g, np.array([[1, 2, 3], [1, 1, 1], [1, 1, 1.0]]))
    assert resolve_mu("auto", pf) == 9.0
    assert resolve_mu(2.5, pf) == 2.5


def _fig4_metric(grid):
    return RandersMetricField.constant(grid, 3.0, 8.0, np.pi / 4)


def test_eval_metric_construction_identities():
    metric = _fig4_metric(Grid2D(4, 4))
    assert eval_metric(metric, (1, 1), G45) == pytest.approx(3.0, abs=1e-9)
    assert eval_metric(metric, (1, 1), (-G45[0], -G45[1])) == pytest.approx(8.0, abs=1e-9)
    assert eval_metric(metric, (1, 1), (-G45[1], G45[0])) == pytest.approx(1.0, abs=1e-9)


def test_eval_metric_homogeneity_exact():
    metric = _fig4_metric(Grid2D(4, 4))
    u = (0.3, -1.7)
    assert eval_metric(metric, (2, 2), (2 * u[0], 2 * u[1])) == 2 * eval_metric(metric, (2, 2), u)


def test_eval_metric_isotropic_case():
    metric = RandersMetricField.isotropic(Grid2D(4, 4))
    for ang in (0.1, 1.0, 2.5):
        u = (np.cos(ang), np.sin(ang))
        assert eval_metric(metric, (1, 2), u) == pytest.approx(1.0, abs=1e-12)


def test_eval_metric_rejects_zero_direction():
    metric = RandersMetricField.isotropic(Grid2D(4, 4))
    with pytest.raises(ValueError):
        eval_metric(metric, (0, 0), (0.0, 0.0))


def test_leak_resistance_ordering():
    # F(g_perp) < F(g) < F(-g) wherever psi_b > psi_f > 1
    metric = _fig4_metric(Grid2D(4, 4))
    f_perp = eval_metric(metric, (1, 1), (-G45[1], G45[0]))
    f_fwd = eval_metric(metric, (1, 1), G45)
    f_bwd = eval_metric(metric, (1, 1), (-G45[0], -G45[1]))
    assert f_perp < f_fwd < f_bwd


def test_positivity_check_report(rng):
    g = Grid2D(8, 8)
    rho = ScalarField(g, rng.rand(8, 8))
    for alpha in [(0.0, 0.0), (2.0, 3.0), (1.0, 0.5), (3.0, 2.0)]:
        pf, pb = cost_functions(rho, *alpha)
        gv = _const_g(g, rng.rand() * np.pi)
        metric = RandersMetricField(build_tensor(gv, pf, pb),
                                    build_omega(gv, pf, pb),
                                    ScalarField.full(g, 1.0))
        report = positivity_check(metric, pf, pb)
        assert report.passed and report.max_ratio < 1.0
        assert report.max_gap < 1e-9


def test_positivity_check_symmetric_zero():
    g = Grid2D(4, 4)
    metric = RandersMetricField.constant(g, 2.0, 2.0, 0.3)
    report = positivity_check(metric)
    assert report.max_ratio == pytest.approx(0.0, abs=1e-15)


def test_anisotropy_ratio_isotropic():
    metric = RandersMetricField.isotropic(Grid2D(8, 8))
    assert anisotropy_ratio(metric) == pytest.approx(1.0, abs=1e-9)


def test_anisotropy_ratio_vs_dense_oracle():
    metric = _fig4_metric(Grid2D(4, 4))
    kappa = anisotropy_ratio(metric)
    top, bot = dense_angle_extrema(metric, (1, 1), n=100000)
    assert kappa == pytest.approx(top / bot, rel=1e-4)


def test_anisotropy_ratio_invariant_to_potential_scale():
    g = Grid2D(6, 6)
    m1 = RandersMetricField.constant(g, 3.0, 8.0, np.pi / 4, potential=1.0)
    m2 = RandersMetricField.constant(g, 3.0, 8.0, np.pi / 4, potential=17.5)
    assert anisotropy_ratio(m1) == pytest.approx(anisotropy_ratio(m2), rel=1e-12)


def test_control_set_isotropic_circle():
    metric = RandersMetricField.isotropic(Grid2D(4, 4))
    poly = control_set(metric, (1, 1), 32)
    radii = np.hypot(poly[:, 0], poly[:, 1])
    assert np.allclose(radii, 1.0, atol=1e-12)


def test_control_set_boundary_on_unit_level():
    # every returned point satisfies F(x, b) = 1 within 1e-9
    for psi_b in (5.0, 6.0, 8.0, 10.0):
        metric = RandersMetricField.constant(Grid2D(4, 4), 5.0, psi_b, np.pi / 4)
        poly = control_set(metric, (2, 2), 64)
        for b in poly:
            assert eval_metric(metric, (2, 2), b) == pytest.approx(1.0, abs=1e-9)


def test_control_set_off_center_for_asymmetric():
    metric = RandersMetricField.constant(Grid2D(4, 4), 5.0, 9.0, np.pi / 4)
    poly = control_set(metric, (2, 2), 256)
    center = poly.mean(axis=0)
    # origin strictly inside (radius to boundary positive in all directions)
    assert np.min(np.hypot(poly[:, 0], poly[:, 1])) > 0.0
    # but shifted away from the ellipse center
    assert np.hypot(center[0], center[1]) > 1e-3


def test_control_set_symmetric_is_centered():
    metric = RandersMetricField.constant(Grid2D(4, 4), 5.0, 5.0, np.pi / 4)
    n = 64
    poly = control_set(metric, (2, 2), n)
    assert np.allclose(poly, -np.roll(poly, n // 2, axis=0), atol=1e-9)


def test_control_set_minimum_samples():
    metric = RandersMetricField.isotropic(Grid2D(4, 4))
    with pytest.raises(ValueError):
        control_set(metric, (1, 1), 4)


def test_static_potential_fb():
    g = Grid2D(4, 4)
    rho = ScalarField(g, np.array([[0, 0, 0, 0]] * 3 + [[0.5, 0.5, 0.5, 0.5]], dtype=float))
    pot = static_potential(MODE_FB, rho, 10.0)
    assert pot.values[0, 0] == pytest.approx(1.0)
    assert pot.values[3, 0] == pytest.approx(np.exp(10.0))


def test_static_potential_tube():
    g = Grid2D(4, 4)
    zeta = ScalarField(g, np.array([[0.9, 0.9, 0.9, 0.9]] * 3 + [[0.0, 0.0, 0.0, 0.0]]))
    pot = static_potential(MODE_TUBE, zeta, 10.0)
    assert pot.values[0, 0] == pytest.approx(1.0)  # minimal where zeta attains max
    assert pot.values[3, 0] == pytest.approx(np.exp(9.0))


def test_argmin_directions_invariant_to_potential_scale():
    g = Grid2D(4, 4)
    recs1 = directional_costs(RandersMetricField.constant(g, 3.0, 8.0, 0.61), (1, 1))
    recs2 = directional_costs(RandersMetricField.constant(g, 3.0, 8.0, 0.61, potential=7.0), (1, 1))
    c1 = np.array([r["cost"] for r in recs1])
    c2 = np.array([r["cost"] for r in recs2])
    assert np.argmin(c1) == np.argmin(c2)
    assert np.argmax(c1) == np.argmax(c2)
    assert np.allclose(c2, 7.0 * c1, rtol=1e-12)


def test_eval_metric_grid_matches_pointwise(rng):
    metric = smooth_random_metric(9, size=12)
    u = rng.randn(12, 12, 2)
    grid_vals = eval_metric_grid(metric, u)
    for _ in range(20):
        x, y = rng.randint(0, 12, 2)
        assert grid_vals[y, x] == pytest.approx(
            eval_metric(metric, (x, y), u[y, x]), rel=1e-12)


def test_cost_params_validation():
    with pytest.raises(ValueError):
        CostParams(alpha_f=-1.0)
    with pytest.raises(ValueError):
        CostParams(beta_s=0.0)
    with pytest.raises(ValueError):
        CostParams(mu=-2.0)
